#include "geogauss/cli.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "geogauss/density.hpp"
#include "geogauss/diffeo.hpp"
#include "geogauss/errors.hpp"
#include "geogauss/infogeo.hpp"
#include "geogauss/io.hpp"
#include "geogauss/laplace.hpp"
#include "geogauss/parallel.hpp"
#include "geogauss/random.hpp"
#include "geogauss/riemann.hpp"
#include "geogauss/rosenblatt.hpp"
#include "geogauss/spec_io.hpp"
#include "geogauss/validate.hpp"

namespace geogauss::cli {

namespace {

using json = nlohmann::json;

struct Common {
  std::uint64_t seed = 0;
  std::string out;
  std::string report;
  std::string config;
};

struct Options {
  Common common;
  std::string density;
  std::string diffeo;
  std::string x0;
  double tol = 1e-8;
  int max_iter = 200;
  int samples = 0;
  int dim_cap = 3;
  double alpha = 0.01;
  double allowance = 5e-3;
  std::string base_cov;
  int n = 0;
  int steps = 1000;
  std::string thetas;
  std::string mu_grid = "-2:2:9";
  std::string sigma_grid = "0.5:2:7";
  std::string samples_path;
};

/// Inline JSON when the argument starts with '{' or '[', otherwise a path.
json load_json_arg(const std::string& arg, const std::string& field) {
  const auto first = arg.find_first_not_of(" \t\n");
  if (first != std::string::npos && (arg[first] == '{' || arg[first] == '[')) {
    try {
      return json::parse(arg);
    } catch (const json::parse_error& e) {
      throw ConfigError(field, std::string("invalid JSON: ") + e.what());
    }
  }
  try {
    return read_json(arg);
  } catch (const ConfigError& e) {
    throw ConfigError(field, e.what());
  } catch (const Error& e) {
    throw ConfigError(field, e.what());
  }
}

Density load_density(const std::string& arg) {
  try {
    return density_from_json(load_json_arg(arg, "density"));
  } catch (const ConfigError& e) {
    if (e.field().rfind("density", 0) == 0) throw;
    throw ConfigError("density." + e.field(), e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError("density", e.what());
  }
}

Diffeomorphism load_diffeo(const std::string& arg) {
  try {
    return diffeo_from_json(load_json_arg(arg, "diffeo"));
  } catch (const InvalidArgument& e) {
    throw ConfigError("diffeo", e.what());
  }
}

Vector start_point(const std::string& text, int dim) {
  if (text.empty()) return Vector::Zero(dim);
  const std::vector<double> v = parse_number_list(text, "x0");
  if (static_cast<int>(v.size()) != dim) {
    throw ConfigError("x0", "expected " + std::to_string(dim) + " coordinates, got " + std::to_string(v.size()));
  }
  return Eigen::Map<const Vector>(v.data(), dim);
}

void require_positive(int value, const char* field) {
  if (value < 1) throw ConfigError(field, "must be a positive integer");
}

void emit_report(const Common& c, const json& report, bool out_is_report) {
  if (out_is_report && !c.out.empty()) write_json(c.out, report);
  if (!c.report.empty()) write_json(c.report, report);
}

std::string vector_text(const VectorRef& v) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
  return s + "]";
}

// ------------------------------------------------------------ subcommands

int cmd_laplace(const Options& o, std::ostream& out) {
  const Density target = load_density(o.density);
  const Vector x0 = start_point(o.x0, target.dim());
  const LaplaceResult res = laplace_approx(target, x0, o.tol, o.max_iter);
  json report = {{"command", "laplace"},
                 {"density", target.spec()},
                 {"x0", vector_to_json(x0)},
                 {"seed", o.common.seed},
                 {"mode", vector_to_json(res.mode)},
                 {"covariance", res.approx ? matrix_to_json(res.approx->cov()) : json()},
                 {"neg_log_hessian", matrix_to_json(res.neg_log_hessian)},
                 {"iterations", res.iterations},
                 {"grad_inf_norm", res.grad_inf_norm},
                 {"converged", res.converged}};
  emit_report(o.common, report, true);
  out << "laplace: " << (res.converged ? "converged" : "did not converge") << " after " << res.iterations
      << " iterations, mode " << vector_text(res.mode) << "\n";
  return res.converged ? kExitOk : kExitFailed;
}

int cmd_reparam_laplace(const Options& o, std::ostream& out) {
  const Density target = load_density(o.density);
  const Diffeomorphism map = load_diffeo(o.diffeo);
  if (map.dim() != target.dim()) throw ConfigError("diffeo", "dimension does not match the density");
  const Vector x0 = start_point(o.x0, target.dim());
  const ReparamLaplaceResult res = reparam_laplace(target, map, x0, o.tol, o.max_iter);
  const LaplaceResult& lat = res.latent;
  json report = {{"command", "reparam-laplace"},
                 {"density", target.spec()},
                 {"diffeo", map.spec()},
                 {"x0", vector_to_json(x0)},
                 {"seed", o.common.seed},
                 {"latent_mode", vector_to_json(lat.mode)},
                 {"latent_covariance", lat.approx ? matrix_to_json(lat.approx->cov()) : json()},
                 {"mode_image", vector_to_json(map.forward(lat.mode))},
                 {"iterations", lat.iterations},
                 {"grad_inf_norm", lat.grad_inf_norm},
                 {"converged", lat.converged}};
  if (!o.common.out.empty() && res.approx) {
    const int n = o.samples > 0 ? o.samples : 1000;
    write_text(o.common.out, csv_string(sample(*res.approx, n, o.common.seed)));
    report["samples"] = n;
  }
  emit_report(o.common, report, false);
  out << "reparam-laplace: " << (lat.converged ? "converged" : "did not converge") << " after "
      << lat.iterations << " iterations, latent mode " << vector_text(lat.mode) << "\n";
  return lat.converged ? kExitOk : kExitFailed;
}

int cmd_rosenblatt(const Options& o, std::ostream& out) {
  const Density target = load_density(o.density);
  require_positive(o.samples, "samples");
  RosenblattSettings settings;
  settings.dim_cap = o.dim_cap;
  auto rmap = std::make_shared<RosenblattMap>(target, settings);
  const Diffeomorphism phi = build_universal_map(rmap);
  const int d = target.dim();
  const int n = o.samples;
  const Gaussian base = Gaussian::standard(d);
  const Matrix pushed = sample(ReparamGA(phi, base), n, o.common.seed);

  std::vector<double> displacement(static_cast<std::size_t>(n));
  parallel_for(displacement.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      CounterRng rng(o.common.seed, r);
      const Vector z = base.draw(rng);
      displacement[r] = (pushed.row(static_cast<Eigen::Index>(r)).transpose() - z).cwiseAbs().maxCoeff();
    }
  });

  // Exact target draws through the tabulated conditional CDFs; each axis
  // must look Uniform(0, 1).
  json ks = json::array();
  bool pass = true;
  if (target.has_sampler()) {
    const std::uint64_t ks_seed = derive_seed(o.common.seed, 1);
    Matrix u(n, d);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t begin, std::size_t end) {
      for (std::size_t r = begin; r < end; ++r) {
        CounterRng rng(ks_seed, r);
        u.row(static_cast<Eigen::Index>(r)) = rmap->to_uniform(target.draw(rng)).transpose();
      }
    });
    for (int k = 0; k < d; ++k) {
      const std::vector<double> col(u.col(k).data(), u.col(k).data() + n);
      const KSReport rep = ks_uniform(col, o.alpha, o.allowance);
      pass = pass && rep.pass;
      json entry = rep;
      entry["axis"] = rmap->order()[static_cast<std::size_t>(k)];
      ks.push_back(entry);
    }
  }
  const RosenblattDiagnostics diag = rmap->diagnostics();
  json report = {{"command", "rosenblatt"},
                 {"density", target.spec()},
                 {"dim", d},
                 {"order", rmap->order()},
                 {"samples", n},
                 {"seed", o.common.seed},
                 {"ks", target.has_sampler() ? ks : json()},
                 {"max_displacement", *std::max_element(displacement.begin(), displacement.end())},
                 {"quadrature",
                  {{"tables_built", diag.tables_built},
                   {"density_evaluations", diag.density_evaluations},
                   {"max_quad_error", diag.max_quad_error},
                   {"max_interp_error", diag.max_interp_error},
                   {"max_nodes", diag.max_nodes}}},
                 {"pass", pass}};
  if (!o.common.out.empty()) write_text(o.common.out, csv_string(pushed));
  emit_report(o.common, report, false);
  out << "rosenblatt: " << n << " samples in " << d << "D, per-axis KS " << (pass ? "pass" : "FAIL") << "\n";
  return pass ? kExitOk : kExitFailed;
}

int cmd_riemann_check(const Options& o, std::ostream& out) {
  const Diffeomorphism map = load_diffeo(o.diffeo);
  const Gaussian base = [&] {
    try {
      return gaussian_from_json(load_json_arg(o.base_cov, "base-cov"));
    } catch (const ConfigError& e) {
      throw ConfigError("base-cov", e.what());
    } catch (const InvalidArgument& e) {
      throw ConfigError("base-cov", e.what());
    }
  }();
  if (base.dim() != map.dim()) throw ConfigError("base-cov", "dimension does not match the diffeomorphism");
  const int n = o.n > 0 ? o.n : 100;
  require_positive(o.steps, "steps");

  const ReparamGA ga(map, base);
  const RiemannGA rga = riemann_ga_from_reparam(ga);
  const Matrix reparam = sample(ga, n, o.common.seed);
  const Matrix closed = riemann_ga_sample(rga, n, o.common.seed, ExpIntegrator::closed);
  const Matrix ode = riemann_ga_sample(rga, n, o.common.seed, ExpIntegrator::ode, o.steps);
  const Matrix round_trip = sample(reparam_from_riemann(rga), n, o.common.seed);

  double exp_dev = 0.0;
  for (int r = 0; r < n; ++r) {
    exp_dev = std::max(exp_dev, (ode.row(r) - closed.row(r)).norm() / (1.0 + closed.row(r).norm()));
  }
  const double closed_dev = (closed - reparam).cwiseAbs().maxCoeff();
  const double ode_dev = (ode - reparam).cwiseAbs().maxCoeff();
  const double trip_dev = (round_trip - reparam).cwiseAbs().maxCoeff();
  const bool pass = exp_dev < 1e-4 && closed_dev < 1e-6 && ode_dev < 1e-3 && trip_dev < 1e-6;

  json report = {{"command", "riemann-check"},
                 {"diffeo", map.spec()},
                 {"base_mean", vector_to_json(base.mean())},
                 {"base_cov", matrix_to_json(base.cov())},
                 {"n", n},
                 {"steps", o.steps},
                 {"seed", o.common.seed},
                 {"max_exp_deviation", exp_dev},
                 {"closed_sample_deviation", closed_dev},
                 {"ode_sample_deviation", ode_dev},
                 {"round_trip_deviation", trip_dev},
                 {"pass", pass}};
  emit_report(o.common, report, true);
  out << "riemann-check: max ODE vs closed deviation " << format_double(exp_dev) << ", shared-seed deviation "
      << format_double(closed_dev) << " (closed) / " << format_double(ode_dev) << " (ode), "
      << (pass ? "pass" : "FAIL") << "\n";
  return pass ? kExitOk : kExitFailed;
}

std::vector<Vector> load_thetas(const std::string& arg) {
  if (arg.empty()) {
    std::vector<Vector> thetas(3, Vector(2));
    thetas[0] << 0.0, 1.0;
    thetas[1] << 1.0, 0.5;
    thetas[2] << -2.0, 2.0;
    return thetas;
  }
  json j = load_json_arg(arg, "thetas");
  if (j.is_object() && j.contains("thetas")) j = j["thetas"];
  if (!j.is_array() || j.empty()) throw ConfigError("thetas", "expected a non-empty array of [mu, sigma] pairs");
  std::vector<Vector> thetas;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string field = "thetas[" + std::to_string(i) + "]";
    Vector t = vector_from_json(j[i], field);
    if (t.size() != 2 || !(t[1] > 0.0)) throw ConfigError(field, "expected [mu, sigma] with sigma > 0");
    thetas.push_back(std::move(t));
  }
  return thetas;
}

int cmd_fisher(const Options& o, std::ostream& out) {
  const Diffeomorphism map = load_diffeo(o.diffeo);
  if (map.dim() != 1) throw ConfigError("diffeo", "fisher needs a one-dimensional diffeomorphism");
  const std::vector<Vector> thetas = load_thetas(o.thetas);
  const int n = o.n > 0 ? o.n : 200000;
  const ChentsovReport rep = chentsov_check(map, thetas, n, o.common.seed);
  json report = rep;
  report["command"] = "fisher";
  report["diffeo"] = map.spec();
  report["n"] = n;
  report["seed"] = o.common.seed;
  emit_report(o.common, report, true);
  out << "fisher: " << thetas.size() << " parameters, max relative deviation "
      << format_double(rep.max_rel_deviation) << ", " << (rep.consistent ? "consistent" : "INCONSISTENT") << "\n";
  return rep.consistent ? kExitOk : kExitFailed;
}

int cmd_figure2(const Options& o, std::ostream& out) {
  const std::vector<double> mus = parse_number_list(o.mu_grid, "mu-grid");
  const std::vector<double> sigmas = parse_number_list(o.sigma_grid, "sigma-grid");
  if (mus.empty()) throw ConfigError("mu-grid", "empty grid");
  if (sigmas.empty()) throw ConfigError("sigma-grid", "empty grid");
  for (double s : sigmas)
    if (!(s > 0.0)) throw ConfigError("sigma-grid", "sigma must be positive");
  Matrix rows(static_cast<Eigen::Index>(mus.size() * sigmas.size()), 5);
  double residual = 0.0;
  Eigen::Index r = 0;
  for (double mu : mus) {
    for (double sigma : sigmas) {
      const auto [x, y, z] = hyperboloid_embed(mu, sigma);
      rows.row(r++) << x, y, z, mu, sigma;
      residual = std::max(residual, std::abs(z * z - x * x - y * y - 1.0));
    }
  }
  const bool pass = residual < 1e-10;
  if (!o.common.out.empty()) write_text(o.common.out, csv_string(rows, {"x", "y", "z", "mu", "sigma"}));
  json report = {{"command", "figure2"},
                 {"points", rows.rows()},
                 {"max_residual", residual},
                 {"seed", o.common.seed},
                 {"pass", pass}};
  emit_report(o.common, report, false);
  out << "figure2: " << rows.rows() << " points, max |z^2 - x^2 - y^2 - 1| = " << format_double(residual) << "\n";
  return pass ? kExitOk : kExitFailed;
}

int cmd_validate(const Options& o, std::ostream& out) {
  const Density target = load_density(o.density);
  CsvTable table;
  try {
    table = read_csv(o.samples_path);
  } catch (const Error& e) {
    throw ConfigError("samples", e.what());
  }
  if (table.rows.cols() != target.dim()) {
    throw ConfigError("samples", "CSV has " + std::to_string(table.rows.cols()) + " columns, density has dimension " +
                                     std::to_string(target.dim()));
  }
  const auto n = table.rows.rows();
  if (n < 10) throw ConfigError("samples", "need at least 10 rows");
  RosenblattSettings settings;
  settings.dim_cap = o.dim_cap;
  RosenblattMap rmap(target, settings);
  Matrix u(n, target.dim());
  for (Eigen::Index r = 0; r < n; ++r) u.row(r) = rmap.to_uniform(table.rows.row(r).transpose()).transpose();
  json ks = json::array();
  bool pass = true;
  for (int k = 0; k < target.dim(); ++k) {
    const std::vector<double> col(u.col(k).data(), u.col(k).data() + n);
    const KSReport rep = ks_uniform(col, o.alpha, o.allowance);
    pass = pass && rep.pass;
    json entry = rep;
    entry["axis"] = rmap.order()[static_cast<std::size_t>(k)];
    ks.push_back(entry);
  }
  json report = {{"command", "validate"},
                 {"density", target.spec()},
                 {"samples", n},
                 {"seed", o.common.seed},
                 {"ks", ks},
                 {"pass", pass}};
  emit_report(o.common, report, true);
  out << "validate: " << n << " samples, per-axis conditional KS " << (pass ? "pass" : "FAIL") << "\n";
  return pass ? kExitOk : kExitFailed;
}

// ------------------------------------------------------------ parsing

struct Command {
  CLI::App* app;
  std::function<int(const Options&, std::ostream&)> body;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "RNG seed");
  sub->add_option("--out", c.out, "Output artifact path");
  sub->add_option("--report", c.report, "JSON report path");
  sub->add_option("--config", c.config, "JSON file whose keys override flags");
}

std::vector<Command> build(CLI::App& app, Options& o) {
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::vector<Command> cmds;

  auto* lap = app.add_subcommand("laplace", "Laplace approximation at the mode reached from x0");
  lap->add_option("--density", o.density, "Density config (path or inline JSON)")->required();
  lap->add_option("--x0", o.x0, "Start point, comma separated");
  lap->add_option("--tol", o.tol, "Gradient tolerance");
  lap->add_option("--max-iter", o.max_iter, "Iteration limit");
  cmds.push_back({lap, cmd_laplace});

  auto* rlap = app.add_subcommand("reparam-laplace", "Laplace approximation in the coordinates of a diffeomorphism");
  rlap->add_option("--density", o.density, "Density config")->required();
  rlap->add_option("--diffeo", o.diffeo, "Diffeomorphism spec")->required();
  rlap->add_option("--x0", o.x0, "Start point in original coordinates");
  rlap->add_option("--tol", o.tol, "Gradient tolerance");
  rlap->add_option("--max-iter", o.max_iter, "Iteration limit");
  rlap->add_option("--samples", o.samples, "Samples written to --out (default 1000)");
  cmds.push_back({rlap, cmd_reparam_laplace});

  auto* ros = app.add_subcommand("rosenblatt", "Exact sampler from the triangular transport map");
  ros->add_option("--density", o.density, "Density config")->required();
  ros->add_option("--dim-cap", o.dim_cap, "Dimension guard");
  ros->add_option("--samples", o.samples, "Number of samples")->default_val(10000);
  ros->add_option("--alpha", o.alpha, "KS level, 0.01 or 0.05");
  ros->add_option("--allowance", o.allowance, "KS allowance for the numerically built map");
  cmds.push_back({ros, cmd_rosenblatt});

  auto* rc = app.add_subcommand("riemann-check", "ODE vs closed-form exponential map and shared-seed samples");
  rc->add_option("--diffeo", o.diffeo, "Diffeomorphism spec")->required();
  rc->add_option("--base-cov", o.base_cov, "Base Gaussian {mean, cov} or covariance")->required();
  rc->add_option("--n", o.n, "Number of draws (default 100)");
  rc->add_option("--steps", o.steps, "RK4 steps");
  cmds.push_back({rc, cmd_riemann_check});

  auto* fi = app.add_subcommand("fisher", "Fisher metric of a pushforward Gaussian family");
  fi->add_option("--diffeo", o.diffeo, "One-dimensional diffeomorphism spec")->required();
  fi->add_option("--thetas", o.thetas, "JSON array of [mu, sigma]");
  fi->add_option("--n", o.n, "Draws per parameter (default 200000)");
  cmds.push_back({fi, cmd_fisher});

  auto* fig = app.add_subcommand("figure2", "Gaussian family on the hyperboloid");
  fig->add_option("--mu-grid", o.mu_grid, "List or start:stop:count");
  fig->add_option("--sigma-grid", o.sigma_grid, "List or start:stop:count");
  cmds.push_back({fig, cmd_figure2});

  auto* val = app.add_subcommand("validate", "Per-axis conditional KS of a sample CSV against a density");
  val->add_option("--samples", o.samples_path, "CSV with header")->required();
  val->add_option("--density", o.density, "Density config")->required();
  val->add_option("--dim-cap", o.dim_cap, "Dimension guard");
  val->add_option("--alpha", o.alpha, "KS level, 0.01 or 0.05");
  val->add_option("--allowance", o.allowance, "KS allowance for the numerically built map");
  cmds.push_back({val, cmd_validate});

  for (auto& c : cmds) add_common(c.app, o.common);
  return cmds;
}

std::string config_value(const json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return v.dump();
  if (v.is_number()) return format_double(v.get<double>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); })) {
    std::string s;
    for (const auto& e : v) s += (s.empty() ? "" : ",") + config_value(e, key);
    return s;
  }
  if (v.is_object() || v.is_array()) return v.dump();
  throw ConfigError(key, "unsupported value");
}

/// Flags from a --config file, appended after the command line so they win.
std::vector<std::string> config_args(const std::string& path, const CLI::App& sub) {
  const json cfg = load_json_arg(path, "config");
  if (!cfg.is_object()) throw ConfigError("config", "expected a JSON object of flag values");
  std::vector<std::string> args;
  for (const auto& [key, value] : cfg.items()) {
    std::string flag = key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    if (flag == "config" || sub.get_option_no_throw("--" + flag) == nullptr) {
      throw ConfigError(key, "not an option of '" + sub.get_name() + "'");
    }
    args.push_back("--" + flag);
    args.push_back(config_value(value, key));
  }
  return args;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    for (int pass = 0; pass < 2; ++pass) {
      CLI::App app{"Gaussian approximations through diffeomorphisms", "geogauss"};
      Options o;
      const std::vector<Command> cmds = build(app, o);
      try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
      } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitError;
      }
      const auto it = std::find_if(cmds.begin(), cmds.end(), [](const Command& c) { return c.app->parsed(); });
      if (pass == 0 && !o.common.config.empty()) {
        const std::vector<std::string> extra = config_args(o.common.config, *it->app);
        args.insert(args.end(), extra.begin(), extra.end());
        continue;
      }
      return it->body(o, out);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace geogauss::cli
