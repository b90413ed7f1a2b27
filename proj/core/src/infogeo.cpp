#include "geogauss/infogeo.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "geogauss/errors.hpp"
#include "geogauss/io.hpp"
#include "geogauss/normal.hpp"
#include "geogauss/parallel.hpp"
#include "geogauss/validate.hpp"

namespace geogauss {

namespace {

const std::vector<Bracket> kMuSigmaDomain{{-std::numeric_limits<double>::infinity(),
                                           std::numeric_limits<double>::infinity()},
                                          {0.0, std::numeric_limits<double>::infinity()}};

Gaussian normal1d(double mu, double sigma) {
  return Gaussian(Vector::Constant(1, mu), Matrix::Constant(1, 1, sigma * sigma));
}

}  // namespace

// ------------------------------------------------------- ParametricFamily

ParametricFamily::ParametricFamily(std::string tag, int param_dim, Builder builder, std::vector<Bracket> domain)
    : tag_(std::move(tag)), param_dim_(param_dim), builder_(std::move(builder)), domain_(std::move(domain)) {
  if (param_dim_ < 1 || static_cast<int>(domain_.size()) != param_dim_) {
    throw InvalidArgument("ParametricFamily: domain needs one bracket per parameter");
  }
}

bool ParametricFamily::in_domain(const VectorRef& theta) const {
  if (theta.size() != param_dim_) return false;
  for (int i = 0; i < param_dim_; ++i) {
    const auto& b = domain_[static_cast<std::size_t>(i)];
    if (!(theta[i] > b.lo && theta[i] < b.hi)) return false;
  }
  return true;
}

Density ParametricFamily::at(const VectorRef& theta) const {
  if (!in_domain(theta)) throw InvalidArgument("parameter outside the domain of family '" + tag_ + "'");
  return builder_(theta);
}

ParametricFamily gaussian1d_family() {
  return ParametricFamily(
      "gaussian1d", 2, [](const Vector& t) { return gaussian_density(normal1d(t[0], t[1])); }, kMuSigmaDomain);
}

ParametricFamily pushforward_family(const Diffeomorphism& map) {
  if (map.dim() != 1) throw InvalidArgument("pushforward_family: the diffeomorphism must be one-dimensional");
  return ParametricFamily(
      "pushforward(gaussian1d)", 2,
      [map](const Vector& t) { return pushforward_density(ReparamGA(map, normal1d(t[0], t[1]))); }, kMuSigmaDomain);
}

ParametricFamily custom_family(std::string tag, int param_dim, ParametricFamily::Builder builder,
                               std::vector<Bracket> domain) {
  return ParametricFamily(std::move(tag), param_dim, std::move(builder), std::move(domain));
}

void SecondOrderWeights::validate() const {
  if (atoms.empty()) throw InvalidArgument("second-order weights need at least one atom");
  double sum = 0.0;
  for (const auto& a : atoms) {
    if (!(a.weight >= 0.0)) throw InvalidArgument("second-order weights must be non-negative");
    sum += a.weight;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw InvalidArgument("second-order weights must sum to 1");
}

SecondOrderWeights SecondOrderWeights::dirac(Vector theta) {
  SecondOrderWeights q;
  q.atoms.push_back({std::move(theta), 1.0});
  return q;
}

// ----------------------------------------------------------------- Fisher

Matrix fisher_gaussian1d(double mu, double sigma) {
  (void)mu;  // the metric does not depend on the location
  if (!(sigma > 0.0)) throw InvalidArgument("fisher_gaussian1d: sigma must be positive");
  Matrix f = Matrix::Zero(2, 2);
  f(0, 0) = 1.0 / (sigma * sigma);
  f(1, 1) = 2.0 / (sigma * sigma);
  return f;
}

FisherEstimate fisher_mc(const ParametricFamily& family, const VectorRef& theta, int n, std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("fisher_mc: n must be at least 2");
  const Density p = family.at(theta);
  if (!p.has_sampler()) throw InvalidArgument("fisher_mc: family '" + family.tag() + "' cannot be sampled");
  const int k = family.param_dim();
  std::vector<Density> plus, minus;
  Vector steps(k);
  for (int j = 0; j < k; ++j) {
    steps[j] = std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, std::abs(theta[j]));
    Vector tp = theta, tm = theta;
    tp[j] += steps[j];
    tm[j] -= steps[j];
    if (!family.in_domain(tp) || !family.in_domain(tm)) throw InvalidArgument("fisher_mc: theta must be interior");
    plus.push_back(family.at(tp));
    minus.push_back(family.at(tm));
  }

  Matrix scores(n, k);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      CounterRng rng(seed, r);
      const Vector x = p.draw(rng);
      for (int j = 0; j < k; ++j) {
        scores(static_cast<Eigen::Index>(r), j) =
            (plus[static_cast<std::size_t>(j)].log_pdf(x) - minus[static_cast<std::size_t>(j)].log_pdf(x)) /
            (2.0 * steps[j]);
      }
    }
  });
  if (!scores.allFinite()) throw NumericalError("fisher_mc: non-finite score");

  FisherEstimate out;
  out.n = n;
  out.information = scores.transpose() * scores / n;
  out.information = 0.5 * (out.information + out.information.transpose());
  out.std_error.resize(k, k);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      const Eigen::ArrayXd prod = scores.col(a).array() * scores.col(b).array();
      const double var = (prod - prod.mean()).square().sum() / (n - 1);
      out.std_error(a, b) = std::sqrt(var / n);
    }
  }
  return out;
}

ChentsovReport chentsov_check(const Diffeomorphism& map, const std::vector<Vector>& thetas, int n,
                              std::uint64_t seed) {
  if (map.dim() != 1) throw InvalidArgument("chentsov_check: the diffeomorphism must be one-dimensional");
  const ParametricFamily family = pushforward_family(map);
  ChentsovReport report;
  report.consistent = true;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const Vector& theta = thetas[i];
    if (theta.size() != 2) throw InvalidArgument("chentsov_check: theta must be (mu, sigma)");
    const FisherEstimate est = fisher_mc(family, theta, n, derive_seed(seed, i));
    ChentsovEntry e;
    e.theta = theta;
    e.estimate = est.information;
    e.expected = fisher_gaussian1d(theta[0], theta[1]);
    e.std_error = est.std_error;
    const Matrix diff = (e.estimate - e.expected).cwiseAbs();
    e.rel_deviation = diff.maxCoeff() / e.expected.cwiseAbs().maxCoeff();
    e.consistent = true;
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        const double se = e.std_error(a, b);
        e.max_z = std::max(e.max_z, se > 0.0 ? diff(a, b) / se : (diff(a, b) > 0.0 ? std::numeric_limits<double>::infinity() : 0.0));
        if (diff(a, b) > std::max(0.05 * std::abs(e.expected(a, b)), 3.0 * se)) e.consistent = false;
      }
    }
    report.max_rel_deviation = std::max(report.max_rel_deviation, e.rel_deviation);
    report.consistent = report.consistent && e.consistent;
    report.entries.push_back(std::move(e));
  }
  return report;
}

std::array<double, 3> hyperboloid_embed(double mu, double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("hyperboloid_embed: sigma must be positive");
  const double a = mu / std::numbers::sqrt2;
  const double b = sigma;
  const double r2 = a * a + b * b;
  return {(r2 - 1.0) / (2.0 * b), a / b, (r2 + 1.0) / (2.0 * b)};
}

GaussianGrid GaussianGrid::cartesian(const std::vector<double>& mus, const std::vector<double>& sigmas) {
  GaussianGrid g;
  for (double m : mus)
    for (double s : sigmas) {
      if (!(s > 0.0)) throw InvalidArgument("GaussianGrid: sigma must be positive");
      g.points.emplace_back(m, s);
    }
  return g;
}

// ------------------------------------------------------ expected divergence

DivergenceReport expected_divergence(const Diffeomorphism& map, const SecondOrderWeights& q,
                                     const ParametricFamily& family, const GaussianGrid& grid, int n,
                                     std::uint64_t seed) {
  q.validate();
  if (grid.points.empty()) throw InvalidArgument("expected_divergence: empty Gaussian grid");
  if (map.dim() != 1) throw InvalidArgument("expected_divergence: the diffeomorphism must be one-dimensional");
  if (n < 2) throw InvalidArgument("expected_divergence: n must be at least 2");
  for (const auto& [mu, sigma] : grid.points)
    if (!(sigma > 0.0)) throw InvalidArgument("expected_divergence: grid sigma must be positive");

  DivergenceReport report;
  double var = 0.0;
  for (std::size_t i = 0; i < q.atoms.size(); ++i) {
    const auto& atom = q.atoms[i];
    const Density p = family.at(atom.theta);
    if (p.dim() != 1) throw InvalidArgument("expected_divergence: family members must be one-dimensional");
    const std::uint64_t atom_seed = derive_seed(seed, i);

    // Per draw: log p(y), phi^{-1}(y) and log |d phi^{-1}/dy|; then every
    // grid candidate only needs a Gaussian log density.
    std::vector<double> logp(static_cast<std::size_t>(n)), latent(logp.size()), log_jac(logp.size());
    parallel_for(logp.size(), [&](std::size_t begin, std::size_t end) {
      for (std::size_t r = begin; r < end; ++r) {
        CounterRng rng(atom_seed, r);
        const Vector y = p.draw(rng);
        logp[r] = p.log_pdf(y);
        const Vector x = map.inverse(y);
        latent[r] = x[0];
        log_jac[r] = std::isfinite(x[0]) ? -map.log_abs_det_jacobian(x)
                                         : -std::numeric_limits<double>::infinity();
      }
    });

    DivergenceAtom best;
    best.theta = atom.theta;
    best.weight = atom.weight;
    best.kl = std::numeric_limits<double>::infinity();
    std::vector<double> logq(logp.size());
    for (const auto& [mu, sigma] : grid.points) {
      const double log_norm = -std::log(sigma) - kLogSqrt2Pi;
      for (std::size_t r = 0; r < logq.size(); ++r) {
        const double z = (latent[r] - mu) / sigma;
        logq[r] = log_norm - 0.5 * z * z + log_jac[r];
      }
      const KLEstimate kl = kl_mc(logp, logq);
      if (kl.estimate < best.kl) {
        best.kl = kl.estimate;
        best.std_error = kl.std_error;
        best.best = {mu, sigma};
      }
    }
    report.value += atom.weight * best.kl;
    var += atom.weight * atom.weight * best.std_error * best.std_error;
    report.atoms.push_back(std::move(best));
  }
  report.std_error = std::sqrt(var);
  return report;
}

void to_json(nlohmann::json& j, const ChentsovReport& r) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"theta", vector_to_json(e.theta)},
                       {"estimate", matrix_to_json(e.estimate)},
                       {"expected", matrix_to_json(e.expected)},
                       {"std_error", matrix_to_json(e.std_error)},
                       {"rel_deviation", e.rel_deviation},
                       {"max_z", e.max_z},
                       {"consistent", e.consistent}});
  }
  j = {{"entries", entries}, {"max_rel_deviation", r.max_rel_deviation}, {"consistent", r.consistent}};
}

void to_json(nlohmann::json& j, const DivergenceReport& r) {
  nlohmann::json atoms = nlohmann::json::array();
  for (const auto& a : r.atoms) {
    atoms.push_back({{"theta", vector_to_json(a.theta)},
                     {"weight", a.weight},
                     {"kl", a.kl},
                     {"std_error", a.std_error},
                     {"best_mu", a.best.first},
                     {"best_sigma", a.best.second}});
  }
  j = {{"divergence", r.divergence}, {"value", r.value}, {"std_error", r.std_error}, {"atoms", atoms}};
}

}  // namespace geogauss
