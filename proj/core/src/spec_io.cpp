#include "geogauss/spec_io.hpp"

#include <string>
#include <vector>

#include "geogauss/errors.hpp"
#include "geogauss/io.hpp"
#include "geogauss/rosenblatt.hpp"

namespace geogauss {

namespace {

int read_dim(const nlohmann::json& spec, const std::string& field) {
  if (!spec.contains("dim")) return 1;
  if (!spec["dim"].is_number_integer() || spec["dim"].get<int>() < 1) {
    throw ConfigError(field + ".dim", "must be a positive integer");
  }
  return spec["dim"].get<int>();
}

double read_number(const nlohmann::json& spec, const char* key, const std::string& field) {
  if (!spec.contains(key) || !spec[key].is_number()) throw ConfigError(field + "." + key, "missing or not a number");
  return spec[key].get<double>();
}

Diffeomorphism parse(const nlohmann::json& spec, const std::string& field) {
  if (!spec.is_object() || !spec.contains("kind") || !spec["kind"].is_string()) {
    throw ConfigError(field + ".kind", "diffeomorphism spec needs a string 'kind'");
  }
  const std::string kind = spec["kind"].get<std::string>();
  if (kind == "identity") return make_identity(read_dim(spec, field));
  if (kind == "exp") return make_exp(read_dim(spec, field));
  if (kind == "sinh_arcsinh") {
    return make_sinh_arcsinh(read_dim(spec, field), read_number(spec, "s", field), read_number(spec, "t", field));
  }
  if (kind == "affine") {
    if (!spec.contains("A")) throw ConfigError(field + ".A", "affine map needs a matrix 'A'");
    const Matrix a = matrix_from_json(spec["A"], field + ".A");
    const Vector b = spec.contains("b") ? vector_from_json(spec["b"], field + ".b") : Vector::Zero(a.rows());
    return make_affine(a, b);
  }
  if (kind == "compose") {
    if (!spec.contains("maps") || !spec["maps"].is_array()) {
      throw ConfigError(field + ".maps", "composition needs an array 'maps'");
    }
    std::vector<Diffeomorphism> parts;
    for (std::size_t i = 0; i < spec["maps"].size(); ++i) {
      parts.push_back(parse(spec["maps"][i], field + ".maps[" + std::to_string(i) + "]"));
    }
    return compose(std::move(parts));
  }
  if (kind == "rosenblatt") {
    if (!spec.contains("density")) throw ConfigError(field + ".density", "rosenblatt map needs a 'density'");
    RosenblattSettings settings;
    if (spec.contains("dim_cap")) settings.dim_cap = spec["dim_cap"].get<int>();
    return build_universal_map(density_from_json(spec["density"]), settings);
  }
  throw ConfigError(field + ".kind", "unknown diffeomorphism kind '" + kind + "'");
}

}  // namespace

Density density_from_json(const nlohmann::json& cfg) {
  if (!cfg.is_object() || !cfg.contains("family") || !cfg["family"].is_string()) {
    throw ConfigError("family", "density config needs a string 'family'");
  }
  const nlohmann::json params = cfg.contains("params") ? cfg["params"] : nlohmann::json::object();
  try {
    return make_builtin(cfg["family"].get<std::string>(), params);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("params", e.what());
  }
}

Diffeomorphism diffeo_from_json(const nlohmann::json& spec) {
  try {
    return parse(spec, "diffeo");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("diffeo", e.what());
  }
}

Gaussian gaussian_from_json(const nlohmann::json& j) {
  if (j.is_object()) {
    if (!j.contains("cov")) throw ConfigError("cov", "Gaussian needs a covariance 'cov'");
    const Matrix cov = matrix_from_json(j["cov"], "cov");
    const Vector mean = j.contains("mean") ? vector_from_json(j["mean"], "mean") : Vector::Zero(cov.rows());
    return Gaussian(mean, cov);
  }
  const Matrix cov = matrix_from_json(j, "cov");
  return Gaussian(Vector::Zero(cov.rows()), cov);
}

}  // namespace geogauss
