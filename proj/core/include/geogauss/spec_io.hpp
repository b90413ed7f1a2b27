#pragma once

#include <nlohmann/json.hpp>

#include "geogauss/density.hpp"
#include "geogauss/diffeo.hpp"

namespace geogauss {

/// {"family": "gmm1d", "params": {...}}
Density density_from_json(const nlohmann::json& cfg);

/// {"kind": "affine" | "identity" | "exp" | "sinh_arcsinh" | "compose" | "rosenblatt", ...}
/// e.g. {"kind":"sinh_arcsinh","s":0.5,"t":1.2,"dim":2}. The inverse of
/// Diffeomorphism::spec().
Diffeomorphism diffeo_from_json(const nlohmann::json& spec);

/// {"mean": ..., "cov": ...}, or a bare covariance (zero mean).
Gaussian gaussian_from_json(const nlohmann::json& j);

}  // namespace geogauss
