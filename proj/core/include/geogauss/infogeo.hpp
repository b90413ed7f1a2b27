#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "geogauss/density.hpp"
#include "geogauss/diffeo.hpp"

namespace geogauss {

/// A statistical manifold: theta -> p_theta over a box of parameters.
class ParametricFamily {
 public:
  using Builder = std::function<Density(const Vector&)>;

  ParametricFamily(std::string tag, int param_dim, Builder builder, std::vector<Bracket> domain);

  const std::string& tag() const { return tag_; }
  int param_dim() const { return param_dim_; }
  const std::vector<Bracket>& domain() const { return domain_; }
  bool in_domain(const VectorRef& theta) const;
  /// Throws InvalidArgument outside the parameter domain.
  Density at(const VectorRef& theta) const;

 private:
  std::string tag_;
  int param_dim_;
  Builder builder_;
  std::vector<Bracket> domain_;
};

/// N(mu, sigma^2) in (mu, sigma) coordinates.
ParametricFamily gaussian1d_family();
/// phi_* N(mu, sigma^2) for a 1D diffeomorphism phi.
ParametricFamily pushforward_family(const Diffeomorphism& map);
ParametricFamily custom_family(std::string tag, int param_dim, ParametricFamily::Builder builder,
                               std::vector<Bracket> domain);

/// Finite distribution Q over parameters of a family.
struct SecondOrderWeights {
  struct Atom {
    Vector theta;
    double weight = 0.0;
  };
  std::vector<Atom> atoms;

  /// Throws InvalidArgument unless weights are >= 0 and sum to 1 within 1e-12.
  void validate() const;
  static SecondOrderWeights dirac(Vector theta);
};

/// Closed-form Fisher information of N(mu, sigma^2): diag(1/sigma^2, 2/sigma^2).
Matrix fisher_gaussian1d(double mu, double sigma);

struct FisherEstimate {
  Matrix information;
  Matrix std_error;  // per-entry Monte-Carlo standard error
  long n = 0;
};

/// E[s s^T] over n exact draws, s the central-difference score in theta
/// (step eps^(1/3) max(1,|theta_j|)). Symmetric PSD by construction.
FisherEstimate fisher_mc(const ParametricFamily& family, const VectorRef& theta, int n,
                         std::uint64_t seed);

struct ChentsovEntry {
  Vector theta;
  Matrix estimate;
  Matrix expected;
  Matrix std_error;
  double rel_deviation = 0.0;  // ||estimate - expected||_inf / ||expected||_inf
  double max_z = 0.0;          // largest |estimate - expected| / std_error
  /// Every entry within max(5% of the expected entry, 3 standard errors).
  bool consistent = false;
};

struct ChentsovReport {
  std::vector<ChentsovEntry> entries;
  double max_rel_deviation = 0.0;
  bool consistent = false;
};

/// Compares the Fisher metric of the pushforward family phi_* N(mu, sigma^2)
/// with that of the Gaussian family at each theta = (mu, sigma).
ChentsovReport chentsov_check(const Diffeomorphism& map, const std::vector<Vector>& thetas, int n,
                              std::uint64_t seed);

/// (mu, sigma) -> point on the upper sheet z^2 - x^2 - y^2 = 1 through the
/// half-plane (mu / sqrt 2, sigma), where the Gaussian Fisher metric is a
/// multiple of the curvature -1 metric. Minkowski coordinates, not Euclidean.
std::array<double, 3> hyperboloid_embed(double mu, double sigma);

/// Finite set of (mu, sigma) candidates for the inner infimum.
struct GaussianGrid {
  std::vector<std::pair<double, double>> points;

  static GaussianGrid cartesian(const std::vector<double>& mus, const std::vector<double>& sigmas);
};

struct DivergenceAtom {
  Vector theta;
  double weight = 0.0;
  double kl = 0.0;
  double std_error = 0.0;
  std::pair<double, double> best{0.0, 1.0};
};

struct DivergenceReport {
  /// sum_theta Q(theta) min_grid KL(p_theta || phi_* N(mu, sigma^2)), Monte
  /// Carlo. The raw estimate is reported; it may dip below zero by MC noise.
  double value = 0.0;
  double std_error = 0.0;
  std::vector<DivergenceAtom> atoms;
  std::string divergence = "kl";
};

/// Draws for an atom depend only on (seed, atom index), never on the grid, so
/// refining the grid can only lower the minimum.
DivergenceReport expected_divergence(const Diffeomorphism& map, const SecondOrderWeights& q,
                                     const ParametricFamily& family, const GaussianGrid& grid,
                                     int n, std::uint64_t seed);

void to_json(nlohmann::json& j, const ChentsovReport& r);
void to_json(nlohmann::json& j, const DivergenceReport& r);

}  // namespace geogauss
