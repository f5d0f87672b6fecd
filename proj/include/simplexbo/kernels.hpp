#pragma once

#include "simplexbo/simplex_geometry.hpp"
#include "simplexbo/sphere_geometry.hpp"

#include <Eigen/Core>

#include <limits>
#include <string>
#include <vector>

namespace simplexbo {

enum class KernelFamily { spherical_matern, spherical_se, euclid_matern, euclid_se };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

inline bool is_spherical(KernelFamily f) {
  return f == KernelFamily::spherical_matern || f == KernelFamily::spherical_se;
}

/// Hyperparameter bounds used when fitting.
struct HyperBounds {
  static constexpr double lengthscale_min = 0.05;
  static constexpr double lengthscale_max = 10.0;
  static constexpr double variance_min = 1e-3;
  static constexpr double variance_max = 1e3;
  static constexpr double noise_min = 1e-8;
  static constexpr double noise_max = 1.0;
};

struct KernelSpec {
  KernelFamily family = KernelFamily::spherical_se;
  /// Matérn smoothness; +inf selects the squared-exponential member.
  double nu = std::numeric_limits<double>::infinity();
  double lengthscale = 0.5;
  double variance = 1.0;
  /// Series truncation N (spherical families only).
  int truncation = 64;
  /// Intrinsic dimension d of Δ^d / S^d.
  int dim = 2;

  static KernelSpec spherical_se(int dim, double lengthscale = 0.5, double variance = 1.0, int truncation = 64);
  static KernelSpec spherical_matern(int dim, double nu, double lengthscale = 0.5, double variance = 1.0,
                                     int truncation = 64);
  static KernelSpec euclid_se(int dim, double lengthscale = 0.5, double variance = 1.0);
  static KernelSpec euclid_matern(int dim, double nu, double lengthscale = 0.5, double variance = 1.0);

  bool spherical() const { return is_spherical(family); }
  bool squared_exponential() const { return std::isinf(nu); }
  void validate() const;
};

/// Gegenbauer polynomial C_n^(λ)(t) by the three-term recurrence.
double gegenbauer(int n, double lambda, double t);

/// Spectral weight ρ_ν(n) of the spherical Matérn/SE kernel:
/// (2ν/κ² + λ_n)^(−ν−d/2), or exp(−κ²λ_n/2) for the SE member, with
/// λ_n = n(n+d−1).
double spectral_coeff(int n, const KernelSpec& spec);

/// A kernel with its series coefficients precomputed. Evaluation takes
/// features: unit vectors for spherical families, ambient vectors otherwise.
class Kernel {
 public:
  explicit Kernel(const KernelSpec& spec);

  const KernelSpec& spec() const { return spec_; }

  /// Spherical families: kernel as a function of cos d_g.
  double from_cosine(double t) const;
  /// Euclidean families: kernel as a function of ‖a−b‖².
  double from_sq_distance(double r2) const;

  double operator()(const Vector& a, const Vector& b) const;

  /// Normalized series weights c_{n,d}·ρ(n)·σ²/C_ν (spherical families).
  const std::vector<double>& series_weights() const { return weights_; }

 private:
  KernelSpec spec_;
  std::vector<double> weights_;
};

/// Matérn/SE kernel on S^d, normalized so that k(s, s) = σ².
double sphere_kernel(const SpherePoint& s, const SpherePoint& t, const KernelSpec& spec);

/// Pullback of sphere_kernel through ½φ.
double simplex_kernel(const SimplexPoint& x, const SimplexPoint& y, const KernelSpec& spec);

/// σ²·exp(−r²/2κ²) or the Matérn ν ∈ {1/2, 3/2, 5/2} closed forms.
double euclid_kernel(const Vector& a, const Vector& b, const KernelSpec& spec);

struct GramMatrix {
  Eigen::MatrixXd values;
  KernelSpec spec;
  double jitter = 0.0;
};

/// Pairwise kernel matrix plus jitter·I. When the matrix does not factor the
/// jitter is escalated ×10 up to 1e-4·σ²; past that std::runtime_error.
GramMatrix gram(const std::vector<Vector>& points, const KernelSpec& spec, double jitter);

/// Smallest jitter (starting at 1e-10·σ² and escalating ×10 up to 1e-4·σ²) for
/// which `matrix + (base_diag + jitter)·I` admits a Cholesky factor.
/// Throws std::runtime_error when none does.
struct StableCholesky {
  Eigen::MatrixXd lower;
  double jitter = 0.0;
};
StableCholesky stable_cholesky(const Eigen::MatrixXd& matrix, double base_diag, double variance);

/// Pairwise geometry of a fixed point set, reused while only hyperparameters
/// change (the Gegenbauer table for spherical families, squared distances
/// otherwise).
class GramCache {
 public:
  GramCache(const std::vector<Vector>& features, KernelFamily family, int dim, int truncation);

  Eigen::MatrixXd assemble(const Kernel& kernel) const;
  Eigen::Index size() const { return n_; }

 private:
  Eigen::Index n_ = 0;
  bool spherical_ = false;
  int truncation_ = 0;
  Eigen::MatrixXd table_;  // pairs × (truncation+1), or pairs × 1
};

}  // namespace simplexbo
