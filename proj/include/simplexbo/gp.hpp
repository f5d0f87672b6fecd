#pragma once

#include "simplexbo/kernels.hpp"

#include <cstdint>
#include <vector>

namespace simplexbo {

/// Training data in feature coordinates: unit vectors for spherical kernel
/// families, ambient vectors for Euclidean ones.
struct Dataset {
  std::vector<Vector> inputs;
  Vector outputs;
  double noise = 1e-6;

  Eigen::Index size() const { return static_cast<Eigen::Index>(inputs.size()); }
  void append(Vector input, double y);
};

/// Feature of a simplex point for a kernel family: √x for spherical families
/// (the unit-sphere image), x itself otherwise.
Vector simplex_feature(const SimplexPoint& x, KernelFamily family);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

class GpPosterior {
 public:
  /// Conditions the prior (constant mean, kernel `spec`) on `data`.
  /// Throws std::runtime_error when Σ cannot be factored.
  GpPosterior(Dataset data, const KernelSpec& spec, double prior_mean);

  Moments moments(const Vector& feature) const;

  const Dataset& data() const { return data_; }
  const KernelSpec& spec() const { return kernel_.spec(); }
  const Kernel& kernel() const { return kernel_; }
  double prior_mean() const { return prior_mean_; }
  const Eigen::MatrixXd& chol() const { return chol_; }
  const Vector& weights() const { return weights_; }
  /// Diagonal added on top of the noise to make Σ factor.
  double jitter() const { return jitter_; }
  /// Largest observed output (−inf when empty).
  double best_observed() const;

 private:
  Dataset data_;
  Kernel kernel_;
  double prior_mean_;
  Eigen::MatrixXd chol_;
  Vector weights_;
  double jitter_ = 0.0;
};

/// Mean and variance at `feature`; variance clamped at zero. An empty dataset
/// gives (prior_mean, σ²).
Moments posterior_moments(const GpPosterior& post, const Vector& feature);

/// −½ rᵀΣ⁻¹r − ½ log det Σ − (N/2) log 2π with r = y − m, Σ = K + noise·I.
double log_marginal_likelihood(const Dataset& data, const KernelSpec& spec, double prior_mean);

struct FitResult {
  KernelSpec spec;
  double noise = 0.0;
  double log_likelihood = 0.0;
};

struct FitOptions {
  int starts = 8;
  int max_evals_per_start = 150;
  double simplex_tol = 1e-3;
};

/// Maximizes the log marginal likelihood over (log κ, log σ², log noise)
/// inside HyperBounds with multi-start Nelder–Mead: the template (with
/// data.noise) plus Latin-hypercube starts drawn from `seed`.
/// Throws std::runtime_error when every evaluation is non-finite.
FitResult fit_hyperparams(const Dataset& data, const KernelSpec& spec_template, double prior_mean,
                          std::uint64_t seed, const FitOptions& options = {});

}  // namespace simplexbo
