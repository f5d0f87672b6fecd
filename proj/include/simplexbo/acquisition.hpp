#pragma once

#include "simplexbo/gp.hpp"

#include <functional>
#include <random>
#include <string>

namespace simplexbo {

enum class AcqKind { ei, lcb };

std::string to_string(AcqKind kind);
AcqKind acq_kind_from_string(const std::string& name);

/// The BO loop always maximizes; minimization objectives are negated before
/// they reach the posterior, so "lcb" here scores mean + β·sd.
struct AcqSpec {
  AcqKind kind = AcqKind::ei;
  double beta = 2.0;

  void validate() const;
};

/// Expected improvement over `best` for maximization.
double ei(double mean, double sd, double best);
/// log(ei(mean, sd, best)), accurate far into the region where EI itself
/// underflows.
double log_ei(double mean, double sd, double best);
/// mean + β·sd.
double lcb(double mean, double sd, double beta);

/// Acquisition at a feature vector; EI uses the largest observed output as
/// the incumbent.
double acq_value(const GpPosterior& post, const AcqSpec& spec, const Vector& feature);

/// The quantity maximized by the acquisition optimizers: log EI for EI (same
/// maximizers, no flat underflowed regions), the LCB score itself otherwise.
double search_score(const GpPosterior& post, const AcqSpec& spec, const Vector& feature);

enum class GradientMode { finite_difference, analytic };
enum class OptimizerMethod { gd_armijo, trust_region };

struct OptimizerConfig {
  int restarts = 5;
  int max_iters = 100;
  GradientMode gradient = GradientMode::finite_difference;
  OptimizerMethod method = OptimizerMethod::trust_region;
  double tr_initial_radius = 0.1;
  double tr_max_radius = 1.5707963267948966;
  double tr_accept = 0.1;
  double armijo_c1 = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 30;
  /// Stop once the Riemannian gradient norm falls below this fraction of its
  /// value at the start point.
  double grad_tol = 1e-6;
  /// Finite-difference step: relative to the coordinate on the simplex,
  /// absolute on the sphere.
  double fd_step = 1e-6;

  void validate() const;
};

/// Domain of a search: the simplex Δ^d or the positive orthant of the unit
/// sphere S^d.
enum class SearchDomain { simplex, sphere_orthant };

/// A function to maximize, given on ambient coordinates of the search domain.
/// `value` must accept small off-domain perturbations (finite differences
/// probe them). `gradient` is the ambient Euclidean gradient, required only
/// for GradientMode::analytic.
struct AcqObjective {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
};

struct OptimizeResult {
  Vector point;
  double value = 0.0;
  /// Best start-point value; `value` is never below it.
  double best_start_value = 0.0;
};

/// Multi-start Riemannian maximization. α = −1 searches the simplex interior
/// with the Fisher metric and exponential-connection geodesics; α = 0 searches
/// S^d_{≥0} with great-circle steps followed by orthant retraction.
OptimizeResult maximize_riemannian(const AcqObjective& objective, int dim, double alpha,
                                   const OptimizerConfig& cfg, std::mt19937_64& rng);

/// Multi-start projected gradient ascent with Armijo backtracking.
OptimizeResult maximize_projected(const AcqObjective& objective, int dim, SearchDomain domain,
                                  const OptimizerConfig& cfg, std::mt19937_64& rng);

/// Riemannian gradient of `objective` at `point` as the optimizers compute it:
/// the natural gradient on the simplex for α = −1, the tangent projection on
/// the sphere for α = 0.
Vector riemannian_gradient(const AcqObjective& objective, const Vector& point, double alpha,
                           const OptimizerConfig& cfg);

/// search_score of a posterior as a function of ambient coordinates of a search
/// domain: simplex coordinates map to features through √x for spherical
/// kernels; sphere coordinates are used after normalization for spherical
/// kernels and as they are for Euclidean ones.
AcqObjective make_acq_objective(const GpPosterior& post, const AcqSpec& spec, SearchDomain domain);

/// α ∈ {−1, 0}: α = −1 returns simplex coordinates, α = 0 unit-sphere
/// coordinates.
OptimizeResult optimize_acq_alpha(const GpPosterior& post, const AcqSpec& acq, const OptimizerConfig& cfg,
                                  double alpha, std::mt19937_64& rng);

OptimizeResult optimize_acq_projected(const GpPosterior& post, const AcqSpec& acq, const OptimizerConfig& cfg,
                                      SearchDomain domain, std::mt19937_64& rng);

}  // namespace simplexbo
