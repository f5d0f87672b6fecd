#pragma once

#include "simplexbo/acquisition.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace simplexbo {

enum class Method { alpha0, alpha_minus1, eucl_simplex, eucl_sphere };

std::string to_string(Method method);
Method method_from_string(const std::string& name);
/// Riemannian methods use spherical kernel families, the others Euclidean ones.
bool uses_spherical_kernel(Method method);
/// Sphere-domain methods search S^d_{≥0} and evaluate at its simplex preimage.
bool searches_sphere(Method method);

struct MethodConfig {
  Method method = Method::alpha0;
  KernelSpec kernel;
  AcqSpec acq;
  OptimizerConfig optimizer;
  FitOptions fit;
  int budget = 100;
  int init = 5;
  std::uint64_t seed = 0;
  /// Noise template for the first hyperparameter fit.
  double initial_noise = 1e-4;
  /// Refit every iteration while the dataset has at most this many points,
  /// then every `refit_stride` iterations.
  int refit_dense_until = 50;
  int refit_stride = 5;

  void validate(int dim) const;
};

/// Kernel template for a method: SE (nu = inf) or Matérn on the family the
/// method requires.
KernelSpec default_kernel(Method method, int dim, double nu = std::numeric_limits<double>::infinity(),
                          int truncation = 64);

/// Objective to maximize. May throw to signal a failed evaluation.
using Objective = std::function<double(const SimplexPoint&)>;

struct RunRow {
  int iter = 0;  ///< 1-based evaluation index, 1..init+budget
  SimplexPoint x;
  double y = 0.0;
  double incumbent = 0.0;
  double wall_seconds = 0.0;
};

struct RunRecord {
  Method method = Method::alpha0;
  std::uint64_t seed = 0;
  std::vector<RunRow> rows;
  /// Query points in the method's own domain: simplex coordinates, or unit
  /// sphere coordinates for sphere-domain methods.
  std::vector<Vector> internal_points;
  SimplexPoint best_x = SimplexPoint::center(1);
  double best_y = 0.0;
  bool aborted = false;
  std::string abort_reason;
  /// One message per failed objective evaluation.
  std::vector<std::string> failures;
};

/// Runs `init` uniform initial evaluations followed by `budget` BO iterations.
/// A failed evaluation (exception or non-finite value) is retried once at a
/// fresh uniform point; a second failure aborts the run with what was
/// recorded so far.
RunRecord run_bo(const Objective& objective, int dim, const MethodConfig& cfg);

/// Per-row f_opt − incumbent in maximization form. Throws std::invalid_argument
/// when an incumbent exceeds f_opt by more than 1e-9.
std::vector<double> simple_regret(const RunRecord& record, double f_opt);

}  // namespace simplexbo
