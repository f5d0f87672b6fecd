#pragma once

#include "simplexbo/simplex_geometry.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace simplexbo {

/// Euclidean test functions, each with its global minimum 0 at the origin.
double ackley(const Vector& z);
double griewank(const Vector& z);
/// Rosenbrock evaluated at z + 1, so the minimum sits at z = 0. Needs ≥ 2
/// coordinates.
double rosenbrock_shifted(const Vector& z);

enum class BenchmarkKind { ackley, rosenbrock, griewank };

std::string to_string(BenchmarkKind kind);
BenchmarkKind benchmark_kind_from_string(const std::string& name);

/// Fisher-orthonormal basis of T_cΔ^d: Gram–Schmidt on the tangent
/// projections of e_1..e_d. Throws std::invalid_argument for boundary c.
std::vector<TangentVector> tangent_basis(const SimplexPoint& c);

/// Conventional evaluation radius of each benchmark (32.768, 2.048, 600).
double benchmark_radius(BenchmarkKind kind);

/// A Euclidean benchmark carried onto Δ^d through Levi-Civita normal
/// coordinates at a base point.
class ProjectedBenchmark {
 public:
  /// scale ≤ 0 selects the default: the Fisher distance from the center to a
  /// vertex maps to benchmark_radius(kind).
  ProjectedBenchmark(BenchmarkKind kind, int dim, double scale = 0.0);
  ProjectedBenchmark(BenchmarkKind kind, SimplexPoint base, std::vector<TangentVector> basis, double scale);

  static double default_scale(BenchmarkKind kind, int dim);

  BenchmarkKind kind() const { return kind_; }
  int dim() const { return base_.dim(); }
  const SimplexPoint& base() const { return base_; }
  const std::vector<TangentVector>& basis() const { return basis_; }
  double scale() const { return scale_; }

  /// z = scale · (Fisher coefficients of log_map_alpha0(base, x)).
  Vector coordinates(const SimplexPoint& x) const;
  double operator()(const SimplexPoint& x) const;

 private:
  BenchmarkKind kind_;
  SimplexPoint base_;
  std::vector<TangentVector> basis_;
  double scale_;
};

double projected_benchmark_eval(const ProjectedBenchmark& b, const SimplexPoint& x);

/// d_FR(x, p)², minimized at the planted point p.
class PlantedObjective {
 public:
  explicit PlantedObjective(SimplexPoint target) : target_(std::move(target)) {}
  const SimplexPoint& target() const { return target_; }
  double operator()(const SimplexPoint& x) const;

 private:
  SimplexPoint target_;
};

/// Average negative log-likelihood of a fixed 1-D sample under a mixture of
/// d+1 unit-variance Gaussians whose weights are the simplex point. The
/// sample is drawn from a hidden weight vector given by `seed`.
class MixtureObjective {
 public:
  MixtureObjective(int dim, std::uint64_t seed, int samples = 200);

  double operator()(const SimplexPoint& x) const;
  const Vector& means() const { return means_; }
  const std::vector<double>& data() const { return data_; }
  const SimplexPoint& true_weights() const { return truth_; }
  /// Global minimum, found by EM (the objective is convex in the weights).
  double minimum_value() const { return f_min_; }
  const SimplexPoint& minimizer() const { return argmin_; }

 private:
  Vector means_;
  std::vector<double> data_;
  Eigen::MatrixXd density_;  // samples × components
  SimplexPoint truth_ = SimplexPoint::center(1);
  SimplexPoint argmin_ = SimplexPoint::center(1);
  double f_min_ = 0.0;
};

/// An objective to minimize, with its known minimum when there is one.
struct NamedObjective {
  std::string name;
  int dim = 2;
  std::function<double(const SimplexPoint&)> fn;
  std::optional<double> f_min;
  /// Coordinate scale for projected benchmarks, 0 otherwise.
  double scale = 0.0;
};

struct ObjectiveSpec {
  /// ackley, rosenbrock, griewank, planted, mixture or external.
  std::string name = "ackley";
  int dim = 2;
  double scale = 0.0;
  std::uint64_t instance_seed = 0;
  std::string command;
  double timeout_seconds = 30.0;
};

NamedObjective make_objective(const ObjectiveSpec& spec);

}  // namespace simplexbo
