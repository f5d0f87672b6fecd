#pragma once

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

namespace simplexbo {

using Vector = Eigen::VectorXd;

/// Coordinates below this are treated as boundary by the exponential-connection
/// machinery and clamped before use.
inline constexpr double kInteriorEps = 1e-10;

/// Raised when a closed-form exponential map leaves its domain. Callers that
/// step along geodesics are expected to shrink the step and retry.
class DomainViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point of the probability simplex in ambient coordinates: d+1 nonnegative
/// entries summing to one.
class SimplexPoint {
 public:
  /// Validates nonnegativity and sum-to-one within 1e-12.
  explicit SimplexPoint(Vector coords);

  /// Clamps entries above -1e-8 to zero and renormalizes. Larger negative
  /// entries or a non-positive sum are rejected.
  static SimplexPoint normalized(const Vector& v);
  static SimplexPoint center(int d);
  static SimplexPoint vertex(int d, int i);

  int dim() const { return static_cast<int>(coords_.size()) - 1; }
  Eigen::Index size() const { return coords_.size(); }
  const Vector& coords() const { return coords_; }
  double operator[](Eigen::Index i) const { return coords_[i]; }

  bool interior(double eps = kInteriorEps) const { return coords_.minCoeff() >= eps; }
  /// Raises every coordinate to at least `eps` and renormalizes.
  SimplexPoint clamped_interior(double eps = kInteriorEps) const;

  bool operator==(const SimplexPoint& other) const { return coords_ == other.coords_; }

 private:
  struct Unchecked {};
  SimplexPoint(Vector coords, Unchecked) : coords_(std::move(coords)) {}

  Vector coords_;
};

/// Tangent vector in the score representation: base · components = 0.
class TangentVector {
 public:
  TangentVector(SimplexPoint base, Vector components);

  static TangentVector zero(const SimplexPoint& base);

  const SimplexPoint& base() const { return base_; }
  const Vector& components() const { return components_; }
  double operator[](Eigen::Index i) const { return components_[i]; }

  TangentVector operator*(double s) const;
  TangentVector operator+(const TangentVector& other) const;
  TangentVector operator-(const TangentVector& other) const;

 private:
  SimplexPoint base_;
  Vector components_;
};

/// 2·√x (radius 2) or √x (radius 1), element-wise.
Vector sphere_map(const SimplexPoint& x, double radius = 1.0);

/// (s/radius)² element-wise. Tiny negative entries are clamped; entries below
/// -1e-8 or a norm off by more than 1e-6 are rejected.
SimplexPoint inv_sphere_map(const Vector& s, double radius = 1.0);

/// Fisher-Rao metric Σ x_i u_i v_i.
double fisher_inner(const SimplexPoint& x, const TangentVector& u, const TangentVector& v);
double fisher_norm(const TangentVector& u);

TangentVector tangent_project(const SimplexPoint& x, const Vector& u);

/// Riemannian gradient for the Fisher-Rao metric: DF − (xᵀDF)·1.
TangentVector natural_gradient(const SimplexPoint& x, const Vector& euclid_grad);

using GradientField = std::function<TangentVector(const SimplexPoint&)>;

/// Covariant derivative of a gradient field along η for the α-connection,
///
///   ∇^(α)_η ξ = D_η ξ + (1+α)/2 · η⊙ξ + (1−α)/2 · xᵀ(η⊙ξ),
///
/// with D_η ξ taken by central differences along the geodesic through x with
/// initial velocity η (the α=−1 geodesic is used for α outside {−1, 0, 1}).
TangentVector alpha_hessian_action(const SimplexPoint& x, const GradientField& grad_field,
                                   const TangentVector& eta, double alpha);

/// Closed-form exponential maps for α ∈ {−1, 0, 1}. Throws DomainViolation
/// when the α = 0 or α = 1 geodesic leaves the simplex and
/// std::invalid_argument for any other α.
SimplexPoint exp_map(const SimplexPoint& x, const TangentVector& eta, double alpha);

/// Same as exp_map but reports DomainViolation as nullopt.
std::optional<SimplexPoint> try_exp_map(const SimplexPoint& x, const TangentVector& eta,
                                        double alpha);

/// Inverse of the Levi-Civita exponential map, obtained through the sphere map.
/// ‖result‖_F equals the Fisher-Rao distance.
TangentVector log_map_alpha0(const SimplexPoint& x, const SimplexPoint& target);

/// 2·arccos(Σ √(x_i y_i)).
double fisher_rao_distance(const SimplexPoint& x, const SimplexPoint& y);

/// Euclidean projection onto the simplex (sort and threshold).
SimplexPoint project_to_simplex(const Vector& u);

/// Flat Dirichlet draw on Δ^d.
SimplexPoint sample_uniform(std::mt19937_64& rng, int d);

/// Columns in Δ^{N−1} blended by normalized Gaussian RBFs over time.
struct WeightMatrix {
  WeightMatrix(std::vector<SimplexPoint> columns, std::vector<double> centers,
               std::vector<double> widths);

  std::vector<SimplexPoint> columns;
  std::vector<double> centers;
  std::vector<double> widths;
};

/// α_i(t) = Σ_k π_ik ψ_k(t) / Σ_k ψ_k(t). The result is a point of Δ^{N−1}
/// for every t at which the RBF denominator does not underflow.
SimplexPoint blend_weights(const WeightMatrix& weights, double t);

}  // namespace simplexbo
