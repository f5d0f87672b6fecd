#include "simplexbo/simplex_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace simplexbo {

namespace {

constexpr double kSumTol = 1e-12;
constexpr double kTangentTol = 1e-10;

Vector renormalize(Vector v) {
  v /= v.sum();
  return v;
}

void require_same_base(const SimplexPoint& x, const TangentVector& v, const char* what) {
  if (!(v.base() == x)) {
    throw std::invalid_argument(std::string(what) + ": tangent vector is based at a different point");
  }
}

void require_interior(const SimplexPoint& x, const char* what) {
  if (x.coords().minCoeff() <= 0.0) {
    throw std::invalid_argument(std::string(what) + ": base point must lie in the interior of the simplex");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// SimplexPoint / TangentVector

SimplexPoint::SimplexPoint(Vector coords) : coords_(std::move(coords)) {
  if (coords_.size() < 2) {
    throw std::invalid_argument("SimplexPoint: need at least two coordinates");
  }
  if (!coords_.allFinite() || coords_.minCoeff() < 0.0) {
    throw std::invalid_argument("SimplexPoint: coordinates must be finite and nonnegative");
  }
  if (std::abs(coords_.sum() - 1.0) > kSumTol) {
    throw std::invalid_argument("SimplexPoint: coordinates must sum to one");
  }
}

SimplexPoint SimplexPoint::normalized(const Vector& v) {
  if (v.size() < 2 || !v.allFinite()) {
    throw std::invalid_argument("SimplexPoint::normalized: need at least two finite coordinates");
  }
  if (v.minCoeff() < -1e-8) {
    throw std::invalid_argument("SimplexPoint::normalized: negative coordinate");
  }
  Vector c = v.cwiseMax(0.0);
  const double s = c.sum();
  if (!(s > 0.0)) {
    throw std::invalid_argument("SimplexPoint::normalized: coordinates sum to zero");
  }
  return SimplexPoint(c / s, Unchecked{});
}

SimplexPoint SimplexPoint::center(int d) {
  if (d < 1) throw std::invalid_argument("SimplexPoint::center: d must be >= 1");
  return SimplexPoint(Vector::Constant(d + 1, 1.0 / (d + 1)), Unchecked{});
}

SimplexPoint SimplexPoint::vertex(int d, int i) {
  if (d < 1 || i < 0 || i > d) throw std::invalid_argument("SimplexPoint::vertex: bad index");
  Vector v = Vector::Zero(d + 1);
  v[i] = 1.0;
  return SimplexPoint(std::move(v), Unchecked{});
}

SimplexPoint SimplexPoint::clamped_interior(double eps) const {
  if (coords_.minCoeff() >= eps) return *this;
  return SimplexPoint(renormalize(coords_.cwiseMax(eps)), Unchecked{});
}

TangentVector::TangentVector(SimplexPoint base, Vector components)
    : base_(std::move(base)), components_(std::move(components)) {
  if (components_.size() != base_.size()) {
    throw std::invalid_argument("TangentVector: dimension mismatch");
  }
  if (!components_.allFinite()) {
    throw std::invalid_argument("TangentVector: non-finite component");
  }
  const double scale = std::max(1.0, components_.cwiseAbs().maxCoeff());
  if (std::abs(base_.coords().dot(components_)) > kTangentTol * scale) {
    throw std::invalid_argument("TangentVector: components violate x·η = 0");
  }
}

TangentVector TangentVector::zero(const SimplexPoint& base) {
  return TangentVector(base, Vector::Zero(base.size()));
}

TangentVector TangentVector::operator*(double s) const {
  return TangentVector(base_, components_ * s);
}

TangentVector TangentVector::operator+(const TangentVector& other) const {
  require_same_base(base_, other, "TangentVector::operator+");
  return TangentVector(base_, components_ + other.components_);
}

TangentVector TangentVector::operator-(const TangentVector& other) const {
  require_same_base(base_, other, "TangentVector::operator-");
  return TangentVector(base_, components_ - other.components_);
}

// ---------------------------------------------------------------------------
// Sphere map

Vector sphere_map(const SimplexPoint& x, double radius) {
  if (radius != 1.0 && radius != 2.0) {
    throw std::invalid_argument("sphere_map: radius must be 1 or 2");
  }
  return radius * x.coords().cwiseSqrt();
}

SimplexPoint inv_sphere_map(const Vector& s, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("inv_sphere_map: radius must be positive");
  if (s.size() < 2 || !s.allFinite()) {
    throw std::invalid_argument("inv_sphere_map: need at least two finite coordinates");
  }
  if (s.minCoeff() < -1e-8) {
    throw std::invalid_argument("inv_sphere_map: point outside the positive orthant");
  }
  if (std::abs(s.norm() - radius) > 1e-6) {
    throw std::invalid_argument("inv_sphere_map: point not on the sphere of the given radius");
  }
  const Vector u = s.cwiseMax(0.0) / radius;
  return SimplexPoint::normalized(u.cwiseAbs2());
}

// ---------------------------------------------------------------------------
// First-order geometry

double fisher_inner(const SimplexPoint& x, const TangentVector& u, const TangentVector& v) {
  require_same_base(x, u, "fisher_inner");
  require_same_base(x, v, "fisher_inner");
  return (x.coords().array() * u.components().array() * v.components().array()).sum();
}

double fisher_norm(const TangentVector& u) {
  return std::sqrt(fisher_inner(u.base(), u, u));
}

TangentVector tangent_project(const SimplexPoint& x, const Vector& u) {
  if (u.size() != x.size()) throw std::invalid_argument("tangent_project: dimension mismatch");
  Vector p = u.array() - x.coords().dot(u);
  // One refinement pass absorbs the rounding of the first shift.
  p.array() -= x.coords().dot(p);
  return TangentVector(x, std::move(p));
}

TangentVector natural_gradient(const SimplexPoint& x, const Vector& euclid_grad) {
  return tangent_project(x, euclid_grad);
}

// ---------------------------------------------------------------------------
// Exponential and logarithmic maps

namespace {

Vector exp_mixture(const SimplexPoint& x, const Vector& eta) {
  Vector y = x.coords().array() * (1.0 + eta.array());
  if (y.minCoeff() < -1e-14) {
    throw DomainViolation("exp_map(alpha=1): step leaves the simplex");
  }
  return y;
}

Vector exp_exponential(const SimplexPoint& x, const Vector& eta) {
  // Shifting η by a constant leaves the normalized result unchanged.
  const Vector w = (eta.array() - eta.maxCoeff()).exp();
  return x.coords().array() * w.array();
}

Vector exp_levi_civita(const SimplexPoint& x, const Vector& eta) {
  const Vector& p = x.coords();
  const double n = std::sqrt((p.array() * eta.array().square()).sum());
  if (n == 0.0) return p;
  // Steps longer than a quarter arc on the unit sphere cannot stay in the orthant.
  const double half = 0.5 * std::min(n, std::numbers::pi);
  const Vector root = p.cwiseSqrt();
  const Vector s = root.array() * (std::cos(half) + eta.array() * (std::sin(half) / n));
  if (s.minCoeff() < -1e-12) {
    throw DomainViolation("exp_map(alpha=0): geodesic leaves the simplex");
  }
  return s.cwiseAbs2();
}

}  // namespace

SimplexPoint exp_map(const SimplexPoint& x, const TangentVector& eta, double alpha) {
  require_same_base(x, eta, "exp_map");
  const Vector& v = eta.components();
  if (v.isZero(0.0)) return x;
  Vector y;
  if (alpha == 1.0) {
    y = exp_mixture(x, v);
  } else if (alpha == -1.0) {
    y = exp_exponential(x.clamped_interior(), v);
  } else if (alpha == 0.0) {
    y = exp_levi_civita(x, v);
  } else {
    throw std::invalid_argument("exp_map: closed form available only for alpha in {-1, 0, 1}");
  }
  return SimplexPoint::normalized(y.cwiseMax(0.0));
}

std::optional<SimplexPoint> try_exp_map(const SimplexPoint& x, const TangentVector& eta,
                                        double alpha) {
  try {
    return exp_map(x, eta, alpha);
  } catch (const DomainViolation&) {
    return std::nullopt;
  }
}

TangentVector log_map_alpha0(const SimplexPoint& x, const SimplexPoint& target) {
  if (x.size() != target.size()) throw std::invalid_argument("log_map_alpha0: dimension mismatch");
  require_interior(x, "log_map_alpha0");
  const Vector s = x.coords().cwiseSqrt();
  const Vector t = target.coords().cwiseSqrt();
  const double theta = 2.0 * std::atan2((t - s).norm(), (t + s).norm());
  if (theta == 0.0) return TangentVector::zero(x);
  Vector u = t - s.dot(t) * s;
  u -= s.dot(u) * s;
  const double un = u.norm();
  if (un == 0.0) return TangentVector::zero(x);
  // Unit-sphere tangent θ·u/‖u‖ pulled back through ½φ: η = 2w/√x.
  Vector eta = (2.0 * theta / un) * u.cwiseQuotient(s);
  eta.array() -= x.coords().dot(eta);
  return TangentVector(x, std::move(eta));
}

double fisher_rao_distance(const SimplexPoint& x, const SimplexPoint& y) {
  if (x.size() != y.size()) throw std::invalid_argument("fisher_rao_distance: dimension mismatch");
  const Vector s = x.coords().cwiseSqrt();
  const Vector t = y.coords().cwiseSqrt();
  return 4.0 * std::atan2((t - s).norm(), (t + s).norm());
}

// ---------------------------------------------------------------------------
// Second-order geometry

TangentVector alpha_hessian_action(const SimplexPoint& x, const GradientField& grad_field,
                                   const TangentVector& eta, double alpha) {
  require_same_base(x, eta, "alpha_hessian_action");
  if (!(alpha >= -1.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha_hessian_action: alpha must lie in [-1, 1]");
  }
  require_interior(x, "alpha_hessian_action");
  const double n = fisher_norm(eta);
  if (n == 0.0) return TangentVector::zero(x);

  const double h = 1e-5 * std::max(1.0, n);
  const TangentVector unit = eta * (1.0 / n);
  const double curve_alpha = (alpha == 0.0 || alpha == 1.0) ? alpha : -1.0;

  auto field_at = [&](double step) -> Vector {
    auto p = try_exp_map(x, unit * step, curve_alpha);
    if (!p) p = exp_map(x, unit * step, -1.0);
    const Vector g = grad_field(*p).components();
    if (!g.allFinite()) throw std::domain_error("alpha_hessian_action: non-finite gradient field");
    return g;
  };

  const Vector xi = grad_field(x).components();
  if (!xi.allFinite()) throw std::domain_error("alpha_hessian_action: non-finite gradient field");
  const Vector directional = (field_at(h) - field_at(-h)) * (n / (2.0 * h));
  const Vector prod = eta.components().cwiseProduct(xi);
  const Vector out = directional + 0.5 * (1.0 + alpha) * prod +
                     Vector::Constant(x.size(), 0.5 * (1.0 - alpha) * x.coords().dot(prod));
  return tangent_project(x, out);
}

// ---------------------------------------------------------------------------
// Euclidean projection and sampling

SimplexPoint project_to_simplex(const Vector& u) {
  if (u.size() < 2 || !u.allFinite()) {
    throw std::invalid_argument("project_to_simplex: need at least two finite coordinates");
  }
  std::vector<double> sorted(u.data(), u.data() + u.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumulative += sorted[k];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) theta = candidate;
  }
  return SimplexPoint::normalized((u.array() - theta).cwiseMax(0.0));
}

SimplexPoint sample_uniform(std::mt19937_64& rng, int d) {
  if (d < 1) throw std::invalid_argument("sample_uniform: d must be >= 1");
  std::exponential_distribution<double> expo(1.0);
  Vector v(d + 1);
  for (int i = 0; i <= d; ++i) v[i] = expo(rng);
  return SimplexPoint::normalized(v);
}

// ---------------------------------------------------------------------------
// RBF blending of simplex-valued columns

WeightMatrix::WeightMatrix(std::vector<SimplexPoint> cols, std::vector<double> mus,
                           std::vector<double> sigmas)
    : columns(std::move(cols)), centers(std::move(mus)), widths(std::move(sigmas)) {
  if (columns.empty()) throw std::invalid_argument("WeightMatrix: no columns");
  if (centers.size() != columns.size() || widths.size() != columns.size()) {
    throw std::invalid_argument("WeightMatrix: centers/widths must match the column count");
  }
  for (const auto& c : columns) {
    if (c.size() != columns.front().size()) {
      throw std::invalid_argument("WeightMatrix: columns differ in dimension");
    }
  }
  for (double w : widths) {
    if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("WeightMatrix: widths must be positive");
  }
}

SimplexPoint blend_weights(const WeightMatrix& weights, double t) {
  Vector num = Vector::Zero(weights.columns.front().size());
  double den = 0.0;
  for (std::size_t k = 0; k < weights.columns.size(); ++k) {
    const double z = (t - weights.centers[k]) / weights.widths[k];
    const double psi = std::exp(-0.5 * z * z);
    num += psi * weights.columns[k].coords();
    den += psi;
  }
  if (!(den >= 1e-300)) {
    throw std::domain_error("blend_weights: RBF denominator underflows at this time");
  }
  return SimplexPoint(num / den);
}

}  // namespace simplexbo
