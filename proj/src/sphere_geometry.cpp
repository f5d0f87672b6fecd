#include "simplexbo/sphere_geometry.hpp"

#include <cmath>

namespace simplexbo {

SpherePoint::SpherePoint(Vector coords) : coords_(std::move(coords)) {
  if (coords_.size() < 2 || !coords_.allFinite()) {
    throw std::invalid_argument("SpherePoint: need at least two finite coordinates");
  }
  if (std::abs(coords_.norm() - 1.0) > 1e-10) {
    throw std::invalid_argument("SpherePoint: coordinates must have unit norm");
  }
}

SpherePoint SpherePoint::normalized(const Vector& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("SpherePoint::normalized: zero vector");
  return SpherePoint(v / n);
}

SphereTangent::SphereTangent(SpherePoint base, Vector components)
    : base_(std::move(base)), components_(std::move(components)) {
  if (components_.size() != base_.size()) throw std::invalid_argument("SphereTangent: dimension mismatch");
  if (!components_.allFinite()) throw std::invalid_argument("SphereTangent: non-finite component");
  const double scale = std::max(1.0, components_.norm());
  if (std::abs(base_.coords().dot(components_)) > 1e-10 * scale) {
    throw std::invalid_argument("SphereTangent: components not orthogonal to the base point");
  }
}

double geodesic_distance(const SpherePoint& s, const SpherePoint& t) {
  if (s.size() != t.size()) throw std::invalid_argument("geodesic_distance: dimension mismatch");
  return 2.0 * std::atan2((s.coords() - t.coords()).norm(), (s.coords() + t.coords()).norm());
}

SpherePoint exp_map_sphere(const SpherePoint& s, const SphereTangent& w) {
  if (!(w.base() == s)) throw std::invalid_argument("exp_map_sphere: tangent based elsewhere");
  const double n = w.norm();
  if (n == 0.0) return s;
  // sin(n)/n with its series near zero.
  const double sinc = n < 1e-8 ? 1.0 - n * n / 6.0 : std::sin(n) / n;
  const Vector out = std::cos(n) * s.coords() + sinc * w.components();
  return SpherePoint::normalized(out);
}

SphereTangent log_map_sphere(const SpherePoint& s, const SpherePoint& t) {
  if (s.size() != t.size()) throw std::invalid_argument("log_map_sphere: dimension mismatch");
  const double c = s.coords().dot(t.coords());
  if (c < -1.0 + 1e-12) throw std::domain_error("log_map_sphere: antipodal points");
  const double theta = geodesic_distance(s, t);
  Vector u = t.coords() - c * s.coords();
  u -= s.coords().dot(u) * s.coords();
  const double un = u.norm();
  if (theta == 0.0 || un == 0.0) return SphereTangent(s, Vector::Zero(s.size()));
  return SphereTangent(s, (theta / un) * u);
}

SphereTangent tangent_project_sphere(const SpherePoint& s, const Vector& u) {
  if (u.size() != s.size()) throw std::invalid_argument("tangent_project_sphere: dimension mismatch");
  Vector p = u - s.coords().dot(u) * s.coords();
  p -= s.coords().dot(p) * s.coords();
  return SphereTangent(s, std::move(p));
}

SpherePoint orthant_retract(const Vector& s) {
  if (!s.allFinite()) throw std::invalid_argument("orthant_retract: non-finite input");
  const Vector c = s.cwiseMax(0.0);
  const double n = c.norm();
  if (!(n > 0.0)) throw std::domain_error("orthant_retract: no positive entry to retract onto");
  return SpherePoint(c / n);
}

}  // namespace simplexbo
