#pragma once

#include "simplexbo/simplex_geometry.hpp"

namespace simplexbo {

/// Unit vector in R^{d+1}.
class SpherePoint {
 public:
  /// Requires ‖coords‖ = 1 within 1e-10.
  explicit SpherePoint(Vector coords);
  static SpherePoint normalized(const Vector& v);

  int dim() const { return static_cast<int>(coords_.size()) - 1; }
  Eigen::Index size() const { return coords_.size(); }
  const Vector& coords() const { return coords_; }
  double operator[](Eigen::Index i) const { return coords_[i]; }
  bool in_orthant() const { return coords_.minCoeff() >= -1e-12; }

  bool operator==(const SpherePoint& other) const { return coords_ == other.coords_; }

 private:
  Vector coords_;
};

/// Tangent vector at `base`, orthogonal to it.
class SphereTangent {
 public:
  SphereTangent(SpherePoint base, Vector components);

  const SpherePoint& base() const { return base_; }
  const Vector& components() const { return components_; }
  double norm() const { return components_.norm(); }

  SphereTangent operator*(double s) const { return SphereTangent(base_, components_ * s); }

 private:
  SpherePoint base_;
  Vector components_;
};

/// Great-circle distance in radians, computed as 2·atan2(‖s−s′‖, ‖s+s′‖)
/// (equal to arccos(s·s′) without its cancellation near 0 and π).
double geodesic_distance(const SpherePoint& s, const SpherePoint& t);

SpherePoint exp_map_sphere(const SpherePoint& s, const SphereTangent& w);

/// Throws std::domain_error when s·t < −1 + 1e-12.
SphereTangent log_map_sphere(const SpherePoint& s, const SpherePoint& t);

SphereTangent tangent_project_sphere(const SpherePoint& s, const Vector& u);

/// Clamp negative entries to zero and renormalize. Throws std::domain_error
/// when nothing positive remains.
SpherePoint orthant_retract(const Vector& s);

}  // namespace simplexbo
