#include "simplexbo/kernels.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace simplexbo {

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::spherical_matern: return "spherical_matern";
    case KernelFamily::spherical_se: return "spherical_se";
    case KernelFamily::euclid_matern: return "euclid_matern";
    case KernelFamily::euclid_se: return "euclid_se";
  }
  return "unknown";
}

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "spherical_matern") return KernelFamily::spherical_matern;
  if (name == "spherical_se") return KernelFamily::spherical_se;
  if (name == "euclid_matern") return KernelFamily::euclid_matern;
  if (name == "euclid_se") return KernelFamily::euclid_se;
  throw std::invalid_argument("unknown kernel family: " + name);
}

// ---------------------------------------------------------------------------
// KernelSpec

KernelSpec KernelSpec::spherical_se(int dim, double lengthscale, double variance, int truncation) {
  KernelSpec s;
  s.family = KernelFamily::spherical_se;
  s.dim = dim;
  s.lengthscale = lengthscale;
  s.variance = variance;
  s.truncation = truncation;
  s.validate();
  return s;
}

KernelSpec KernelSpec::spherical_matern(int dim, double nu, double lengthscale, double variance,
                                        int truncation) {
  KernelSpec s = spherical_se(dim, lengthscale, variance, truncation);
  s.family = KernelFamily::spherical_matern;
  s.nu = nu;
  s.validate();
  return s;
}

KernelSpec KernelSpec::euclid_se(int dim, double lengthscale, double variance) {
  KernelSpec s;
  s.family = KernelFamily::euclid_se;
  s.dim = dim;
  s.lengthscale = lengthscale;
  s.variance = variance;
  s.validate();
  return s;
}

KernelSpec KernelSpec::euclid_matern(int dim, double nu, double lengthscale, double variance) {
  KernelSpec s = euclid_se(dim, lengthscale, variance);
  s.family = KernelFamily::euclid_matern;
  s.nu = nu;
  s.validate();
  return s;
}

void KernelSpec::validate() const {
  if (!(lengthscale > 0.0) || !std::isfinite(lengthscale)) {
    throw std::invalid_argument("KernelSpec: lengthscale must be positive");
  }
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw std::invalid_argument("KernelSpec: variance must be positive");
  }
  if (dim < 1) throw std::invalid_argument("KernelSpec: dim must be >= 1");
  if (spherical() && truncation < 1) throw std::invalid_argument("KernelSpec: truncation must be >= 1");
  if (family == KernelFamily::spherical_se || family == KernelFamily::euclid_se) {
    if (!std::isinf(nu)) throw std::invalid_argument("KernelSpec: SE families require nu = inf");
  } else if (!(std::isinf(nu) || nu == 0.5 || nu == 1.5 || nu == 2.5)) {
    throw std::invalid_argument("KernelSpec: Matérn nu must be 1/2, 3/2, 5/2 or inf");
  }
}

// ---------------------------------------------------------------------------
// Series ingredients

double gegenbauer(int n, double lambda, double t) {
  if (n < 0) throw std::invalid_argument("gegenbauer: n must be >= 0");
  if (!(lambda > 0.0)) throw std::invalid_argument("gegenbauer: lambda must be positive");
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = 2.0 * lambda * t;
  for (int k = 2; k <= n; ++k) {
    const double next = (2.0 * t * (k + lambda - 1.0) * cur - (k + 2.0 * lambda - 2.0) * prev) / k;
    prev = cur;
    cur = next;
  }
  return cur;
}

namespace {

double laplace_eigenvalue(int n, int d) { return static_cast<double>(n) * (n + d - 1); }

double log_spectral_coeff(int n, const KernelSpec& spec) {
  const double lam = laplace_eigenvalue(n, spec.dim);
  const double k2 = spec.lengthscale * spec.lengthscale;
  if (spec.squared_exponential()) return -0.5 * k2 * lam;
  return -(spec.nu + 0.5 * spec.dim) * std::log(2.0 * spec.nu / k2 + lam);
}

// Values of the zonal basis at t for n = 0..m-1: Gegenbauer C_n^((d-1)/2)
// for d >= 2; for d = 1 the Chebyshev limit (1, 2cos nθ, ...) with the
// factor 2 moved into the weights, so the basis is T_n(t).
template <typename Out>
void zonal_basis(int d, double t, int m, Out&& out) {
  if (m <= 0) return;
  out(0, 1.0);
  if (m == 1) return;
  if (d == 1) {
    double prev = 1.0, cur = t;
    out(1, cur);
    for (int k = 2; k < m; ++k) {
      const double next = 2.0 * t * cur - prev;
      prev = cur;
      cur = next;
      out(k, cur);
    }
    return;
  }
  const double lambda = 0.5 * (d - 1);
  double prev = 1.0, cur = 2.0 * lambda * t;
  out(1, cur);
  for (int k = 2; k < m; ++k) {
    const double next = (2.0 * t * (k + lambda - 1.0) * cur - (k + 2.0 * lambda - 2.0) * prev) / k;
    prev = cur;
    cur = next;
    out(k, cur);
  }
}

double addition_coeff(int n, int d) {
  if (d == 1) return n == 0 ? 1.0 : 2.0;
  return (2.0 * n + d - 1.0) / (d - 1.0);
}

}  // namespace

double spectral_coeff(int n, const KernelSpec& spec) {
  if (n < 0) throw std::invalid_argument("spectral_coeff: n must be >= 0");
  spec.validate();
  return std::exp(log_spectral_coeff(n, spec));
}

// ---------------------------------------------------------------------------
// Kernel

Kernel::Kernel(const KernelSpec& spec) : spec_(spec) {
  spec_.validate();
  if (!spec_.spherical()) return;

  const int m = spec_.truncation + 1;
  const double log_rho0 = log_spectral_coeff(0, spec_);
  std::vector<double> raw(m);
  std::vector<double> at_one(m);
  zonal_basis(spec_.dim, 1.0, m, [&](int k, double v) { at_one[k] = v; });
  double total = 0.0;
  for (int n = 0; n < m; ++n) {
    raw[n] = addition_coeff(n, spec_.dim) * std::exp(log_spectral_coeff(n, spec_) - log_rho0);
    total += raw[n] * at_one[n];
  }
  if (!std::isfinite(total) || !(total > 0.0)) {
    throw std::runtime_error("Kernel: non-finite spherical series normalization");
  }
  // |C_n(t)| <= C_n(1), so trailing terms whose cumulative bound is below
  // 1e-17 of the total cannot change a double-precision result.
  int keep = m;
  double tail = 0.0;
  while (keep > 1) {
    tail += raw[keep - 1] * at_one[keep - 1];
    if (tail > 1e-17 * total) break;
    --keep;
  }
  weights_.resize(keep);
  for (int n = 0; n < keep; ++n) weights_[n] = spec_.variance * raw[n] / total;
}

double Kernel::from_cosine(double t) const {
  double acc = 0.0;
  const double* w = weights_.data();
  zonal_basis(spec_.dim, t, static_cast<int>(weights_.size()), [&](int k, double v) { acc += w[k] * v; });
  if (!std::isfinite(acc)) throw std::runtime_error("Kernel: non-finite series value");
  return acc;
}

double Kernel::from_sq_distance(double r2) const {
  const double k = spec_.lengthscale;
  if (spec_.squared_exponential()) return spec_.variance * std::exp(-0.5 * r2 / (k * k));
  const double r = std::sqrt(std::max(r2, 0.0));
  if (spec_.nu == 0.5) return spec_.variance * std::exp(-r / k);
  if (spec_.nu == 1.5) {
    const double a = std::sqrt(3.0) * r / k;
    return spec_.variance * (1.0 + a) * std::exp(-a);
  }
  const double a = std::sqrt(5.0) * r / k;
  return spec_.variance * (1.0 + a + a * a / 3.0) * std::exp(-a);
}

double Kernel::operator()(const Vector& a, const Vector& b) const {
  if (spec_.spherical()) return from_cosine(std::clamp(a.dot(b), -1.0, 1.0));
  return from_sq_distance((a - b).squaredNorm());
}

double sphere_kernel(const SpherePoint& s, const SpherePoint& t, const KernelSpec& spec) {
  if (!spec.spherical()) throw std::invalid_argument("sphere_kernel: spherical family required");
  if (s.size() != t.size() || s.dim() != spec.dim) {
    throw std::invalid_argument("sphere_kernel: dimension mismatch");
  }
  return Kernel(spec)(s.coords(), t.coords());
}

double simplex_kernel(const SimplexPoint& x, const SimplexPoint& y, const KernelSpec& spec) {
  return sphere_kernel(SpherePoint::normalized(sphere_map(x, 1.0)),
                       SpherePoint::normalized(sphere_map(y, 1.0)), spec);
}

double euclid_kernel(const Vector& a, const Vector& b, const KernelSpec& spec) {
  if (spec.spherical()) throw std::invalid_argument("euclid_kernel: Euclidean family required");
  if (a.size() != b.size()) throw std::invalid_argument("euclid_kernel: dimension mismatch");
  return Kernel(spec)(a, b);
}

// ---------------------------------------------------------------------------
// Gram matrices

namespace {

bool try_factor(const Eigen::MatrixXd& matrix, double diag, Eigen::MatrixXd* lower) {
  Eigen::MatrixXd a = matrix;
  a.diagonal().array() += diag;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success || !(llt.matrixLLT().diagonal().minCoeff() > 0.0)) return false;
  if (lower) *lower = llt.matrixL();
  return true;
}

}  // namespace

StableCholesky stable_cholesky(const Eigen::MatrixXd& matrix, double base_diag, double variance) {
  double jitter = 1e-10 * variance;
  for (int step = 0; step <= 6; ++step, jitter *= 10.0) {
    Eigen::MatrixXd lower;
    if (try_factor(matrix, base_diag + jitter, &lower)) return {std::move(lower), jitter};
  }
  throw std::runtime_error("stable_cholesky: matrix not positive definite after jitter escalation");
}

GramMatrix gram(const std::vector<Vector>& points, const KernelSpec& spec, double jitter) {
  if (points.empty()) throw std::invalid_argument("gram: need at least one point");
  if (!(jitter >= 0.0)) throw std::invalid_argument("gram: jitter must be nonnegative");
  const Kernel kernel(spec);
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      k(i, j) = kernel(points[i], points[j]);
      k(j, i) = k(i, j);
    }
  }
  const double cap = 1e-4 * spec.variance * (1.0 + 1e-12);
  double used = jitter;
  while (!try_factor(k, used, nullptr)) {
    used = std::max(used * 10.0, 1e-10 * spec.variance);
    if (used > cap) throw std::runtime_error("gram: Cholesky failed after jitter escalation");
  }
  k.diagonal().array() += used;
  return {std::move(k), spec, used};
}

GramCache::GramCache(const std::vector<Vector>& features, KernelFamily family, int dim, int truncation)
    : n_(static_cast<Eigen::Index>(features.size())), spherical_(is_spherical(family)), truncation_(truncation) {
  const Eigen::Index pairs = n_ * (n_ + 1) / 2;
  table_.resize(pairs, spherical_ ? truncation_ + 1 : 1);
  Eigen::Index p = 0;
  for (Eigen::Index i = 0; i < n_; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j, ++p) {
      if (spherical_) {
        const double t = std::clamp(features[i].dot(features[j]), -1.0, 1.0);
        zonal_basis(dim, t, truncation_ + 1, [&](int k, double v) { table_(p, k) = v; });
      } else {
        table_(p, 0) = (features[i] - features[j]).squaredNorm();
      }
    }
  }
}

Eigen::MatrixXd GramCache::assemble(const Kernel& kernel) const {
  Eigen::VectorXd values;
  if (spherical_) {
    const auto& w = kernel.series_weights();
    const auto m = static_cast<Eigen::Index>(std::min<std::size_t>(w.size(), truncation_ + 1));
    values = table_.leftCols(m) * Eigen::Map<const Eigen::VectorXd>(w.data(), m);
  } else {
    values = table_.col(0).unaryExpr([&](double r2) { return kernel.from_sq_distance(r2); });
  }
  Eigen::MatrixXd k(n_, n_);
  Eigen::Index p = 0;
  for (Eigen::Index i = 0; i < n_; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j, ++p) {
      k(i, j) = values[p];
      k(j, i) = values[p];
    }
  }
  return k;
}

}  // namespace simplexbo
