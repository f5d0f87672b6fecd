#include "simplexbo/simplex_geometry.hpp"
#include "simplexbo/sphere_geometry.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace simplexbo;
using namespace simplexbo::testing;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

double max_abs(const Vector& v) { return v.cwiseAbs().maxCoeff(); }

// Smooth test function F(x) = Σ a_i sin(b_i x_i) + (c·x)² with its gradient.
struct SmoothFn {
  Vector a, b, c;
  double operator()(const Vector& x) const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) s += a[i] * std::sin(b[i] * x[i]);
    const double l = c.dot(x);
    return s + l * l;
  }
  Vector grad(const Vector& x) const {
    Vector g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) g[i] = a[i] * b[i] * std::cos(b[i] * x[i]);
    return g + 2.0 * c.dot(x) * c;
  }
};

SmoothFn random_smooth(std::mt19937_64& rng, Eigen::Index n) {
  return {random_normal(rng, n), random_normal(rng, n) * 2.0, random_normal(rng, n)};
}

// Quadratic F(x) = ½xᵀAx + bᵀx.
struct Quadratic {
  Eigen::MatrixXd A;
  Vector b;
  Vector grad(const Vector& x) const { return A * x + b; }
};

Quadratic random_quadratic(std::mt19937_64& rng, Eigen::Index n) {
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index j = 0; j < n; ++j) m.col(j) = random_normal(rng, n);
  return {m + m.transpose(), random_normal(rng, n)};
}

}  // namespace

TEST(SphereMap, VertexAndHalfPoint) {
  EXPECT_EQ(sphere_map(SimplexPoint::vertex(2, 0), 2.0), vec({2, 0, 0}));
  const Vector s = sphere_map(SimplexPoint(vec({0.25, 0.25, 0.5})), 1.0);
  EXPECT_NEAR(s[0], 0.5, 1e-15);
  EXPECT_NEAR(s[1], 0.5, 1e-15);
  EXPECT_NEAR(s[2], 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(SphereMap, NormEqualsRadius) {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 100; ++k) {
    const SimplexPoint x = sample_uniform(rng, 4);
    EXPECT_NEAR(sphere_map(x, 1.0).norm(), 1.0, 1e-12);
    EXPECT_NEAR(sphere_map(x, 2.0).norm(), 2.0, 1e-12);
  }
}

TEST(SphereMap, Roundtrip) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 100; ++k) {
    const SimplexPoint x = sample_uniform(rng, 3);
    EXPECT_LE(max_abs(inv_sphere_map(sphere_map(x, 1.0), 1.0).coords() - x.coords()), 1e-14);
  }
}

TEST(InvSphereMap, FixedPoints) {
  EXPECT_EQ(inv_sphere_map(vec({1, 0, 0}), 1.0).coords(), vec({1, 0, 0}));
  const double r = 1.0 / std::sqrt(3.0);
  const SimplexPoint c = inv_sphere_map(vec({r, r, r}), 1.0);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(c[i], 1.0 / 3.0, 1e-15);
}

TEST(InvSphereMap, RejectsNegativeEntryAndWrongNorm) {
  EXPECT_THROW(inv_sphere_map(vec({std::sqrt(1.0 - 1e-14), -1e-7, 0.0}), 1.0), std::invalid_argument);
  EXPECT_THROW(inv_sphere_map(vec({1.0, 0.1, 0.0}), 1.0), std::invalid_argument);
}

TEST(FisherInner, HandValue) {
  const SimplexPoint x(vec({0.5, 0.5}));
  const TangentVector u(x, vec({1, -1}));
  EXPECT_DOUBLE_EQ(fisher_inner(x, u, u), 1.0);
}

TEST(FisherInner, Symmetric) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 100; ++k) {
    const SimplexPoint x = random_interior(rng, 3);
    const TangentVector u = random_tangent(rng, x), v = random_tangent(rng, x);
    const double a = fisher_inner(x, u, v);
    EXPECT_NEAR(a, fisher_inner(x, v, u), 1e-15 * std::max(1.0, std::abs(a)));
  }
}

TEST(FisherInner, MatchesPushforwardThroughHalfSphereMap) {
  // d(½φ)_x maps a score vector η to ½√x⊙η (measure velocity x⊙η over
  // 2√x); the unit-sphere metric of the image is a quarter of the Fisher one.
  std::mt19937_64 rng(4);
  for (int k = 0; k < 100; ++k) {
    const SimplexPoint x = random_interior(rng, 4);
    const TangentVector u = random_tangent(rng, x), v = random_tangent(rng, x);
    const Vector sx = x.coords().cwiseSqrt();
    const double sphere = (0.5 * sx.cwiseProduct(u.components())).dot(0.5 * sx.cwiseProduct(v.components()));
    const double fisher = fisher_inner(x, u, v);
    EXPECT_NEAR(4.0 * sphere, fisher, 1e-10 * std::max(1.0, std::abs(fisher)));
  }
}

TEST(FisherInner, RejectsForeignBase) {
  const SimplexPoint x(vec({0.5, 0.5})), y(vec({0.25, 0.75}));
  const TangentVector u(y, vec({3, -1}));
  EXPECT_THROW(fisher_inner(x, u, u), std::invalid_argument);
}

TEST(TangentProject, Examples) {
  const SimplexPoint half(vec({0.5, 0.5}));
  EXPECT_LE(max_abs(tangent_project(half, vec({1, 1})).components()), 1e-15);
  const SimplexPoint c = SimplexPoint::center(2);
  const TangentVector t = tangent_project(c, vec({3, 0, 0}));
  EXPECT_LE(max_abs(t.components() - vec({2, -1, -1})), 1e-14);
}

TEST(TangentProject, Idempotent) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 100; ++k) {
    const SimplexPoint x = random_interior(rng, 5);
    const TangentVector u = random_tangent(rng, x);
    EXPECT_LE(max_abs(tangent_project(x, u.components()).components() - u.components()), 1e-14);
    EXPECT_LE(std::abs(x.coords().dot(u.components())), 1e-10);
  }
}

TEST(NaturalGradient, ConstantAndCenterStationary) {
  const SimplexPoint c = SimplexPoint::center(2);
  EXPECT_LE(max_abs(natural_gradient(c, Vector::Constant(3, 7.5)).components()), 1e-14);
  // F = Σx_i² has DF = 2x, which is constant at the center.
  EXPECT_LE(max_abs(natural_gradient(c, 2.0 * c.coords()).components()), 1e-15);
}

TEST(NaturalGradient, DirectionalDerivativeMatchesFiniteDifferences) {
  std::mt19937_64 rng(6);
  for (int k = 0; k < 50; ++k) {
    const int d = 2 + k % 4;
    const SimplexPoint x = sample_uniform(rng, d).clamped_interior(0.02);
    const SmoothFn f = random_smooth(rng, d + 1);
    const TangentVector v = random_tangent(rng, x);
    const TangentVector g = natural_gradient(x, f.grad(x.coords()));
    EXPECT_LE(std::abs(x.coords().dot(g.components())), 1e-10);
    const double h = 1e-5;
    const double fd =
        (f(exp_map(x, v * h, 0.0).coords()) - f(exp_map(x, v * -h, 0.0).coords())) / (2.0 * h);
    const double inner = fisher_inner(x, g, v);
    EXPECT_NEAR(inner, fd, 1e-5 * std::max(1.0, std::abs(fd))) << "case " << k;
  }
}

TEST(AlphaHessian, ZeroDirection) {
  const SimplexPoint x = SimplexPoint::center(3);
  const GradientField field = [](const SimplexPoint& p) { return natural_gradient(p, p.coords()); };
  for (double alpha : {-1.0, -0.5, 0.0, 1.0}) {
    EXPECT_EQ(alpha_hessian_action(x, field, TangentVector::zero(x), alpha).components(), Vector::Zero(4));
  }
}

TEST(AlphaHessian, LeviCivitaMatchesSphereHessian) {
  // G(s) = F(s²/4) on the radius-2 sphere, tangent η ↦ w = √x⊙η. The sphere
  // Riemannian Hessian is P(∇²G w) − (s·∇G/4) w; map back by dividing by √x.
  std::mt19937_64 rng(7);
  for (int k = 0; k < 20; ++k) {
    const int d = 2 + k % 3;
    const SimplexPoint x = sample_uniform(rng, d).clamped_interior(0.05);
    const Quadratic q = random_quadratic(rng, d + 1);
    const TangentVector eta = random_tangent(rng, x);
    const GradientField field = [&q](const SimplexPoint& p) { return natural_gradient(p, q.grad(p.coords())); };
    const Vector got = alpha_hessian_action(x, field, eta, 0.0).components();

    const Vector s = 2.0 * x.coords().cwiseSqrt();
    const Vector df = q.grad(x.coords());
    const Vector grad_g = df.cwiseProduct(s) / 2.0;
    const Eigen::MatrixXd hess_g =
        Eigen::MatrixXd(df.asDiagonal()) / 2.0 + s.asDiagonal() * q.A * s.asDiagonal() / 4.0;
    const Vector w = x.coords().cwiseSqrt().cwiseProduct(eta.components());
    Vector h = hess_g * w;
    h -= s * (s.dot(h) / 4.0);
    h -= (s.dot(grad_g) / 4.0) * w;
    const Vector want = h.cwiseQuotient(x.coords().cwiseSqrt());
    EXPECT_LE((got - want).norm(), 1e-4 * std::max(1.0, want.norm())) << "case " << k;
  }
}

TEST(AlphaHessian, LeviCivitaSelfAdjoint) {
  std::mt19937_64 rng(8);
  for (int k = 0; k < 20; ++k) {
    const SimplexPoint x = sample_uniform(rng, 3).clamped_interior(0.05);
    const Quadratic q = random_quadratic(rng, 4);
    const GradientField field = [&q](const SimplexPoint& p) { return natural_gradient(p, q.grad(p.coords())); };
    const TangentVector eta = random_tangent(rng, x), xi = random_tangent(rng, x);
    const double a = fisher_inner(x, alpha_hessian_action(x, field, eta, 0.0), xi);
    const double b = fisher_inner(x, eta, alpha_hessian_action(x, field, xi, 0.0));
    EXPECT_NEAR(a, b, 1e-4 * std::max(1.0, std::abs(a)));
  }
}

TEST(AlphaHessian, RejectsNonFiniteField) {
  const SimplexPoint x = SimplexPoint::center(2);
  const GradientField bad = [](const SimplexPoint& p) {
    return natural_gradient(p, Vector::Constant(p.size(), std::nan("")));
  };
  const TangentVector eta = tangent_project(x, vec({1, 0, 0}));
  EXPECT_ANY_THROW(alpha_hessian_action(x, bad, eta, 0.0));
}

TEST(ExpMap, ZeroIsIdentity) {
  std::mt19937_64 rng(9);
  const SimplexPoint x = random_interior(rng, 3);
  for (double alpha : {-1.0, 0.0, 1.0}) {
    EXPECT_LE(max_abs(exp_map(x, TangentVector::zero(x), alpha).coords() - x.coords()), 1e-15);
  }
}

TEST(ExpMap, MixtureHandValue) {
  const SimplexPoint x(vec({0.5, 0.5}));
  const SimplexPoint y = exp_map(x, TangentVector(x, vec({1, -1})), 1.0);
  EXPECT_LE(max_abs(y.coords() - vec({1, 0})), 1e-15);
}

TEST(ExpMap, ExponentialConnectionStaysInterior) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> unif(-50.0, 50.0);
  for (int k = 0; k < 1000; ++k) {
    const int d = 2 + k % 9;
    const SimplexPoint x = random_interior(rng, d);
    Vector u(d + 1);
    for (auto& v : u) v = unif(rng);
    // Shift into the tangent space while keeping ‖η‖_∞ ≤ 50.
    TangentVector eta = tangent_project(x, u);
    const double inf_norm = max_abs(eta.components());
    if (inf_norm > 50.0) eta = eta * (50.0 / inf_norm);
    const SimplexPoint y = exp_map(x, eta, -1.0);
    EXPECT_GT(y.coords().minCoeff(), 0.0);
    EXPECT_NEAR(y.coords().sum(), 1.0, 1e-12);
  }
}

TEST(ExpMap, DomainViolationAndUnsupportedAlpha) {
  const SimplexPoint x(vec({0.5, 0.5}));
  EXPECT_THROW(exp_map(x, TangentVector(x, vec({3, -3})), 1.0), DomainViolation);
  EXPECT_THROW(exp_map(x, TangentVector(x, vec({0.1, -0.1})), 0.5), std::invalid_argument);
  EXPECT_FALSE(try_exp_map(x, TangentVector(x, vec({3, -3})), 1.0).has_value());
}

TEST(LogMap, SelfIsZero) {
  std::mt19937_64 rng(11);
  const SimplexPoint x = random_interior(rng, 4);
  EXPECT_LE(max_abs(log_map_alpha0(x, x).components()), 1e-12);
}

TEST(LogMap, CenterToVertexLength) {
  for (int d : {1, 2, 5, 10}) {
    const SimplexPoint c = SimplexPoint::center(d);
    const double want = 2.0 * std::acos(1.0 / std::sqrt(d + 1.0));
    EXPECT_NEAR(fisher_norm(log_map_alpha0(c, SimplexPoint::vertex(d, 0))), want, 1e-12);
  }
}

TEST(LogMap, ExpLogRoundtrip) {
  std::mt19937_64 rng(12);
  for (int k = 0; k < 500; ++k) {
    const int d = 2 + k % 5;
    const SimplexPoint x = random_interior(rng, d);
    const SimplexPoint y = sample_uniform(rng, d);
    const SimplexPoint back = exp_map(x, log_map_alpha0(x, y), 0.0);
    EXPECT_LE(max_abs(back.coords() - y.coords()), 1e-8);
  }
}

TEST(LogMap, NormIsFisherRaoDistance) {
  std::mt19937_64 rng(13);
  for (int d : {2, 5, 10}) {
    for (int k = 0; k < 1000; ++k) {
      const SimplexPoint x = random_interior(rng, d);
      const SimplexPoint y = sample_uniform(rng, d);
      const double norm = fisher_norm(log_map_alpha0(x, y));
      EXPECT_NEAR(norm, bhattacharyya_distance(x, y), 1e-9);
      const double arc = geodesic_distance(SpherePoint(sphere_map(x, 1.0)), SpherePoint(sphere_map(y, 1.0)));
      EXPECT_NEAR(norm, 2.0 * arc, 1e-9);
      EXPECT_NEAR(fisher_rao_distance(x, y), norm, 1e-9);
    }
  }
}

TEST(LogMap, RejectsBoundaryBase) {
  const SimplexPoint x(vec({1, 0, 0}));
  EXPECT_THROW(log_map_alpha0(x, SimplexPoint::center(2)), std::invalid_argument);
}

TEST(ProjectToSimplex, Examples) {
  const SimplexPoint p = project_to_simplex(vec({0.5, 0.5, 0.5}));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(p[i], 1.0 / 3.0, 1e-15);
  const Vector inside = vec({0.2, 0.3, 0.5});
  EXPECT_LE(max_abs(project_to_simplex(inside).coords() - inside), 1e-15);
}

TEST(ProjectToSimplex, MatchesGridSearch) {
  std::mt19937_64 rng(14);
  for (int k = 0; k < 50; ++k) {
    const Vector u = random_normal(rng, 3);
    // Grid over the (x_0, x_1) triangle, refined twice around the winner.
    auto search = [&u](double a0, double b0, double span, int steps) {
      double best = INFINITY, ba = a0, bb = b0;
      for (int i = 0; i <= steps; ++i) {
        for (int j = 0; j <= steps; ++j) {
          const double a = std::max(0.0, a0 - span + 2.0 * span * i / steps);
          const double b = std::max(0.0, b0 - span + 2.0 * span * j / steps);
          if (a + b > 1) continue;
          const double e0 = u[0] - a, e1 = u[1] - b, e2 = u[2] - (1 - a - b);
          const double e = e0 * e0 + e1 * e1 + e2 * e2;
          if (e < best) best = e, ba = a, bb = b;
        }
      }
      return std::pair{ba, bb};
    };
    auto [a, b] = search(0.5, 0.5, 0.5, 200);
    std::tie(a, b) = search(a, b, 1e-2, 400);
    std::tie(a, b) = search(a, b, 1e-4, 400);
    const SimplexPoint p = project_to_simplex(u);
    EXPECT_LE(max_abs(p.coords() - vec({a, b, 1 - a - b})), 1e-6) << "case " << k;
  }
}

TEST(ProjectToSimplex, NoSimplexPointIsCloser) {
  std::mt19937_64 rng(15);
  for (int k = 0; k < 20; ++k) {
    const Vector u = random_normal(rng, 5) * 2.0;
    const double dist = (u - project_to_simplex(u).coords()).norm();
    for (int j = 0; j < 1000; ++j) {
      EXPECT_LE(dist, (u - sample_uniform(rng, 4).coords()).norm() + 1e-12);
    }
  }
}

TEST(SampleUniform, DirichletMean) {
  std::mt19937_64 rng(16);
  const int d = 3, draws = 100000;
  Vector mean = Vector::Zero(d + 1);
  for (int k = 0; k < draws; ++k) mean += sample_uniform(rng, d).coords();
  mean /= draws;
  // Var of a flat Dirichlet coordinate: (1/(d+1))(1 − 1/(d+1)) / (d+2).
  const double p = 1.0 / (d + 1);
  const double se = std::sqrt(p * (1 - p) / (d + 2) / draws);
  for (int i = 0; i <= d; ++i) EXPECT_NEAR(mean[i], p, 3.0 * se);
}

TEST(SampleUniform, SeedDeterminism) {
  std::mt19937_64 a(17), b(17);
  for (int k = 0; k < 50; ++k) EXPECT_EQ(sample_uniform(a, 4), sample_uniform(b, 4));
}

TEST(BlendWeights, IdenticalColumns) {
  const SimplexPoint p(vec({0.1, 0.2, 0.7}));
  const WeightMatrix w({p, p, p}, {0.0, 1.0, 2.0}, {0.5, 0.5, 0.5});
  for (double t : {-1.0, 0.3, 1.5, 3.0}) EXPECT_LE(max_abs(blend_weights(w, t).coords() - p.coords()), 1e-15);
}

TEST(BlendWeights, NarrowWidthsPickNearestColumn) {
  const SimplexPoint a(vec({0.6, 0.3, 0.1})), b(vec({0.1, 0.1, 0.8}));
  const WeightMatrix w({a, b}, {0.0, 0.1}, {1e-3, 1e-3});
  EXPECT_LE(max_abs(blend_weights(w, 0.0).coords() - a.coords()), 1e-6);
}

TEST(BlendWeights, ConvexCombinationSumsToOne) {
  std::mt19937_64 rng(18);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const int n = 2 + k % 6, cols = 1 + k % 5;
    std::vector<SimplexPoint> columns;
    std::vector<double> mus, sigmas;
    for (int j = 0; j < cols; ++j) {
      columns.push_back(sample_uniform(rng, n - 1));
      mus.push_back(unif(rng));
      sigmas.push_back(0.05 + unif(rng));
    }
    const WeightMatrix w(columns, mus, sigmas);
    const double t = -0.5 + 2.0 * unif(rng);
    const SimplexPoint alpha = blend_weights(w, t);
    EXPECT_NEAR(alpha.coords().sum(), 1.0, 1e-12);
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
      double lo = 1.0, hi = 0.0;
      for (const auto& c : columns) lo = std::min(lo, c[i]), hi = std::max(hi, c[i]);
      EXPECT_GE(alpha[i], lo - 1e-15);
      EXPECT_LE(alpha[i], hi + 1e-15);
    }
  }
}

TEST(BlendWeights, RejectsUnderflow) {
  const WeightMatrix w({SimplexPoint::center(2)}, {0.0}, {1e-3});
  EXPECT_THROW(blend_weights(w, 10.0), std::domain_error);
}
