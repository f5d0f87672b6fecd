#include "simplexbo/kernels.hpp"
#include "test_util.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace simplexbo;
using namespace simplexbo::testing;

namespace {

std::vector<KernelSpec> spherical_grid(int dim) {
  std::vector<KernelSpec> out;
  for (double kappa : {0.1, 0.3, 0.7, 2.0}) {
    out.push_back(KernelSpec::spherical_se(dim, kappa, 1.7));
    for (double nu : {0.5, 1.5, 2.5}) out.push_back(KernelSpec::spherical_matern(dim, nu, kappa, 0.4));
  }
  return out;
}

double min_over_max_eig(const Eigen::MatrixXd& k) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() / es.eigenvalues().maxCoeff();
}

std::vector<Vector> sphere_features(std::mt19937_64& rng, int d, int n) {
  std::vector<Vector> pts;
  for (int i = 0; i < n; ++i) pts.push_back(sphere_map(sample_uniform(rng, d), 1.0));
  return pts;
}

// Normalized zonal series with explicitly written basis functions:
// d = 1 cosines, d = 2 Legendre polynomials, d = 3 Chebyshev U.
double series_oracle(const KernelSpec& spec, double theta) {
  double num = 0.0, den = 0.0;
  for (int n = 0; n <= spec.truncation; ++n) {
    const double rho = spectral_coeff(n, spec);
    double at = 0.0, at0 = 0.0;
    switch (spec.dim) {
      case 1:
        at = n == 0 ? 1.0 : 2.0 * std::cos(n * theta);
        at0 = n == 0 ? 1.0 : 2.0;
        break;
      case 2:
        at = (2 * n + 1) * std::legendre(n, std::cos(theta));
        at0 = 2 * n + 1;
        break;
      case 3:
        at = (n + 1) * std::sin((n + 1) * theta) / std::sin(theta);
        at0 = (n + 1) * (n + 1);
        break;
    }
    num += rho * at;
    den += rho * at0;
  }
  return spec.variance * num / den;
}

}  // namespace

TEST(Gegenbauer, LowOrders) {
  for (double lambda : {0.5, 1.0, 3.5}) {
    for (double t : {-0.7, 0.0, 0.4}) EXPECT_EQ(gegenbauer(0, lambda, t), 1.0);
  }
  EXPECT_DOUBLE_EQ(gegenbauer(1, 1.0, 0.5), 1.0);
}

TEST(Gegenbauer, HalfIsLegendre) {
  for (double t : {-1.0, 0.0, 0.3, 1.0}) {
    const double p3 = (5 * t * t * t - 3 * t) / 2;
    EXPECT_NEAR(gegenbauer(3, 0.5, t), p3, 1e-12 * std::max(1.0, std::abs(p3)));
  }
  for (int n = 0; n <= 40; ++n) {
    for (double t : {-0.9, -0.2, 0.55, 0.99}) {
      EXPECT_NEAR(gegenbauer(n, 0.5, t), std::legendre(n, t), 1e-12);
    }
  }
}

TEST(Gegenbauer, OneIsChebyshevU) {
  for (int n = 0; n <= 40; ++n) {
    for (double theta : {0.3, 1.1, 2.5}) {
      const double u = std::sin((n + 1) * theta) / std::sin(theta);
      EXPECT_NEAR(gegenbauer(n, 1.0, std::cos(theta)), u, 1e-11 * std::max(1.0, std::abs(u)));
    }
  }
}

TEST(Gegenbauer, RejectsNonPositiveLambda) {
  EXPECT_THROW(gegenbauer(2, 0.0, 0.5), std::invalid_argument);
}

TEST(SpectralCoeff, SeAtZeroIsOne) {
  EXPECT_EQ(spectral_coeff(0, KernelSpec::spherical_se(3, 0.4)), 1.0);
}

TEST(SpectralCoeff, StrictlyDecreasing) {
  for (int d : {1, 2, 5, 10}) {
    for (const auto& spec : spherical_grid(d)) {
      for (int n = 0; n <= 100; ++n) {
        const double a = spectral_coeff(n, spec), b = spectral_coeff(n + 1, spec);
        // SE weights underflow to zero far out for large κ; Matérn ones never do.
        if (!spec.squared_exponential()) EXPECT_GT(b, 0.0);
        if (b > 0.0) EXPECT_GT(a, b) << to_string(spec.family) << " d=" << d << " n=" << n;
        EXPECT_GE(b, 0.0);
      }
    }
  }
}

TEST(SpectralCoeff, SmallerLengthscaleDecaysSlower) {
  const auto narrow = KernelSpec::spherical_se(2, 0.2), wide = KernelSpec::spherical_se(2, 0.8);
  for (int n : {1, 5, 10}) {
    EXPECT_GT(spectral_coeff(n, narrow) / spectral_coeff(0, narrow), spectral_coeff(n, wide) / spectral_coeff(0, wide));
  }
}

TEST(SphereKernel, MatchesExplicitZonalSeries) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> angle(0.05, 3.0);
  for (int d : {1, 2, 3}) {
    for (const auto& spec : spherical_grid(d)) {
      const Kernel k(spec);
      for (int i = 0; i < 10; ++i) {
        const double theta = angle(rng);
        EXPECT_NEAR(k.from_cosine(std::cos(theta)), series_oracle(spec, theta), 1e-10 * spec.variance)
            << to_string(spec.family) << " d=" << d << " kappa=" << spec.lengthscale;
      }
    }
  }
}

TEST(SphereKernel, NormalizedAndSymmetric) {
  std::mt19937_64 rng(2);
  for (int d : {1, 2, 5, 10}) {
    for (const auto& spec : spherical_grid(d)) {
      const SpherePoint s = random_sphere(rng, d);
      EXPECT_NEAR(sphere_kernel(s, s, spec), spec.variance, 1e-10);
    }
  }
  const auto spec = KernelSpec::spherical_matern(4, 2.5, 0.6, 2.0);
  for (int k = 0; k < 1000; ++k) {
    const SpherePoint a = random_sphere(rng, 4), b = random_sphere(rng, 4);
    EXPECT_NEAR(sphere_kernel(a, b, spec), sphere_kernel(b, a, spec), 1e-12);
  }
}

TEST(SphereKernel, RandomHyperparametersNormalized) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> log_k(std::log(0.05), std::log(10.0)), log_v(std::log(1e-3), std::log(1e3));
  for (int k = 0; k < 100; ++k) {
    const int d = 1 + k % 10;
    const double kappa = std::exp(log_k(rng)), var = std::exp(log_v(rng));
    const KernelSpec spec =
        k % 2 ? KernelSpec::spherical_se(d, kappa, var) : KernelSpec::spherical_matern(d, 2.5, kappa, var);
    const SpherePoint s = random_sphere(rng, d);
    EXPECT_NEAR(sphere_kernel(s, s, spec), var, 1e-10 * std::max(1.0, var));
    const Vector a = random_normal(rng, d + 1);
    const KernelSpec es = k % 2 ? KernelSpec::euclid_se(d, kappa, var) : KernelSpec::euclid_matern(d, 2.5, kappa, var);
    EXPECT_EQ(euclid_kernel(a, a, es), var);
  }
}

TEST(SphereKernel, RotationInvariant) {
  std::mt19937_64 rng(4);
  const auto spec = KernelSpec::spherical_se(3, 0.5);
  for (int k = 0; k < 100; ++k) {
    Eigen::MatrixXd m(4, 4);
    for (int j = 0; j < 4; ++j) m.col(j) = random_normal(rng, 4);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(m).householderQ();
    const SpherePoint a = random_sphere(rng, 3), b = random_sphere(rng, 3);
    const SpherePoint ra = SpherePoint::normalized(q * a.coords()), rb = SpherePoint::normalized(q * b.coords());
    EXPECT_NEAR(sphere_kernel(a, b, spec), sphere_kernel(ra, rb, spec), 1e-10);
  }
}

TEST(SphereKernel, PositiveSemidefiniteGram) {
  std::mt19937_64 rng(5);
  for (int d : {2, 5, 10}) {
    const auto pts = sphere_features(rng, d, 50);
    for (bool se : {true, false}) {
      std::uniform_real_distribution<double> kap(0.1, 3.0), var(0.1, 10.0);
      for (int r = 0; r < 10; ++r) {
        const KernelSpec spec = se ? KernelSpec::spherical_se(d, kap(rng), var(rng))
                                   : KernelSpec::spherical_matern(d, 2.5, kap(rng), var(rng));
        EXPECT_GE(min_over_max_eig(gram(pts, spec, 0.0).values), -1e-8);
      }
    }
  }
  // Full sphere rather than the orthant.
  std::vector<Vector> full;
  for (int i = 0; i < 50; ++i) full.push_back(random_sphere(rng, 5).coords());
  EXPECT_GE(min_over_max_eig(gram(full, KernelSpec::spherical_se(5, 0.5), 0.0).values), -1e-8);
}

TEST(SphereKernel, TruncationConverges) {
  std::mt19937_64 rng(6);
  for (int d : {1, 2, 5, 10}) {
    for (double kappa : {0.3, 0.5, 1.0, 3.0}) {
      auto lo = KernelSpec::spherical_se(d, kappa, 2.0, 64), hi = KernelSpec::spherical_se(d, kappa, 2.0, 128);
      const Kernel k64(lo), k128(hi);
      for (int i = 0; i < 50; ++i) {
        const double t = std::clamp(random_sphere(rng, d).coords().dot(random_sphere(rng, d).coords()), -1.0, 1.0);
        EXPECT_LE(std::abs(k64.from_cosine(t) - k128.from_cosine(t)), 1e-6 * 2.0);
      }
    }
  }
}

TEST(SphereKernel, LengthscaleMonotone) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 20; ++k) {
    const int d = 1 + k % 5;
    const SpherePoint a = random_sphere(rng, d), b = random_sphere(rng, d);
    double prev = -INFINITY;
    for (double kappa = 0.1; kappa <= 3.0; kappa += 0.05) {
      const double v = sphere_kernel(a, b, KernelSpec::spherical_se(d, kappa));
      EXPECT_GE(v, prev - 1e-10);
      prev = v;
    }
  }
}

TEST(SimplexKernel, PullbackProperties) {
  std::mt19937_64 rng(8);
  const auto spec = KernelSpec::spherical_matern(3, 2.5, 0.4, 1.3);
  for (int k = 0; k < 100; ++k) {
    const SimplexPoint x = sample_uniform(rng, 3), y = sample_uniform(rng, 3);
    EXPECT_NEAR(simplex_kernel(x, x, spec), 1.3, 1e-10);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(4);
    perm.setIdentity();
    std::shuffle(perm.indices().data(), perm.indices().data() + 4, rng);
    const SimplexPoint px(perm * x.coords()), py(perm * y.coords());
    EXPECT_NEAR(simplex_kernel(x, y, spec), simplex_kernel(px, py, spec), 1e-12);
    EXPECT_EQ(simplex_kernel(x, y, spec), sphere_kernel(SpherePoint::normalized(sphere_map(x, 1.0)),
                                                        SpherePoint::normalized(sphere_map(y, 1.0)), spec));
  }
}

TEST(EuclidKernel, ClosedForms) {
  Vector a = Vector::Zero(3), b(3);
  b << 1.0, 1.0, 0.0;
  EXPECT_NEAR(euclid_kernel(a, b, KernelSpec::euclid_se(2, 1.0, 2.5)), 2.5 * std::exp(-1.0), 1e-15);
  const double r = std::sqrt(2.0), kappa = 0.8, s5 = std::sqrt(5.0);
  const double m52 = 0.3 * (1 + s5 * r / kappa + 5 * r * r / (3 * kappa * kappa)) * std::exp(-s5 * r / kappa);
  EXPECT_NEAR(euclid_kernel(a, b, KernelSpec::euclid_matern(2, 2.5, kappa, 0.3)), m52, 1e-15);
}

TEST(EuclidKernel, PositiveSemidefiniteGram) {
  std::mt19937_64 rng(9);
  for (int d : {2, 5, 10}) {
    std::vector<Vector> pts;
    for (int i = 0; i < 50; ++i) pts.push_back(sample_uniform(rng, d).coords());
    for (const auto& spec : {KernelSpec::euclid_se(d, 0.3), KernelSpec::euclid_matern(d, 2.5, 0.3)}) {
      EXPECT_GE(min_over_max_eig(gram(pts, spec, 0.0).values), -1e-8);
    }
  }
}

TEST(Gram, SinglePointAndElementwise) {
  std::mt19937_64 rng(10);
  const auto spec = KernelSpec::spherical_se(2, 0.5, 1.5);
  const GramMatrix one = gram({sphere_map(sample_uniform(rng, 2), 1.0)}, spec, 1e-6);
  EXPECT_NEAR(one.values(0, 0), 1.5 + 1e-6, 1e-15);
  const auto pts = sphere_features(rng, 2, 12);
  const GramMatrix g = gram(pts, spec, 0.0);
  const Kernel k(spec);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) {
      const double want = k(pts[i], pts[j]) + (i == j ? g.jitter : 0.0);
      EXPECT_NEAR(g.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), want, 1e-15);
    }
  }
}

TEST(Gram, DuplicatePointNeedsJitter) {
  std::mt19937_64 rng(11);
  const Vector p = sphere_map(sample_uniform(rng, 2), 1.0);
  const auto spec = KernelSpec::spherical_se(2, 0.5);
  const GramMatrix g = gram({p, p}, spec, 0.0);
  EXPECT_GT(g.jitter, 0.0);
  EXPECT_LE(g.jitter, 1e-4);
  Eigen::LLT<Eigen::MatrixXd> llt(g.values);
  EXPECT_EQ(llt.info(), Eigen::Success);
}

TEST(GramCache, AssembleMatchesGram) {
  std::mt19937_64 rng(12);
  const auto pts = sphere_features(rng, 3, 15);
  for (const auto& spec : {KernelSpec::spherical_se(3, 0.4, 2.0), KernelSpec::spherical_matern(3, 2.5, 0.9)}) {
    const GramCache cache(pts, spec.family, 3, spec.truncation);
    const Eigen::MatrixXd a = cache.assemble(Kernel(spec));
    const Eigen::MatrixXd b = gram(pts, spec, 0.0).values;
    // gram() may have added jitter on the diagonal.
    EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(KernelSpec, Validation) {
  EXPECT_THROW(KernelSpec::spherical_se(2, -1.0), std::invalid_argument);
  EXPECT_THROW(KernelSpec::spherical_se(2, 1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(KernelSpec::spherical_se(2, 1.0, 1.0, 0), std::invalid_argument);
  EXPECT_THROW(KernelSpec::spherical_matern(2, 0.7), std::invalid_argument);
  EXPECT_EQ(kernel_family_from_string(to_string(KernelFamily::euclid_matern)), KernelFamily::euclid_matern);
}
