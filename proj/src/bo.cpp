#include "simplexbo/bo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace simplexbo {

std::string to_string(Method method) {
  switch (method) {
    case Method::alpha0: return "alpha0";
    case Method::alpha_minus1: return "alpha_minus1";
    case Method::eucl_simplex: return "eucl_simplex";
    case Method::eucl_sphere: return "eucl_sphere";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  if (name == "alpha0") return Method::alpha0;
  if (name == "alpha_minus1") return Method::alpha_minus1;
  if (name == "eucl_simplex") return Method::eucl_simplex;
  if (name == "eucl_sphere") return Method::eucl_sphere;
  throw std::invalid_argument("unknown method: " + name);
}

bool uses_spherical_kernel(Method method) { return method == Method::alpha0 || method == Method::alpha_minus1; }

bool searches_sphere(Method method) { return method == Method::alpha0 || method == Method::eucl_sphere; }

KernelSpec default_kernel(Method method, int dim, double nu, int truncation) {
  const bool se = std::isinf(nu);
  if (uses_spherical_kernel(method)) {
    return se ? KernelSpec::spherical_se(dim, 0.5, 1.0, truncation)
              : KernelSpec::spherical_matern(dim, nu, 0.5, 1.0, truncation);
  }
  return se ? KernelSpec::euclid_se(dim, 0.5, 1.0) : KernelSpec::euclid_matern(dim, nu, 0.5, 1.0);
}

void MethodConfig::validate(int dim) const {
  if (budget < 1 || init < 1) throw std::invalid_argument("MethodConfig: budget and init must be >= 1");
  kernel.validate();
  acq.validate();
  optimizer.validate();
  if (kernel.dim != dim) throw std::invalid_argument("MethodConfig: kernel dimension mismatch");
  if (kernel.spherical() != uses_spherical_kernel(method)) {
    throw std::invalid_argument("MethodConfig: kernel family incompatible with method " + to_string(method));
  }
  if (!(initial_noise > 0.0) || refit_dense_until < 0 || refit_stride < 1) {
    throw std::invalid_argument("MethodConfig: invalid fitting schedule");
  }
}

namespace {

struct Query {
  SimplexPoint x;
  Vector internal;
};

Query query_from_simplex(Method method, const SimplexPoint& x) {
  if (searches_sphere(method)) {
    const SpherePoint s = SpherePoint::normalized(sphere_map(x, 1.0));
    return {inv_sphere_map(s.coords(), 1.0), s.coords()};
  }
  if (method == Method::alpha_minus1) {
    SimplexPoint c = x.clamped_interior();
    Vector internal = c.coords();
    return {std::move(c), std::move(internal)};
  }
  return {x, x.coords()};
}

Query query_from_internal(Method method, const Vector& internal) {
  if (searches_sphere(method)) return {inv_sphere_map(internal, 1.0), internal};
  SimplexPoint x = SimplexPoint::normalized(internal);
  if (method == Method::alpha_minus1) x = x.clamped_interior();
  Vector coords = x.coords();
  return {std::move(x), std::move(coords)};
}

Vector feature_of(Method method, const Vector& internal) {
  switch (method) {
    case Method::alpha_minus1: {
      const Vector s = internal.cwiseMax(0.0).cwiseSqrt();
      return s / s.norm();
    }
    case Method::alpha0: return internal / internal.norm();
    case Method::eucl_simplex:
    case Method::eucl_sphere: return internal;
  }
  return internal;
}

std::uint64_t derived_seed(std::uint64_t seed, Method method, std::uint64_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(method) + 1u, static_cast<std::uint32_t>(salt),
                    static_cast<std::uint32_t>(salt >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace

RunRecord run_bo(const Objective& objective, int dim, const MethodConfig& cfg) {
  if (dim < 1) throw std::invalid_argument("run_bo: dim must be >= 1");
  if (!objective) throw std::invalid_argument("run_bo: missing objective");
  cfg.validate(dim);

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

  // The initial design depends on the seed only, so methods compared at the
  // same seed start from the same simplex points.
  std::mt19937_64 init_rng(cfg.seed);
  std::mt19937_64 opt_rng(derived_seed(cfg.seed, cfg.method, 0));

  RunRecord rec;
  rec.method = cfg.method;
  rec.seed = cfg.seed;
  rec.best_y = -std::numeric_limits<double>::infinity();
  std::vector<Vector> features;
  std::vector<double> ys;

  // Evaluates at q, or once more at a fresh uniform point if that fails.
  // Returns false when both attempts fail.
  auto evaluate = [&](Query q) {
    for (int attempt = 0; attempt < 2; ++attempt) {
      if (attempt == 1) q = query_from_simplex(cfg.method, sample_uniform(opt_rng, dim));
      double y = std::numeric_limits<double>::quiet_NaN();
      std::string error;
      try {
        y = objective(q.x);
      } catch (const std::exception& e) {
        error = e.what();
      }
      if (error.empty() && !std::isfinite(y)) error = "non-finite objective value";
      if (!error.empty()) {
        rec.failures.push_back("evaluation " + std::to_string(rec.rows.size() + 1) + ": " + error);
        continue;
      }
      if (y > rec.best_y) {
        rec.best_y = y;
        rec.best_x = q.x;
      }
      features.push_back(feature_of(cfg.method, q.internal));
      ys.push_back(y);
      rec.internal_points.push_back(q.internal);
      rec.rows.push_back({static_cast<int>(rec.rows.size()) + 1, q.x, y, rec.best_y, elapsed()});
      return true;
    }
    rec.aborted = true;
    rec.abort_reason = rec.failures.back();
    return false;
  };

  for (int i = 0; i < cfg.init; ++i) {
    if (!evaluate(query_from_simplex(cfg.method, sample_uniform(init_rng, dim)))) return rec;
  }

  KernelSpec spec = cfg.kernel;
  double noise = cfg.initial_noise;
  for (int it = 0; it < cfg.budget; ++it) {
    const auto n = static_cast<Eigen::Index>(ys.size());
    Vector y = Eigen::Map<const Vector>(ys.data(), n);
    const double mean = y.mean();
    const double sd = n > 1 ? std::sqrt((y.array() - mean).square().sum() / static_cast<double>(n - 1)) : 0.0;
    y = (y.array() - mean) / (sd > 1e-12 ? sd : 1.0);

    Dataset data{features, y, noise};
    const bool refit = n <= cfg.refit_dense_until || it % cfg.refit_stride == 0;
    if (refit && n >= 2) {
      try {
        const FitResult fit =
            fit_hyperparams(data, spec, 0.0, derived_seed(cfg.seed, cfg.method, static_cast<std::uint64_t>(it) + 1),
                            cfg.fit);
        spec = fit.spec;
        noise = fit.noise;
        data.noise = noise;
      } catch (const std::runtime_error&) {
        // Keep the previous hyperparameters.
      }
    }

    std::optional<Query> next;
    try {
      const GpPosterior post(std::move(data), spec, 0.0);
      OptimizeResult best;
      switch (cfg.method) {
        case Method::alpha0: best = optimize_acq_alpha(post, cfg.acq, cfg.optimizer, 0.0, opt_rng); break;
        case Method::alpha_minus1: best = optimize_acq_alpha(post, cfg.acq, cfg.optimizer, -1.0, opt_rng); break;
        case Method::eucl_simplex:
          best = optimize_acq_projected(post, cfg.acq, cfg.optimizer, SearchDomain::simplex, opt_rng);
          break;
        case Method::eucl_sphere:
          best = optimize_acq_projected(post, cfg.acq, cfg.optimizer, SearchDomain::sphere_orthant, opt_rng);
          break;
      }
      next = query_from_internal(cfg.method, best.point);
    } catch (const std::runtime_error& e) {
      rec.failures.push_back("iteration " + std::to_string(it + 1) + ": " + e.what() + "; uniform query used");
    }
    if (!next) next = query_from_simplex(cfg.method, sample_uniform(opt_rng, dim));
    if (!evaluate(*next)) return rec;
  }
  return rec;
}

std::vector<double> simple_regret(const RunRecord& record, double f_opt) {
  std::vector<double> out;
  out.reserve(record.rows.size());
  for (const RunRow& row : record.rows) {
    const double r = f_opt - row.incumbent;
    if (r < -1e-9) throw std::invalid_argument("simple_regret: incumbent exceeds f_opt");
    out.push_back(std::max(r, 0.0));
  }
  return out;
}

}  // namespace simplexbo
