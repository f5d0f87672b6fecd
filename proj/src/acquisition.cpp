#include "simplexbo/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace simplexbo {

std::string to_string(AcqKind kind) { return kind == AcqKind::ei ? "ei" : "lcb"; }

AcqKind acq_kind_from_string(const std::string& name) {
  if (name == "ei" || name == "EI") return AcqKind::ei;
  if (name == "lcb" || name == "LCB") return AcqKind::lcb;
  throw std::invalid_argument("unknown acquisition: " + name);
}

void AcqSpec::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("AcqSpec: beta must be positive");
}

void OptimizerConfig::validate() const {
  if (restarts < 1 || max_iters < 1 || max_backtracks < 1) {
    throw std::invalid_argument("OptimizerConfig: counts must be positive");
  }
  if (!(tr_initial_radius > 0.0) || !(tr_max_radius >= tr_initial_radius)) {
    throw std::invalid_argument("OptimizerConfig: invalid trust-region radii");
  }
  if (!(tr_accept > 0.0 && tr_accept < 1.0)) throw std::invalid_argument("OptimizerConfig: tr_accept outside (0,1)");
  if (!(armijo_c1 > 0.0 && armijo_c1 < 1.0)) throw std::invalid_argument("OptimizerConfig: c1 outside (0,1)");
  if (!(backtrack > 0.0 && backtrack < 1.0)) throw std::invalid_argument("OptimizerConfig: backtrack outside (0,1)");
  if (!(grad_tol > 0.0) || !(fd_step > 0.0)) throw std::invalid_argument("OptimizerConfig: tolerances must be positive");
}

double ei(double mean, double sd, double best) {
  if (!(sd >= 0.0)) throw std::invalid_argument("ei: sd must be nonnegative");
  const double diff = mean - best;
  if (sd == 0.0) return std::max(diff, 0.0);
  const double z = diff / sd;
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
  const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
  return std::max(sd * (pdf + z * cdf), 0.0);
}

double log_ei(double mean, double sd, double best) {
  if (!(sd >= 0.0)) throw std::invalid_argument("log_ei: sd must be nonnegative");
  const double diff = mean - best;
  if (sd == 0.0) return diff > 0.0 ? std::log(diff) : -std::numeric_limits<double>::infinity();
  const double z = diff / sd;
  const double log_pdf = -0.5 * z * z - 0.5 * std::log(2.0 * M_PI);
  double log_h;
  if (z > -1.0) {
    const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
    log_h = std::log(std::exp(log_pdf) + z * cdf);
  } else if (z > -26.0) {
    // φ(z) + zΦ(z) = φ(z)·(1 − t·Φ(−t)/φ(t)) with t = −z.
    const double t = -z;
    const double mills = 0.5 * std::erfc(t / std::sqrt(2.0)) / std::exp(log_pdf);
    log_h = log_pdf + std::log1p(-t * mills);
  } else {
    // Asymptotic series of 1 − t·Φ(−t)/φ(t).
    const double u = 1.0 / (z * z);
    const double tail = u * (1.0 - u * (3.0 - u * (15.0 - u * (105.0 - u * 945.0))));
    log_h = log_pdf + std::log(tail);
  }
  return std::log(sd) + log_h;
}

double lcb(double mean, double sd, double beta) {
  if (!(sd >= 0.0)) throw std::invalid_argument("lcb: sd must be nonnegative");
  return mean + beta * sd;
}

double acq_value(const GpPosterior& post, const AcqSpec& spec, const Vector& feature) {
  const Moments m = post.moments(feature);
  const double sd = std::sqrt(std::max(m.variance, 1e-12));
  if (spec.kind == AcqKind::lcb) return lcb(m.mean, sd, spec.beta);
  const double best = post.data().size() > 0 ? post.best_observed() : post.prior_mean();
  return ei(m.mean, sd, best);
}

double search_score(const GpPosterior& post, const AcqSpec& spec, const Vector& feature) {
  if (spec.kind == AcqKind::lcb) return acq_value(post, spec, feature);
  const Moments m = post.moments(feature);
  const double sd = std::sqrt(std::max(m.variance, 1e-12));
  const double best = post.data().size() > 0 ? post.best_observed() : post.prior_mean();
  return log_ei(m.mean, sd, best);
}

// ---------------------------------------------------------------------------
// Local optimizers. Both work on a minimization form φ = −A over a manifold
// described by its Riemannian gradient, Hessian action, metric and step map.

namespace {

struct Manifold {
  std::function<Vector(const Vector&)> grad;
  std::function<Vector(const Vector&, const Vector&)> hess;
  std::function<double(const Vector&, const Vector&, const Vector&)> inner;
  std::function<Vector(const Vector&, const Vector&)> step;
};

struct LocalResult {
  Vector x;
  double f;
};

double safe_eval(const std::function<double(const Vector&)>& phi, const Vector& x) {
  const double v = phi(x);
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

// The step map may leave its domain; halve the step until it does not.
std::optional<Vector> step_with_halving(const Manifold& m, const Vector& x, Vector eta) {
  for (int k = 0; k <= 20; ++k) {
    try {
      return m.step(x, eta);
    } catch (const DomainViolation&) {
    } catch (const std::domain_error&) {
    }
    eta *= 0.5;
  }
  return std::nullopt;
}

LocalResult gd_armijo(const std::function<double(const Vector&)>& phi, const Manifold& m, Vector x,
                      const OptimizerConfig& cfg) {
  double f = safe_eval(phi, x);
  Vector g = m.grad(x);
  const double g0 = std::sqrt(m.inner(x, g, g));
  double ell = cfg.tr_initial_radius;
  for (int it = 0; it < cfg.max_iters; ++it) {
    const double gn = std::sqrt(m.inner(x, g, g));
    if (!(gn > 0.0) || gn <= cfg.grad_tol * g0) break;
    const Vector dir = g / (-gn);
    ell = std::min(2.0 * ell, cfg.tr_max_radius);
    bool moved = false;
    for (int b = 0; b < cfg.max_backtracks; ++b, ell *= cfg.backtrack) {
      const auto xn = step_with_halving(m, x, ell * dir);
      if (!xn) continue;
      const double fn = safe_eval(phi, *xn);
      if (fn <= f - cfg.armijo_c1 * ell * gn && fn < f) {
        x = *xn;
        f = fn;
        moved = true;
        break;
      }
    }
    if (!moved) break;
    g = m.grad(x);
  }
  return {std::move(x), f};
}

struct TcgResult {
  Vector eta;
  Vector h_eta;
  bool boundary = false;
};

// Steihaug truncated CG for min <g,η> + ½<η,Hη> subject to ‖η‖ ≤ Δ.
TcgResult truncated_cg(const Manifold& m, const Vector& x, const Vector& g, double radius, int max_inner) {
  TcgResult out{Vector::Zero(g.size()), Vector::Zero(g.size()), false};
  Vector r = g;
  Vector p = -r;
  double rr = m.inner(x, r, r);
  const double r0 = std::sqrt(rr);
  auto to_boundary = [&](const Vector& dir) {
    const double a = m.inner(x, dir, dir);
    const double b = 2.0 * m.inner(x, out.eta, dir);
    const double c = m.inner(x, out.eta, out.eta) - radius * radius;
    return (-b + std::sqrt(std::max(b * b - 4.0 * a * c, 0.0))) / (2.0 * a);
  };
  for (int j = 0; j < max_inner; ++j) {
    const Vector hp = m.hess(x, p);
    const double curv = m.inner(x, p, hp);
    if (!(curv > 0.0)) {
      const double tau = to_boundary(p);
      out.eta += tau * p;
      out.h_eta += tau * hp;
      out.boundary = true;
      return out;
    }
    const double alpha = rr / curv;
    const Vector next = out.eta + alpha * p;
    if (m.inner(x, next, next) >= radius * radius) {
      const double tau = to_boundary(p);
      out.eta += tau * p;
      out.h_eta += tau * hp;
      out.boundary = true;
      return out;
    }
    out.eta = next;
    out.h_eta += alpha * hp;
    r += alpha * hp;
    const double rr_new = m.inner(x, r, r);
    if (std::sqrt(rr_new) <= 0.1 * r0) break;
    p = -r + (rr_new / rr) * p;
    rr = rr_new;
  }
  return out;
}

LocalResult trust_region(const std::function<double(const Vector&)>& phi, const Manifold& m, Vector x,
                         const OptimizerConfig& cfg, int dim) {
  double f = safe_eval(phi, x);
  Vector g = m.grad(x);
  const double g0 = std::sqrt(m.inner(x, g, g));
  double radius = cfg.tr_initial_radius;
  for (int it = 0; it < cfg.max_iters; ++it) {
    const double gn = std::sqrt(m.inner(x, g, g));
    if (!(gn > 0.0) || gn <= cfg.grad_tol * g0 || radius < 1e-10) break;
    const TcgResult step = truncated_cg(m, x, g, radius, std::max(dim, 1));
    const double pred = -(m.inner(x, g, step.eta) + 0.5 * m.inner(x, step.eta, step.h_eta));
    const auto xn = step_with_halving(m, x, step.eta);
    if (!xn || !(pred > 0.0)) {
      radius *= 0.25;
      continue;
    }
    const double fn = safe_eval(phi, *xn);
    const double rho = (f - fn) / pred;
    if (!(rho >= 0.25)) {
      radius *= 0.25;
    } else if (rho > 0.75 && step.boundary) {
      radius = std::min(2.0 * radius, cfg.tr_max_radius);
    }
    if (rho > cfg.tr_accept && fn < f) {
      x = *xn;
      f = fn;
      g = m.grad(x);
    }
  }
  return {std::move(x), f};
}

Vector fd_gradient(const std::function<double(const Vector&)>& fn, const Vector& x, double step, bool relative) {
  Vector g(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = relative ? step * std::max(x[i], kInteriorEps) : step;
    probe[i] = x[i] + h;
    const double up = fn(probe);
    probe[i] = x[i] - h;
    const double down = fn(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// Ambient Euclidean gradient of φ = −A.
std::function<Vector(const Vector&)> ambient_gradient(const AcqObjective& obj, const OptimizerConfig& cfg,
                                                      bool relative) {
  if (cfg.gradient == GradientMode::analytic) {
    if (!obj.gradient) throw std::invalid_argument("analytic gradient mode needs an objective gradient");
    return [&obj](const Vector& x) -> Vector { return -obj.gradient(x); };
  }
  auto phi = [&obj](const Vector& x) { return -obj.value(x); };
  return [phi, &cfg, relative](const Vector& x) { return fd_gradient(phi, x, cfg.fd_step, relative); };
}

Manifold simplex_manifold(const std::function<Vector(const Vector&)>& egrad) {
  Manifold m;
  // Points along the Hessian's probe curves can round onto the boundary.
  auto field = [egrad](const SimplexPoint& p) {
    const SimplexPoint q = p.clamped_interior();
    return natural_gradient(q, egrad(q.coords()));
  };
  m.grad = [egrad](const Vector& x) -> Vector { return natural_gradient(SimplexPoint(x), egrad(x)).components(); };
  m.hess = [field](const Vector& x, const Vector& eta) -> Vector {
    const SimplexPoint p(x);
    return alpha_hessian_action(p, field, tangent_project(p, eta), -1.0).components();
  };
  m.inner = [](const Vector& x, const Vector& u, const Vector& v) { return (x.array() * u.array() * v.array()).sum(); };
  m.step = [](const Vector& x, const Vector& eta) -> Vector {
    const SimplexPoint p(x);
    return exp_map(p, tangent_project(p, eta), -1.0).clamped_interior().coords();
  };
  return m;
}

Manifold sphere_manifold(const std::function<Vector(const Vector&)>& egrad) {
  Manifold m;
  auto rgrad = [egrad](const Vector& s) -> Vector {
    const SpherePoint p(s);
    return tangent_project_sphere(p, egrad(s)).components();
  };
  m.grad = rgrad;
  // Levi-Civita derivative of the gradient field along the great circle with
  // initial velocity w, by central differences and tangent projection.
  m.hess = [rgrad](const Vector& s, const Vector& w) -> Vector {
    const SpherePoint p(s);
    const double wn = w.norm();
    if (wn == 0.0) return Vector::Zero(s.size());
    const double h = 1e-4;
    const Vector dir = tangent_project_sphere(p, w / wn).components();
    const SpherePoint up = exp_map_sphere(p, SphereTangent(p, h * dir));
    const SpherePoint down = exp_map_sphere(p, SphereTangent(p, -h * dir));
    const Vector diff = (rgrad(up.coords()) - rgrad(down.coords())) * (wn / (2.0 * h));
    return tangent_project_sphere(p, diff).components();
  };
  m.inner = [](const Vector&, const Vector& u, const Vector& v) { return u.dot(v); };
  m.step = [](const Vector& s, const Vector& w) -> Vector {
    const SpherePoint p(s);
    return orthant_retract(exp_map_sphere(p, tangent_project_sphere(p, w)).coords()).coords();
  };
  return m;
}

Vector uniform_start(std::mt19937_64& rng, int dim, SearchDomain domain) {
  if (domain == SearchDomain::simplex) return sample_uniform(rng, dim).coords();
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(dim + 1);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = std::abs(normal(rng));
  if (!(v.norm() > 0.0)) v.setConstant(1.0);
  return v / v.norm();
}

template <typename Local>
OptimizeResult multistart(const AcqObjective& obj, int dim, SearchDomain domain, const OptimizerConfig& cfg,
                          std::mt19937_64& rng, bool clamp_interior, Local&& local) {
  if (dim < 1) throw std::invalid_argument("acquisition optimizer: dim must be >= 1");
  if (!obj.value) throw std::invalid_argument("acquisition optimizer: missing objective");
  cfg.validate();
  std::vector<Vector> starts;
  for (int r = 0; r < cfg.restarts; ++r) {
    Vector s = uniform_start(rng, dim, domain);
    if (clamp_interior) s = SimplexPoint::normalized(s).clamped_interior().coords();
    starts.push_back(std::move(s));
  }
  OptimizeResult best;
  best.value = -std::numeric_limits<double>::infinity();
  best.best_start_value = -std::numeric_limits<double>::infinity();
  for (const Vector& s : starts) {
    const double a0 = obj.value(s);
    if (!std::isfinite(a0)) continue;
    best.best_start_value = std::max(best.best_start_value, a0);
    LocalResult res{s, -a0};
    try {
      res = local(s);
    } catch (const std::exception&) {
      // A start whose local search breaks down keeps its start point.
    }
    double value = -res.f;
    if (!std::isfinite(value) || value < a0) {
      res.x = s;
      value = a0;
    }
    if (value > best.value) {
      best.value = value;
      best.point = std::move(res.x);
    }
  }
  if (!std::isfinite(best.value)) throw std::runtime_error("acquisition optimizer: every start was non-finite");
  return best;
}

}  // namespace

OptimizeResult maximize_riemannian(const AcqObjective& objective, int dim, double alpha,
                                   const OptimizerConfig& cfg, std::mt19937_64& rng) {
  if (alpha != -1.0 && alpha != 0.0) throw std::invalid_argument("maximize_riemannian: alpha must be -1 or 0");
  const bool simplex = alpha == -1.0;
  const auto egrad = ambient_gradient(objective, cfg, simplex);
  const Manifold m = simplex ? simplex_manifold(egrad) : sphere_manifold(egrad);
  auto phi = [&objective](const Vector& x) { return -objective.value(x); };
  return multistart(objective, dim, simplex ? SearchDomain::simplex : SearchDomain::sphere_orthant, cfg, rng,
                    simplex, [&](const Vector& start) {
                      return cfg.method == OptimizerMethod::trust_region ? trust_region(phi, m, start, cfg, dim)
                                                                         : gd_armijo(phi, m, start, cfg);
                    });
}

OptimizeResult maximize_projected(const AcqObjective& objective, int dim, SearchDomain domain,
                                  const OptimizerConfig& cfg, std::mt19937_64& rng) {
  const auto egrad = ambient_gradient(objective, cfg, false);
  const bool simplex = domain == SearchDomain::simplex;
  auto project = [simplex](const Vector& v) -> Vector {
    return simplex ? project_to_simplex(v).coords() : orthant_retract(v).coords();
  };
  auto local = [&](const Vector& start) -> LocalResult {
    Vector x = start;
    double a = objective.value(x);
    double ell = cfg.tr_initial_radius;
    for (int it = 0; it < cfg.max_iters; ++it) {
      const Vector g = -egrad(x);
      // Ascent direction within the tangent space of the affine hull or sphere.
      Vector dir = simplex ? Vector(g.array() - g.mean()) : Vector(g - x.dot(g) * x);
      const double gn = dir.norm();
      if (!(gn > 0.0)) break;
      dir /= gn;
      ell = std::min(2.0 * ell, cfg.tr_max_radius);
      bool moved = false;
      for (int b = 0; b < cfg.max_backtracks; ++b, ell *= cfg.backtrack) {
        Vector xn;
        try {
          xn = project(x + ell * dir);
        } catch (const std::domain_error&) {
          continue;
        }
        const double an = objective.value(xn);
        if (std::isfinite(an) && an > a && an - a >= cfg.armijo_c1 * g.dot(xn - x)) {
          x = std::move(xn);
          a = an;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    return {std::move(x), -a};
  };
  return multistart(objective, dim, domain, cfg, rng, false, local);
}

Vector riemannian_gradient(const AcqObjective& objective, const Vector& point, double alpha,
                           const OptimizerConfig& cfg) {
  if (alpha != -1.0 && alpha != 0.0) throw std::invalid_argument("riemannian_gradient: alpha must be -1 or 0");
  const bool simplex = alpha == -1.0;
  const auto egrad = ambient_gradient(objective, cfg, simplex);
  const Manifold m = simplex ? simplex_manifold(egrad) : sphere_manifold(egrad);
  return -m.grad(point);
}

AcqObjective make_acq_objective(const GpPosterior& post, const AcqSpec& spec, SearchDomain domain) {
  spec.validate();
  const bool spherical = post.spec().spherical();
  AcqObjective obj;
  obj.value = [&post, spec, spherical, domain](const Vector& v) {
    if (!spherical) return search_score(post, spec, v);
    Vector s = domain == SearchDomain::simplex ? Vector(v.cwiseMax(0.0).cwiseSqrt()) : v;
    const double n = s.norm();
    if (!(n > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    s /= n;
    return search_score(post, spec, s);
  };
  return obj;
}

OptimizeResult optimize_acq_alpha(const GpPosterior& post, const AcqSpec& acq, const OptimizerConfig& cfg,
                                  double alpha, std::mt19937_64& rng) {
  const SearchDomain domain = alpha == -1.0 ? SearchDomain::simplex : SearchDomain::sphere_orthant;
  return maximize_riemannian(make_acq_objective(post, acq, domain), post.spec().dim, alpha, cfg, rng);
}

OptimizeResult optimize_acq_projected(const GpPosterior& post, const AcqSpec& acq, const OptimizerConfig& cfg,
                                      SearchDomain domain, std::mt19937_64& rng) {
  return maximize_projected(make_acq_objective(post, acq, domain), post.spec().dim, domain, cfg, rng);
}

}  // namespace simplexbo
