#include "simplexbo/gp.hpp"

#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace simplexbo {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void check_dataset(const Dataset& data) {
  if (data.outputs.size() != data.size()) throw std::invalid_argument("Dataset: inputs/outputs length mismatch");
  if (!(data.noise >= 0.0) || !std::isfinite(data.noise)) throw std::invalid_argument("Dataset: invalid noise");
  if (!data.outputs.allFinite()) throw std::invalid_argument("Dataset: non-finite output");
}

Eigen::MatrixXd kernel_matrix(const std::vector<Vector>& inputs, const Kernel& kernel) {
  const auto n = static_cast<Eigen::Index>(inputs.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      k(i, j) = kernel(inputs[i], inputs[j]);
      k(j, i) = k(i, j);
    }
  }
  return k;
}

double lml_from_matrix(const Eigen::MatrixXd& k, const Vector& r, double noise, double variance) {
  const StableCholesky chol = stable_cholesky(k, noise, variance);
  const auto l = chol.lower.triangularView<Eigen::Lower>();
  const Vector alpha = l.solve(r);
  const double logdet = 2.0 * chol.lower.diagonal().array().log().sum();
  return -0.5 * alpha.squaredNorm() - 0.5 * logdet - 0.5 * static_cast<double>(r.size()) * kLog2Pi;
}

}  // namespace

void Dataset::append(Vector input, double y) {
  inputs.push_back(std::move(input));
  outputs.conservativeResize(outputs.size() + 1);
  outputs[outputs.size() - 1] = y;
}

Vector simplex_feature(const SimplexPoint& x, KernelFamily family) {
  if (!is_spherical(family)) return x.coords();
  const Vector s = sphere_map(x, 1.0);
  return s / s.norm();
}

GpPosterior::GpPosterior(Dataset data, const KernelSpec& spec, double prior_mean)
    : data_(std::move(data)), kernel_(spec), prior_mean_(prior_mean) {
  check_dataset(data_);
  if (!std::isfinite(prior_mean_)) throw std::invalid_argument("GpPosterior: non-finite prior mean");
  if (data_.size() == 0) return;
  const Eigen::MatrixXd k = kernel_matrix(data_.inputs, kernel_);
  if (!k.allFinite()) throw std::runtime_error("GpPosterior: non-finite kernel values");
  StableCholesky chol = stable_cholesky(k, data_.noise, spec.variance);
  chol_ = std::move(chol.lower);
  jitter_ = chol.jitter;
  const Vector r = (data_.outputs.array() - prior_mean_).matrix();
  weights_ = chol_.triangularView<Eigen::Lower>().solve(r);
  chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(weights_);
}

double GpPosterior::best_observed() const {
  if (data_.size() == 0) return -std::numeric_limits<double>::infinity();
  return data_.outputs.maxCoeff();
}

Moments GpPosterior::moments(const Vector& feature) const {
  const double prior_var = kernel_(feature, feature);
  if (data_.size() == 0) return {prior_mean_, prior_var};
  Vector kstar(data_.size());
  for (Eigen::Index i = 0; i < data_.size(); ++i) kstar[i] = kernel_(data_.inputs[i], feature);
  if (!kstar.allFinite()) throw std::runtime_error("posterior_moments: non-finite kernel values");
  const double mean = prior_mean_ + kstar.dot(weights_);
  const Vector v = chol_.triangularView<Eigen::Lower>().solve(kstar);
  return {mean, std::max(prior_var - v.squaredNorm(), 0.0)};
}

Moments posterior_moments(const GpPosterior& post, const Vector& feature) { return post.moments(feature); }

double log_marginal_likelihood(const Dataset& data, const KernelSpec& spec, double prior_mean) {
  check_dataset(data);
  if (data.size() < 1) throw std::invalid_argument("log_marginal_likelihood: empty dataset");
  const Kernel kernel(spec);
  return lml_from_matrix(kernel_matrix(data.inputs, kernel), (data.outputs.array() - prior_mean).matrix(),
                         data.noise, spec.variance);
}

// ---------------------------------------------------------------------------
// Hyperparameter fitting

namespace {

struct FitProblem {
  const GramCache* cache;
  Vector residual;
  KernelSpec base;
  double lo[3];
  double hi[3];
  int evals = 0;
  double best = -std::numeric_limits<double>::infinity();
  double best_theta[3] = {0, 0, 0};

  // Negative LML at θ clamped into the box, plus a quadratic penalty for the
  // part of θ outside it, so the simplex is pulled back toward the box.
  double objective(const double* theta) {
    double clamped[3];
    double penalty = 0.0;
    for (int i = 0; i < 3; ++i) {
      clamped[i] = std::clamp(theta[i], lo[i], hi[i]);
      penalty += (theta[i] - clamped[i]) * (theta[i] - clamped[i]);
    }
    ++evals;
    double lml;
    try {
      KernelSpec spec = base;
      spec.lengthscale = std::exp(clamped[0]);
      spec.variance = std::exp(clamped[1]);
      const Kernel kernel(spec);
      lml = lml_from_matrix(cache->assemble(kernel), residual, std::exp(clamped[2]), spec.variance);
    } catch (const std::exception&) {
      return std::numeric_limits<double>::infinity();
    }
    if (!std::isfinite(lml)) return std::numeric_limits<double>::infinity();
    if (lml > best) {
      best = lml;
      std::copy(clamped, clamped + 3, best_theta);
    }
    return -lml + 1e3 * penalty;
  }
};

double gsl_objective(const gsl_vector* v, void* params) {
  auto* problem = static_cast<FitProblem*>(params);
  const double theta[3] = {gsl_vector_get(v, 0), gsl_vector_get(v, 1), gsl_vector_get(v, 2)};
  const double value = problem->objective(theta);
  // GSL's simplex needs finite values; a large constant keeps it moving away.
  return std::isfinite(value) ? value : 1e300;
}

void run_nelder_mead(FitProblem& problem, const double* start, const FitOptions& options) {
  const gsl_multimin_fminimizer_type* type = gsl_multimin_fminimizer_nmsimplex2;
  gsl_multimin_fminimizer* minimizer = gsl_multimin_fminimizer_alloc(type, 3);
  gsl_vector* x = gsl_vector_alloc(3);
  gsl_vector* step = gsl_vector_alloc(3);
  for (int i = 0; i < 3; ++i) {
    gsl_vector_set(x, i, start[i]);
    gsl_vector_set(step, i, 0.1 * (problem.hi[i] - problem.lo[i]));
  }
  gsl_multimin_function fn{&gsl_objective, 3, &problem};
  const int budget_end = problem.evals + options.max_evals_per_start;
  if (gsl_multimin_fminimizer_set(minimizer, &fn, x, step) == GSL_SUCCESS) {
    while (problem.evals < budget_end) {
      if (gsl_multimin_fminimizer_iterate(minimizer) != GSL_SUCCESS) break;
      const double size = gsl_multimin_fminimizer_size(minimizer);
      if (gsl_multimin_test_size(size, options.simplex_tol) == GSL_SUCCESS) break;
    }
  }
  gsl_vector_free(step);
  gsl_vector_free(x);
  gsl_multimin_fminimizer_free(minimizer);
}

}  // namespace

FitResult fit_hyperparams(const Dataset& data, const KernelSpec& spec_template, double prior_mean,
                          std::uint64_t seed, const FitOptions& options) {
  check_dataset(data);
  if (data.size() < 2) throw std::invalid_argument("fit_hyperparams: need at least two observations");
  if (options.starts < 1 || options.max_evals_per_start < 1) {
    throw std::invalid_argument("fit_hyperparams: invalid options");
  }
  spec_template.validate();

  const GramCache cache(data.inputs, spec_template.family, spec_template.dim, spec_template.truncation);
  FitProblem problem{&cache,
                     (data.outputs.array() - prior_mean).matrix(),
                     spec_template,
                     {std::log(HyperBounds::lengthscale_min), std::log(HyperBounds::variance_min),
                      std::log(HyperBounds::noise_min)},
                     {std::log(HyperBounds::lengthscale_max), std::log(HyperBounds::variance_max),
                      std::log(HyperBounds::noise_max)}};

  std::vector<std::array<double, 3>> starts;
  std::array<double, 3> tmpl = {std::log(spec_template.lengthscale), std::log(spec_template.variance),
                                std::log(std::max(data.noise, HyperBounds::noise_min))};
  for (int i = 0; i < 3; ++i) tmpl[i] = std::clamp(tmpl[i], problem.lo[i], problem.hi[i]);
  starts.push_back(tmpl);

  // Latin hypercube over the log box: one stratum per start in each axis.
  const int extra = options.starts - 1;
  if (extra > 0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::array<std::vector<int>, 3> perms;
    for (auto& p : perms) {
      p.resize(extra);
      std::iota(p.begin(), p.end(), 0);
      for (int i = extra - 1; i > 0; --i) {
        std::uniform_int_distribution<int> pick(0, i);
        std::swap(p[i], p[pick(rng)]);
      }
    }
    for (int s = 0; s < extra; ++s) {
      std::array<double, 3> point{};
      for (int i = 0; i < 3; ++i) {
        const double u = (perms[i][s] + unit(rng)) / extra;
        point[i] = problem.lo[i] + u * (problem.hi[i] - problem.lo[i]);
      }
      starts.push_back(point);
    }
  }

  for (const auto& start : starts) run_nelder_mead(problem, start.data(), options);

  if (!std::isfinite(problem.best)) {
    throw std::runtime_error("fit_hyperparams: every likelihood evaluation was non-finite");
  }
  FitResult result;
  result.spec = spec_template;
  // Clamped so exp(log(bound)) rounding cannot leave the box.
  result.spec.lengthscale =
      std::clamp(std::exp(problem.best_theta[0]), HyperBounds::lengthscale_min, HyperBounds::lengthscale_max);
  result.spec.variance =
      std::clamp(std::exp(problem.best_theta[1]), HyperBounds::variance_min, HyperBounds::variance_max);
  result.noise = std::clamp(std::exp(problem.best_theta[2]), HyperBounds::noise_min, HyperBounds::noise_max);
  result.log_likelihood = problem.best;
  return result;
}

}  // namespace simplexbo
