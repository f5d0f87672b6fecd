#include "simplexbo/objectives.hpp"

#include "simplexbo/external_objective.hpp"

#include <cmath>
#include <memory>
#include <random>
#include <stdexcept>

namespace simplexbo {

double ackley(const Vector& z) {
  if (z.size() == 0) throw std::invalid_argument("ackley: empty input");
  const double n = static_cast<double>(z.size());
  const double rms = std::sqrt(z.squaredNorm() / n);
  const double cos_mean = (2.0 * M_PI * z.array()).cos().sum() / n;
  // Grouped so that the origin evaluates to exactly 0.
  return 20.0 * (1.0 - std::exp(-0.2 * rms)) + (std::exp(1.0) - std::exp(cos_mean));
}

double griewank(const Vector& z) {
  if (z.size() == 0) throw std::invalid_argument("griewank: empty input");
  double prod = 1.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) prod *= std::cos(z[i] / std::sqrt(static_cast<double>(i + 1)));
  return z.squaredNorm() / 4000.0 + (1.0 - prod);
}

double rosenbrock_shifted(const Vector& z) {
  if (z.size() < 2) throw std::invalid_argument("rosenbrock_shifted: need at least two coordinates");
  const Vector w = z.array() + 1.0;
  double f = 0.0;
  for (Eigen::Index i = 0; i + 1 < w.size(); ++i) {
    const double a = w[i + 1] - w[i] * w[i];
    const double b = 1.0 - w[i];
    f += 100.0 * a * a + b * b;
  }
  return f;
}

std::string to_string(BenchmarkKind kind) {
  switch (kind) {
    case BenchmarkKind::ackley: return "ackley";
    case BenchmarkKind::rosenbrock: return "rosenbrock";
    case BenchmarkKind::griewank: return "griewank";
  }
  return "unknown";
}

BenchmarkKind benchmark_kind_from_string(const std::string& name) {
  if (name == "ackley") return BenchmarkKind::ackley;
  if (name == "rosenbrock") return BenchmarkKind::rosenbrock;
  if (name == "griewank") return BenchmarkKind::griewank;
  throw std::invalid_argument("unknown benchmark: " + name);
}

std::vector<TangentVector> tangent_basis(const SimplexPoint& c) {
  if (!c.interior()) throw std::invalid_argument("tangent_basis: base point must be interior");
  const int d = c.dim();
  std::vector<TangentVector> basis;
  basis.reserve(d);
  for (int i = 0; i < d; ++i) {
    Vector e = Vector::Zero(d + 1);
    e[i] = 1.0;
    TangentVector v = tangent_project(c, e);
    // Two Gram–Schmidt sweeps keep orthonormality at round-off level.
    for (int sweep = 0; sweep < 2; ++sweep) {
      for (const TangentVector& b : basis) v = v - b * fisher_inner(c, v, b);
    }
    const double n = fisher_norm(v);
    if (!(n > 1e-12)) throw std::runtime_error("tangent_basis: degenerate direction");
    basis.push_back(v * (1.0 / n));
  }
  return basis;
}

double benchmark_radius(BenchmarkKind kind) {
  switch (kind) {
    case BenchmarkKind::ackley: return 32.768;
    case BenchmarkKind::rosenbrock: return 2.048;
    case BenchmarkKind::griewank: return 600.0;
  }
  return 1.0;
}

ProjectedBenchmark::ProjectedBenchmark(BenchmarkKind kind, int dim, double scale)
    : ProjectedBenchmark(kind, SimplexPoint::center(dim), tangent_basis(SimplexPoint::center(dim)),
                         scale > 0.0 ? scale : default_scale(kind, dim)) {}

ProjectedBenchmark::ProjectedBenchmark(BenchmarkKind kind, SimplexPoint base, std::vector<TangentVector> basis,
                                       double scale)
    : kind_(kind), base_(std::move(base)), basis_(std::move(basis)), scale_(scale) {
  if (!base_.interior()) throw std::invalid_argument("ProjectedBenchmark: base point must be interior");
  if (static_cast<int>(basis_.size()) != base_.dim()) throw std::invalid_argument("ProjectedBenchmark: basis size");
  if (!(scale_ > 0.0) || !std::isfinite(scale_)) throw std::invalid_argument("ProjectedBenchmark: scale");
  if (kind_ == BenchmarkKind::rosenbrock && base_.dim() < 2) {
    throw std::invalid_argument("ProjectedBenchmark: rosenbrock needs d >= 2");
  }
}

double ProjectedBenchmark::default_scale(BenchmarkKind kind, int dim) {
  // Fisher distance from the center to a vertex.
  const double reach = 2.0 * std::acos(1.0 / std::sqrt(static_cast<double>(dim + 1)));
  return benchmark_radius(kind) / reach;
}

Vector ProjectedBenchmark::coordinates(const SimplexPoint& x) const {
  const TangentVector eta = log_map_alpha0(base_, x);
  Vector z(static_cast<Eigen::Index>(basis_.size()));
  for (std::size_t j = 0; j < basis_.size(); ++j) z[static_cast<Eigen::Index>(j)] = fisher_inner(base_, eta, basis_[j]);
  return scale_ * z;
}

double ProjectedBenchmark::operator()(const SimplexPoint& x) const {
  const Vector z = coordinates(x);
  switch (kind_) {
    case BenchmarkKind::ackley: return ackley(z);
    case BenchmarkKind::rosenbrock: return rosenbrock_shifted(z);
    case BenchmarkKind::griewank: return griewank(z);
  }
  return 0.0;
}

double projected_benchmark_eval(const ProjectedBenchmark& b, const SimplexPoint& x) { return b(x); }

double PlantedObjective::operator()(const SimplexPoint& x) const {
  const double r = fisher_rao_distance(x, target_);
  return r * r;
}

// ---------------------------------------------------------------------------
// Mixture likelihood

MixtureObjective::MixtureObjective(int dim, std::uint64_t seed, int samples) {
  if (dim < 1 || samples < 1) throw std::invalid_argument("MixtureObjective: invalid sizes");
  const int k = dim + 1;
  means_.resize(k);
  for (int j = 0; j < k; ++j) means_[j] = 2.0 * j - (k - 1);
  std::mt19937_64 rng(seed);
  truth_ = sample_uniform(rng, dim);
  std::discrete_distribution<int> pick(truth_.coords().data(), truth_.coords().data() + k);
  std::normal_distribution<double> noise(0.0, 1.0);
  data_.resize(samples);
  for (double& v : data_) v = means_[pick(rng)] + noise(rng);

  density_.resize(samples, k);
  const double norm = 1.0 / std::sqrt(2.0 * M_PI);
  for (int i = 0; i < samples; ++i) {
    for (int j = 0; j < k; ++j) {
      const double u = data_[i] - means_[j];
      density_(i, j) = norm * std::exp(-0.5 * u * u);
    }
  }

  // EM on the weights with fixed components.
  Vector w = Vector::Constant(k, 1.0 / k);
  for (int it = 0; it < 20000; ++it) {
    const Vector mix = density_ * w;
    Vector next = Vector::Zero(k);
    for (int i = 0; i < samples; ++i) next += (density_.row(i).transpose().cwiseProduct(w)) / mix[i];
    next /= samples;
    const double change = (next - w).cwiseAbs().maxCoeff();
    w = next;
    if (change < 1e-15) break;
  }
  argmin_ = SimplexPoint::normalized(w);
  f_min_ = (*this)(argmin_);
}

double MixtureObjective::operator()(const SimplexPoint& x) const {
  if (x.size() != density_.cols()) throw std::invalid_argument("MixtureObjective: dimension mismatch");
  const Vector mix = density_ * x.coords();
  return -mix.array().log().mean();
}

NamedObjective make_objective(const ObjectiveSpec& spec) {
  if (spec.dim < 1) throw std::invalid_argument("make_objective: dim must be >= 1");
  NamedObjective out;
  out.name = spec.name;
  out.dim = spec.dim;
  if (spec.name == "ackley" || spec.name == "rosenbrock" || spec.name == "griewank") {
    const ProjectedBenchmark bench(benchmark_kind_from_string(spec.name), spec.dim, spec.scale);
    out.fn = [bench](const SimplexPoint& x) { return bench(x); };
    out.f_min = 0.0;
    out.scale = bench.scale();
  } else if (spec.name == "planted") {
    std::mt19937_64 rng(spec.instance_seed);
    // Keep the planted optimum away from the boundary.
    const Vector p = sample_uniform(rng, spec.dim).coords().array() * 0.8 + 0.2 / (spec.dim + 1);
    const PlantedObjective obj{SimplexPoint::normalized(p)};
    out.fn = [obj](const SimplexPoint& x) { return obj(x); };
    out.f_min = 0.0;
  } else if (spec.name == "mixture") {
    auto obj = std::make_shared<MixtureObjective>(spec.dim, spec.instance_seed);
    out.f_min = obj->minimum_value();
    out.fn = [obj](const SimplexPoint& x) { return (*obj)(x); };
  } else if (spec.name == "external") {
    out.fn = external_objective(spec.command, spec.timeout_seconds);
  } else {
    throw std::invalid_argument("unknown objective: " + spec.name);
  }
  return out;
}

}  // namespace simplexbo
