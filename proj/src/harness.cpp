#include "simplexbo/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace simplexbo {

bool deterministic_mode_from_env() {
  const char* v = std::getenv(kDeterministicEnv);
  return v != nullptr && std::string(v) == "1";
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void ExperimentPlan::validate() const {
  if (methods.empty()) throw std::invalid_argument("plan: no methods");
  if (seeds.empty()) throw std::invalid_argument("plan: no seeds");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw std::invalid_argument("plan: seeds must be distinct");
  }
  if (std::set<Method>(methods.begin(), methods.end()).size() != methods.size()) {
    throw std::invalid_argument("plan: methods must be distinct");
  }
  if (quantiles.empty()) throw std::invalid_argument("plan: no quantiles");
  for (double q : quantiles) {
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("plan: quantiles must lie in (0,1)");
  }
  if (jobs < 1) throw std::invalid_argument("plan: jobs must be >= 1");
  for (Method m : methods) method_config(m, seeds.front()).validate(objective.dim);
}

MethodConfig ExperimentPlan::method_config(Method method, std::uint64_t seed) const {
  MethodConfig cfg;
  cfg.method = method;
  cfg.kernel = default_kernel(method, objective.dim, nu, truncation);
  cfg.acq = acq;
  cfg.optimizer = optimizer;
  cfg.fit = fit;
  cfg.budget = budget;
  cfg.init = init;
  cfg.seed = seed;
  return cfg;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile_sorted: empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::string quantile_column(double q) {
  if (q == 0.5) return "median";
  char buf[32];
  std::snprintf(buf, sizeof buf, "q%g", 100.0 * q);
  return buf;
}

namespace {

double native_regret(double incumbent_max_form, double f_min) { return std::max(-incumbent_max_form - f_min, 0.0); }

double log10_regret(double regret) { return std::log10(std::max(regret, kRegretFloor)); }

}  // namespace

std::string format_data_csv(const std::vector<RunRecord>& records, int dim, double f_min, bool deterministic) {
  std::ostringstream out;
  out << "method,seed,iter";
  for (int i = 0; i <= dim; ++i) out << ",x_" << i;
  out << ",y,incumbent,regret,log10_regret,wall_s\n";
  for (const RunRecord& rec : records) {
    for (const RunRow& row : rec.rows) {
      const double regret = native_regret(row.incumbent, f_min);
      out << to_string(rec.method) << ',' << rec.seed << ',' << row.iter;
      for (Eigen::Index i = 0; i < row.x.size(); ++i) out << ',' << format_number(row.x[i]);
      out << ',' << format_number(-row.y) << ',' << format_number(-row.incumbent) << ',' << format_number(regret)
          << ',' << format_number(log10_regret(regret)) << ','
          << format_number(deterministic ? 0.0 : row.wall_seconds) << '\n';
    }
  }
  return out.str();
}

std::string format_aggregate_csv(const std::vector<RunRecord>& records, const std::vector<Method>& methods,
                                 double f_min, const std::vector<double>& quantiles) {
  std::ostringstream out;
  out << "method,iter";
  for (double q : quantiles) out << ',' << quantile_column(q);
  out << ",runs,excluded\n";
  for (Method m : methods) {
    std::vector<const RunRecord*> kept;
    int excluded = 0;
    for (const RunRecord& rec : records) {
      if (rec.method != m) continue;
      if (rec.aborted) {
        ++excluded;
      } else {
        kept.push_back(&rec);
      }
    }
    std::size_t iters = 0;
    for (const RunRecord* rec : kept) iters = std::max(iters, rec->rows.size());
    for (std::size_t it = 0; it < iters; ++it) {
      std::vector<double> values;
      for (const RunRecord* rec : kept) {
        if (it < rec->rows.size()) values.push_back(log10_regret(native_regret(rec->rows[it].incumbent, f_min)));
      }
      std::sort(values.begin(), values.end());
      out << to_string(m) << ',' << it + 1;
      for (double q : quantiles) out << ',' << format_number(quantile_sorted(values, q));
      out << ',' << values.size() << ',' << excluded << '\n';
    }
  }
  return out.str();
}

PlanResult run_plan(const ExperimentPlan& plan) {
  plan.validate();
  const NamedObjective objective = make_objective(plan.objective);
  const Objective maximized = [&objective](const SimplexPoint& x) { return -objective.fn(x); };

  struct Task {
    Method method;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (Method m : plan.methods) {
    for (std::uint64_t s : plan.seeds) tasks.push_back({m, s});
  }

  std::vector<RunRecord> records(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const Task& t = tasks[i];
      try {
        records[i] = run_bo(maximized, plan.objective.dim, plan.method_config(t.method, t.seed));
      } catch (const std::exception& e) {
        RunRecord rec;
        rec.method = t.method;
        rec.seed = t.seed;
        rec.aborted = true;
        rec.abort_reason = e.what();
        records[i] = std::move(rec);
      }
    }
  };
  const int workers = std::min<int>(plan.jobs, static_cast<int>(tasks.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  PlanResult result;
  result.scale = objective.scale;
  double observed_min = std::numeric_limits<double>::infinity();
  for (const RunRecord& rec : records) {
    for (const RunRow& row : rec.rows) observed_min = std::min(observed_min, -row.y);
  }
  if (objective.f_min && !(observed_min < *objective.f_min - 1e-9)) {
    result.f_min = *objective.f_min;
    result.f_min_source = "known";
  } else {
    result.f_min = std::isfinite(observed_min) ? observed_min : 0.0;
    result.f_min_source = "best_observed";
  }

  result.data_csv = format_data_csv(records, plan.objective.dim, result.f_min, plan.deterministic);
  result.aggregate_csv = format_aggregate_csv(records, plan.methods, result.f_min, plan.quantiles);

  nlohmann::ordered_json meta;
  meta["objective"] = plan.objective.name;
  meta["dim"] = plan.objective.dim;
  meta["scale"] = objective.scale;
  meta["instance_seed"] = plan.objective.instance_seed;
  if (plan.objective.name == "external") meta["command"] = plan.objective.command;
  meta["f_min"] = result.f_min;
  meta["f_min_source"] = result.f_min_source;
  meta["regret_floor"] = kRegretFloor;
  std::vector<std::string> method_names;
  for (Method m : plan.methods) method_names.push_back(to_string(m));
  meta["methods"] = method_names;
  meta["seeds"] = plan.seeds;
  meta["budget"] = plan.budget;
  meta["init"] = plan.init;
  meta["acq"] = to_string(plan.acq.kind);
  meta["beta"] = plan.acq.beta;
  meta["kernel"] = std::isinf(plan.nu) ? "se" : "matern";
  if (!std::isinf(plan.nu)) meta["nu"] = plan.nu;
  meta["truncation"] = plan.truncation;
  meta["quantiles"] = plan.quantiles;
  meta["deterministic"] = plan.deterministic;
  nlohmann::ordered_json aborted = nlohmann::ordered_json::array();
  for (const RunRecord& rec : records) {
    if (rec.aborted) aborted.push_back({{"method", to_string(rec.method)}, {"seed", rec.seed}, {"reason", rec.abort_reason}});
  }
  meta["aborted_runs"] = aborted;
  result.meta_json = meta.dump(2) + "\n";
  result.records = std::move(records);

  if (!plan.out_dir.empty()) {
    std::filesystem::create_directories(plan.out_dir);
    const std::filesystem::path dir(plan.out_dir);
    auto write = [](const std::filesystem::path& path, const std::string& text) {
      std::ofstream f(path, std::ios::binary);
      if (!f) throw std::runtime_error("cannot write " + path.string());
      f << text;
    };
    write(dir / "data.csv", result.data_csv);
    write(dir / "aggregate.csv", result.aggregate_csv);
    write(dir / "meta.json", result.meta_json);
  }
  return result;
}

}  // namespace simplexbo
