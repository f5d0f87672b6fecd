#pragma once

#include "simplexbo/bo.hpp"
#include "simplexbo/objectives.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace simplexbo {

/// Environment variable that switches run_plan to deterministic-parallel mode:
/// set to 1, wall-clock columns are written as 0 so output files depend only
/// on the plan, never on scheduling or --jobs.
inline constexpr const char* kDeterministicEnv = "SIMPLEXBO_DETERMINISTIC";
bool deterministic_mode_from_env();

struct ExperimentPlan {
  ObjectiveSpec objective;
  std::vector<Method> methods = {Method::alpha0, Method::alpha_minus1, Method::eucl_simplex, Method::eucl_sphere};
  int budget = 100;
  int init = 5;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  AcqSpec acq;
  /// Matérn smoothness; infinity selects the squared-exponential kernels.
  double nu = std::numeric_limits<double>::infinity();
  int truncation = 64;
  OptimizerConfig optimizer;
  FitOptions fit;
  std::vector<double> quantiles = {0.25, 0.5, 0.75};
  /// Directory receiving data.csv, aggregate.csv and meta.json. Empty: no files.
  std::string out_dir;
  int jobs = 1;
  bool deterministic = false;

  void validate() const;
  MethodConfig method_config(Method method, std::uint64_t seed) const;
};

struct PlanResult {
  /// Ordered by (position in plan.methods, seed).
  std::vector<RunRecord> records;
  /// Minimum of the objective (native, minimization form) used for regret.
  double f_min = 0.0;
  /// "known" or "best_observed".
  std::string f_min_source;
  double scale = 0.0;
  std::string data_csv;
  std::string aggregate_csv;
  std::string meta_json;
};

/// Executes every (method, seed) run on `plan.jobs` worker threads and
/// renders the CSV and metadata files (written when out_dir is set).
PlanResult run_plan(const ExperimentPlan& plan);

/// Header: method,seed,iter,x_0..x_d,y,incumbent,regret,log10_regret,wall_s.
/// y and incumbent are in the objective's native (minimization) units.
std::string format_data_csv(const std::vector<RunRecord>& records, int dim, double f_min, bool deterministic);

/// Regret floor applied before log10.
inline constexpr double kRegretFloor = 1e-16;

/// Linear interpolation between order statistics (positions q·(n−1)) of a
/// sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double q);

/// Column name of a quantile: "median" for 0.5, "q25" style otherwise.
std::string quantile_column(double q);

/// Per (method, iter) quantiles of log10 regret over non-aborted runs.
/// Header: method,iter,<quantile columns>,runs,excluded.
std::string format_aggregate_csv(const std::vector<RunRecord>& records, const std::vector<Method>& methods,
                                 double f_min, const std::vector<double>& quantiles);

std::string format_number(double v);

}  // namespace simplexbo
