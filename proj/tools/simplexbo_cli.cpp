// Command-line front end: run experiment plans, plot aggregates, evaluate
// objectives and run a quick invariant self-check.

#include "simplexbo/harness.hpp"
#include "simplexbo/plot.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

using namespace simplexbo;
using nlohmann::json;

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// "0,3,7", "0-24" or a mix of both.
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const std::string& item : split_list(text)) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      seeds.push_back(std::stoull(item));
    } else {
      const std::uint64_t a = std::stoull(item.substr(0, dash));
      const std::uint64_t b = std::stoull(item.substr(dash + 1));
      if (b < a) throw std::invalid_argument("bad seed range " + item);
      for (std::uint64_t s = a; s <= b; ++s) seeds.push_back(s);
    }
  }
  return seeds;
}

double parse_nu(const json& v) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    return std::stod(s);
  }
  return v.get<double>();
}

void apply_config(const json& cfg, ExperimentPlan& plan) {
  if (cfg.contains("objective")) {
    const json& o = cfg["objective"];
    if (o.is_string()) {
      plan.objective.name = o.get<std::string>();
    } else {
      plan.objective.name = o.value("name", plan.objective.name);
      plan.objective.dim = o.value("dim", plan.objective.dim);
      plan.objective.scale = o.value("scale", plan.objective.scale);
      plan.objective.instance_seed = o.value("instance_seed", plan.objective.instance_seed);
      plan.objective.command = o.value("command", plan.objective.command);
      plan.objective.timeout_seconds = o.value("timeout", plan.objective.timeout_seconds);
    }
  }
  if (cfg.contains("dim")) plan.objective.dim = cfg["dim"].get<int>();
  if (cfg.contains("methods")) {
    plan.methods.clear();
    for (const auto& m : cfg["methods"]) plan.methods.push_back(method_from_string(m.get<std::string>()));
  }
  plan.budget = cfg.value("budget", plan.budget);
  plan.init = cfg.value("init", plan.init);
  if (cfg.contains("seeds")) {
    const json& s = cfg["seeds"];
    plan.seeds = s.is_string() ? parse_seeds(s.get<std::string>()) : s.get<std::vector<std::uint64_t>>();
  }
  if (cfg.contains("acq")) {
    const json& a = cfg["acq"];
    if (a.is_string()) {
      plan.acq.kind = acq_kind_from_string(a.get<std::string>());
    } else {
      if (a.contains("kind")) plan.acq.kind = acq_kind_from_string(a["kind"].get<std::string>());
      plan.acq.beta = a.value("beta", plan.acq.beta);
    }
  }
  if (cfg.contains("kernel")) {
    const json& k = cfg["kernel"];
    const std::string family = k.is_string() ? k.get<std::string>() : k.value("family", std::string("se"));
    if (family == "se") plan.nu = std::numeric_limits<double>::infinity();
    if (k.is_object()) {
      if (k.contains("nu")) plan.nu = parse_nu(k["nu"]);
      plan.truncation = k.value("truncation", plan.truncation);
    }
    if (family == "matern" && std::isinf(plan.nu)) plan.nu = 2.5;
  }
  if (cfg.contains("optimizer")) {
    const json& o = cfg["optimizer"];
    OptimizerConfig& c = plan.optimizer;
    c.restarts = o.value("restarts", c.restarts);
    c.max_iters = o.value("max_iters", c.max_iters);
    if (o.contains("method")) {
      const std::string m = o["method"].get<std::string>();
      if (m == "trust_region") c.method = OptimizerMethod::trust_region;
      else if (m == "gd_armijo") c.method = OptimizerMethod::gd_armijo;
      else throw std::invalid_argument("unknown optimizer method " + m);
    }
    c.tr_initial_radius = o.value("tr_initial_radius", c.tr_initial_radius);
    c.tr_max_radius = o.value("tr_max_radius", c.tr_max_radius);
    c.tr_accept = o.value("tr_accept", c.tr_accept);
    c.armijo_c1 = o.value("armijo_c1", c.armijo_c1);
    c.backtrack = o.value("backtrack", c.backtrack);
    c.max_backtracks = o.value("max_backtracks", c.max_backtracks);
    c.grad_tol = o.value("grad_tol", c.grad_tol);
    c.fd_step = o.value("fd_step", c.fd_step);
  }
  if (cfg.contains("fit")) {
    const json& f = cfg["fit"];
    plan.fit.starts = f.value("starts", plan.fit.starts);
    plan.fit.max_evals_per_start = f.value("max_evals_per_start", plan.fit.max_evals_per_start);
  }
  if (cfg.contains("quantiles")) plan.quantiles = cfg["quantiles"].get<std::vector<double>>();
  plan.out_dir = cfg.value("out", plan.out_dir);
  plan.jobs = cfg.value("jobs", plan.jobs);
}

struct RunFlags {
  std::string config;
  std::string objective;
  int dim = 0;
  std::string methods;
  int budget = 0;
  int init = 0;
  std::string seeds;
  std::string acq;
  double beta = 0.0;
  std::string kernel;
  std::string nu;
  int trunc = 0;
  std::string out;
  int jobs = 0;
  std::string command;
  double timeout = 0.0;
  double scale = 0.0;
  std::uint64_t instance_seed = 0;
};

void add_objective_flags(CLI::App* app, RunFlags& f) {
  app->add_option("--objective", f.objective, "ackley, rosenbrock, griewank, planted, mixture or external");
  app->add_option("--dim", f.dim, "Simplex dimension d");
  app->add_option("--command", f.command, "Shell command of an external objective");
  app->add_option("--timeout", f.timeout, "External objective timeout in seconds");
  app->add_option("--scale", f.scale, "Tangent coordinate scale of projected benchmarks");
  app->add_option("--instance-seed", f.instance_seed, "Seed of planted/mixture instances");
}

void apply_objective_flags(CLI::App* app, const RunFlags& f, ObjectiveSpec& o) {
  if (app->count("--objective")) o.name = f.objective;
  if (app->count("--dim")) o.dim = f.dim;
  if (app->count("--command")) o.command = f.command;
  if (app->count("--timeout")) o.timeout_seconds = f.timeout;
  if (app->count("--scale")) o.scale = f.scale;
  if (app->count("--instance-seed")) o.instance_seed = f.instance_seed;
}

ExperimentPlan build_plan(CLI::App* app, const RunFlags& f) {
  ExperimentPlan plan;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw std::runtime_error("cannot read config " + f.config);
    apply_config(json::parse(in), plan);
  }
  apply_objective_flags(app, f, plan.objective);
  if (app->count("--methods")) {
    plan.methods.clear();
    for (const std::string& m : split_list(f.methods)) plan.methods.push_back(method_from_string(m));
  }
  if (app->count("--budget")) plan.budget = f.budget;
  if (app->count("--init")) plan.init = f.init;
  if (app->count("--seeds")) plan.seeds = parse_seeds(f.seeds);
  if (app->count("--acq")) plan.acq.kind = acq_kind_from_string(f.acq);
  if (app->count("--beta")) plan.acq.beta = f.beta;
  if (app->count("--kernel")) {
    if (f.kernel == "se") plan.nu = std::numeric_limits<double>::infinity();
    else if (f.kernel == "matern") plan.nu = std::isinf(plan.nu) ? 2.5 : plan.nu;
    else throw std::invalid_argument("--kernel must be se or matern");
  }
  if (app->count("--nu")) plan.nu = parse_nu(json(f.nu));
  if (app->count("--trunc")) plan.truncation = f.trunc;
  if (app->count("--out")) plan.out_dir = f.out;
  if (app->count("--jobs")) plan.jobs = f.jobs;
  plan.deterministic = deterministic_mode_from_env();
  return plan;
}

int selftest() {
  int failures = 0;
  auto check = [&](const std::string& name, bool ok) {
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name.c_str());
    if (!ok) ++failures;
  };
  std::mt19937_64 rng(12345);

  double worst = 0.0;
  for (int d : {2, 5, 10}) {
    for (int i = 0; i < 200; ++i) {
      const SimplexPoint x = sample_uniform(rng, d).clamped_interior(1e-6);
      const SimplexPoint y = sample_uniform(rng, d);
      const double ref = 2.0 * std::acos(std::min(1.0, x.coords().cwiseSqrt().dot(y.coords().cwiseSqrt())));
      worst = std::max(worst, std::abs(fisher_norm(log_map_alpha0(x, y)) - ref));
    }
  }
  check("log map norm equals Fisher-Rao distance", worst <= 1e-7);

  worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const SimplexPoint x = sample_uniform(rng, 4).clamped_interior(1e-6);
    const SimplexPoint y = sample_uniform(rng, 4).clamped_interior(1e-6);
    const SimplexPoint back = exp_map(x, log_map_alpha0(x, y), 0.0);
    worst = std::max(worst, (back.coords() - y.coords()).cwiseAbs().maxCoeff());
  }
  check("Levi-Civita exp/log roundtrip", worst <= 1e-8);

  bool normalized = true;
  for (int d : {1, 2, 5}) {
    for (double nu : {0.5, 1.5, 2.5, std::numeric_limits<double>::infinity()}) {
      const KernelSpec spec = std::isinf(nu) ? KernelSpec::spherical_se(d, 0.7, 2.0)
                                             : KernelSpec::spherical_matern(d, nu, 0.7, 2.0);
      const SimplexPoint x = sample_uniform(rng, d);
      normalized = normalized && std::abs(simplex_kernel(x, x, spec) - 2.0) <= 1e-10;
    }
  }
  check("kernel normalization k(x,x) = variance", normalized);

  Dataset data;
  data.noise = 0.0;
  for (int i = 0; i < 8; ++i) data.append(simplex_feature(sample_uniform(rng, 3), KernelFamily::spherical_se), i * 0.1);
  const GpPosterior post(data, KernelSpec::spherical_se(3, 0.5, 1.0), 0.0);
  bool interp = true;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const Moments m = post.moments(data.inputs[i]);
    interp = interp && std::abs(m.mean - data.outputs[i]) <= 1e-6 && m.variance <= 1e-8;
  }
  check("noiseless GP interpolation", interp);

  const ProjectedBenchmark bench(BenchmarkKind::ackley, 3);
  check("projected Ackley vanishes at the center", bench(SimplexPoint::center(3)) == 0.0);
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian optimization on the probability simplex"};
  app.require_subcommand(1);

  RunFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "Execute an experiment plan and write CSV results");
  run->add_option("--config", run_flags.config, "JSON plan file; flags override its values");
  add_objective_flags(run, run_flags);
  run->add_option("--methods", run_flags.methods, "Comma list of alpha0, alpha_minus1, eucl_simplex, eucl_sphere");
  run->add_option("--budget", run_flags.budget, "BO iterations B");
  run->add_option("--init", run_flags.init, "Initial uniform samples M");
  run->add_option("--seeds", run_flags.seeds, "Seeds, e.g. 0-24 or 1,2,3");
  run->add_option("--acq", run_flags.acq, "ei or lcb");
  run->add_option("--beta", run_flags.beta, "LCB exploration weight");
  run->add_option("--kernel", run_flags.kernel, "se or matern");
  run->add_option("--nu", run_flags.nu, "Matern smoothness: 0.5, 1.5, 2.5 or inf");
  run->add_option("--trunc", run_flags.trunc, "Spherical series truncation N");
  run->add_option("--out", run_flags.out, "Output directory");
  run->add_option("--jobs", run_flags.jobs, "Worker threads");

  std::string plot_in, plot_out, plot_title;
  CLI::App* plot = app.add_subcommand("plot", "Render aggregate.csv as SVG");
  plot->add_option("--in", plot_in, "aggregate.csv or a run output directory")->required();
  plot->add_option("--out", plot_out, "SVG path (default: next to the input)");
  plot->add_option("--title", plot_title, "Plot title");

  RunFlags eval_flags;
  std::string point;
  CLI::App* eval = app.add_subcommand("eval", "Evaluate an objective at one simplex point");
  add_objective_flags(eval, eval_flags);
  eval->add_option("--point", point, "Comma-separated simplex coordinates (default: center)");

  app.add_subcommand("selftest", "Run a quick invariant check");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const ExperimentPlan plan = build_plan(run, run_flags);
      const PlanResult result = run_plan(plan);
      if (plan.out_dir.empty()) {
        std::cout << result.data_csv;
      } else {
        std::cerr << "wrote " << plan.out_dir << "/{data.csv,aggregate.csv,meta.json}\n";
      }
      return 0;
    }
    if (plot->parsed()) {
      std::filesystem::path in(plot_in);
      if (std::filesystem::is_directory(in)) in /= "aggregate.csv";
      const std::string out = plot_out.empty() ? (in.parent_path() / "regret.svg").string() : plot_out;
      plot_aggregate(in.string(), out, plot_title);
      std::cerr << "wrote " << out << "\n";
      return 0;
    }
    if (eval->parsed()) {
      ObjectiveSpec spec;
      apply_objective_flags(eval, eval_flags, spec);
      const NamedObjective obj = make_objective(spec);
      Vector x = Vector::Constant(spec.dim + 1, 1.0 / (spec.dim + 1));
      if (!point.empty()) {
        const auto parts = split_list(point);
        x.resize(static_cast<Eigen::Index>(parts.size()));
        for (std::size_t i = 0; i < parts.size(); ++i) x[static_cast<Eigen::Index>(i)] = std::stod(parts[i]);
      }
      std::printf("%.17g\n", obj.fn(SimplexPoint(x)));
      return 0;
    }
    return selftest();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
