// Command-line front end: simulate | estimate | benchmark | aggregate.
// Configuration comes from a flat "key = value" file plus --set overrides;
// unknown keys are rejected. Exit codes: 0 success, 2 usage/config error,
// 3 convergence failure, 4 I/O error.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lrmc/bench.hpp"
#include "lrmc/chain.hpp"
#include "lrmc/cluster.hpp"
#include "lrmc/dc.hpp"
#include "lrmc/ingest.hpp"
#include "lrmc/io.hpp"
#include "lrmc/matops.hpp"
#include "lrmc/spectral.hpp"
#include "lrmc/synth.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// ---------------------------------------------------------------------------
// key = value configuration with schema checking

class Config {
 public:
  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw lrmc::IoError("cannot open config: " + path);
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      const auto trimmed = trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
      set(trim(trimmed.substr(0, eq)), trim(trimmed.substr(eq + 1)));
    }
  }

  void set(const std::string& key, const std::string& value) {
    if (key.empty()) throw UsageError("empty config key");
    values_[key] = value;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key) {
    used_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) throw UsageError("missing config key '" + key + "'");
    return it->second;
  }

  std::string get_string(const std::string& key, const std::string& fallback) {
    used_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  long get_long(const std::string& key) { return to_long(key, get_string(key)); }
  long get_long(const std::string& key, long fallback) {
    return has(key) ? get_long(key) : (used_.insert(key), fallback);
  }
  double get_double(const std::string& key) { return to_double(key, get_string(key)); }
  double get_double(const std::string& key, double fallback) {
    return has(key) ? get_double(key) : (used_.insert(key), fallback);
  }
  bool get_bool(const std::string& key, bool fallback) {
    if (!has(key)) {
      used_.insert(key);
      return fallback;
    }
    const std::string v = get_string(key);
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw UsageError("config key '" + key + "': expected a boolean, got '" + v + "'");
  }

  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& fallback) {
    if (!has(key)) {
      used_.insert(key);
      return fallback;
    }
    std::vector<double> out;
    std::istringstream ss(get_string(key));
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
    if (out.empty()) throw UsageError("config key '" + key + "': empty list");
    return out;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : values_)
      if (!used_.count(key)) throw UsageError("unknown config key '" + key + "'");
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }
  static long to_long(const std::string& key, const std::string& v) {
    try {
      std::size_t pos = 0;
      const long out = std::stol(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return out;
    } catch (const std::exception&) {
      throw UsageError("config key '" + key + "': expected an integer, got '" + v + "'");
    }
  }
  static double to_double(const std::string& key, const std::string& v) {
    try {
      std::size_t pos = 0;
      const double out = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return out;
    } catch (const std::exception&) {
      throw UsageError("config key '" + key + "': expected a number, got '" + v + "'");
    }
  }

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

struct GlobalArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<long> seed;
  std::optional<int> threads;
  std::vector<std::string> overrides;
};

Config build_config(const GlobalArgs& args) {
  Config cfg;
  if (!args.config_path.empty()) cfg.load_file(args.config_path);
  for (const std::string& kv : args.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (args.seed) cfg.set("seed", std::to_string(*args.seed));
  if (args.threads) cfg.set("threads", std::to_string(*args.threads));
  return cfg;
}

void require_input_file(const std::string& path) {
  if (!fs::exists(path)) throw lrmc::IoError("input file not found: " + path);
}

std::string out_path(const GlobalArgs& args, const std::string& name) {
  fs::create_directories(args.out_dir);
  return (fs::path(args.out_dir) / name).string();
}

lrmc::AdmmOptions admm_options(Config& cfg) {
  lrmc::AdmmOptions o;
  o.sigma0 = cfg.get_double("admm_sigma0", o.sigma0);
  o.gamma = cfg.get_double("admm_gamma", o.gamma);
  o.tol = cfg.get_double("admm_tol", o.tol);
  o.max_iter = cfg.get_long("admm_max_iter", o.max_iter);
  o.trace_every = static_cast<int>(cfg.get_long("admm_trace_every", o.trace_every));
  return o;
}

lrmc::PdcOptions pdc_options(Config& cfg) {
  lrmc::PdcOptions o;
  o.eta_stop = cfg.get_double("pdc_eta_stop", o.eta_stop);
  o.max_outer = static_cast<int>(cfg.get_long("pdc_max_outer", o.max_outer));
  o.c_growth = cfg.get_double("pdc_c_growth", o.c_growth);
  o.c_max_steps = static_cast<int>(cfg.get_long("pdc_c_max_steps", o.c_max_steps));
  o.rank_tol = cfg.get_double("pdc_rank_tol", o.rank_tol);
  o.inner_tol0 = cfg.get_double("pdc_inner_tol0", o.inner_tol0);
  o.inner_tol_min = cfg.get_double("pdc_inner_tol_min", o.inner_tol_min);
  return o;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const GlobalArgs& args) {
  Config cfg = build_config(args);
  lrmc::SynthConfig synth;
  synth.p = static_cast<int>(cfg.get_long("p"));
  synth.r = static_cast<int>(cfg.get_long("r"));
  synth.seed = static_cast<std::uint64_t>(cfg.get_long("seed", 0));
  const long n = cfg.get_long("n");
  const std::string init_spec = cfg.get_string("init", "stationary");
  const bool has_g1 = cfg.has("gamma1"), has_g2 = cfg.has("gamma2");
  if (has_g1 != has_g2) throw UsageError("gamma1 and gamma2 must be given together");
  if (has_g1) synth.imbalance = {cfg.get_double("gamma1"), cfg.get_double("gamma2")};
  cfg.reject_unknown();

  if (n < 1) throw UsageError("n must be >= 1");
  synth.validate();  // r <= p etc.

  lrmc::InitialState init = lrmc::InitialState::stationary();
  if (init_spec == "stationary") {
    init = lrmc::InitialState::stationary();
  } else if (init_spec == "uniform") {
    init = lrmc::InitialState::uniform();
  } else if (init_spec.rfind("fixed:", 0) == 0) {
    init = lrmc::InitialState::fixed(std::stoi(init_spec.substr(6)));
  } else {
    throw UsageError("init must be stationary | uniform | fixed:<state>");
  }

  const lrmc::TransitionMatrix truth =
      synth.imbalance ? lrmc::random_lowrank_imbalanced(synth) : lrmc::random_lowrank(synth);
  const lrmc::Trajectory traj =
      lrmc::simulate(truth, n, lrmc::Rng::derive(synth.seed, 0x54524a4bull), init);

  lrmc::save_matrix_csv(out_path(args, "matrix.csv"), truth.entries());
  lrmc::save_trajectory(out_path(args, "trajectory.txt"), traj);
  json meta;
  meta["command"] = "simulate";
  meta["p"] = synth.p;
  meta["r"] = synth.r;
  meta["n"] = n;
  meta["seed"] = static_cast<long>(synth.seed);
  meta["init"] = init_spec;
  if (synth.imbalance) {
    meta["gamma1"] = synth.imbalance->first;
    meta["gamma2"] = synth.imbalance->second;
  }
  lrmc::save_text(out_path(args, "meta.json"), meta.dump(2) + "\n");
  std::cout << "simulate: wrote matrix.csv, trajectory.txt, meta.json to " << args.out_dir
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// estimate

int cmd_estimate(const GlobalArgs& args) {
  Config cfg = build_config(args);
  const std::string estimator = cfg.get_string("estimator");
  const std::string traj_path = cfg.get_string("trajectory", "");
  const std::string counts_path = cfg.get_string("counts", "");
  const int r = static_cast<int>(cfg.get_long("r", 0));
  const double lambda_cfg = cfg.get_double("lambda", 0.0);
  const double fixed_constant = cfg.get_double("fixed_constant", 0.0);
  const std::vector<double> cv_constants =
      cfg.get_double_list("cv_constants", {0.25, 0.5, 1.0, 2.0, 4.0});
  const int cv_folds = static_cast<int>(cfg.get_long("cv_folds", 5));
  const double pdc_alpha = cfg.get_double("pdc_alpha", 1e-3);
  lrmc::AdmmOptions admm = admm_options(cfg);
  lrmc::PdcOptions pdc = pdc_options(cfg);
  pdc.admm = admm;
  cfg.reject_unknown();

  if (traj_path.empty() == counts_path.empty())
    throw UsageError("exactly one of 'trajectory' or 'counts' is required");

  std::optional<lrmc::Trajectory> traj;
  lrmc::TransitionCounts counts;
  if (!traj_path.empty()) {
    require_input_file(traj_path);
    traj = lrmc::load_trajectory(traj_path);
    counts = lrmc::count_transitions(*traj);
  } else {
    require_input_file(counts_path);
    counts = lrmc::load_counts_csv(counts_path);
  }

  const int p = counts.p();
  const long n = counts.total;
  std::ostringstream report;
  std::ostringstream trace_csv;
  lrmc::Matrix estimate;
  report << "estimator: " << estimator << "\np: " << p << "\ntransitions: " << n << "\n";

  auto lambda_default = [&]() {
    if (lambda_cfg > 0.0) return lambda_cfg;
    const double scale = std::sqrt(p * std::log(static_cast<double>(p)) / static_cast<double>(n));
    if (fixed_constant > 0.0) return fixed_constant * scale;
    if (traj) {
      const lrmc::CvResult cv = lrmc::select_lambda_cv(*traj, cv_constants, cv_folds, admm);
      report << "lambda (cross-validated, C=" << cv.constant << "): " << cv.lambda << "\n";
      return cv.lambda;
    }
    report << "lambda defaulted to sqrt(p log p / n)\n";
    return scale;
  };

  std::string failure;  // convergence failures still write their trace

  auto fill_nuclear = [&](const lrmc::NuclearSolution& sol) {
    estimate = sol.normalized.entries();
    report << "iterations: " << sol.report.iters << "\nkkt_residual: " << sol.report.kkt
           << "\nkkt_relative: " << sol.report.kkt_rel
           << "\nprimal_objective: " << sol.report.primal_obj
           << "\ndual_objective: " << sol.report.dual_obj
           << "\nrow_sum_residual: " << sol.report.row_sum_residual
           << "\nrank_est: " << lrmc::numerical_rank(estimate, 1e-6) << "\n";
    trace_csv << "iter,kkt,primal_obj,dual_obj\n";
    for (const auto& row : sol.report.trace)
      trace_csv << row.iter << ',' << lrmc::format_double(row.kkt) << ','
                << lrmc::format_double(row.primal_obj) << ','
                << lrmc::format_double(row.dual_obj) << '\n';
  };
  auto fill_rank = [&](const lrmc::DcSolution& sol) {
    estimate = sol.normalized.entries();
    report << "outer_iterations: " << sol.trace.size() << "\nrank_est: " << sol.rank_est
           << "\nc_final: " << sol.c_final << "\ncritical_fixed_point: " << sol.critical
           << "\nfinal_objective: " << (sol.trace.empty() ? 0.0 : sol.trace.back().objective)
           << "\nfinal_step_norm: " << (sol.trace.empty() ? 0.0 : sol.trace.back().step_norm)
           << "\n";
    trace_csv << "outer_iter,objective,rank_est,step_norm,c_current\n";
    for (const auto& row : sol.trace)
      trace_csv << row.outer_iter << ',' << lrmc::format_double(row.objective) << ','
                << row.rank_est << ',' << lrmc::format_double(row.step_norm) << ','
                << lrmc::format_double(row.c_current) << '\n';
  };

  if (estimator == "empirical") {
    estimate = lrmc::empirical_estimator(counts).entries();
  } else if (estimator == "spectral") {
    if (r < 1) throw UsageError("spectral estimator needs r");
    estimate = lrmc::spectral_estimator(counts, r).entries();
  } else if (estimator == "nuclear") {
    const double lambda = lambda_default();
    report << "lambda: " << lambda << "\n";
    const lrmc::NuclearProblem prob{&counts, lambda};
    try {
      fill_nuclear(lrmc::sgs_admm_solve(prob, admm));
    } catch (const lrmc::AdmmMaxIterError& e) {
      fill_nuclear(e.best());
      failure = e.what();
    }
  } else if (estimator == "rank") {
    if (r < 1) throw UsageError("rank estimator needs r");
    const double lambda = lambda_default();
    report << "c0: " << lambda << "\n";
    const lrmc::NuclearProblem convex{&counts, lambda};
    const lrmc::NuclearSolution convex_sol = lrmc::sgs_admm_solve(convex, admm);
    const lrmc::DcProblem prob{&counts, r, lambda, pdc_alpha};
    const lrmc::Matrix x0 = lrmc::pdc_warm_start(convex_sol.normalized, counts);
    try {
      fill_rank(lrmc::pdc_solve(prob, x0, pdc));
    } catch (const lrmc::PdcRankError& e) {
      fill_rank(e.partial());
      failure = e.what();
    }
  } else {
    throw UsageError("estimator must be empirical | nuclear | rank | spectral");
  }

  lrmc::save_matrix_csv(out_path(args, "estimate.csv"), estimate);
  lrmc::save_text(out_path(args, "trace.csv"), trace_csv.str());
  lrmc::save_text(out_path(args, "report.txt"), report.str());
  if (!failure.empty()) {
    std::cerr << "convergence failure: " << failure << "\n";
    return 3;
  }
  std::cout << "estimate: wrote estimate.csv, trace.csv, report.txt to " << args.out_dir << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// benchmark

int cmd_benchmark(const GlobalArgs& args) {
  Config cfg = build_config(args);
  lrmc::BenchmarkConfig bench;
  bench.p = static_cast<int>(cfg.get_long("p"));
  bench.r = static_cast<int>(cfg.get_long("r"));
  bench.k_grid = cfg.get_double_list("k_grid", {});
  bench.rolls = static_cast<int>(cfg.get_long("rolls"));
  bench.seed = static_cast<std::uint64_t>(cfg.get_long("seed", 0));
  bench.threads = static_cast<int>(cfg.get_long("threads", 0));
  bench.timing = cfg.get_bool("timing", false);
  const bool has_g1 = cfg.has("gamma1"), has_g2 = cfg.has("gamma2");
  if (has_g1 != has_g2) throw UsageError("gamma1 and gamma2 must be given together");
  if (has_g1) bench.imbalance = {cfg.get_double("gamma1"), cfg.get_double("gamma2")};
  {
    std::istringstream ss(cfg.get_string("estimators", "empirical,nuclear,rank,spectral"));
    std::string item;
    while (std::getline(ss, item, ','))
      bench.estimators.push_back(lrmc::estimator_from_name(item));
  }
  bench.solver.cv_constants = cfg.get_double_list("cv_constants", bench.solver.cv_constants);
  bench.solver.cv_folds = static_cast<int>(cfg.get_long("cv_folds", bench.solver.cv_folds));
  bench.solver.fixed_constant = cfg.get_double("fixed_constant", 0.0);
  bench.solver.pdc_alpha = cfg.get_double("pdc_alpha", bench.solver.pdc_alpha);
  bench.solver.admm = admm_options(cfg);
  bench.solver.pdc = pdc_options(cfg);
  const bool emit_plot = cfg.get_bool("emit_plot_data", true);
  cfg.reject_unknown();
  bench.validate();

  const std::vector<lrmc::BenchmarkRow> rows = lrmc::benchmark_run(bench);
  const std::vector<lrmc::SummaryRow> summary = lrmc::summarize(rows, bench);

  {
    std::ostringstream ss;
    lrmc::write_benchmark_csv(ss, rows);
    lrmc::save_text(out_path(args, "benchmark.csv"), ss.str());
  }
  {
    std::ostringstream ss;
    lrmc::write_summary_csv(ss, summary);
    lrmc::save_text(out_path(args, "summary.csv"), ss.str());
  }
  if (emit_plot) {
    std::ostringstream ss;
    lrmc::write_plot_data_csv(ss, summary);
    lrmc::save_text(out_path(args, "plot_data.csv"), ss.str());
  }
  std::cout << "benchmark: " << rows.size() << " rows written to " << args.out_dir << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// aggregate

int cmd_aggregate(const GlobalArgs& args) {
  Config cfg = build_config(args);
  const std::string records_path = cfg.get_string("records");
  const long min_visits = cfg.get_long("min_visits", 0);
  const int r = static_cast<int>(cfg.get_long("r"));
  const int k = static_cast<int>(cfg.get_long("k"));
  const int restarts = static_cast<int>(cfg.get_long("restarts", 10));
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_long("seed", 0));
  const double lambda_cfg = cfg.get_double("lambda", 0.0);
  const double pdc_alpha = cfg.get_double("pdc_alpha", 1e-3);
  lrmc::AdmmOptions admm = admm_options(cfg);
  lrmc::PdcOptions pdc = pdc_options(cfg);
  pdc.admm = admm;
  cfg.reject_unknown();

  require_input_file(records_path);
  std::ifstream in(records_path);
  const lrmc::IngestResult ingest = lrmc::ingest_transitions_csv(in, min_visits);
  const int p = ingest.counts.p();
  if (r < 1 || r > p) throw UsageError("need 1 <= r <= surviving state count");
  if (k < 1 || k > p) throw UsageError("need 1 <= k <= surviving state count");

  const double lambda =
      lambda_cfg > 0.0
          ? lambda_cfg
          : std::sqrt(p * std::log(static_cast<double>(p)) /
                      static_cast<double>(ingest.counts.total));
  const lrmc::NuclearProblem convex{&ingest.counts, lambda};
  const lrmc::NuclearSolution convex_sol = lrmc::sgs_admm_solve(convex, admm);
  const lrmc::DcProblem prob{&ingest.counts, r, lambda, pdc_alpha};
  const lrmc::Matrix x0 = lrmc::pdc_warm_start(convex_sol.normalized, ingest.counts);
  const lrmc::DcSolution sol = lrmc::pdc_solve(prob, x0, pdc);

  const lrmc::ClusterResult clusters = lrmc::aggregate_states(sol.normalized, r, k, seed, restarts);

  std::ostringstream cluster_csv;
  cluster_csv << "state_id,label\n";
  for (int i = 0; i < p; ++i)
    cluster_csv << ingest.index_to_id[i] << ',' << clusters.labels[i] << '\n';
  lrmc::save_text(out_path(args, "clusters.csv"), cluster_csv.str());

  // per-cluster mean transition distribution over member states
  std::ostringstream dest_csv;
  dest_csv << "label";
  for (int j = 0; j < p; ++j) dest_csv << ",to_" << ingest.index_to_id[j];
  dest_csv << '\n';
  for (int c = 0; c < k; ++c) {
    lrmc::Vector mean = lrmc::Vector::Zero(p);
    int members = 0;
    for (int i = 0; i < p; ++i)
      if (clusters.labels[i] == c) {
        mean += sol.normalized.entries().row(i).transpose();
        ++members;
      }
    if (members > 0) mean /= static_cast<double>(members);
    dest_csv << c;
    for (int j = 0; j < p; ++j) dest_csv << ',' << lrmc::format_double(mean(j));
    dest_csv << '\n';
  }
  lrmc::save_text(out_path(args, "destinations.csv"), dest_csv.str());
  std::cout << "aggregate: " << p << " states into " << k << " clusters, written to "
            << args.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-rank Markov transition-matrix estimation"};
  app.require_subcommand(1);

  GlobalArgs args;
  app.add_option("--config", args.config_path, "key = value configuration file");
  app.add_option("--out", args.out_dir, "output directory (default .)");
  long seed_flag = 0;
  int threads_flag = 0;
  auto* seed_opt = app.add_option("--seed", seed_flag, "override config seed");
  auto* threads_opt = app.add_option("--threads", threads_flag, "override worker threads");
  app.add_option("--set", args.overrides, "override a config key, key=value")
      ->take_all();

  auto* simulate = app.add_subcommand("simulate", "draw a ground truth and a trajectory");
  auto* estimate = app.add_subcommand("estimate", "fit one estimator to a trajectory or counts");
  auto* benchmark = app.add_subcommand("benchmark", "run the simulation study sweep");
  auto* aggregate = app.add_subcommand("aggregate", "cluster states from transition records");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }
  if (*seed_opt) args.seed = seed_flag;
  if (*threads_opt) args.threads = threads_flag;

  try {
    if (*simulate) return cmd_simulate(args);
    if (*estimate) return cmd_estimate(args);
    if (*benchmark) return cmd_benchmark(args);
    if (*aggregate) return cmd_aggregate(args);
    throw UsageError("no command given");
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const lrmc::InvalidInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const lrmc::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const lrmc::ConvergenceError& e) {
    std::cerr << "convergence failure: " << e.what() << "\n";
    return 3;
  } catch (const lrmc::RankFailureError& e) {
    std::cerr << "convergence failure: " << e.what() << "\n";
    return 3;
  } catch (const lrmc::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
