#include "lrmc/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include "lrmc/chain.hpp"
#include "lrmc/io.hpp"
#include "lrmc/spectral.hpp"
#include "lrmc/synth.hpp"

namespace lrmc {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kTrajStream = 0x54524a4bull;
}  // namespace

std::string estimator_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Empirical: return "empirical";
    case EstimatorKind::Nuclear: return "nuclear";
    case EstimatorKind::Rank: return "rank";
    case EstimatorKind::Spectral: return "spectral";
  }
  throw InvalidInputError("estimator_name: unknown kind");
}

EstimatorKind estimator_from_name(const std::string& name) {
  if (name == "empirical") return EstimatorKind::Empirical;
  if (name == "nuclear") return EstimatorKind::Nuclear;
  if (name == "rank") return EstimatorKind::Rank;
  if (name == "spectral") return EstimatorKind::Spectral;
  throw InvalidInputError("unknown estimator '" + name + "'");
}

void BenchmarkConfig::validate() const {
  if (p < 2) throw InvalidInputError("BenchmarkConfig: p must be >= 2");
  if (r < 1 || r > p) throw InvalidInputError("BenchmarkConfig: need 1 <= r <= p");
  if (k_grid.empty()) throw InvalidInputError("BenchmarkConfig: empty k grid");
  for (std::size_t i = 0; i < k_grid.size(); ++i) {
    if (!(k_grid[i] > 0.0)) throw InvalidInputError("BenchmarkConfig: k must be positive");
    if (i > 0 && k_grid[i] <= k_grid[i - 1])
      throw InvalidInputError("BenchmarkConfig: k grid must be strictly ascending");
  }
  if (rolls < 1) throw InvalidInputError("BenchmarkConfig: rolls must be >= 1");
  if (estimators.empty()) throw InvalidInputError("BenchmarkConfig: no estimators selected");
}

long BenchmarkConfig::n_for_k(double k) const {
  const double v = k * r * p * std::log(static_cast<double>(p));
  return std::llround(v);  // rounds half away from zero
}

namespace {

struct ItemOutput {
  std::vector<BenchmarkRow> rows;
};

// All estimators for one roll, all k values (prefix trajectories).
ItemOutput run_roll(const BenchmarkConfig& cfg, int roll) {
  ItemOutput out;
  SynthConfig synth_cfg;
  synth_cfg.p = cfg.p;
  synth_cfg.r = cfg.r;
  synth_cfg.seed = Rng::derive(cfg.seed, static_cast<std::uint64_t>(roll));
  synth_cfg.imbalance = cfg.imbalance;
  const TransitionMatrix truth =
      cfg.imbalance ? random_lowrank_imbalanced(synth_cfg) : random_lowrank(synth_cfg);
  const StationaryDistribution pi = stationary_distribution(truth);

  const long n_max = cfg.n_for_k(cfg.k_grid.back());
  const Trajectory trajectory =
      simulate(truth, n_max, Rng::derive(cfg.seed, static_cast<std::uint64_t>(roll), kTrajStream));

  for (std::size_t ki = 0; ki < cfg.k_grid.size(); ++ki) {
    const double k = cfg.k_grid[ki];
    const long n = cfg.n_for_k(k);
    Trajectory prefix;
    prefix.p = cfg.p;
    prefix.states.assign(trajectory.states.begin(), trajectory.states.begin() + n + 1);
    const TransitionCounts counts = count_transitions(prefix);

    // nuclear output feeds the rank estimator, so cache it
    enum class NuclearStatus { NotRun, Ok, Failed };
    NuclearStatus nuclear_status = NuclearStatus::NotRun;
    NuclearSolution nuclear_sol;
    double lambda_used = 0.0;

    auto ensure_nuclear = [&]() {
      if (nuclear_status == NuclearStatus::Ok) return;
      if (nuclear_status == NuclearStatus::Failed)
        throw ConvergenceError("nuclear estimator failed earlier in this roll", 0.0);
      nuclear_status = NuclearStatus::Failed;
      if (cfg.solver.fixed_constant > 0.0) {
        lambda_used = cfg.solver.fixed_constant *
                      std::sqrt(cfg.p * std::log(static_cast<double>(cfg.p)) /
                                static_cast<double>(n));
      } else {
        AdmmOptions cv_opts = cfg.solver.admm;
        cv_opts.tol = std::max(cv_opts.tol, 1e-5);  // model selection needs less precision
        const CvResult cv =
            select_lambda_cv(prefix, cfg.solver.cv_constants, cfg.solver.cv_folds, cv_opts);
        lambda_used = cv.lambda;
      }
      NuclearProblem prob{&counts, lambda_used};
      nuclear_sol = sgs_admm_solve(prob, cfg.solver.admm);
      nuclear_status = NuclearStatus::Ok;
    };

    for (EstimatorKind kind : cfg.estimators) {
      BenchmarkRow row;
      row.k = k;
      row.n = n;
      row.roll = roll;
      row.estimator = kind;
      row.metric = {kNan, kNan, kNan, kNan};
      const auto t0 = std::chrono::steady_clock::now();
      try {
        TransitionMatrix est = TransitionMatrix::normalize_rows(Matrix::Zero(cfg.p, cfg.p));
        switch (kind) {
          case EstimatorKind::Empirical:
            est = empirical_estimator(counts);
            break;
          case EstimatorKind::Spectral:
            est = spectral_estimator(counts, cfg.r);
            break;
          case EstimatorKind::Nuclear:
            ensure_nuclear();
            est = nuclear_sol.normalized;
            break;
          case EstimatorKind::Rank: {
            ensure_nuclear();
            DcProblem prob{&counts, cfg.r, lambda_used, cfg.solver.pdc_alpha};
            PdcOptions popts = cfg.solver.pdc;
            popts.admm = cfg.solver.admm;
            const Matrix x0 = pdc_warm_start(nuclear_sol.normalized, counts);
            est = pdc_solve(prob, x0, popts).normalized;
            break;
          }
        }
        row.metric = metrics(truth, pi, est, cfg.r);
      } catch (const std::exception&) {
        row.failed = true;
      }
      if (cfg.timing) {
        const auto t1 = std::chrono::steady_clock::now();
        row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
      }
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

}  // namespace

std::vector<BenchmarkRow> benchmark_run(const BenchmarkConfig& cfg) {
  cfg.validate();
  const int n_items = cfg.rolls;
  std::vector<ItemOutput> outputs(n_items);

  int threads = cfg.threads > 0 ? cfg.threads
                                : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, n_items);

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int item = next.fetch_add(1);
      if (item >= n_items) return;
      outputs[item] = run_roll(cfg, item);
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // merge in (k, roll, estimator) order
  std::vector<BenchmarkRow> rows;
  rows.reserve(static_cast<std::size_t>(cfg.rolls) * cfg.k_grid.size() * cfg.estimators.size());
  for (std::size_t ki = 0; ki < cfg.k_grid.size(); ++ki)
    for (int roll = 0; roll < cfg.rolls; ++roll)
      for (std::size_t ei = 0; ei < cfg.estimators.size(); ++ei)
        rows.push_back(outputs[roll].rows[ki * cfg.estimators.size() + ei]);
  return rows;
}

namespace {

struct Accum {
  std::vector<double> f, kl, kls, uv;
  int failed = 0;

  void add(const BenchmarkRow& row) {
    if (row.failed) {
      ++failed;
      return;
    }
    f.push_back(row.metric.eta_f);
    kl.push_back(row.metric.eta_kl);
    kls.push_back(row.metric.eta_kl_smoothed);
    uv.push_back(row.metric.eta_uv);
  }
};

std::pair<double, double> mean_stderr(const std::vector<double>& xs) {
  if (xs.empty()) return {kNan, kNan};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() == 1 || !std::isfinite(mean)) return {mean, kNan};
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size() - 1);
  return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

}  // namespace

std::vector<SummaryRow> summarize(const std::vector<BenchmarkRow>& rows,
                                  const BenchmarkConfig& cfg) {
  std::vector<SummaryRow> out;
  for (double k : cfg.k_grid) {
    for (EstimatorKind kind : cfg.estimators) {
      Accum acc;
      long n = 0;
      for (const BenchmarkRow& row : rows)
        if (row.k == k && row.estimator == kind) {
          acc.add(row);
          n = row.n;
        }
      SummaryRow s;
      s.k = k;
      s.n = n;
      s.estimator = kind;
      std::tie(s.mean.eta_f, s.stderr_.eta_f) = mean_stderr(acc.f);
      std::tie(s.mean.eta_kl, s.stderr_.eta_kl) = mean_stderr(acc.kl);
      std::tie(s.mean.eta_kl_smoothed, s.stderr_.eta_kl_smoothed) = mean_stderr(acc.kls);
      std::tie(s.mean.eta_uv, s.stderr_.eta_uv) = mean_stderr(acc.uv);
      s.failed_rolls = acc.failed;
      s.used_rolls = static_cast<int>(acc.f.size());
      out.push_back(s);
    }
  }
  return out;
}

void write_benchmark_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows) {
  out << "k,n,roll,estimator,eta_F,eta_KL,eta_UV,wall_time_ms,failed\n";
  for (const BenchmarkRow& row : rows) {
    out << format_double(row.k) << ',' << row.n << ',' << row.roll << ','
        << estimator_name(row.estimator) << ',' << format_double(row.metric.eta_f) << ','
        << format_double(row.metric.eta_kl) << ',' << format_double(row.metric.eta_uv) << ','
        << format_double(row.wall_ms) << ',' << (row.failed ? 1 : 0) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "k,n,estimator,mean_eta_F,stderr_eta_F,mean_eta_KL,stderr_eta_KL,"
         "mean_eta_KL_smoothed,stderr_eta_KL_smoothed,mean_eta_UV,stderr_eta_UV,"
         "used_rolls,failed_rolls\n";
  for (const SummaryRow& s : rows) {
    out << format_double(s.k) << ',' << s.n << ',' << estimator_name(s.estimator) << ','
        << format_double(s.mean.eta_f) << ',' << format_double(s.stderr_.eta_f) << ','
        << format_double(s.mean.eta_kl) << ',' << format_double(s.stderr_.eta_kl) << ','
        << format_double(s.mean.eta_kl_smoothed) << ','
        << format_double(s.stderr_.eta_kl_smoothed) << ',' << format_double(s.mean.eta_uv)
        << ',' << format_double(s.stderr_.eta_uv) << ',' << s.used_rolls << ','
        << s.failed_rolls << '\n';
  }
}

void write_plot_data_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "metric,estimator,n,mean\n";
  const char* metric_names[] = {"eta_F", "eta_KL", "eta_KL_smoothed", "eta_UV"};
  for (int m = 0; m < 4; ++m) {
    // collect the estimators present, preserving first-seen order
    std::vector<EstimatorKind> kinds;
    for (const SummaryRow& s : rows)
      if (std::find(kinds.begin(), kinds.end(), s.estimator) == kinds.end())
        kinds.push_back(s.estimator);
    for (EstimatorKind kind : kinds) {
      std::vector<const SummaryRow*> series;
      for (const SummaryRow& s : rows)
        if (s.estimator == kind) series.push_back(&s);
      std::sort(series.begin(), series.end(),
                [](const SummaryRow* a, const SummaryRow* b) { return a->n < b->n; });
      for (const SummaryRow* s : series) {
        const double value = m == 0   ? s->mean.eta_f
                             : m == 1 ? s->mean.eta_kl
                             : m == 2 ? s->mean.eta_kl_smoothed
                                      : s->mean.eta_uv;
        out << metric_names[m] << ',' << estimator_name(kind) << ',' << s->n << ','
            << format_double(value) << '\n';
      }
    }
  }
}

}  // namespace lrmc
