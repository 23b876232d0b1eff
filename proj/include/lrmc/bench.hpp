#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lrmc/admm.hpp"
#include "lrmc/dc.hpp"
#include "lrmc/metrics.hpp"
#include "lrmc/types.hpp"

namespace lrmc {

enum class EstimatorKind { Empirical, Nuclear, Rank, Spectral };

std::string estimator_name(EstimatorKind kind);
EstimatorKind estimator_from_name(const std::string& name);

/// Solver knobs surfaced to the CLI; defaults match the library defaults.
struct SolverConfig {
  AdmmOptions admm;
  PdcOptions pdc;
  double pdc_alpha = 1e-3;
  std::vector<double> cv_constants = {0.25, 0.5, 1.0, 2.0, 4.0};
  int cv_folds = 3;
  double fixed_constant = 0.0;  // > 0 pins lambda = C sqrt(p log p / n), skipping CV
};

struct BenchmarkConfig {
  int p = 0;
  int r = 0;
  std::vector<double> k_grid;  // n = round(k r p log p), natural log
  int rolls = 1;
  std::uint64_t seed = 0;
  std::vector<EstimatorKind> estimators;
  std::optional<std::pair<double, double>> imbalance;
  int threads = 0;      // 0 picks hardware concurrency
  bool timing = false;  // real wall times break byte-determinism, so off by default
  SolverConfig solver;

  void validate() const;
  long n_for_k(double k) const;
};

struct BenchmarkRow {
  double k = 0.0;
  long n = 0;
  int roll = 0;
  EstimatorKind estimator = EstimatorKind::Empirical;
  MetricTriple metric;
  double wall_ms = 0.0;
  bool failed = false;
};

/// Runs the full sweep: per roll, one ground truth and one trajectory of the
/// largest length; smaller k values use prefixes. Rolls execute in parallel;
/// rows come back in (k, roll, estimator) order regardless of scheduling.
std::vector<BenchmarkRow> benchmark_run(const BenchmarkConfig& cfg);

struct SummaryRow {
  double k = 0.0;
  long n = 0;
  EstimatorKind estimator = EstimatorKind::Empirical;
  MetricTriple mean;
  MetricTriple stderr_;
  int failed_rolls = 0;
  int used_rolls = 0;
};

std::vector<SummaryRow> summarize(const std::vector<BenchmarkRow>& rows,
                                  const BenchmarkConfig& cfg);

// CSV emission; headers are part of the external interface.
void write_benchmark_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
void write_plot_data_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

}  // namespace lrmc
