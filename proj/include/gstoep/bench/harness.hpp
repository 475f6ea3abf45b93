#pragma once

// Monte Carlo benchmark and timing runs. Cells (grid point, run) are
// independent and seeded from the config alone, so results do not depend
// on the number of workers or their scheduling.

#include "gstoep/bench/config.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace gstoep::bench {

std::uint64_t splitmix64(std::uint64_t x);

/// base xor hash(point, dim index, sample-count index, run).
std::uint64_t cell_seed(std::uint64_t base, size_t point, size_t dim, size_t samples, int run);

/// GSTOEP_WORKERS if set (>= 1), else the hardware concurrency.
int worker_count();

struct CellResult {
  bool ok = false;
  std::string error;
  double nmse_c = 0.0;
  double nmse_icm = 0.0;  // NaN unless the estimator is ICM-capable and ICM output is on
  double wall_ms = 0.0;
  double hyper = 0.0;
  std::string family_id;
  bool pd_ok = true;  // GS estimators: spectral certificate of the output
};

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  int count = 0;
};

MeanSe mean_se(const std::vector<double>& v);

struct Aggregate {
  size_t point = 0;
  Index p = 0;
  Index n = 0;
  std::string estimator;
  int ok = 0;
  int failed = 0;
  int pd_violations = 0;
  MeanSe nmse_c;
  MeanSe nmse_icm;  // count 0 when not defined
  double wall_ms = 0.0;
  std::string hyper_name;
  double hyper_mean = 0.0;
  std::map<double, int> hyper_hist;  // discrete hyperparameters only
  std::map<std::string, int> family_hist;
  std::vector<std::string> errors;  // first few distinct failure messages
};

struct BenchmarkResult {
  ExperimentConfig config;
  std::vector<Aggregate> rows;  // canonical order: point, dim, samples, estimator
  /// All cells, indexed [row][run].
  std::vector<std::vector<CellResult>> cells;
};

BenchmarkResult run_benchmark(const ExperimentConfig& cfg, int workers = worker_count());

/// Writes results.csv, hyper.csv, failures.csv, wall_ms.csv, summary.json and,
/// when asked, one SVG per (P, N, metric) into `dir`.
void write_benchmark(const BenchmarkResult& result, const std::filesystem::path& dir, bool svg);

struct TimingRow {
  std::string estimator;
  Index p = 0;
  double mean_ms = 0.0;
  int calls = 0;
  bool skipped = false;  // e.g. eig above its guard
};

struct TimingResult {
  std::vector<TimingRow> rows;
  std::vector<std::string> estimators;
  std::vector<Index> dims;

  /// Mean time of `estimator` at dimension p; NaN if absent.
  double at(const std::string& estimator, Index p) const;
};

/// Times the fixed-hyperparameter kernels on the first process point,
/// serially. Data generation and the SCM are excluded.
TimingResult run_timing(const ExperimentConfig& cfg);

/// timing.csv and complexity.csv.
void write_timing(const TimingResult& result, const std::filesystem::path& dir);

}  // namespace gstoep::bench
