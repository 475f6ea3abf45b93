// gstoep: Toeplitz covariance estimation from the command line.
//
//   gstoep estimate --input x.csv --estimator pgd [--order auto|W] [--icm] [--out r.json]
//   gstoep benchmark --config exp.toml [--runs R] [--seed S] [--out DIR] [--svg]
//   gstoep timing --config exp.toml [--seed S] [--out DIR]
//   gstoep list-estimators
//
// Exit codes: 0 success, 1 usage or parse error, 2 numerical failure.

#include "gstoep/baselines.hpp"
#include "gstoep/bench/config.hpp"
#include "gstoep/bench/harness.hpp"
#include "gstoep/bench/io.hpp"
#include "gstoep/bench/registry.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>

using namespace gstoep;
using namespace gstoep::bench;

namespace {

constexpr int kUsage = 1;
constexpr int kNumerical = 2;

OrderPolicy parse_order(const std::string& s) {
  if (s == "auto") return {};
  try {
    size_t used = 0;
    const long v = std::stol(s, &used);
    if (used != s.size() || v < 0) throw std::invalid_argument(s);
    return {false, static_cast<Index>(v)};
  } catch (const std::logic_error&) {
    throw UsageError("--order must be 'auto' or a nonnegative integer, got '" + s + "'");
  }
}

int cmd_estimate(const std::string& input, const std::string& name, const std::string& order, bool icm,
                 const std::string& out_path) {
  const EstimatorInfo* info = find_estimator(name);
  if (!info) throw UsageError("unknown estimator '" + name + "'; see list-estimators");
  if (icm && !info->icm_capable) {
    throw UsageError("estimator '" + name + "' does not guarantee a positive definite estimate, so it has no ICM");
  }
  const MatR x = read_samples_csv(input);
  if (x.cols() < 2) throw UsageError("need at least 2 columns (P >= 2)");
  if (name == "eig" && x.cols() > kEigenvalueGuard) throw UsageError("eig is limited to P <= 64; use frob or pgd");

  EstimatorSettings settings;
  const OrderPolicy policy = parse_order(order);
  if (!policy.automatic && policy.fixed >= x.cols()) throw UsageError("--order must be below P");
  if (info->hyper_name == "k") {
    if (!policy.automatic) settings.width = policy.fixed;
  } else {
    settings.order = policy;
  }
  const MatR s = sample_cov(x);
  const auto start = std::chrono::steady_clock::now();
  const Fit fit = info->fit(FitInput{x, s}, settings, icm);
  ReportExtras extras;
  extras.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  nlohmann::json j = report_json(name, fit, extras);
  if (icm && fit.icm) {
    std::vector<std::vector<double>> m(static_cast<size_t>(fit.icm->rows()));
    for (Index i = 0; i < fit.icm->rows(); ++i)
      for (Index k = 0; k < fit.icm->cols(); ++k) m[static_cast<size_t>(i)].push_back((*fit.icm)(i, k));
    j["icm"] = m;
  }
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream out(out_path);
    if (!out) throw UsageError("cannot write '" + out_path + "'");
    out << j.dump(2) << "\n";
  }
  return 0;
}

void print_summary(const BenchmarkResult& r) {
  std::printf("%-8s %5s %5s %-12s %5s %5s %12s %12s\n", "x", "P", "N", "estimator", "ok", "fail", "nmse_c", "nmse_icm");
  for (const auto& a : r.rows) {
    std::printf("%-8.4g %5ld %5ld %-12s %5d %5d %12.4g %12.4g\n", r.config.process.x(a.point), static_cast<long>(a.p),
                static_cast<long>(a.n), a.estimator.c_str(), a.ok, a.failed, a.nmse_c.mean, a.nmse_icm.mean);
  }
}

int cmd_benchmark(const std::string& config, int runs, long long seed, const std::string& out, bool svg) {
  ExperimentConfig cfg = load_config(config);
  if (runs > 0) cfg.runs = runs;
  if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.validate();
  const BenchmarkResult r = run_benchmark(cfg);
  write_benchmark(r, out, svg || cfg.svg);
  print_summary(r);
  std::cout << "wrote " << out << "\n";
  return 0;
}

int cmd_timing(const std::string& config, long long seed, const std::string& out) {
  ExperimentConfig cfg = load_config(config);
  if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
  const TimingResult r = run_timing(cfg);
  write_timing(r, out);
  std::printf("%-12s", "estimator");
  for (Index p : r.dims) std::printf(" %12s", ("P=" + std::to_string(p)).c_str());
  std::printf("  %s\n", "complexity");
  for (const auto& name : r.estimators) {
    std::printf("%-12s", name.c_str());
    for (Index p : r.dims) std::printf(" %12.4g", r.at(name, p));
    std::printf("  %s\n", find_estimator(name)->complexity.c_str());
  }
  std::cout << "mean ms per estimate; wrote " << out << "\n";
  return 0;
}

int cmd_list() {
  std::printf("%-12s %-4s %-20s %s\n", "name", "icm", "complexity", "description");
  for (const auto& e : registry())
    std::printf("%-12s %-4s %-20s %s\n", e.name.c_str(), e.icm_capable ? "yes" : "no", e.complexity.c_str(),
                e.description.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Toeplitz covariance estimation via the Gohberg-Semencul parameterization"};
  app.require_subcommand(1);

  std::string input, estimator, order = "auto", out, config;
  bool icm = false, svg = false;
  int runs = 0;
  long long seed = -1;

  auto* est = app.add_subcommand("estimate", "fit one estimator to a CSV of samples and print a JSON report");
  est->add_option("--input", input, "CSV file, one sample per row")->required();
  est->add_option("--estimator", estimator, "estimator name (see list-estimators)")->required();
  est->add_option("--order", order, "GS order or band width: auto or an integer");
  est->add_flag("--icm", icm, "also report the inverse covariance (PD-guaranteeing estimators only)");
  est->add_option("--out", out, "write the report here instead of stdout");

  auto* bench = app.add_subcommand("benchmark", "run a Monte Carlo experiment from a config file");
  bench->add_option("--config", config, "experiment config")->required();
  bench->add_option("--runs", runs, "override the number of runs")->check(CLI::PositiveNumber);
  bench->add_option("--seed", seed, "override the base seed")->check(CLI::NonNegativeNumber);
  bench->add_option("--out", out, "output directory")->default_str("bench_out");
  bench->add_flag("--svg", svg, "also write SVG plots");

  auto* timing = app.add_subcommand("timing", "time fixed-hyperparameter estimates across dimensions");
  timing->add_option("--config", config, "experiment config")->required();
  timing->add_option("--seed", seed, "override the base seed")->check(CLI::NonNegativeNumber);
  timing->add_option("--out", out, "output directory")->default_str("timing_out");

  app.add_subcommand("list-estimators", "list registered estimators");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (est->parsed()) return cmd_estimate(input, estimator, order, icm, out);
    if (bench->parsed()) return cmd_benchmark(config, runs, seed, out.empty() ? "bench_out" : out, svg);
    if (timing->parsed()) return cmd_timing(config, seed, out.empty() ? "timing_out" : out);
    return cmd_list();
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return kNumerical;
  }
}
