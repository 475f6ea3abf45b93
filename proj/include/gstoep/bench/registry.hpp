#pragma once

// Named estimators shared by the benchmark harness and the CLI.

#include "gstoep/bench/config.hpp"
#include "gstoep/estimators.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace gstoep::bench {

struct Fit {
  MatR cm;
  /// Dense ICM, filled only when requested and the estimator guarantees PD.
  std::optional<MatR> icm;
  /// GS estimators carry their full report.
  std::optional<EstimationReport> report;
  bool toeplitz = true;
  std::string hyper_name;  // "order", "k", "rho", "iterations" or empty
  double hyper = 0.0;
  std::string family_id;
  int iterations = 0;
  bool converged = true;
};

struct FitInput {
  const MatR& x;  // N x P samples
  const MatR& s;  // their SCM
};

struct EstimatorInfo {
  std::string name;
  std::string description;
  /// Output is guaranteed PD, so NMSE of the ICM is defined.
  bool icm_capable = false;
  /// Complexity without hyperparameter tuning, for the timing table.
  std::string complexity;
  /// Name of the tuned hyperparameter ("order", "k", "rho", "iterations").
  std::string hyper_name;
  std::function<Fit(const FitInput&, const EstimatorSettings&, bool want_icm)> fit;
  /// Fixed-hyperparameter kernel for timing; empty when not timed.
  std::function<void(const FitInput&, Index hyper, int em_iter)> timed;
};

const std::vector<EstimatorInfo>& registry();

/// nullptr when unknown.
const EstimatorInfo* find_estimator(const std::string& name);

}  // namespace gstoep::bench
