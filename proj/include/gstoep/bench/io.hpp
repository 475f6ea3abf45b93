#pragma once

// Sample files (CSV, one sample per row, optional header, '#' comments) and
// JSON estimation reports.

#include "gstoep/bench/registry.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>

namespace gstoep::bench {

/// Throws ParseError with the offending line number.
MatR read_samples_csv(std::istream& in);
MatR read_samples_csv(const std::filesystem::path& path);

void write_samples_csv(std::ostream& out, const MatR& x);

struct ReportExtras {
  std::optional<double> nmse_c;
  std::optional<double> nmse_icm;
  double wall_ms = 0.0;
};

/// Fixed keys: estimator, alpha0, alpha, order, family_id, loglik, nmse_c,
/// nmse_icm, iterations, converged, wall_ms; plus the CM (first column when
/// Toeplitz, full matrix otherwise) and diagnostics.
nlohmann::json report_json(const std::string& estimator, const Fit& fit, const ReportExtras& extras);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace gstoep::bench
