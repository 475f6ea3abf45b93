#pragma once

// Experiment configuration: a TOML subset (sections, scalars, nested
// arrays, comments) mapped onto typed configs. Unknown sections and keys
// are hard errors.

#include "gstoep/estimators.hpp"
#include "gstoep/processes.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace gstoep::bench {

/// Malformed input or config; carries the 1-based line when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line = 0);
  int line() const { return line_; }

 private:
  int line_;
};

/// Bad command-line usage or an invalid combination of settings.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TomlValue {
  using Array = std::vector<TomlValue>;
  std::variant<double, std::int64_t, bool, std::string, Array> v;
  int line = 0;

  bool is_number() const { return std::holds_alternative<double>(v) || std::holds_alternative<std::int64_t>(v); }
  double as_double(const std::string& key) const;
  std::int64_t as_int(const std::string& key) const;
  bool as_bool(const std::string& key) const;
  const std::string& as_string(const std::string& key) const;
  const Array& as_array(const std::string& key) const;
};

/// section name ("" for the root) -> key -> value, in file order.
struct TomlDocument {
  std::map<std::string, std::map<std::string, TomlValue>> sections;
  std::map<std::string, int> section_lines;
};

TomlDocument parse_toml(const std::string& text);

/// Per-estimator settings. Absent values mean "tune".
struct EstimatorSettings {
  OrderPolicy order;                      // GS order: BIC or fixed
  std::optional<std::string> family;      // box family id, or all families
  std::optional<Index> width;             // banding / tapering k, or CV
  std::optional<double> rho;              // shrinkage intensity, or plug-in
  Index em_g = 0;                         // 0 means 2P
  int em_max_iter = 200;
  double em_tol = 1e-6;
};

struct EstimatorEntry {
  std::string name;
  EstimatorSettings settings;
};

struct ProcessSweep {
  ProcessSpec::Kind kind = ProcessSpec::Kind::AR;
  double sigma2 = 1.0;
  std::vector<VecR> a;  // one coefficient vector per point (AR, ARMA)
  std::vector<VecR> b;  // (MA, ARMA)
  std::vector<double> hurst;  // (FBM)

  size_t points() const;
  ProcessSpec at(size_t point, Index p) const;
  /// Abscissa for plots: the first coefficient or the Hurst exponent.
  double x(size_t point) const;
  std::string axis_label() const;
  std::string kind_name() const;
};

struct TimingConfig {
  std::vector<Index> dims{64, 128, 256};
  Index samples = 64;
  Index hyper = 6;
  int datasets = 3;
  double min_ms = 30.0;  // repeat each kernel until this much time elapsed
  int em_iter = 10;      // fixed EM iteration count
  std::vector<std::string> estimators;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ProcessSweep process;
  std::vector<Index> dims;
  std::vector<Index> samples;
  std::vector<EstimatorEntry> estimators;
  int runs = 500;
  std::uint64_t seed = 0;
  bool nmse_c = true;
  bool nmse_icm = true;
  bool svg = false;
  TimingConfig timing;

  /// Throws UsageError on inconsistent settings.
  void validate() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace gstoep::bench
