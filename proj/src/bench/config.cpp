#include "gstoep/bench/config.hpp"

#include "gstoep/bench/registry.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace gstoep::bench {

ParseError::ParseError(const std::string& what, int line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

namespace {

std::string type_error(const std::string& key, const char* want) { return "key '" + key + "' must be " + want; }

}  // namespace

double TomlValue::as_double(const std::string& key) const {
  if (auto* d = std::get_if<double>(&v)) return *d;
  if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  throw ParseError(type_error(key, "a number"), line);
}

std::int64_t TomlValue::as_int(const std::string& key) const {
  if (auto* i = std::get_if<std::int64_t>(&v)) return *i;
  throw ParseError(type_error(key, "an integer"), line);
}

bool TomlValue::as_bool(const std::string& key) const {
  if (auto* b = std::get_if<bool>(&v)) return *b;
  throw ParseError(type_error(key, "true or false"), line);
}

const std::string& TomlValue::as_string(const std::string& key) const {
  if (auto* s = std::get_if<std::string>(&v)) return *s;
  throw ParseError(type_error(key, "a string"), line);
}

const TomlValue::Array& TomlValue::as_array(const std::string& key) const {
  if (auto* a = std::get_if<Array>(&v)) return *a;
  throw ParseError(type_error(key, "an array"), line);
}

// ---------------------------------------------------------------- parser

namespace {

class ValueParser {
 public:
  ValueParser(const std::string& text, int line) : s_(text), line_(line) {}

  TomlValue parse() {
    TomlValue v = value();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing characters '" + s_.substr(pos_) + "'");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_); }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  TomlValue value() {
    skip_ws();
    if (pos_ >= s_.size()) fail("missing value");
    TomlValue out;
    out.line = line_;
    const char c = s_[pos_];
    if (c == '[') {
      ++pos_;
      TomlValue::Array arr;
      skip_ws();
      if (pos_ < s_.size() && s_[pos_] == ']') {
        ++pos_;
        out.v = std::move(arr);
        return out;
      }
      while (true) {
        arr.push_back(value());
        skip_ws();
        if (pos_ >= s_.size()) fail("unterminated array");
        if (s_[pos_] == ',') {
          ++pos_;
          skip_ws();
          if (pos_ < s_.size() && s_[pos_] == ']') {  // trailing comma
            ++pos_;
            break;
          }
          continue;
        }
        if (s_[pos_] == ']') {
          ++pos_;
          break;
        }
        fail("expected ',' or ']' in array");
      }
      out.v = std::move(arr);
      return out;
    }
    if (c == '"') {
      ++pos_;
      std::string str;
      while (pos_ < s_.size() && s_[pos_] != '"') {
        if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
        str.push_back(s_[pos_++]);
      }
      if (pos_ >= s_.size()) fail("unterminated string");
      ++pos_;
      out.v = std::move(str);
      return out;
    }
    size_t end = pos_;
    while (end < s_.size() && s_[end] != ',' && s_[end] != ']' && !std::isspace(static_cast<unsigned char>(s_[end])))
      ++end;
    const std::string tok = s_.substr(pos_, end - pos_);
    pos_ = end;
    if (tok == "true" || tok == "false") {
      out.v = tok == "true";
      return out;
    }
    std::string clean;
    for (char ch : tok)
      if (ch != '_') clean.push_back(ch);
    const bool integral = clean.find_first_of(".eE") == std::string::npos && clean != "inf" && clean != "nan";
    if (integral) {
      std::int64_t i = 0;
      const char* b = clean.data() + (clean.size() > 0 && clean[0] == '+' ? 1 : 0);
      auto [p, ec] = std::from_chars(b, clean.data() + clean.size(), i);
      if (ec == std::errc() && p == clean.data() + clean.size()) {
        out.v = i;
        return out;
      }
    } else {
      double d = 0.0;
      const char* b = clean.data() + (clean.size() > 0 && clean[0] == '+' ? 1 : 0);
      auto [p, ec] = std::from_chars(b, clean.data() + clean.size(), d);
      if (ec == std::errc() && p == clean.data() + clean.size()) {
        out.v = d;
        return out;
      }
    }
    fail("cannot parse value '" + tok + "'");
  }

  const std::string& s_;
  int line_;
  size_t pos_ = 0;
};

std::string strip_comment(const std::string& line) {
  bool in_str = false;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_str = !in_str;
    if (line[i] == '#' && !in_str) return line.substr(0, i);
  }
  return line;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

int bracket_depth(const std::string& s) {
  int depth = 0;
  bool in_str = false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_str = !in_str;
    if (in_str) continue;
    depth += s[i] == '[' ? 1 : s[i] == ']' ? -1 : 0;
  }
  return depth;
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
  return true;
}

}  // namespace

TomlDocument parse_toml(const std::string& text) {
  TomlDocument doc;
  doc.sections[""];
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[' && line.find('=') == std::string::npos) {
      if (line.back() != ']') throw ParseError("malformed section header", lineno);
      section = trim(line.substr(1, line.size() - 2));
      if (!valid_key(section)) throw ParseError("invalid section name '" + section + "'", lineno);
      if (doc.section_lines.count(section)) throw ParseError("duplicate section [" + section + "]", lineno);
      doc.sections[section];
      doc.section_lines[section] = lineno;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", lineno);
    const std::string key = trim(line.substr(0, eq));
    if (!valid_key(key)) throw ParseError("invalid key '" + key + "'", lineno);
    std::string value = trim(line.substr(eq + 1));
    const int start = lineno;
    // arrays may continue over several lines
    while (bracket_depth(value) > 0 && std::getline(in, raw)) {
      ++lineno;
      value += " " + trim(strip_comment(raw));
    }
    if (bracket_depth(value) != 0) throw ParseError("unbalanced brackets in value of '" + key + "'", start);
    auto& sec = doc.sections[section];
    if (sec.count(key)) throw ParseError("duplicate key '" + key + "'", start);
    sec[key] = ValueParser(value, start).parse();
  }
  return doc;
}

// ---------------------------------------------------------------- typed config

size_t ProcessSweep::points() const {
  switch (kind) {
    case ProcessSpec::Kind::AR: return a.size();
    case ProcessSpec::Kind::MA: return b.size();
    case ProcessSpec::Kind::ARMA: return a.size();
    case ProcessSpec::Kind::FBM: return hurst.size();
  }
  return 0;
}

ProcessSpec ProcessSweep::at(size_t point, Index p) const {
  switch (kind) {
    case ProcessSpec::Kind::AR: return ProcessSpec::ar(a.at(point), sigma2, p);
    case ProcessSpec::Kind::MA: return ProcessSpec::ma(b.at(point), sigma2, p);
    case ProcessSpec::Kind::ARMA: return ProcessSpec::arma(a.at(point), b.at(point), sigma2, p);
    case ProcessSpec::Kind::FBM: return ProcessSpec::fbm(hurst.at(point), p);
  }
  throw std::logic_error("ProcessSweep::at: unknown kind");
}

double ProcessSweep::x(size_t point) const {
  switch (kind) {
    case ProcessSpec::Kind::AR:
    case ProcessSpec::Kind::ARMA: return a.at(point).size() > 0 ? a.at(point)(0) : 0.0;
    case ProcessSpec::Kind::MA: return b.at(point).size() > 0 ? b.at(point)(0) : 0.0;
    case ProcessSpec::Kind::FBM: return hurst.at(point);
  }
  return 0.0;
}

std::string ProcessSweep::axis_label() const {
  switch (kind) {
    case ProcessSpec::Kind::AR:
    case ProcessSpec::Kind::ARMA: return "a_1";
    case ProcessSpec::Kind::MA: return "b_1";
    case ProcessSpec::Kind::FBM: return "h";
  }
  return "x";
}

std::string ProcessSweep::kind_name() const {
  switch (kind) {
    case ProcessSpec::Kind::AR: return "ar";
    case ProcessSpec::Kind::MA: return "ma";
    case ProcessSpec::Kind::ARMA: return "arma";
    case ProcessSpec::Kind::FBM: return "fbm";
  }
  return "?";
}

namespace {

using Section = std::map<std::string, TomlValue>;

void reject_unknown(const Section& sec, const std::string& name, const std::set<std::string>& allowed) {
  for (const auto& [key, val] : sec) {
    if (!allowed.count(key)) {
      throw ParseError("unknown key '" + key + "'" + (name.empty() ? "" : " in [" + name + "]"), val.line);
    }
  }
}

std::vector<VecR> coefficient_points(const TomlValue& v, const std::string& key) {
  std::vector<VecR> out;
  for (const auto& point : v.as_array(key)) {
    if (point.is_number()) {  // shorthand: a bare number is a first-order point
      out.push_back(VecR::Constant(1, point.as_double(key)));
      continue;
    }
    const auto& coeffs = point.as_array(key);
    VecR c(static_cast<Index>(coeffs.size()));
    for (size_t i = 0; i < coeffs.size(); ++i) c(static_cast<Index>(i)) = coeffs[i].as_double(key);
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<Index> index_list(const TomlValue& v, const std::string& key) {
  std::vector<Index> out;
  for (const auto& e : v.as_array(key)) {
    const auto i = e.as_int(key);
    if (i < 1) throw ParseError("entries of '" + key + "' must be >= 1", e.line);
    out.push_back(static_cast<Index>(i));
  }
  if (out.empty()) throw ParseError("'" + key + "' must not be empty", v.line);
  return out;
}

std::vector<std::string> string_list(const TomlValue& v, const std::string& key) {
  std::vector<std::string> out;
  for (const auto& e : v.as_array(key)) out.push_back(e.as_string(key));
  return out;
}

EstimatorSettings parse_settings(const Section& sec, const std::string& name) {
  reject_unknown(sec, name, {"order", "family", "k", "rho", "g", "max_iter", "tol"});
  EstimatorSettings s;
  if (auto it = sec.find("order"); it != sec.end()) {
    if (std::holds_alternative<std::string>(it->second.v)) {
      if (it->second.as_string("order") != "auto") throw ParseError("order must be \"auto\" or an integer", it->second.line);
    } else {
      s.order = OrderPolicy{false, static_cast<Index>(it->second.as_int("order"))};
    }
  }
  if (auto it = sec.find("family"); it != sec.end()) {
    const std::string f = it->second.as_string("family");
    if (f != "auto") s.family = f;
  }
  if (auto it = sec.find("k"); it != sec.end()) {
    if (std::holds_alternative<std::string>(it->second.v)) {
      if (it->second.as_string("k") != "cv") throw ParseError("k must be \"cv\" or an integer", it->second.line);
    } else {
      s.width = static_cast<Index>(it->second.as_int("k"));
    }
  }
  if (auto it = sec.find("rho"); it != sec.end()) {
    if (std::holds_alternative<std::string>(it->second.v)) {
      if (it->second.as_string("rho") != "plugin") throw ParseError("rho must be \"plugin\" or a number", it->second.line);
    } else {
      s.rho = it->second.as_double("rho");
    }
  }
  if (auto it = sec.find("g"); it != sec.end()) s.em_g = static_cast<Index>(it->second.as_int("g"));
  if (auto it = sec.find("max_iter"); it != sec.end()) s.em_max_iter = static_cast<int>(it->second.as_int("max_iter"));
  if (auto it = sec.find("tol"); it != sec.end()) s.em_tol = it->second.as_double("tol");
  return s;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  const TomlDocument doc = parse_toml(text);
  ExperimentConfig cfg;

  const Section& root = doc.sections.at("");
  reject_unknown(root, "", {"name", "runs", "seed"});
  if (auto it = root.find("name"); it != root.end()) cfg.name = it->second.as_string("name");
  if (auto it = root.find("runs"); it != root.end()) cfg.runs = static_cast<int>(it->second.as_int("runs"));
  if (auto it = root.find("seed"); it != root.end()) cfg.seed = static_cast<std::uint64_t>(it->second.as_int("seed"));

  std::map<std::string, EstimatorSettings> per_estimator;
  std::vector<std::string> names;
  bool have_process = false, have_grid = false;
  for (const auto& [name, sec] : doc.sections) {
    if (name.empty()) continue;
    const int line = doc.section_lines.at(name);
    if (name == "process") {
      have_process = true;
      reject_unknown(sec, name, {"kind", "sigma2", "a", "b", "hurst"});
      auto kind = sec.find("kind");
      if (kind == sec.end()) throw ParseError("[process] needs 'kind'", line);
      const std::string k = kind->second.as_string("kind");
      auto& p = cfg.process;
      if (k == "ar") p.kind = ProcessSpec::Kind::AR;
      else if (k == "ma") p.kind = ProcessSpec::Kind::MA;
      else if (k == "arma") p.kind = ProcessSpec::Kind::ARMA;
      else if (k == "fbm") p.kind = ProcessSpec::Kind::FBM;
      else throw ParseError("unknown process kind '" + k + "' (ar, ma, arma, fbm)", kind->second.line);
      if (auto it = sec.find("sigma2"); it != sec.end()) p.sigma2 = it->second.as_double("sigma2");
      if (auto it = sec.find("a"); it != sec.end()) p.a = coefficient_points(it->second, "a");
      if (auto it = sec.find("b"); it != sec.end()) p.b = coefficient_points(it->second, "b");
      if (auto it = sec.find("hurst"); it != sec.end())
        for (const auto& h : it->second.as_array("hurst")) p.hurst.push_back(h.as_double("hurst"));
      const bool need_a = p.kind == ProcessSpec::Kind::AR || p.kind == ProcessSpec::Kind::ARMA;
      const bool need_b = p.kind == ProcessSpec::Kind::MA || p.kind == ProcessSpec::Kind::ARMA;
      if (need_a != !p.a.empty() || need_b != !p.b.empty() ||
          (p.kind == ProcessSpec::Kind::FBM) != !p.hurst.empty()) {
        throw ParseError("[process] kind '" + k + "' takes " +
                             (p.kind == ProcessSpec::Kind::FBM ? std::string("'hurst'")
                              : need_a && need_b            ? std::string("'a' and 'b'")
                              : need_a                      ? std::string("'a'")
                                                            : std::string("'b'")) +
                             " only",
                         line);
      }
      if (p.kind == ProcessSpec::Kind::ARMA && p.a.size() != p.b.size())
        throw ParseError("[process] 'a' and 'b' must list the same number of points", line);
    } else if (name == "grid") {
      have_grid = true;
      reject_unknown(sec, name, {"dims", "samples"});
      if (!sec.count("dims") || !sec.count("samples")) throw ParseError("[grid] needs 'dims' and 'samples'", line);
      cfg.dims = index_list(sec.at("dims"), "dims");
      cfg.samples = index_list(sec.at("samples"), "samples");
    } else if (name == "estimators") {
      reject_unknown(sec, name, {"names"});
      if (!sec.count("names")) throw ParseError("[estimators] needs 'names'", line);
      names = string_list(sec.at("names"), "names");
    } else if (name.rfind("estimator.", 0) == 0) {
      const std::string est = name.substr(10);
      if (!find_estimator(est)) throw ParseError("unknown estimator '" + est + "' in section name", line);
      per_estimator[est] = parse_settings(sec, name);
    } else if (name == "outputs") {
      reject_unknown(sec, name, {"nmse_c", "nmse_icm", "svg"});
      if (auto it = sec.find("nmse_c"); it != sec.end()) cfg.nmse_c = it->second.as_bool("nmse_c");
      if (auto it = sec.find("nmse_icm"); it != sec.end()) cfg.nmse_icm = it->second.as_bool("nmse_icm");
      if (auto it = sec.find("svg"); it != sec.end()) cfg.svg = it->second.as_bool("svg");
    } else if (name == "timing") {
      reject_unknown(sec, name, {"dims", "samples", "hyper", "datasets", "min_ms", "em_iter", "estimators"});
      auto& t = cfg.timing;
      if (auto it = sec.find("dims"); it != sec.end()) t.dims = index_list(it->second, "dims");
      if (auto it = sec.find("samples"); it != sec.end()) t.samples = static_cast<Index>(it->second.as_int("samples"));
      if (auto it = sec.find("hyper"); it != sec.end()) t.hyper = static_cast<Index>(it->second.as_int("hyper"));
      if (auto it = sec.find("datasets"); it != sec.end()) t.datasets = static_cast<int>(it->second.as_int("datasets"));
      if (auto it = sec.find("min_ms"); it != sec.end()) t.min_ms = it->second.as_double("min_ms");
      if (auto it = sec.find("em_iter"); it != sec.end()) t.em_iter = static_cast<int>(it->second.as_int("em_iter"));
      if (auto it = sec.find("estimators"); it != sec.end()) t.estimators = string_list(it->second, "estimators");
    } else {
      throw ParseError("unknown section [" + name + "]", line);
    }
  }
  if (!have_process) throw ParseError("missing [process] section");
  if (!have_grid && !doc.sections.count("timing")) throw ParseError("missing [grid] section");

  for (const auto& n : names) cfg.estimators.push_back({n, per_estimator.count(n) ? per_estimator.at(n) : EstimatorSettings{}});
  for (const auto& [n, s] : per_estimator) {
    if (std::find(names.begin(), names.end(), n) == names.end())
      throw ParseError("[estimator." + n + "] configures an estimator not listed in [estimators] names",
                       doc.section_lines.at("estimator." + n));
  }
  cfg.validate();
  return cfg;
}

void ExperimentConfig::validate() const {
  if (runs < 1) throw UsageError("runs must be >= 1");
  if (process.points() == 0) throw UsageError("the process sweep has no points");
  for (size_t i = 0; i < process.points(); ++i) {
    try {
      process.at(i, 2).validate();
    } catch (const std::exception& e) {
      throw UsageError("process point " + std::to_string(i) + ": " + e.what());
    }
  }
  std::set<std::string> seen;
  for (const auto& e : estimators) {
    const EstimatorInfo* info = find_estimator(e.name);
    if (!info) throw UsageError("unknown estimator '" + e.name + "'; see list-estimators");
    if (!seen.insert(e.name).second) throw UsageError("estimator '" + e.name + "' listed twice");
    if (e.name == "eig")
      for (Index p : dims)
        if (p > kEigenvalueGuard) throw UsageError("eig is limited to P <= 64 but the grid has P = " + std::to_string(p));
    for (Index p : dims) {
      if (!e.settings.order.automatic && (e.settings.order.fixed < 0 || e.settings.order.fixed >= p))
        throw UsageError(e.name + ": order must lie in [0, P-1]");
      if (e.settings.width && (*e.settings.width < 0 || *e.settings.width >= p))
        throw UsageError(e.name + ": k must lie in [0, P-1]");
    }
    if (e.settings.rho && !(*e.settings.rho >= 0.0 && *e.settings.rho <= 1.0))
      throw UsageError(e.name + ": rho must lie in [0, 1]");
    if (e.settings.family) {
      bool known = false;
      for (const auto& f : standard_box_families()) known |= f.id == *e.settings.family;
      if (!known) throw UsageError(e.name + ": unknown box family '" + *e.settings.family + "'");
    }
  }
  if (!nmse_c && !nmse_icm) throw UsageError("outputs: enable nmse_c or nmse_icm");
  for (Index p : dims)
    if (p < 2) throw UsageError("dims must be >= 2");
  for (const auto& n : timing.estimators)
    if (!find_estimator(n)) throw UsageError("timing: unknown estimator '" + n + "'");
  if (timing.datasets < 1 || timing.samples < 1 || timing.hyper < 0) throw UsageError("timing: invalid settings");
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace gstoep::bench
