#include "gstoep/bench/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace gstoep::bench {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_number(const std::string& tok, double& v) {
  if (tok.empty()) return false;
  const char* b = tok.data() + (tok[0] == '+' ? 1 : 0);
  auto [p, ec] = std::from_chars(b, tok.data() + tok.size(), v);
  return ec == std::errc() && p == tok.data() + tok.size() && std::isfinite(v);
}

nlohmann::json nullable(const std::optional<double>& v) {
  return v && std::isfinite(*v) ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

MatR read_samples_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string raw;
  int lineno = 0;
  bool seen_data = false, seen_header = false;
  size_t width = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (auto h = line.find('#'); h != std::string::npos) line = line.substr(0, h);
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split(line);
    std::vector<double> row(cells.size());
    bool numeric = true;
    for (size_t i = 0; i < cells.size(); ++i) numeric = numeric && parse_number(cells[i], row[i]);
    if (!numeric) {
      bool any_number = false;
      for (const auto& c : cells) {
        double d;
        any_number = any_number || parse_number(c, d);
      }
      if (!seen_data && !seen_header && !any_number) {  // optional header
        seen_header = true;
        width = cells.size();
        continue;
      }
      for (size_t i = 0; i < cells.size(); ++i) {
        double d;
        if (!parse_number(cells[i], d)) {
          throw ParseError("column " + std::to_string(i + 1) + ": '" + cells[i] + "' is not a finite number", lineno);
        }
      }
    }
    if (width == 0) width = row.size();
    if (row.size() != width) {
      throw ParseError("expected " + std::to_string(width) + " columns, found " + std::to_string(row.size()), lineno);
    }
    seen_data = true;
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("no samples found");
  MatR x(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < width; ++c) x(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  return x;
}

MatR read_samples_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open input '" + path.string() + "'");
  return read_samples_csv(in);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

void write_samples_csv(std::ostream& out, const MatR& x) {
  for (Index r = 0; r < x.rows(); ++r) {
    for (Index c = 0; c < x.cols(); ++c) out << (c ? "," : "") << format_double(x(r, c));
    out << '\n';
  }
}

nlohmann::json report_json(const std::string& estimator, const Fit& fit, const ReportExtras& extras) {
  nlohmann::json j;
  j["estimator"] = estimator;
  if (fit.report) {
    const auto& r = *fit.report;
    j["alpha0"] = r.alpha.alpha0();
    const VecR full = r.alpha.full();
    std::vector<double> a(full.data(), full.data() + full.size());
    j["alpha"] = a;
    j["order"] = r.order;
    j["family_id"] = r.family_id.empty() ? nlohmann::json(nullptr) : nlohmann::json(r.family_id);
    j["loglik"] = r.loglik;
  } else {
    j["alpha0"] = nullptr;
    j["alpha"] = nullptr;
    j["order"] = nullptr;
    j["family_id"] = nullptr;
    j["loglik"] = nullptr;
  }
  j["nmse_c"] = nullable(extras.nmse_c);
  j["nmse_icm"] = nullable(extras.nmse_icm);
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["wall_ms"] = extras.wall_ms;

  if (fit.toeplitz) {
    std::vector<double> col(fit.cm.rows());
    for (Index i = 0; i < fit.cm.rows(); ++i) col[static_cast<size_t>(i)] = fit.cm(i, 0);
    j["cm_first_col"] = col;
  } else {
    std::vector<std::vector<double>> m(static_cast<size_t>(fit.cm.rows()));
    for (Index i = 0; i < fit.cm.rows(); ++i)
      for (Index k = 0; k < fit.cm.cols(); ++k) m[static_cast<size_t>(i)].push_back(fit.cm(i, k));
    j["cm"] = m;
  }
  nlohmann::json diag;
  diag["dim"] = fit.cm.rows();
  if (!fit.hyper_name.empty()) diag[fit.hyper_name] = fit.hyper;
  if (fit.report) {
    const auto& r = *fit.report;
    diag["stationarity"] = r.stationarity;
    diag["regularized"] = r.regularized;
    if (std::isfinite(r.bic)) diag["bic"] = r.bic;
    nlohmann::json cands = nlohmann::json::array();
    for (const auto& c : r.candidates) cands.push_back({{"order", c.order}, {"loglik", c.loglik}, {"bic", c.score}});
    diag["candidates"] = cands;
  }
  j["diagnostics"] = diag;
  return j;
}

}  // namespace gstoep::bench
