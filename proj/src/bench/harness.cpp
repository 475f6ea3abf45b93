#include "gstoep/bench/harness.hpp"

#include "gstoep/baselines.hpp"
#include "gstoep/bench/io.hpp"
#include "gstoep/bench/registry.hpp"
#include "gstoep/bench/svg.hpp"

#include <Eigen/Cholesky>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <thread>

namespace gstoep::bench {

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::string cell(double v) { return std::isfinite(v) ? format_double(v) : ""; }

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw UsageError("cannot write '" + p.string() + "'");
  return out;
}

bool discrete(const std::string& hyper_name) { return hyper_name == "order" || hyper_name == "k"; }

struct Truth {
  MatR chol;
  MatR cm;
  MatR icm;
};

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t cell_seed(std::uint64_t base, size_t point, size_t dim, size_t samples, int run) {
  std::uint64_t h = splitmix64(point);
  h = splitmix64(h ^ dim);
  h = splitmix64(h ^ samples);
  h = splitmix64(h ^ static_cast<std::uint64_t>(run));
  return base ^ h;
}

int worker_count() {
  if (const char* env = std::getenv("GSTOEP_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

MeanSe mean_se(const std::vector<double>& v) {
  MeanSe r;
  r.count = static_cast<int>(v.size());
  if (v.empty()) {
    r.mean = r.se = kNaN;
    return r;
  }
  double sum = 0.0;
  for (double x : v) sum += x;
  r.mean = sum / static_cast<double>(v.size());
  if (v.size() < 2) {
    r.se = kNaN;
    return r;
  }
  double ss = 0.0;
  for (double x : v) ss += (x - r.mean) * (x - r.mean);
  r.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  return r;
}

BenchmarkResult run_benchmark(const ExperimentConfig& cfg, int workers) {
  cfg.validate();
  const size_t np = cfg.process.points(), nd = cfg.dims.size(), nn = cfg.samples.size(), ne = cfg.estimators.size();
  const auto runs = static_cast<size_t>(cfg.runs);

  std::vector<const EstimatorInfo*> infos;
  for (const auto& e : cfg.estimators) infos.push_back(find_estimator(e.name));

  // immutable per (point, dim) state, built before the pool starts
  std::vector<Truth> truth(np * nd);
  for (size_t pt = 0; pt < np; ++pt) {
    for (size_t d = 0; d < nd; ++d) {
      const auto c = true_cm(cfg.process.at(pt, cfg.dims[d]));
      Truth& t = truth[pt * nd + d];
      t.cm = c.dense();
      t.chol = cholesky_factor(c);
      t.icm = Eigen::LLT<MatR>(t.cm).solve(MatR::Identity(t.cm.rows(), t.cm.cols()));
    }
  }
  for (const auto& e : cfg.estimators) {
    if (e.name != "pgd" && e.name != "pls") continue;
    for (Index p : cfg.dims)
      for (const auto& f : standard_box_families())
        if (!e.settings.family || *e.settings.family == f.id) (void)cached_box_spec(f, p);
  }

  BenchmarkResult result;
  result.config = cfg;
  result.cells.assign(np * nd * nn * ne, std::vector<CellResult>(runs));

  const size_t tasks = np * nd * nn * runs;
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t t = next++; t < tasks; t = next++) {
      const size_t run = t % runs;
      const size_t grid = t / runs;
      const size_t ni = grid % nn, di = (grid / nn) % nd, pt = grid / (nn * nd);
      const Truth& tr = truth[pt * nd + di];
      const MatR x = sample_with_factor(tr.chol, cfg.samples[ni], cell_seed(cfg.seed, pt, di, ni, static_cast<int>(run)));
      const MatR s = sample_cov(x);
      const FitInput in{x, s};
      for (size_t e = 0; e < ne; ++e) {
        CellResult& out = result.cells[grid * ne + e][run];
        const bool want_icm = cfg.nmse_icm && infos[e]->icm_capable;
        const auto start = Clock::now();
        try {
          const Fit fit = infos[e]->fit(in, cfg.estimators[e].settings, want_icm);
          out.wall_ms = elapsed_ms(start);
          out.nmse_c = cfg.nmse_c ? nmse(fit.cm, tr.cm) : kNaN;
          out.nmse_icm = want_icm ? nmse(*fit.icm, tr.icm) : kNaN;
          out.hyper = fit.hyper;
          out.family_id = fit.family_id;
          if (fit.report) out.pd_ok = spectral_pd_check(fit.report->alpha);
          out.ok = std::isfinite(out.nmse_c) || std::isfinite(out.nmse_icm);
          if (!out.ok) out.error = "non-finite NMSE";
        } catch (const std::exception& ex) {
          out.wall_ms = elapsed_ms(start);
          out.ok = false;
          out.error = ex.what();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  const int nw = std::max(1, std::min<int>(workers, static_cast<int>(tasks)));
  for (int w = 1; w < nw; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();

  // single-threaded aggregation in canonical order
  for (size_t pt = 0; pt < np; ++pt) {
    for (size_t di = 0; di < nd; ++di) {
      for (size_t ni = 0; ni < nn; ++ni) {
        const size_t grid = (pt * nd + di) * nn + ni;
        for (size_t e = 0; e < ne; ++e) {
          const auto& cs = result.cells[grid * ne + e];
          Aggregate a;
          a.point = pt;
          a.p = cfg.dims[di];
          a.n = cfg.samples[ni];
          a.estimator = cfg.estimators[e].name;
          std::vector<double> c, icm, hyper;
          double ms = 0.0;
          std::set<std::string> distinct;
          for (const auto& r : cs) {
            ms += r.wall_ms;
            if (!r.ok) {
              ++a.failed;
              if (distinct.insert(r.error).second && a.errors.size() < 5) a.errors.push_back(r.error);
              continue;
            }
            ++a.ok;
            a.pd_violations += r.pd_ok ? 0 : 1;
            if (std::isfinite(r.nmse_c)) c.push_back(r.nmse_c);
            if (std::isfinite(r.nmse_icm)) icm.push_back(r.nmse_icm);
            hyper.push_back(r.hyper);
            if (!r.family_id.empty()) ++a.family_hist[r.family_id];
          }
          a.nmse_c = mean_se(c);
          a.nmse_icm = mean_se(icm);
          a.wall_ms = ms / static_cast<double>(cs.size());
          a.hyper_mean = hyper.empty() ? kNaN : mean_se(hyper).mean;
          a.hyper_name = infos[e]->hyper_name;
          if (discrete(a.hyper_name))
            for (double h : hyper) ++a.hyper_hist[h];
          result.rows.push_back(std::move(a));
        }
      }
    }
  }
  return result;
}

void write_benchmark(const BenchmarkResult& result, const std::filesystem::path& dir, bool svg) {
  std::filesystem::create_directories(dir);
  const auto& cfg = result.config;
  const std::string proc = cfg.process.kind_name();

  auto prefix = [&](const Aggregate& a) {
    return proc + "," + format_double(cfg.process.x(a.point)) + "," + std::to_string(a.p) + "," + std::to_string(a.n) +
           "," + a.estimator;
  };

  {
    auto out = open_out(dir / "results.csv");
    out << "process,x,P,N,estimator,ok,failed,pd_violations,nmse_c_mean,nmse_c_se,nmse_icm_mean,nmse_icm_se,hyper,"
           "hyper_mean\n";
    for (const auto& a : result.rows) {
      out << prefix(a) << "," << a.ok << "," << a.failed << "," << a.pd_violations << "," << cell(a.nmse_c.mean) << ","
          << cell(a.nmse_c.se) << "," << cell(a.nmse_icm.mean) << "," << cell(a.nmse_icm.se) << "," << a.hyper_name
          << "," << cell(a.hyper_mean) << "\n";
    }
  }
  {
    auto out = open_out(dir / "hyper.csv");
    out << "process,x,P,N,estimator,hyper,value,count\n";
    for (const auto& a : result.rows) {
      for (const auto& [v, n] : a.hyper_hist) out << prefix(a) << "," << a.hyper_name << "," << format_double(v) << "," << n << "\n";
      for (const auto& [f, n] : a.family_hist) out << prefix(a) << ",family," << f << "," << n << "\n";
    }
  }
  {
    auto out = open_out(dir / "failures.csv");
    out << "process,x,P,N,estimator,run,error\n";
    for (size_t r = 0; r < result.rows.size(); ++r) {
      const auto& cs = result.cells[r];
      for (size_t run = 0; run < cs.size(); ++run)
        if (!cs[run].ok) out << prefix(result.rows[r]) << "," << run << "," << csv_quote(cs[run].error) << "\n";
    }
  }
  {
    // wall times vary between invocations, so they live apart from results.csv
    auto out = open_out(dir / "wall_ms.csv");
    out << "process,x,P,N,estimator,mean_wall_ms\n";
    for (const auto& a : result.rows) out << prefix(a) << "," << format_double(a.wall_ms) << "\n";
  }
  {
    nlohmann::json j;
    j["name"] = cfg.name;
    j["process"] = proc;
    j["runs"] = cfg.runs;
    j["seed"] = cfg.seed;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& a : result.rows) {
      nlohmann::json r;
      r["x"] = cfg.process.x(a.point);
      r["P"] = a.p;
      r["N"] = a.n;
      r["estimator"] = a.estimator;
      r["ok"] = a.ok;
      r["failed"] = a.failed;
      r["pd_violations"] = a.pd_violations;
      r["nmse_c"] = std::isfinite(a.nmse_c.mean) ? nlohmann::json{{"mean", a.nmse_c.mean}, {"se", a.nmse_c.se}} : nlohmann::json(nullptr);
      r["nmse_icm"] =
          std::isfinite(a.nmse_icm.mean) ? nlohmann::json{{"mean", a.nmse_icm.mean}, {"se", a.nmse_icm.se}} : nlohmann::json(nullptr);
      r["wall_ms"] = a.wall_ms;
      if (!a.errors.empty()) r["errors"] = a.errors;
      rows.push_back(r);
    }
    j["rows"] = rows;
    auto out = open_out(dir / "summary.json");
    out << j.dump(2) << "\n";
  }
  if (!svg) return;
  for (Index p : cfg.dims) {
    for (Index n : cfg.samples) {
      for (int metric = 0; metric < 2; ++metric) {
        if ((metric == 0 && !cfg.nmse_c) || (metric == 1 && !cfg.nmse_icm)) continue;
        Chart chart;
        chart.title = (metric == 0 ? "NMSE of the CM" : "NMSE of the ICM") + std::string(", P = ") + std::to_string(p) +
                      ", N = " + std::to_string(n);
        chart.x_label = cfg.process.axis_label();
        chart.y_label = metric == 0 ? "NMSE_C" : "NMSE_ICM";
        for (const auto& e : cfg.estimators) {
          Series s;
          s.name = e.name;
          for (const auto& a : result.rows) {
            if (a.p != p || a.n != n || a.estimator != e.name) continue;
            s.x.push_back(cfg.process.x(a.point));
            s.y.push_back(metric == 0 ? a.nmse_c.mean : a.nmse_icm.mean);
          }
          bool any = false;
          for (double y : s.y) any |= std::isfinite(y);
          if (any) chart.series.push_back(std::move(s));
        }
        auto out = open_out(dir / ((metric == 0 ? "nmse_c_P" : "nmse_icm_P") + std::to_string(p) + "_N" +
                                   std::to_string(n) + ".svg"));
        out << line_chart_svg(chart);
      }
    }
  }
}

double TimingResult::at(const std::string& estimator, Index p) const {
  for (const auto& r : rows)
    if (r.estimator == estimator && r.p == p && !r.skipped) return r.mean_ms;
  return kNaN;
}

TimingResult run_timing(const ExperimentConfig& cfg) {
  const TimingConfig& tc = cfg.timing;
  TimingResult result;
  result.dims = tc.dims;
  if (tc.estimators.empty()) {
    for (const auto& e : registry())
      if (e.timed) result.estimators.push_back(e.name);
  } else {
    result.estimators = tc.estimators;
  }
  for (const auto& name : result.estimators) {
    const EstimatorInfo* info = find_estimator(name);
    if (!info) throw UsageError("timing: unknown estimator '" + name + "'");
    if (!info->timed) throw UsageError("timing: '" + name + "' has no timing kernel");
    for (Index p : tc.dims) {
      TimingRow row;
      row.estimator = name;
      row.p = p;
      if (name == "eig" && p > kEigenvalueGuard) {
        row.skipped = true;
        result.rows.push_back(row);
        continue;
      }
      const ProcessSpec spec = cfg.process.at(0, p);
      double total = 0.0;
      for (int d = 0; d < tc.datasets; ++d) {
        const MatR x = sample(spec, tc.samples, cell_seed(cfg.seed, 0, static_cast<size_t>(p), 0, d));
        const MatR s = sample_cov(x);
        const FitInput in{x, s};
        info->timed(in, tc.hyper, tc.em_iter);  // warm caches (box specs, allocator)
        int calls = 0;
        const auto start = Clock::now();
        double ms = 0.0;
        do {
          info->timed(in, tc.hyper, tc.em_iter);
          ++calls;
          ms = elapsed_ms(start);
        } while (ms < tc.min_ms / tc.datasets);
        total += ms / calls;
        row.calls += calls;
      }
      row.mean_ms = total / tc.datasets;
      result.rows.push_back(row);
    }
  }
  return result;
}

void write_timing(const TimingResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_out(dir / "timing.csv");
    out << "estimator,P,mean_ms,calls\n";
    for (const auto& r : result.rows) {
      if (r.skipped) continue;
      out << r.estimator << "," << r.p << "," << format_double(r.mean_ms) << "," << r.calls << "\n";
    }
  }
  auto out = open_out(dir / "complexity.csv");
  out << "estimator,complexity,max_ratio_per_doubling\n";
  for (const auto& name : result.estimators) {
    double worst = kNaN;
    for (size_t i = 0; i + 1 < result.dims.size(); ++i) {
      const double a = result.at(name, result.dims[i]), b = result.at(name, result.dims[i + 1]);
      if (!std::isfinite(a) || !std::isfinite(b) || result.dims[i + 1] != 2 * result.dims[i]) continue;
      worst = std::isfinite(worst) ? std::max(worst, b / a) : b / a;
    }
    out << name << "," << csv_quote(find_estimator(name)->complexity) << "," << cell(worst) << "\n";
  }
}

}  // namespace gstoep::bench
