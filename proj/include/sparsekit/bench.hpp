#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "sparsekit/analysis.hpp"
#include "sparsekit/generate.hpp"
#include "sparsekit/guarantees.hpp"
#include "sparsekit/rng.hpp"
#include "sparsekit/synthesis.hpp"

namespace sparsekit {

using nlohmann::json;

struct BenchOptions {
  std::uint64_t seed = 0;
  int workers = 1;
  // Wall-clock measurement is opt-in: it necessarily breaks byte-level
  // reproducibility of the output, which is the default guarantee.
  bool timing = false;
};

struct BenchTable {
  std::vector<std::string> axis_names;
  struct Row {
    std::vector<double> axes;
    std::string algorithm;
    double success_rate = 0.0;
    double median_error = 0.0;
    double mean_iters = 0.0;
    double mean_ms = 0.0;
  };
  std::vector<Row> rows;

  std::string to_csv() const {
    std::string out;
    for (const auto& a : axis_names) out += a + ",";
    out += "algorithm,success_rate,median_error,mean_iters,mean_ms\n";
    char buf[64];
    auto fmt = [&](double v) -> std::string {
      if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
      std::snprintf(buf, sizeof buf, "%.9g", v);
      return buf;
    };
    for (const auto& r : rows) {
      std::string line;
      for (double a : r.axes) line += fmt(a) + ",";
      line += r.algorithm + ",";
      std::snprintf(buf, sizeof buf, "%.6f", r.success_rate);
      line += std::string(buf) + ",";
      line += fmt(r.median_error) + "," + fmt(r.mean_iters) + "," +
              fmt(r.mean_ms) + "\n";
      out += line;
    }
    return out;
  }
};

namespace detail {

struct TrialStats {
  bool solved = false;
  bool success = false;
  double error = std::numeric_limits<double>::infinity();
  double iters = 0.0;
  double ms = 0.0;
};

inline void parallel_jobs(int workers, std::size_t njobs,
                          const std::function<void(std::size_t)>& fn) {
  workers = std::max(1, workers);
  if (workers == 1 || njobs <= 1) {
    for (std::size_t i = 0; i < njobs; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        std::size_t i = next.fetch_add(1);
        if (i >= njobs) break;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> g(err_mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

inline double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::infinity();
  std::sort(v.begin(), v.end());
  std::size_t mid = v.size() / 2;
  if (v.size() % 2 == 1) return v[mid];
  return 0.5 * (v[mid - 1] + v[mid]);
}

// Aggregates one (cell, algorithm) column of trial outcomes.
inline BenchTable::Row aggregate(const std::vector<double>& axes,
                                 const std::string& algorithm,
                                 const std::vector<TrialStats>& trials) {
  BenchTable::Row row;
  row.axes = axes;
  row.algorithm = algorithm;
  std::vector<double> errs;
  double iters_sum = 0.0, ms_sum = 0.0;
  int solved = 0, success = 0;
  for (const auto& t : trials) {
    errs.push_back(t.error);
    if (t.solved) {
      ++solved;
      iters_sum += t.iters;
      ms_sum += t.ms;
    }
    if (t.success) ++success;
  }
  row.success_rate = trials.empty() ? 0.0
                                    : static_cast<double>(success) /
                                          static_cast<double>(trials.size());
  row.median_error = median_of(std::move(errs));
  row.mean_iters = solved > 0 ? iters_sum / solved : 0.0;
  row.mean_ms = solved > 0 ? ms_sum / solved : 0.0;
  return row;
}

class StopWatch {
 public:
  explicit StopWatch(bool enabled) : enabled_(enabled) {
    if (enabled_) start_ = std::chrono::steady_clock::now();
  }
  double elapsed_ms() const {
    if (!enabled_) return 0.0;
    auto dt = std::chrono::steady_clock::now() - start_;
    return std::chrono::duration<double, std::milli>(dt).count();
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

using SynthesisSolverFn = RecoveryResult (*)(const SynthesisProblem&);

inline SynthesisSolverFn synthesis_solver(const std::string& name) {
  if (name == "omp") return &omp_solve;
  if (name == "ols") return &ols_solve;
  if (name == "fols") return &fols_solve;
  if (name == "olsr") return &olsr_solve;
  if (name == "iolsr") return &iolsr_solve;
  throw Error("unknown synthesis algorithm: " + name);
}

using AnalysisSolverFn = AnalysisResult (*)(const AnalysisProblem&);

inline AnalysisSolverFn analysis_solver(const std::string& name) {
  if (name == "gap") return &gap_solve;
  if (name == "gals") return &gals_solve;
  if (name == "galsr") return &galsr_solve;
  throw Error("unknown analysis algorithm: " + name);
}

// ---------------------------------------------------------------------------
// Experiment configurations (JSON-overridable, defaults are desk scale).

struct PhaseConfig {
  Index m = 100;
  std::vector<double> deltas = {0.2, 0.35, 0.5, 0.65, 0.8};   // m / n
  std::vector<double> rhos = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};  // k / m
  int trials = 50;
  double threshold = 1e-4;  // relative squared error for success
  std::vector<std::string> algorithms = {"omp", "olsr", "iolsr"};

  static PhaseConfig from_json(const json& j) {
    PhaseConfig c;
    c.m = j.value("m", c.m);
    c.deltas = j.value("deltas", c.deltas);
    c.rhos = j.value("rhos", c.rhos);
    c.trials = j.value("trials", c.trials);
    c.threshold = j.value("threshold", c.threshold);
    c.algorithms = j.value("algorithms", c.algorithms);
    return c;
  }
  json to_json() const {
    return {{"m", m},         {"deltas", deltas},       {"rhos", rhos},
            {"trials", trials}, {"threshold", threshold}, {"algorithms", algorithms}};
  }
};

struct NoiseConfig {
  Index n = 150;
  Index m = 50;
  Index k_min = 2;
  Index k_max = 14;
  int trials = 200;
  double sigma_scale = 0.01;  // sigma = scale * ||y0|| / sqrt(m)
  double threshold = 1e-4;
  std::vector<std::string> algorithms = {"omp", "olsr", "iolsr", "oracle"};

  static NoiseConfig from_json(const json& j) {
    NoiseConfig c;
    c.n = j.value("n", c.n);
    c.m = j.value("m", c.m);
    c.k_min = j.value("k_min", c.k_min);
    c.k_max = j.value("k_max", c.k_max);
    c.trials = j.value("trials", c.trials);
    c.sigma_scale = j.value("sigma_scale", c.sigma_scale);
    c.threshold = j.value("threshold", c.threshold);
    c.algorithms = j.value("algorithms", c.algorithms);
    return c;
  }
  json to_json() const {
    return {{"n", n},           {"m", m},
            {"k_min", k_min},   {"k_max", k_max},
            {"trials", trials}, {"sigma_scale", sigma_scale},
            {"threshold", threshold}, {"algorithms", algorithms}};
  }
};

struct CoherenceConfig {
  Index n = 120;
  Index m = 40;
  Index k = 12;
  std::vector<double> mus = {0.0, 0.25, 0.5};
  int trials = 200;
  double sigma_scale = 0.01;
  double threshold = 1e-4;
  std::vector<std::string> algorithms = {"omp", "olsr", "iolsr"};

  static CoherenceConfig from_json(const json& j) {
    CoherenceConfig c;
    c.n = j.value("n", c.n);
    c.m = j.value("m", c.m);
    c.k = j.value("k", c.k);
    c.mus = j.value("mus", c.mus);
    c.trials = j.value("trials", c.trials);
    c.sigma_scale = j.value("sigma_scale", c.sigma_scale);
    c.threshold = j.value("threshold", c.threshold);
    c.algorithms = j.value("algorithms", c.algorithms);
    return c;
  }
  json to_json() const {
    return {{"n", n},           {"m", m},       {"k", k},
            {"mus", mus},       {"trials", trials}, {"sigma_scale", sigma_scale},
            {"threshold", threshold}, {"algorithms", algorithms}};
  }
};

struct AnalysisPhaseConfig {
  Index n = 24;  // signal dimension
  Index p = 30;  // analysis-operator rows
  std::vector<Index> ms = {4, 8, 12, 16, 20, 24};
  std::vector<Index> ls = {14, 16, 18, 20, 22};
  int trials = 20;
  double threshold = 1e-4;
  std::vector<std::string> algorithms = {"gap", "gals", "galsr"};

  static AnalysisPhaseConfig from_json(const json& j) {
    AnalysisPhaseConfig c;
    c.n = j.value("n", c.n);
    c.p = j.value("p", c.p);
    c.ms = j.value("ms", c.ms);
    c.ls = j.value("ls", c.ls);
    c.trials = j.value("trials", c.trials);
    c.threshold = j.value("threshold", c.threshold);
    c.algorithms = j.value("algorithms", c.algorithms);
    return c;
  }
  json to_json() const {
    return {{"n", n},           {"p", p},
            {"ms", ms},         {"ls", ls},
            {"trials", trials}, {"threshold", threshold},
            {"algorithms", algorithms}};
  }
};

namespace detail {

inline bool recovery_success(const Vector& xh, const Vector& x, double threshold) {
  return (xh - x).squaredNorm() <= threshold * x.squaredNorm();
}

// Runs one synthesis algorithm (or the known-support oracle) on a noisy
// instance with a cardinality-k stop.
inline TrialStats run_synthesis_trial(const std::string& algo,
                                      const SynthesisInstance& inst,
                                      const Vector& y, Index k,
                                      double threshold, bool timing) {
  TrialStats st;
  StopWatch watch(timing);
  try {
    Vector xh;
    double iters = 0.0;
    if (algo == "oracle") {
      Vector coeff = least_squares(columns(inst.M, inst.support), y);
      xh = Vector::Zero(inst.M.cols());
      for (std::size_t t = 0; t < inst.support.size(); ++t)
        xh(inst.support[t]) = coeff(static_cast<Index>(t));
    } else {
      auto problem =
          SynthesisProblem::create(inst.M, y, StopRule::cardinality(k));
      RecoveryResult res = synthesis_solver(algo)(problem);
      xh = res.xh_full;
      iters = static_cast<double>(res.iterations);
    }
    st.solved = true;
    st.iters = iters;
    st.error = (xh - inst.x).norm();
    st.success = recovery_success(xh, inst.x, threshold);
  } catch (const Error&) {
    // recorded as a failure, the sweep continues
  }
  st.ms = watch.elapsed_ms();
  return st;
}

inline TrialStats run_analysis_trial(const std::string& algo,
                                     const AnalysisInstance& inst, Index l,
                                     double threshold, bool timing) {
  TrialStats st;
  StopWatch watch(timing);
  try {
    auto problem = AnalysisProblem::create(inst.M, inst.Omega, inst.y0,
                                           StopRule::cardinality(l));
    AnalysisResult res = analysis_solver(algo)(problem);
    st.solved = true;
    st.iters = static_cast<double>(res.iterations);
    st.error = (res.xh - inst.x).norm();
    st.success = recovery_success(res.xh, inst.x, threshold);
  } catch (const Error&) {
  }
  st.ms = watch.elapsed_ms();
  return st;
}

}  // namespace detail

// Success-rate map over the (undersampling, sparsity) grid for noiseless
// exact recovery.
inline BenchTable run_phase_transition(const PhaseConfig& cfg,
                                       const BenchOptions& opt) {
  struct Cell {
    double delta, rho;
    Index n, k;
  };
  std::vector<Cell> cells;
  for (double d : cfg.deltas)
    for (double r : cfg.rhos) {
      Index n = std::max<Index>(cfg.m, static_cast<Index>(std::lround(cfg.m / d)));
      Index k = std::min<Index>(cfg.m, static_cast<Index>(std::lround(r * cfg.m)));
      cells.push_back({d, r, n, k});
    }
  const std::size_t na = cfg.algorithms.size();
  std::vector<std::vector<detail::TrialStats>> stats(
      cells.size() * static_cast<std::size_t>(cfg.trials),
      std::vector<detail::TrialStats>(na));

  detail::parallel_jobs(opt.workers, stats.size(), [&](std::size_t job) {
    std::size_t cell = job / static_cast<std::size_t>(cfg.trials);
    std::size_t trial = job % static_cast<std::size_t>(cfg.trials);
    const Cell& c = cells[cell];
    std::uint64_t seed = derive_seed(opt.seed, cell, trial);
    SynthesisInstance inst = gen_synthesis(seed, cfg.m, c.n, c.k);
    for (std::size_t a = 0; a < na; ++a)
      stats[job][a] = detail::run_synthesis_trial(
          cfg.algorithms[a], inst, inst.y0, c.k, cfg.threshold, opt.timing);
  });

  BenchTable table;
  table.axis_names = {"delta", "rho", "n", "k"};
  for (std::size_t cell = 0; cell < cells.size(); ++cell) {
    const Cell& c = cells[cell];
    for (std::size_t a = 0; a < na; ++a) {
      std::vector<detail::TrialStats> column;
      for (int t = 0; t < cfg.trials; ++t)
        column.push_back(stats[cell * cfg.trials + t][a]);
      table.rows.push_back(detail::aggregate(
          {c.delta, c.rho, static_cast<double>(c.n), static_cast<double>(c.k)},
          cfg.algorithms[a], column));
    }
  }
  return table;
}

// Error-vs-sparsity sweep in white Gaussian noise, with the known-support
// least-squares fit as the reference "oracle" algorithm.
inline BenchTable run_noise_sweep(const NoiseConfig& cfg, const BenchOptions& opt) {
  std::vector<Index> ks;
  for (Index k = cfg.k_min; k <= cfg.k_max; ++k) ks.push_back(k);
  const std::size_t na = cfg.algorithms.size();
  std::vector<std::vector<detail::TrialStats>> stats(
      ks.size() * static_cast<std::size_t>(cfg.trials),
      std::vector<detail::TrialStats>(na));

  detail::parallel_jobs(opt.workers, stats.size(), [&](std::size_t job) {
    std::size_t cell = job / static_cast<std::size_t>(cfg.trials);
    std::size_t trial = job % static_cast<std::size_t>(cfg.trials);
    Index k = ks[cell];
    std::uint64_t seed = derive_seed(opt.seed, cell, trial);
    SynthesisInstance inst = gen_synthesis(seed, cfg.m, cfg.n, k);
    GaussianRng noise_rng(splitmix64(~seed));
    double sigma =
        cfg.sigma_scale * inst.y0.norm() / std::sqrt(static_cast<double>(cfg.m));
    Vector y = inst.y0;
    for (Index i = 0; i < y.size(); ++i) y(i) += sigma * noise_rng.gaussian();
    for (std::size_t a = 0; a < na; ++a)
      stats[job][a] = detail::run_synthesis_trial(cfg.algorithms[a], inst, y, k,
                                                  cfg.threshold, opt.timing);
  });

  BenchTable table;
  table.axis_names = {"k"};
  for (std::size_t cell = 0; cell < ks.size(); ++cell) {
    for (std::size_t a = 0; a < na; ++a) {
      std::vector<detail::TrialStats> column;
      for (int t = 0; t < cfg.trials; ++t)
        column.push_back(stats[cell * cfg.trials + t][a]);
      table.rows.push_back(detail::aggregate({static_cast<double>(ks[cell])},
                                             cfg.algorithms[a], column));
    }
  }
  return table;
}

// Error sweep against the coherence-damage parameter mu.
inline BenchTable run_coherence_sweep(const CoherenceConfig& cfg,
                                      const BenchOptions& opt) {
  const std::size_t na = cfg.algorithms.size();
  std::vector<std::vector<detail::TrialStats>> stats(
      cfg.mus.size() * static_cast<std::size_t>(cfg.trials),
      std::vector<detail::TrialStats>(na));

  detail::parallel_jobs(opt.workers, stats.size(), [&](std::size_t job) {
    std::size_t cell = job / static_cast<std::size_t>(cfg.trials);
    std::size_t trial = job % static_cast<std::size_t>(cfg.trials);
    double mu = cfg.mus[cell];
    std::uint64_t seed = derive_seed(opt.seed, cell, trial);
    SynthesisInstance inst = gen_synthesis(seed, cfg.m, cfg.n, cfg.k);
    inst.M = damage_coherence(inst.M, mu);
    inst.y0 = inst.M * inst.x;
    GaussianRng noise_rng(splitmix64(~seed));
    double sigma =
        cfg.sigma_scale * inst.y0.norm() / std::sqrt(static_cast<double>(cfg.m));
    Vector y = inst.y0;
    for (Index i = 0; i < y.size(); ++i) y(i) += sigma * noise_rng.gaussian();
    for (std::size_t a = 0; a < na; ++a)
      stats[job][a] = detail::run_synthesis_trial(cfg.algorithms[a], inst, y,
                                                  cfg.k, cfg.threshold,
                                                  opt.timing);
  });

  BenchTable table;
  table.axis_names = {"mu"};
  for (std::size_t cell = 0; cell < cfg.mus.size(); ++cell) {
    for (std::size_t a = 0; a < na; ++a) {
      std::vector<detail::TrialStats> column;
      for (int t = 0; t < cfg.trials; ++t)
        column.push_back(stats[cell * cfg.trials + t][a]);
      table.rows.push_back(
          detail::aggregate({cfg.mus[cell]}, cfg.algorithms[a], column));
    }
  }
  return table;
}

// Perfect-recovery map over (measurements, cosupport size) for the
// cosparse solvers on planted tight-frame instances.
inline BenchTable run_analysis_phase(const AnalysisPhaseConfig& cfg,
                                     const BenchOptions& opt) {
  struct Cell {
    Index m, l;
  };
  std::vector<Cell> cells;
  for (Index m : cfg.ms)
    for (Index l : cfg.ls) cells.push_back({m, l});
  const std::size_t na = cfg.algorithms.size();
  std::vector<std::vector<detail::TrialStats>> stats(
      cells.size() * static_cast<std::size_t>(cfg.trials),
      std::vector<detail::TrialStats>(na));

  detail::parallel_jobs(opt.workers, stats.size(), [&](std::size_t job) {
    std::size_t cell = job / static_cast<std::size_t>(cfg.trials);
    std::size_t trial = job % static_cast<std::size_t>(cfg.trials);
    const Cell& c = cells[cell];
    std::uint64_t seed = derive_seed(opt.seed, cell, trial);
    AnalysisInstance inst;
    try {
      inst = gen_analysis(seed, c.m, cfg.n, cfg.p, c.l);
    } catch (const Error&) {
      return;  // infeasible cell; all stats stay failed
    }
    for (std::size_t a = 0; a < na; ++a)
      stats[job][a] = detail::run_analysis_trial(cfg.algorithms[a], inst, c.l,
                                                 cfg.threshold, opt.timing);
  });

  BenchTable table;
  table.axis_names = {"m", "l"};
  for (std::size_t cell = 0; cell < cells.size(); ++cell) {
    for (std::size_t a = 0; a < na; ++a) {
      std::vector<detail::TrialStats> column;
      for (int t = 0; t < cfg.trials; ++t)
        column.push_back(stats[cell * cfg.trials + t][a]);
      table.rows.push_back(detail::aggregate(
          {static_cast<double>(cells[cell].m), static_cast<double>(cells[cell].l)},
          cfg.algorithms[a], column));
    }
  }
  return table;
}

// Writes results.csv plus a manifest echoing the configuration and seed.
inline void write_bench_outputs(const std::string& out_dir,
                                const std::string& experiment,
                                const BenchTable& table, const json& config,
                                std::uint64_t seed) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  {
    std::ofstream csv(fs::path(out_dir) / "results.csv", std::ios::binary);
    if (!csv) throw Error("write_bench_outputs: cannot write results.csv");
    csv << table.to_csv();
  }
  {
    json manifest = {{"experiment", experiment},
                     {"config", config},
                     {"seed", seed},
                     {"version", kVersion}};
    std::ofstream mf(fs::path(out_dir) / "manifest.json", std::ios::binary);
    if (!mf) throw Error("write_bench_outputs: cannot write manifest.json");
    mf << manifest.dump(2) << "\n";
  }
}

}  // namespace sparsekit
