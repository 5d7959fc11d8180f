// Command-line front end: greedy sparse / cosparse solvers, brute-force
// isometry constants, theorem-bound evaluation, exhaustive oracles, and the
// seeded Monte-Carlo benchmark harness. All structured output is JSON; the
// benchmark writes CSV + manifest into a directory.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sparsekit/analysis.hpp"
#include "sparsekit/bench.hpp"
#include "sparsekit/generate.hpp"
#include "sparsekit/guarantees.hpp"
#include "sparsekit/matrix_io.hpp"
#include "sparsekit/oracle.hpp"
#include "sparsekit/synthesis.hpp"

namespace {

using nlohmann::json;
using namespace sparsekit;

json finite_or_string(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : "-inf";
}

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

json support_to_json(const SupportSet& s) {
  json arr = json::array();
  for (Index i : s) arr.push_back(i);
  return arr;
}

void emit(const json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream out(out_path);
    if (!out) throw Error("cannot open output file " + out_path);
    out << j.dump(2) << "\n";
  }
}

StopRule make_stop(std::optional<Index> k, std::optional<double> eps_t,
                   const char* k_name) {
  if (k.has_value() == eps_t.has_value())
    throw Error(std::string("exactly one of --") + k_name +
                " and --eps-t must be given");
  if (k) return StopRule::cardinality(*k);
  return StopRule::residual(*eps_t);
}

json trace_to_json(const std::vector<IterationRecord>& trace) {
  json arr = json::array();
  for (const auto& rec : trace)
    arr.push_back({{"support_size", rec.support_size}, {"eps0", rec.eps0}});
  return arr;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse and cosparse greedy recovery toolkit"};
  app.require_subcommand(1);

  // --- solve ---------------------------------------------------------------
  std::string s_algo, s_matrix, s_y, s_out;
  std::optional<Index> s_k;
  std::optional<double> s_eps;
  bool s_trace = false;
  auto* solve = app.add_subcommand("solve", "run a synthesis-model solver");
  solve->add_option("--algo", s_algo, "omp|ols|fols|olsr|iolsr")->required();
  solve->add_option("--matrix", s_matrix, "dictionary file")->required();
  solve->add_option("--y", s_y, "measurement vector file")->required();
  solve->add_option("--k", s_k, "target cardinality");
  solve->add_option("--eps-t", s_eps, "target squared residual");
  solve->add_option("--out", s_out, "output file (default stdout)");
  solve->add_flag("--trace", s_trace, "include the per-iteration trace");

  // --- asolve --------------------------------------------------------------
  std::string a_algo, a_matrix, a_omega, a_y, a_out;
  std::optional<Index> a_l;
  std::optional<double> a_eps;
  double a_noise = 0.0;
  bool a_trace = false;
  auto* asolve = app.add_subcommand("asolve", "run an analysis-model solver");
  asolve->add_option("--algo", a_algo, "gap|gals|galsr")->required();
  asolve->add_option("--matrix", a_matrix, "measurement matrix file")->required();
  asolve->add_option("--omega", a_omega, "analysis operator file")->required();
  asolve->add_option("--y", a_y, "measurement vector file")->required();
  asolve->add_option("--l", a_l, "target cosupport size");
  asolve->add_option("--eps-t", a_eps, "target objective");
  asolve->add_option("--noise-budget", a_noise, "measurement noise norm");
  asolve->add_option("--out", a_out, "output file (default stdout)");
  asolve->add_flag("--trace", a_trace, "include the per-iteration trace");

  // --- rip -----------------------------------------------------------------
  std::string r_matrix, r_omega, r_out;
  Index r_order = 1;
  auto* rip = app.add_subcommand("rip", "brute-force isometry constant");
  rip->add_option("--matrix", r_matrix, "matrix file")->required();
  rip->add_option("--order", r_order, "subset size")->required();
  rip->add_option("--omega", r_omega,
                  "analysis operator file (switches to the operator variant)");
  rip->add_option("--out", r_out, "output file (default stdout)");

  // --- bounds ----------------------------------------------------------------
  double b_delta = 0.0, b_ynorm = 1.0, b_eps = 1e-4, b_sigma = 0.0, b_a = 1.0,
         b_y0norm = 1.0;
  Index b_k = 1, b_n = 2;
  std::string b_out;
  auto* bounds = app.add_subcommand("bounds", "evaluate the recovery bounds");
  bounds->add_option("--delta", b_delta, "isometry constant")->required();
  bounds->add_option("--k", b_k, "sparsity")->required();
  bounds->add_option("--y-norm-sq", b_ynorm, "squared measurement norm");
  bounds->add_option("--eps-t", b_eps, "target squared residual");
  bounds->add_option("--sigma", b_sigma, "noise standard deviation");
  bounds->add_option("--n", b_n, "dictionary size");
  bounds->add_option("--a", b_a, "confidence parameter");
  bounds->add_option("--y0-norm-sq", b_y0norm, "squared noiseless norm");
  bounds->add_option("--out", b_out, "output file (default stdout)");

  // --- oracle ----------------------------------------------------------------
  auto* oracle = app.add_subcommand("oracle", "exhaustive reference solvers");
  oracle->require_subcommand(1);
  std::string os_matrix, os_y, os_out;
  Index os_k = 1;
  auto* osparse = oracle->add_subcommand("sparse", "best size-k support");
  osparse->add_option("--matrix", os_matrix)->required();
  osparse->add_option("--y", os_y)->required();
  osparse->add_option("--k", os_k)->required();
  osparse->add_option("--out", os_out);
  std::string oc_matrix, oc_omega, oc_y, oc_out;
  Index oc_l = 1;
  auto* ocosparse = oracle->add_subcommand("cosparse", "best size-l cosupport");
  ocosparse->add_option("--matrix", oc_matrix)->required();
  ocosparse->add_option("--omega", oc_omega)->required();
  ocosparse->add_option("--y", oc_y)->required();
  ocosparse->add_option("--l", oc_l)->required();
  ocosparse->add_option("--out", oc_out);

  // --- bench -----------------------------------------------------------------
  auto* bench = app.add_subcommand("bench", "seeded Monte-Carlo experiments");
  bench->require_subcommand(1);
  std::string bench_cfg, bench_out;
  std::uint64_t bench_seed = 0;
  int bench_workers = 1;
  bool bench_timing = false;
  for (const char* name : {"phase", "noise", "coherence", "analysis-phase"}) {
    auto* sub = bench->add_subcommand(
        name, std::string("experiment: ") + name);
    sub->add_option("--config", bench_cfg, "JSON config (defaults if omitted)");
    sub->add_option("--seed", bench_seed, "master seed");
    sub->add_option("--out", bench_out, "output directory")->required();
    sub->add_option("--workers", bench_workers, "worker threads");
    sub->add_flag("--timing", bench_timing,
                  "measure wall time (breaks byte-reproducibility)");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) {
      auto problem = SynthesisProblem::create(
          load_matrix(s_matrix), load_vector(s_y), make_stop(s_k, s_eps, "k"));
      RecoveryResult res = synthesis_solver(s_algo)(problem);
      json j = {{"support", support_to_json(res.support)},
                {"xh", vector_to_json(res.xh_full)},
                {"residual_sq", res.residual_sq},
                {"iterations", res.iterations}};
      if (s_trace) {
        j["warmup_iterations"] = res.warmup_iterations;
        j["trace"] = trace_to_json(res.trace);
      }
      emit(j, s_out);
    } else if (asolve->parsed()) {
      auto problem = AnalysisProblem::create(
          load_matrix(a_matrix), load_matrix(a_omega), load_vector(a_y),
          make_stop(a_l, a_eps, "l"), a_noise);
      AnalysisResult res = analysis_solver(a_algo)(problem);
      json j = {{"cosupport", support_to_json(res.cosupport)},
                {"xh", vector_to_json(res.xh)},
                {"objective", res.objective},
                {"iterations", res.iterations}};
      if (a_trace) j["trace"] = trace_to_json(res.trace);
      emit(j, a_out);
    } else if (rip->parsed()) {
      Matrix M = load_matrix(r_matrix);
      RipReport rep = r_omega.empty()
                          ? rip_constant(M, r_order)
                          : omega_rip_constant(M, load_matrix(r_omega), r_order);
      json j = {{"order", rep.order},
                {"delta", rep.delta},
                {"witness_support", support_to_json(rep.witness_support)},
                {"vacuous", rep.vacuous}};
      emit(j, r_out);
    } else if (bounds->parsed()) {
      BoundReport rep = evaluate_bounds(b_delta, b_k, b_ynorm, b_eps, b_sigma,
                                        b_n, b_a, b_y0norm);
      json j = {{"c_delta", rep.c_delta},
                {"gamma", rep.gamma},
                {"b_iterations", rep.b_iterations},
                {"awgn_lhs", finite_or_string(rep.awgn_lhs)},
                {"awgn_rhs", rep.awgn_rhs},
                {"awgn_holds", rep.awgn_holds},
                {"oracle_bound", rep.oracle_bound},
                {"worstcase_bound", rep.worstcase_bound}};
      emit(j, b_out);
    } else if (osparse->parsed()) {
      ExhaustiveResult res =
          exhaustive_sparse(load_matrix(os_matrix), load_vector(os_y), os_k);
      emit({{"best_support", support_to_json(res.best_support)},
            {"best_residual_sq", res.best_residual_sq},
            {"evaluated", res.evaluated},
            {"skipped", res.skipped}},
           os_out);
    } else if (ocosparse->parsed()) {
      ExhaustiveResult res =
          exhaustive_cosparse(load_matrix(oc_matrix), load_matrix(oc_omega),
                              load_vector(oc_y), oc_l);
      emit({{"best_support", support_to_json(res.best_support)},
            {"best_residual_sq", res.best_residual_sq},
            {"evaluated", res.evaluated},
            {"skipped", res.skipped}},
           oc_out);
    } else if (bench->parsed()) {
      json cfg_json = json::object();
      if (!bench_cfg.empty()) {
        std::ifstream in(bench_cfg);
        if (!in) throw Error("cannot open config " + bench_cfg);
        in >> cfg_json;
      }
      BenchOptions opt;
      opt.seed = bench_seed;
      opt.workers = bench_workers;
      opt.timing = bench_timing;
      const std::string kind = bench->get_subcommands().front()->get_name();
      BenchTable table;
      json echo;
      if (kind == "phase") {
        auto cfg = PhaseConfig::from_json(cfg_json);
        table = run_phase_transition(cfg, opt);
        echo = cfg.to_json();
      } else if (kind == "noise") {
        auto cfg = NoiseConfig::from_json(cfg_json);
        table = run_noise_sweep(cfg, opt);
        echo = cfg.to_json();
      } else if (kind == "coherence") {
        auto cfg = CoherenceConfig::from_json(cfg_json);
        table = run_coherence_sweep(cfg, opt);
        echo = cfg.to_json();
      } else {
        auto cfg = AnalysisPhaseConfig::from_json(cfg_json);
        table = run_analysis_phase(cfg, opt);
        echo = cfg.to_json();
      }
      write_bench_outputs(bench_out, kind, table, echo, bench_seed);
      std::cout << "wrote " << bench_out << "/results.csv ("
                << table.rows.size() << " rows)\n";
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
