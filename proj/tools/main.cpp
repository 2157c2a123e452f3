// thompson-lab: single executable exposing the library operations as
// subcommands. Exit codes: 0 success, 1 usage or I/O failure, 2 a
// mathematically negative outcome (infeasible certificate, unsuccessful
// solve, distribution mismatch, failed selftest criterion).
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "tlab/io.hpp"
#include "tlab/selftest.hpp"

namespace {

using tlab::ordered_json;

int thread_budget(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("THOMPSON_LAB_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty())
    std::fputs(text.c_str(), stdout);
  else
    tlab::write_text_file(out_path, text);
}

std::string join(const std::vector<int>& v, char sep) {
  std::string s;
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (j > 0) s += sep;
    s += std::to_string(v[j]);
  }
  return s;
}

tlab::HermitianMatrix read_hermitian(const std::string& path, bool symmetrize) {
  return tlab::parse_hmat_hermitian(tlab::read_text_file(path), symmetrize);
}

tlab::StepFunction read_step(const std::string& path) {
  return tlab::step_from_json(
      tlab::parse_json(tlab::read_text_file(path), path));
}

struct HornGenArgs {
  int n = 0;
  int r = 0;  // 0 means the full table over all r
  std::string out;
};

int run_horn_gen(const HornGenArgs& a, const std::string& format) {
  std::vector<tlab::HornTriple> triples;
  if (a.r > 0)
    triples = tlab::gen_T(a.n, a.r);
  else
    triples = tlab::gen_all(a.n);
  if (format == "csv") {
    std::string csv = "n,r,I,J,K\n";
    for (const auto& t : triples)
      csv += std::to_string(t.n) + ',' + std::to_string(t.r) + ',' +
             join(t.I, ';') + ',' + join(t.J, ';') + ',' + join(t.K, ';') +
             '\n';
    emit(csv, a.out);
  } else {
    emit(tlab::triples_to_json(triples).dump(2) + "\n", a.out);
  }
  return 0;
}

struct HornCheckArgs {
  std::string alpha, beta, gamma, out;
  double tol = 1e-9;
};

int run_horn_check(const HornCheckArgs& a) {
  const auto read_spectrum = [](const std::string& path) {
    return tlab::spectrum_from_json(
        tlab::parse_json(tlab::read_text_file(path), path));
  };
  const tlab::Spectrum alpha = read_spectrum(a.alpha);
  const tlab::Spectrum beta = read_spectrum(a.beta);
  const tlab::Spectrum gamma = read_spectrum(a.gamma);
  const tlab::HornCertificate cert =
      tlab::check_horn(alpha, beta, gamma, a.tol);
  const ordered_json config{{"command", "horn check"},
                            {"alpha", a.alpha},
                            {"beta", a.beta},
                            {"gamma", a.gamma},
                            {"tol", a.tol}};
  const ordered_json report{{"config", config},
                            {"certificate", tlab::certificate_to_json(cert)}};
  emit(report.dump(2) + "\n", a.out);
  return cert.feasible ? 0 : 2;
}

struct SolveArgs {
  std::string x, y, out;
  int restarts = 20;
  int max_iters = 2000;
  std::uint64_t seed = 0;
  double target = 1e-8;  // Frobenius residual
  bool dilate = false;
  bool symmetrize = false;
  bool branch_targets = false;
  int m_max = 1;
};

int run_solve(const SolveArgs& a, int threads) {
  const auto x = read_hermitian(a.x, a.symmetrize);
  const auto y = read_hermitian(a.y, a.symmetrize);
  tlab::SolveOptions opts;
  opts.restarts = a.restarts;
  opts.max_iters = a.max_iters;
  opts.seed = a.seed;
  opts.residual_target = a.target * a.target;  // library uses squared defect
  opts.use_branch_targets = a.branch_targets;
  opts.m_max = a.m_max;
  const tlab::SolveReport report =
      a.dilate ? tlab::dilate_and_solve(x, y, opts, threads)
               : tlab::solve(x, y, opts, threads);
  const ordered_json config{{"command", "thompson solve"},
                            {"x", a.x},
                            {"y", a.y},
                            {"restarts", a.restarts},
                            {"max_iters", a.max_iters},
                            {"seed", a.seed},
                            {"target", a.target},
                            {"dilate", a.dilate},
                            {"branch_targets", a.branch_targets},
                            {"m_max", a.m_max},
                            {"symmetrize", a.symmetrize}};
  emit(tlab::solve_report_to_json(report, config).dump(2) + "\n", a.out);
  return report.success ? 0 : 2;
}

struct VerifyArgs {
  std::string x, y, u, v, out;
  double tol = 1e-8;
  bool symmetrize = false;
};

int run_verify(const VerifyArgs& a) {
  const auto x = read_hermitian(a.x, a.symmetrize);
  const auto y = read_hermitian(a.y, a.symmetrize);
  const auto u = tlab::parse_hmat_unitary(tlab::read_text_file(a.u));
  const auto v = tlab::parse_hmat_unitary(tlab::read_text_file(a.v));
  const tlab::VerifyResult r = tlab::verify(x, y, u, v, a.tol);
  const ordered_json config{{"command", "thompson verify"}, {"x", a.x},
                            {"y", a.y},                     {"u", a.u},
                            {"v", a.v},                     {"tol", a.tol},
                            {"symmetrize", a.symmetrize}};
  ordered_json report{{"config", config},
                      {"residual", r.residual},
                      {"ok", r.ok}};
  report["horn_feasible"] = r.certificate
                                ? ordered_json(r.certificate->feasible)
                                : ordered_json(nullptr);
  emit(report.dump(2) + "\n", a.out);
  return r.ok ? 0 : 2;
}

struct RearrangeArgs {
  std::string f, g, op, out;
};

int run_rearrange(const RearrangeArgs& a) {
  const tlab::StepFunction f = read_step(a.f);
  const ordered_json config{
      {"command", "rearrange"}, {"f", a.f}, {"g", a.g}, {"op", a.op}};
  if (a.op == "rearrange") {
    ordered_json out = tlab::step_to_json(tlab::decreasing_rearrangement(f));
    out["config"] = config;
    emit(out.dump(2) + "\n", a.out);
    return 0;
  }
  if (a.g.empty())
    throw tlab::Error("rearrange: --op " + a.op + " requires --g");
  const tlab::StepFunction g = read_step(a.g);
  if (a.op == "reduce") {
    tlab::StepFunction gbar = f;
    try {
      gbar = tlab::branch_reduce(f, g);
    } catch (const tlab::DistributionMismatch& e) {
      std::fprintf(stderr, "reduce: %s\n", e.what());
      return 2;
    }
    ordered_json out = tlab::step_to_json(gbar);
    out["config"] = config;
    emit(out.dump(2) + "\n", a.out);
    return 0;
  }
  // op == "dist": compare circle distributions, report the witness arc on
  // mismatch.
  ordered_json report{{"config", config}, {"match", true}};
  int code = 0;
  try {
    tlab::require_matching_distribution(f, g, tlab::default_tol().distribution);
  } catch (const tlab::DistributionMismatch& e) {
    report["match"] = false;
    report["arc"] = {e.theta1, e.theta2};
    report["gap"] = e.gap;
    code = 2;
  }
  emit(report.dump(2) + "\n", a.out);
  return code;
}

struct CompactArgs {
  std::string x, y, out;
  std::vector<int> ranks;
  int restarts = 1;
  int max_iters = 6000;
  double target = 1e-7;  // Frobenius residual
  std::uint64_t seed = 0;
  bool independent = false;
  bool symmetrize = false;
};

int run_compact(const CompactArgs& a, int threads, const std::string& format) {
  const auto x = read_hermitian(a.x, a.symmetrize);
  const auto y = read_hermitian(a.y, a.symmetrize);
  tlab::SolveOptions opts;
  opts.restarts = a.restarts;
  opts.max_iters = a.max_iters;
  opts.residual_target = a.target * a.target;
  opts.seed = a.seed;
  const auto levels =
      tlab::triad_sequence(x, y, a.ranks, opts, a.independent, threads);
  const ordered_json config{{"command", "compact sim"},
                            {"x", a.x},
                            {"y", a.y},
                            {"ranks", a.ranks},
                            {"restarts", a.restarts},
                            {"max_iters", a.max_iters},
                            {"target", a.target},
                            {"seed", a.seed},
                            {"independent", a.independent},
                            {"symmetrize", a.symmetrize}};
  const std::string csv = tlab::levels_to_csv(levels);
  if (format == "csv") {
    emit(csv, a.out);
  } else {
    emit(tlab::levels_to_json(levels, config).dump(2) + "\n", a.out);
    if (!a.out.empty()) {
      // CSV mirror next to the JSON report, for external plotting.
      std::filesystem::path mirror(a.out);
      mirror.replace_extension(".csv");
      tlab::write_text_file(mirror.string(), csv);
    }
  }
  return levels.back().solver_success ? 0 : 2;
}

struct FactorArgs {
  std::string lambda_a, lambda_b, out;
  std::vector<int> sizes;
  int moments = 5;
  int max_n = 4;
  std::uint64_t seed = 0;
  bool commuting = false;
  int restarts = 2;
  int max_iters = 6000;
  double target = 1e-7;  // Frobenius residual
};

int run_factor(const FactorArgs& a, int threads) {
  const tlab::StepFunction la = read_step(a.lambda_a);
  const tlab::StepFunction lb = read_step(a.lambda_b);
  tlab::FactorOptions opts;
  opts.moments = a.moments;
  opts.max_n = a.max_n;
  opts.seed = a.seed;
  opts.decommute = !a.commuting;
  opts.solve.restarts = a.restarts;
  opts.solve.max_iters = a.max_iters;
  opts.solve.residual_target = a.target * a.target;
  opts.threads = threads;
  const tlab::FactorReport report =
      tlab::factor_pipeline(la, lb, a.sizes, opts);
  const ordered_json config{{"command", "factor pipeline"},
                            {"lambda_a", a.lambda_a},
                            {"lambda_b", a.lambda_b},
                            {"sizes", a.sizes},
                            {"moments", a.moments},
                            {"max_n", a.max_n},
                            {"seed", a.seed},
                            {"commuting", a.commuting},
                            {"restarts", a.restarts},
                            {"max_iters", a.max_iters},
                            {"target", a.target}};
  emit(tlab::factor_report_to_json(report, config).dump(2) + "\n", a.out);
  return report.integral_horn.feasible ? 0 : 2;
}

int run_selftest_cmd() {
  int failed = 0;
  for (const auto& r : tlab::run_selftest()) {
    std::printf("[%s] %d. %s: %s\n", r.pass ? "PASS" : "FAIL", r.index,
                r.name.c_str(), r.detail.c_str());
    std::fflush(stdout);
    if (!r.pass) ++failed;
  }
  if (failed > 0) std::printf("%d of 9 criteria failed\n", failed);
  return failed == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thompson identity solver and spectral toolbox"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "thompson-lab 1.0.0");

  int threads_flag = 0;
  std::string format = "json";
  app.add_option("--threads", threads_flag,
                 "thread budget (default: THOMPSON_LAB_THREADS or all cores)");
  app.add_option("--format", format, "output format for tabular results")
      ->check(CLI::IsMember({"json", "csv"}));

  CLI::App* horn = app.add_subcommand("horn", "inequality tables");
  horn->require_subcommand(1);
  HornGenArgs hg;
  CLI::App* horn_gen = horn->add_subcommand("gen", "generate triple tables");
  horn_gen->add_option("--n", hg.n, "matrix size")->required();
  horn_gen->add_option("--r", hg.r, "restrict to one cardinality");
  horn_gen->add_option("--out", hg.out, "output path (default stdout)");
  HornCheckArgs hc;
  CLI::App* horn_check =
      horn->add_subcommand("check", "check a spectrum triple");
  horn_check->add_option("--alpha", hc.alpha, "spectrum JSON")->required();
  horn_check->add_option("--beta", hc.beta, "spectrum JSON")->required();
  horn_check->add_option("--gamma", hc.gamma, "spectrum JSON")->required();
  horn_check->add_option("--tol", hc.tol, "slack tolerance");
  horn_check->add_option("--out", hc.out, "output path (default stdout)");

  CLI::App* thompson = app.add_subcommand("thompson", "identity solver");
  thompson->require_subcommand(1);
  SolveArgs sa;
  CLI::App* solve = thompson->add_subcommand("solve", "search for U, V");
  solve->add_option("--x", sa.x, "HMAT input")->required();
  solve->add_option("--y", sa.y, "HMAT input")->required();
  solve->add_option("--restarts", sa.restarts, "restart budget");
  solve->add_option("--max-iters", sa.max_iters, "iteration cap per restart");
  solve->add_option("--seed", sa.seed, "restart seed");
  solve->add_option("--target", sa.target, "Frobenius residual target");
  solve->add_flag("--dilate", sa.dilate, "solve the zero-padded embedding");
  solve->add_flag("--branch-targets", sa.branch_targets,
                  "steer toward shifted logarithm branches");
  solve->add_option("--m-max", sa.m_max, "branch shift range");
  solve->add_flag("--symmetrize", sa.symmetrize,
                  "accept non-Hermitian input as (M+M*)/2");
  solve->add_option("--out", sa.out, "report path (default stdout)");
  VerifyArgs va;
  CLI::App* verify = thompson->add_subcommand("verify", "check given U, V");
  verify->add_option("--x", va.x, "HMAT input")->required();
  verify->add_option("--y", va.y, "HMAT input")->required();
  verify->add_option("--u", va.u, "HMAT unitary")->required();
  verify->add_option("--v", va.v, "HMAT unitary")->required();
  verify->add_option("--tol", va.tol, "residual bound");
  verify->add_flag("--symmetrize", va.symmetrize,
                   "accept non-Hermitian input as (M+M*)/2");
  verify->add_option("--out", va.out, "report path (default stdout)");

  RearrangeArgs ra;
  CLI::App* rearrange =
      app.add_subcommand("rearrange", "step-function operations");
  rearrange->add_option("--f", ra.f, "STEP input")->required();
  rearrange->add_option("--g", ra.g, "STEP input (reduce/dist)");
  rearrange->add_option("--op", ra.op, "operation")
      ->required()
      ->check(CLI::IsMember({"rearrange", "reduce", "dist"}));
  rearrange->add_option("--out", ra.out, "output path (default stdout)");

  CLI::App* compact = app.add_subcommand("compact", "truncation ladder");
  compact->require_subcommand(1);
  CompactArgs ca;
  CLI::App* sim = compact->add_subcommand("sim", "run the rank ladder");
  sim->add_option("--x", ca.x, "HMAT input")->required();
  sim->add_option("--y", ca.y, "HMAT input")->required();
  sim->add_option("--ranks", ca.ranks, "increasing ranks, comma separated")
      ->required()
      ->delimiter(',');
  sim->add_option("--restarts", ca.restarts, "restart budget per level");
  sim->add_option("--max-iters", ca.max_iters, "iteration cap per restart");
  sim->add_option("--target", ca.target, "Frobenius residual target");
  sim->add_option("--seed", ca.seed, "restart seed");
  sim->add_flag("--independent", ca.independent,
                "solve each level cold (no warm starts)");
  sim->add_flag("--symmetrize", ca.symmetrize,
                "accept non-Hermitian input as (M+M*)/2");
  sim->add_option("--out", ca.out, "report path (default stdout)");

  CLI::App* factor = app.add_subcommand("factor", "lambda-function pipeline");
  factor->require_subcommand(1);
  FactorArgs fa;
  CLI::App* pipeline =
      factor->add_subcommand("pipeline", "matricial approximation ladder");
  pipeline->add_option("--lambda-a", fa.lambda_a, "STEP input")->required();
  pipeline->add_option("--lambda-b", fa.lambda_b, "STEP input")->required();
  pipeline->add_option("--sizes", fa.sizes, "increasing sizes, comma separated")
      ->required()
      ->delimiter(',');
  pipeline->add_option("--moments", fa.moments, "circle moments to compare");
  pipeline->add_option("--max-n", fa.max_n, "integral inequality depth");
  pipeline->add_option("--seed", fa.seed, "de-commuting seed");
  pipeline->add_flag("--commuting", fa.commuting,
                     "skip the de-commuting conjugation");
  pipeline->add_option("--restarts", fa.restarts, "restart budget per size");
  pipeline->add_option("--max-iters", fa.max_iters,
                       "iteration cap per restart");
  pipeline->add_option("--target", fa.target, "Frobenius residual target");
  pipeline->add_option("--out", fa.out, "report path (default stdout)");

  CLI::App* selftest =
      app.add_subcommand("selftest", "run the embedded release gate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const int threads = thread_budget(threads_flag);
  try {
    if (horn_gen->parsed()) return run_horn_gen(hg, format);
    if (format == "csv" && !sim->parsed())
      throw tlab::Error("--format csv applies to 'horn gen' and 'compact sim'");
    if (horn_check->parsed()) return run_horn_check(hc);
    if (solve->parsed()) return run_solve(sa, threads);
    if (verify->parsed()) return run_verify(va);
    if (rearrange->parsed()) return run_rearrange(ra);
    if (sim->parsed()) return run_compact(ca, threads, format);
    if (pipeline->parsed()) return run_factor(fa, threads);
    if (selftest->parsed()) return run_selftest_cmd();
  } catch (const tlab::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
