#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "mcopt/error.hpp"
#include "mcopt/init.hpp"
#include "mcopt/io.hpp"
#include "mcopt/solver.hpp"
#include "mcopt/verify.hpp"

using namespace mcopt;

namespace {

enum Exit { kOk = 0, kParse = 2, kIterLimit = 3, kNumerical = 4, kVerify = 5 };

int exit_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::ParseError:
    case ErrorCode::RankDeficientA:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::InvalidConfig:
      return kParse;
    case ErrorCode::IterLimit:
      return kIterLimit;
    default:
      return kNumerical;
  }
}

struct SolveOpts {
  std::string file;
  std::string trace;
  std::string out;
  SolverConfig cfg = SolverConfig::defaults();
  bool quiet = false;
};

int run_solve(const SolveOpts& o) {
  io::ProblemFile pf = io::parse_problem(o.file);
  if (!pf.start) {
    std::cerr << o.file << ": no \"start\" point; a strictly feasible start is required\n";
    return kParse;
  }
  const Problem& p = pf.problem;
  const ControlVars w = choose_w_start(p, *pf.start);
  const SolveResult r = solve(p, *pf.start, w, o.cfg);

  int npred = 0;
  for (const TraceRecord& t : r.trace) npred += t.stage == Stage::Predictor;
  std::printf("status: %s\n", status_name(r.status));
  std::printf("predictor steps: %d\ncorrector steps: %d\n", npred, r.corrector_steps);
  std::printf("gap: %.17g\nv0: %.17g\n", duality_gap(p, r.u), r.w.v0);
  std::printf("objective: %.17g\n", p.c().dot(r.u.x));
  if (r.regularized_solves) std::printf("regularized solves: %d\n", r.regularized_solves);
  if (!r.message.empty()) std::printf("message: %s\n", r.message.c_str());
  if (!o.quiet) {
    for (const TraceRecord& t : r.trace) {
      if (t.stage != Stage::Predictor) continue;
      std::printf("  %5d alpha=%.4e v0=%.4e gap=%.4e omega=%.4f\n", t.iter, t.decrement_or_alpha, t.v0, t.gap,
                  t.omega);
    }
  }
  if (!o.trace.empty()) io::write_trace_csv(o.trace, r.trace);
  if (!o.out.empty()) io::write_solution(o.out, p, r);

  switch (r.status) {
    case SolveStatus::Converged: return kOk;
    case SolveStatus::IterLimit: return kIterLimit;
    case SolveStatus::NumericalFailure: return kNumerical;
  }
  return kNumerical;
}

int run_gen(std::uint64_t seed, int m, const std::string& cones, const std::string& out) {
  auto [p, u] = random_instance(seed, m, io::parse_cone_list(cones));
  if (out.empty() || out == "-") {
    std::cout << io::problem_to_json(p, &u);
  } else {
    io::write_problem(out, p, &u);
    std::printf("wrote %s (m=%d, blocks=%d, nu=%g)\n", out.c_str(), p.m(), p.n_blocks(), p.nu());
  }
  return kOk;
}

int run_verify(const std::string& family, int samples, std::uint64_t seed) {
  bool ok = true;
  for (const ConeSpec& c : verify::family_members(family)) {
    for (const verify::CheckResult& r : verify::run_all(c, samples, seed)) {
      std::printf("%s  %-70s worst=%.3e tol=%.1e n=%d\n", r.pass() ? "PASS" : "FAIL", r.name.c_str(), r.worst,
                  r.tol, r.samples);
      ok = ok && r.pass();
    }
  }
  std::printf("%s\n", ok ? "all checks passed" : "verification FAILED");
  return ok ? kOk : kVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiconic interior-point solver"};
  app.require_subcommand(1);

  SolveOpts so;
  auto* solve_cmd = app.add_subcommand("solve", "solve a problem file");
  solve_cmd->add_option("file", so.file, "problem JSON")->required();
  solve_cmd->add_option("--eps", so.cfg.eps, "stop when v0 <= eps");
  solve_cmd->add_option("--beta1", so.cfg.beta1, "corrector threshold");
  solve_cmd->add_option("--beta2", so.cfg.beta2, "predictor threshold");
  solve_cmd->add_option("--max-iters", so.cfg.max_outer_iters, "predictor step limit");
  solve_cmd->add_option("--trace", so.trace, "write trace CSV");
  solve_cmd->add_option("--out", so.out, "write solution JSON");
  solve_cmd->add_flag("--quiet", so.quiet, "summary only");

  std::uint64_t gseed = 1;
  int gm = 1;
  std::string gcones, gout;
  auto* gen_cmd = app.add_subcommand("gen", "write a random strictly feasible instance");
  gen_cmd->add_option("--seed", gseed, "random seed");
  gen_cmd->add_option("--m", gm, "number of constraints")->required();
  gen_cmd->add_option("--cones", gcones, "e.g. nonneg:4,lorentz:3,psd:2")->required();
  gen_cmd->add_option("--out", gout, "output file (default stdout)");

  std::string family = "all";
  int samples = 200;
  std::uint64_t vseed = 20240601;
  if (const char* env = std::getenv("MCOPT_SEED")) vseed = std::strtoull(env, nullptr, 10);
  auto* verify_cmd = app.add_subcommand("verify", "run the barrier and coupling property suites");
  verify_cmd->add_option("--family", family, "nonneg | lorentz | psd | all");
  verify_cmd->add_option("--samples", samples, "samples per cone");
  verify_cmd->add_option("--seed", vseed, "random seed (env MCOPT_SEED)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kParse;
  }

  try {
    if (*solve_cmd) return run_solve(so);
    if (*gen_cmd) return run_gen(gseed, gm, gcones, gout);
    if (*verify_cmd) return run_verify(family, samples, vseed);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kOk;
}
