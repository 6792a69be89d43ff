#pragma once

#include <string>
#include <vector>

#include "mcopt/kkt.hpp"
#include "mcopt/model.hpp"

namespace mcopt {

enum class OmegaKind { Omega, OmegaStar, OmegaInv, OmegaStarInv };

/// omega(t) = t - ln(1+t), omega_*(t) = -t - ln(1-t) and their inverses on t >= 0.
double omega_util(OmegaKind kind, double t);

/// (v0 - |v|_nu^2) / (nu + 1).
double rho_of_w(const Problem& p, const ControlVars& w);
/// -(nu+1) ln rho(w) - nu.
double phi_of_w(const Problem& p, const ControlVars& w);
/// v0^2 / (v0 - |v|_nu^2).
double mu_star(const Problem& p, const ControlVars& w);
bool in_phi_domain(const Problem& p, const ControlVars& w);

/// F^(u, w) - phi(w).
double omega_measure(const Problem& p, const Iterate& u, const ControlVars& w);

/// sigma(beta1, beta2) = (1 - omega^{-1}(beta1))^2 [omega_*^{-1}(beta2) - omega^{-1}(beta1)].
double sigma_of(double beta1, double beta2);
/// |dw|_w for the greedy direction dw = -w.
double greedy_direction_norm(const Problem& p, const ControlVars& w);

enum class Stage { Corrector, Predictor };

struct TraceRecord {
  int iter = 0;
  Stage stage = Stage::Corrector;
  double omega = 0.0;
  double v0 = 0.0;
  double gap = 0.0;
  double mu_star = 0.0;
  double decrement_or_alpha = 0.0;
  double rho = 0.0;
};

struct PredictorInfo {
  double alpha = 0.0;
  double mu_before = 0.0;
  double mu_after = 0.0;
  double dw_norm = 0.0;
  double omega_after = 0.0;
};

enum class SolveStatus { Converged, IterLimit, NumericalFailure };
const char* status_name(SolveStatus s);

struct SolveResult {
  Iterate u;
  ControlVars w;
  SolveStatus status = SolveStatus::NumericalFailure;
  std::vector<TraceRecord> trace;
  std::vector<PredictorInfo> predictors;
  int corrector_steps = 0;
  int regularized_solves = 0;  // reduced matrix needed the diagonal shift
  std::string message;
};

struct CorrectorOutcome {
  Iterate u;
  int steps = 0;
  int regularized = 0;
};

/// Damped Newton on Omega(., w) until Omega <= beta1. Appends to trace if given.
CorrectorOutcome corrector_stage(const Problem& p, const Iterate& u, const ControlVars& w,
                                 const SolverConfig& cfg, std::vector<TraceRecord>* trace = nullptr,
                                 int iter0 = 0);

struct PredictorOutcome {
  Iterate u;
  ControlVars w;
  double alpha = 0.0;
  double omega = 0.0;
  bool regularized = false;
};

/// One greedy predictor step dw = -w with the largest alpha keeping Omega <= beta2.
PredictorOutcome predictor_step(const Problem& p, const Iterate& u, const ControlVars& w,
                                const SolverConfig& cfg);

SolveResult solve(const Problem& p, const Iterate& u_start, const ControlVars& w_start,
                  const SolverConfig& cfg);

}  // namespace mcopt
