#include "mcopt/solver.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mcopt/error.hpp"

namespace mcopt {

namespace {

double omega(double t) { return t - std::log1p(t); }
double omega_star(double t) { return -t - std::log1p(-t); }

// Solves f(t) = target on [lo, hi] for increasing f by Newton with bisection fallback.
template <class F, class D>
double monotone_root(F f, D df, double target, double lo, double hi) {
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double r = f(t) - target;
    if (std::abs(r) <= 1e-15 * std::max(1.0, target)) return t;
    if (r < 0) lo = t;
    else hi = t;
    double next = t - r / df(t);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, hi)) return next;
    t = next;
  }
  return t;
}

Iterate moved(const Problem& p, const Iterate& u, const Direction& d, double a) {
  Iterate r;
  r.x = u.x + a * d.dx;
  r.y = u.y + a * d.dy;
  r.s = p.dual_slack(r.y);
  return r;
}

TraceRecord record(const Problem& p, const Iterate& u, const ControlVars& w, int iter, Stage st,
                   double omega_val, double value) {
  TraceRecord t;
  t.iter = iter;
  t.stage = st;
  t.omega = omega_val;
  t.v0 = w.v0;
  t.gap = duality_gap(p, u);
  t.mu_star = mu_star(p, w);
  t.decrement_or_alpha = value;
  t.rho = rho_of_w(p, w);
  return t;
}

}  // namespace

double omega_util(OmegaKind kind, double t) {
  switch (kind) {
    case OmegaKind::Omega:
      if (!(t > -1.0)) throw Error(ErrorCode::OutsideDomain, "omega needs t > -1");
      return omega(t);
    case OmegaKind::OmegaStar:
      if (!(t < 1.0)) throw Error(ErrorCode::OutsideDomain, "omega_* needs t < 1");
      return omega_star(t);
    case OmegaKind::OmegaInv: {
      if (!(t >= 0.0)) throw Error(ErrorCode::OutsideDomain, "omega^{-1} needs t >= 0");
      if (t == 0.0) return 0.0;
      double hi = 1.0;
      while (omega(hi) < t) hi *= 2.0;
      return monotone_root(omega, [](double x) { return x / (1.0 + x); }, t, 0.0, hi);
    }
    case OmegaKind::OmegaStarInv: {
      if (!(t >= 0.0)) throw Error(ErrorCode::OutsideDomain, "omega_*^{-1} needs t >= 0");
      if (t == 0.0) return 0.0;
      return monotone_root(omega_star, [](double x) { return x / (1.0 - x); }, t, 0.0, 1.0);
    }
  }
  return 0.0;
}

SolverConfig SolverConfig::defaults() {
  SolverConfig c;
  c.beta1 = 0.25;
  const double w1 = omega_util(OmegaKind::OmegaInv, c.beta1);
  c.beta2 = std::max(2.0, omega_util(OmegaKind::OmegaStar, w1) + 0.5);
  return c;
}

void SolverConfig::validate() const {
  if (!(beta1 > 0.0 && beta1 < 1.0 - std::log(2.0))) {
    throw Error(ErrorCode::InvalidConfig, "beta1 must lie in (0, 1 - ln 2)");
  }
  const double bound = omega_util(OmegaKind::OmegaStar, omega_util(OmegaKind::OmegaInv, beta1));
  if (!(beta2 > bound)) {
    throw Error(ErrorCode::InvalidConfig,
                "beta2 must exceed omega_*(omega^{-1}(beta1)) = " + std::to_string(bound));
  }
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidConfig, "eps must be positive");
  if (max_corrector_steps < 1 || max_outer_iters < 1) {
    throw Error(ErrorCode::InvalidConfig, "iteration limits must be positive");
  }
  if (!(ls_tol > 0.0 && ls_tol < 1.0)) throw Error(ErrorCode::InvalidConfig, "ls_tol must lie in (0, 1)");
}

bool in_phi_domain(const Problem& p, const ControlVars& w) {
  return w.v.size() == p.n_blocks() && w.v0 > vnorm_sq(p, w.v);
}

double rho_of_w(const Problem& p, const ControlVars& w) {
  if (!in_phi_domain(p, w)) throw Error(ErrorCode::OutsideDomain, "v0 <= |v|_nu^2");
  return (w.v0 - vnorm_sq(p, w.v)) / (p.nu() + 1.0);
}

double phi_of_w(const Problem& p, const ControlVars& w) {
  return -(p.nu() + 1.0) * std::log(rho_of_w(p, w)) - p.nu();
}

double mu_star(const Problem& p, const ControlVars& w) {
  if (!in_phi_domain(p, w)) throw Error(ErrorCode::OutsideDomain, "v0 <= |v|_nu^2");
  return w.v0 * w.v0 / (w.v0 - vnorm_sq(p, w.v));
}

double omega_measure(const Problem& p, const Iterate& u, const ControlVars& w) {
  if (!in_phi_domain(p, w)) throw Error(ErrorCode::OutsideDomain, "w outside dom phi: v0 <= |v|_nu^2");
  return ftilde_value(p, u, w) - phi_of_w(p, w);
}

double sigma_of(double beta1, double beta2) {
  const double a = omega_util(OmegaKind::OmegaInv, beta1);
  const double b = omega_util(OmegaKind::OmegaStarInv, beta2);
  return (1.0 - a) * (1.0 - a) * (b - a);
}

double greedy_direction_norm(const Problem& p, const ControlVars& w) {
  const double vn = vnorm_sq(p, w.v);
  const double r = vn / (w.v0 - vn);  // 1 / (alpha_bar - 1)
  return std::sqrt((p.nu() + 1.0) * (1.0 + r * r));
}

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::IterLimit: return "IterLimit";
    case SolveStatus::NumericalFailure: return "NumericalFailure";
  }
  return "?";
}

CorrectorOutcome corrector_stage(const Problem& p, const Iterate& u0, const ControlVars& w,
                                 const SolverConfig& cfg, std::vector<TraceRecord>* trace, int iter0) {
  CorrectorOutcome out{u0, 0};
  Iterate& u = out.u;
  const double phi = phi_of_w(p, w);
  double om = ftilde_value(p, u, w) - phi;
  while (om > cfg.beta1) {
    if (out.steps >= cfg.max_corrector_steps) {
      throw Error(ErrorCode::IterLimit, "corrector stage exceeded " + std::to_string(cfg.max_corrector_steps) + " steps");
    }
    const KktWorkspace ws(p, u, w);
    out.regularized += ws.regularized();
    const SplitRhs g = ftilde_grad_split(p, u, w);
    const Direction d = ws.solve_direction(g);
    const double dd = p.c().dot(d.dx) - p.b().dot(d.dy);
    const double delta = std::sqrt(std::max(0.0, -(g.base.x.dot(d.dx) + g.base.y.dot(d.dy) + dd / ws.slack())));
    double a = delta < 0.25 ? 1.0 : 1.0 / (1.0 + delta);

    Iterate trial;
    double om_trial = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 60; ++k) {
      trial = moved(p, u, d, a);
      if (in_ftilde_domain(p, trial, w)) {
        om_trial = ftilde_value(p, trial, w) - phi;
        if (om_trial < om - cfg.stall_tol) break;
      }
      a *= 0.5;
    }
    if (!(om_trial < om - cfg.stall_tol)) {
      throw Error(ErrorCode::CorrectorStall, "Omega did not decrease (Omega = " + std::to_string(om) + ")");
    }
    u = trial;
    om = om_trial;
    ++out.steps;
    if (trace) trace->push_back(record(p, u, w, iter0 + out.steps, Stage::Corrector, om, delta));
  }
  return out;
}

PredictorOutcome predictor_step(const Problem& p, const Iterate& u, const ControlVars& w,
                                const SolverConfig& cfg) {
  ControlVars dw{-w.v0, -w.v};
  const KktWorkspace ws(p, u, w);
  const Direction d = ws.solve_direction(predictor_rhs_split(p, u, w, dw));

  auto trial = [&](double a, PredictorOutcome& o) {
    o.w = {(1.0 - a) * w.v0, (1.0 - a) * w.v};
    o.u = moved(p, u, d, a);
    o.alpha = a;
    if (!in_phi_domain(p, o.w) || !in_ftilde_domain(p, o.u, o.w)) return false;
    o.omega = ftilde_value(p, o.u, o.w) - phi_of_w(p, o.w);
    return std::isfinite(o.omega) && o.omega <= cfg.beta2;
  };

  PredictorOutcome best, probe;
  double a = 1.0;
  while (!trial(a, best)) {
    a *= 0.5;
    if (a < cfg.alpha_min) throw Error(ErrorCode::PredictorStall, "predictor step length below alpha_min");
  }
  if (a < 1.0) {
    double lo = a, hi = std::min(1.0, 2.0 * a);
    while (hi - lo > cfg.ls_tol * hi) {
      const double mid = 0.5 * (lo + hi);
      if (trial(mid, probe)) {
        lo = mid;
        best = probe;
      } else {
        hi = mid;
      }
    }
  }
  best.regularized = ws.regularized();
  return best;
}

SolveResult solve(const Problem& p, const Iterate& u_start, const ControlVars& w_start,
                  const SolverConfig& cfg) {
  cfg.validate();
  SolveResult res;
  res.u = u_start;
  res.w = w_start;
  refresh_slack(p, res.u);
  if (!strictly_feasible(p, res.u, 0.0, cfg.feas_tol_rel)) {
    throw Error(ErrorCode::OutsideDomain, "starting point is not strictly feasible");
  }
  if (!in_phi_domain(p, res.w)) throw Error(ErrorCode::OutsideDomain, "starting w outside dom phi");
  require_ftilde_domain(p, res.u, res.w);

  int iter = 0;
  int outer = 0;
  try {
    while (res.w.v0 > cfg.eps) {
      if (outer >= cfg.max_outer_iters) {
        res.status = SolveStatus::IterLimit;
        res.message = "outer iteration limit reached";
        return res;
      }
      CorrectorOutcome co = corrector_stage(p, res.u, res.w, cfg, &res.trace, iter);
      iter += co.steps;
      res.corrector_steps += co.steps;
      res.regularized_solves += co.regularized;
      res.u = std::move(co.u);

      PredictorInfo info;
      info.mu_before = mu_star(p, res.w);
      info.dw_norm = greedy_direction_norm(p, res.w);
      PredictorOutcome po = predictor_step(p, res.u, res.w, cfg);
      res.u = std::move(po.u);
      res.w = std::move(po.w);
      res.regularized_solves += po.regularized;
      info.alpha = po.alpha;
      info.mu_after = mu_star(p, res.w);
      info.omega_after = po.omega;
      res.predictors.push_back(info);
      ++iter;
      ++outer;
      res.trace.push_back(record(p, res.u, res.w, iter, Stage::Predictor, po.omega, po.alpha));
    }
    res.status = SolveStatus::Converged;
  } catch (const Error& e) {
    res.status = e.code() == ErrorCode::IterLimit ? SolveStatus::IterLimit : SolveStatus::NumericalFailure;
    res.message = e.what();
  }
  return res;
}

}  // namespace mcopt
