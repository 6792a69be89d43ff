#pragma once

#include <vector>

#include "mcopt/coupling.hpp"
#include "mcopt/model.hpp"

namespace mcopt {

/// Pair of x- and y-shaped vectors: gradients, right-hand sides, directions.
struct XY {
  Vec x;
  Vec y;
};

/// v0 - <c,x> + <b,y>.
double target_slack(const Problem& p, const Iterate& u, const ControlVars& w);

/// Throws OutsideDomain naming the failed condition.
void require_ftilde_domain(const Problem& p, const Iterate& u, const ControlVars& w);
bool in_ftilde_domain(const Problem& p, const Iterate& u, const ControlVars& w);

CouplingPoint block_point(const Problem& p, const Iterate& u, const ControlVars& w, int i);

/// sum_i Phi_i(x_i, s_i, v_i) - ln(v0 - <c,x> + <b,y>), with s = c - A^T y.
double ftilde_value(const Problem& p, const Iterate& u, const ControlVars& w);
XY ftilde_grad(const Problem& p, const Iterate& u, const ControlVars& w);
/// Hessian in (x, y) applied to d, assembled from per-block coupling Hessians.
XY ftilde_hess_apply(const Problem& p, const Iterate& u, const ControlVars& w, const XY& d);

/// Derivative of grad_(x,y) F~ along the control direction dw.
XY predictor_rhs(const Problem& p, const Iterate& u, const ControlVars& w, const ControlVars& dw);

/// Right-hand side kept apart from its (c, -b) / D^2 component, D = v0 - <c,x> + <b,y>:
/// full = base + (c, -b) * shift / D^2. Near convergence D is tiny and the
/// assembled form loses all precision.
struct SplitRhs {
  XY base;
  double shift = 0.0;
};

SplitRhs ftilde_grad_split(const Problem& p, const Iterate& u, const ControlVars& w);
SplitRhs predictor_rhs_split(const Problem& p, const Iterate& u, const ControlVars& w,
                             const ControlVars& dw);
XY assemble(const Problem& p, const Iterate& u, const ControlVars& w, const SplitRhs& r);

struct Direction {
  Vec dx;
  Vec dy;
  Vec dlam;
};

/// Cached factorizations for the Newton systems at one (u, w).
///
/// The rank-one term of -ln D is carried by an extra unknown
/// rho = (<c,dx> - <b,dy>) / D^2, and x is eliminated in the coupled
/// coordinates xbar = x + v^2 grad F*(s). What remains is a bordered
/// (2m+1) system whose diagonal blocks are sums of positive semidefinite terms.
class KktWorkspace {
 public:
  KktWorkspace(const Problem& p, const Iterate& u, const ControlVars& w);

  Vec hxx_apply(const Vec& g) const;
  Vec hxx_inv_apply(const Vec& g) const;

  /// Solves H d + rhs + (A^T dlam, 0) = 0, A dx = 0, with one refinement step.
  Direction solve_direction(const XY& rhs) const;
  Direction solve_direction(const SplitRhs& rhs) const;

  /// A H_xx^{-1} A^T.
  const Mat& schur_a() const { return m_; }
  /// Schur complement of the system onto dy.
  const Mat& reduced() const { return r_; }
  bool regularized() const { return regularized_; }
  double slack() const { return d_; }

 private:
  struct Aug {
    Direction d;
    double rho = 0.0;
  };
  Vec base_inv_apply(const Vec& g) const;
  Vec vh_apply(const Vec& g) const;
  Aug solve_once(const Vec& rx, const Vec& ry, const Vec& rc, double rr) const;

  const Problem* p_;
  double d_ = 0.0;
  std::vector<ConePoint> xbar_;
  std::vector<ConePoint> s_;
  std::vector<double> v2_;
  std::vector<CouplingPoint> pts_;
  Vec binv_c_;   // G^{-1} c
  double sm_denom_ = 0.0;  // D^2 + c^T G^{-1} c
  Vec y_;
  Vec sflat_;
  Vec binv_s_;   // G^{-1} s
  double delta_ = 0.0;  // D^2 + s^T G^{-1} s
  Mat ginv_at_;  // G^{-1} A^T
  Mat vh_at_;    // v^2 hess F*(s) A^T
  Mat q_;        // [A v^2 H* A^T, A v^2 H* s - b]
  linalg::ScaledCholesky lt_;  // of [[A G^{-1} A^T, e], [e^T, delta]], e = A G^{-1} s
  Mat m_;
  Mat r_;
  linalg::ScaledCholesky lr_;
  bool regularized_ = false;
};

/// Residual of the full system, relative to max(1, |rhs|, |H d|).
double kkt_residual(const Problem& p, const Iterate& u, const ControlVars& w, const XY& rhs,
                    const Direction& d);

/// Brute-force solve of the assembled KKT matrix in a symmetric basis.
Direction dense_kkt_solve(const Problem& p, const Iterate& u, const ControlVars& w, const XY& rhs);
Direction dense_kkt_solve(const Problem& p, const Iterate& u, const ControlVars& w, const SplitRhs& rhs);

}  // namespace mcopt
