#pragma once

#include <random>

#include "mcopt/linalg.hpp"

namespace mcopt {

enum class ConeKind { NonNeg, Lorentz, Psd };
enum class Side { Primal, Dual };

/// One cone block. `param` is the spatial dimension n for Lorentz, the
/// matrix order p for Psd, and 1 for NonNeg.
struct ConeSpec {
  ConeKind kind = ConeKind::NonNeg;
  int param = 1;

  static ConeSpec nonneg() { return {ConeKind::NonNeg, 1}; }
  static ConeSpec lorentz(int n);
  static ConeSpec psd(int p);

  /// Length of the flat storage: 1, n+1, or p*p (full row-major matrix).
  int dim() const;
  /// Dimension of the underlying real space: 1, n+1, or p(p+1)/2.
  int sym_dim() const;
  double nu() const;

  bool operator==(const ConeSpec& o) const { return kind == o.kind && param == o.param; }
};

const char* kind_name(ConeKind k);

/// Points of a cone block are flat vectors of length dim(). For Psd the
/// matrix is stored row-major and the inner product is the flat dot
/// product, which equals trace(S X).
using ConePoint = Vec;

Mat to_matrix(const ConeSpec& c, const ConePoint& x);
ConePoint from_matrix(const Mat& m);

/// The distinguished point: 1, (1,0,...,0) or I.
ConePoint identity_point(const ConeSpec& c);

/// Columns span the symmetric subspace of the flat storage.
Mat sym_basis(const ConeSpec& c);

bool membership_interior(const ConeSpec& c, const ConePoint& x, double margin = 0.0);

/// Signed distance-like slack: x for NonNeg, x0 - |x1| for Lorentz,
/// lambda_min for Psd. Nonnegative iff x is in the closed cone.
double boundary_slack(const ConeSpec& c, const ConePoint& x);

double barrier_eval(const ConeSpec& c, const ConePoint& x, Side side);
ConePoint barrier_grad(const ConeSpec& c, const ConePoint& x, Side side);
ConePoint hess_apply(const ConeSpec& c, const ConePoint& x, Side side, const ConePoint& h);
ConePoint hess_inv_apply(const ConeSpec& c, const ConePoint& x, Side side, const ConePoint& g);
/// D^3 F(x)[h1, h2] as an element of the dual space.
ConePoint d3_form(const ConeSpec& c, const ConePoint& x, Side side, const ConePoint& h1,
                  const ConePoint& h2);
/// D^4 F(x)[h][q, q] as an element of the dual space.
ConePoint d4_form(const ConeSpec& c, const ConePoint& x, Side side, const ConePoint& h,
                  const ConePoint& q);

/// Dense Hessian in flat coordinates.
Mat hess_matrix(const ConeSpec& c, const ConePoint& x, Side side);

/// sup { t >= 0 : x + t d interior }, +inf when the ray never leaves.
double max_step(const ConeSpec& c, const ConePoint& x, const ConePoint& d);

/// w with s = hess(w) x. Throws ScalingResidualTooLarge if the check fails.
ConePoint scaling_point(const ConeSpec& c, const ConePoint& x, const ConePoint& s);

struct LorentzScalingDetail {
  double alpha = 0, beta = 0, tau = 0, delta = 0, f_alpha = 0;
  ConePoint w_unscaled;
};
LorentzScalingDetail lorentz_scaling_detail(const ConeSpec& c, const ConePoint& x,
                                            const ConePoint& s);

double zeta(const ConeSpec& c, const ConePoint& x, const ConePoint& s, double tau);
double zeta_prime(const ConeSpec& c, const ConePoint& x, const ConePoint& s, double tau);
/// Largest tau such that s + tau grad F(x) stays interior.
double zeta_tau_max(const ConeSpec& c, const ConePoint& x, const ConePoint& s);
double zeta_solve(const ConeSpec& c, const ConePoint& x, const ConePoint& s, double target);

/// Interior sample: NonNeg U(0.5,2); Lorentz x0 = |x1| + U(0.5,2) with
/// Gaussian x1; Psd Q^T D Q with D ~ U(0.5,2).
ConePoint sample_interior(const ConeSpec& c, std::mt19937_64& rng);
/// Gaussian direction, symmetrized for Psd.
ConePoint sample_direction(const ConeSpec& c, std::mt19937_64& rng);

}  // namespace mcopt
