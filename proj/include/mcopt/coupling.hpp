#pragma once

#include "mcopt/cones.hpp"

namespace mcopt {

/// z = (x, s, v) for one cone block.
struct CouplingPoint {
  ConePoint x;
  ConePoint s;
  double v = 0.0;
};

/// Also used as a direction (hx, hs, hv).
struct CouplingGrad {
  ConePoint gx;
  ConePoint gs;
  double gv = 0.0;
};

enum class PhiRep { Primal, Dual, Fast };

/// x + v^2 grad F*(s).
ConePoint coupled_x(const ConeSpec& c, const CouplingPoint& z);
/// s + v^2 grad F(x).
ConePoint coupled_s(const ConeSpec& c, const CouplingPoint& z);

bool domain_check(const ConeSpec& c, const CouplingPoint& z, double margin = 0.0);

double phi_value(const ConeSpec& c, const CouplingPoint& z, PhiRep rep = PhiRep::Primal);
CouplingGrad phi_grad(const ConeSpec& c, const CouplingPoint& z);
CouplingGrad phi_hess_apply(const ConeSpec& c, const CouplingPoint& z, const CouplingGrad& h);

/// Dense Hessian restricted to the symmetric subspace, in the basis
/// blockdiag(sym_basis, sym_basis, 1). Also returns the gradient in that basis.
void phi_dense(const ConeSpec& c, const CouplingPoint& z, Mat& hess, Vec& grad);

/// <grad Phi, (hess Phi)^{-1} grad Phi>.
double phi_newton_decrement_sq(const ConeSpec& c, const CouplingPoint& z);

/// D^3 Phi[h]^3 / (2 (D^2 Phi[h]^2)^{3/2}), cubic term by finite differences
/// of the Hessian quadratic form.
double sc_ratio_probe(const ConeSpec& c, const CouplingPoint& z, const CouplingGrad& h);

/// Flat layout (x, s, v) for finite-difference oracles.
Vec flatten(const CouplingPoint& z);
Vec flatten(const CouplingGrad& g);
CouplingPoint unflatten_point(const ConeSpec& c, const Vec& f);
CouplingGrad unflatten_grad(const ConeSpec& c, const Vec& f);

}  // namespace mcopt
