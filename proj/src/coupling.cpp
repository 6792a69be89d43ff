#include "mcopt/coupling.hpp"

#include <cmath>
#include <limits>

#include "mcopt/error.hpp"

namespace mcopt {

namespace {

void require_domain(const ConeSpec& c, const CouplingPoint& z) {
  if (!domain_check(c, z)) throw Error(ErrorCode::OutsideDomain, "coupling point outside C(K)");
}

double dot(const CouplingGrad& a, const CouplingGrad& b) {
  return a.gx.dot(b.gx) + a.gs.dot(b.gs) + a.gv * b.gv;
}

CouplingPoint shifted(const CouplingPoint& z, const CouplingGrad& h, double t) {
  return {z.x + t * h.gx, z.s + t * h.gs, z.v + t * h.gv};
}

}  // namespace

ConePoint coupled_x(const ConeSpec& c, const CouplingPoint& z) {
  return z.x + z.v * z.v * barrier_grad(c, z.s, Side::Dual);
}

ConePoint coupled_s(const ConeSpec& c, const CouplingPoint& z) {
  return z.s + z.v * z.v * barrier_grad(c, z.x, Side::Primal);
}

bool domain_check(const ConeSpec& c, const CouplingPoint& z, double margin) {
  if (z.x.size() != c.dim() || z.s.size() != c.dim() || !std::isfinite(z.v)) return false;
  if (!membership_interior(c, z.x, 0.0) || !membership_interior(c, z.s, 0.0)) return false;
  return membership_interior(c, coupled_x(c, z), margin);
}

double phi_value(const ConeSpec& c, const CouplingPoint& z, PhiRep rep) {
  require_domain(c, z);
  const double v2 = z.v * z.v;
  switch (rep) {
    case PhiRep::Primal:
      return barrier_eval(c, coupled_x(c, z), Side::Primal) + barrier_eval(c, z.s, Side::Dual);
    case PhiRep::Dual: {
      const ConePoint sz = coupled_s(c, z);
      if (!membership_interior(c, sz)) throw Error(ErrorCode::OutsideDomain, "s(z) not interior");
      return barrier_eval(c, sz, Side::Dual) + barrier_eval(c, z.x, Side::Primal);
    }
    case PhiRep::Fast: {
      switch (c.kind) {
        case ConeKind::NonNeg: {
          const double d = z.x(0) * z.s(0) - v2;
          if (!(d > 0.0)) throw Error(ErrorCode::OutsideDomain, "xs <= v^2");
          return -std::log(d) - 1.0;
        }
        case ConeKind::Lorentz: {
          const int n = c.param;
          const double wx = z.x(0) * z.x(0) - z.x.tail(n).squaredNorm();
          const double ws = z.s(0) * z.s(0) - z.s.tail(n).squaredNorm();
          const double d = wx * ws - 4.0 * v2 * z.x.dot(z.s) + 4.0 * v2 * v2;
          if (!(d > 0.0)) throw Error(ErrorCode::OutsideDomain, "Lorentz coupling determinant <= 0");
          return -std::log(d) - 2.0 + 2.0 * std::log(2.0);
        }
        case ConeKind::Psd: {
          const int p = c.param;
          Mat big(2 * p, 2 * p);
          big.topLeftCorner(p, p) = to_matrix(c, z.x);
          big.bottomRightCorner(p, p) = to_matrix(c, z.s);
          big.topRightCorner(p, p) = z.v * Mat::Identity(p, p);
          big.bottomLeftCorner(p, p) = z.v * Mat::Identity(p, p);
          auto l = linalg::cholesky(linalg::SymMat(big));
          if (!l) throw Error(ErrorCode::OutsideDomain, "Psd coupling block matrix not positive definite");
          return -2.0 * l->diagonal().array().log().sum() - p;
        }
      }
    }
  }
  return 0.0;
}

CouplingGrad phi_grad(const ConeSpec& c, const CouplingPoint& z) {
  require_domain(c, z);
  const double v2 = z.v * z.v;
  const ConePoint gstar = barrier_grad(c, z.s, Side::Dual);
  const ConePoint xbar = z.x + v2 * gstar;
  const ConePoint gbar = barrier_grad(c, xbar, Side::Primal);
  CouplingGrad g;
  g.gx = gbar;
  g.gs = v2 * hess_apply(c, z.s, Side::Dual, gbar) + gstar;
  g.gv = 2.0 * z.v * gbar.dot(gstar);
  return g;
}

CouplingGrad phi_hess_apply(const ConeSpec& c, const CouplingPoint& z, const CouplingGrad& h) {
  require_domain(c, z);
  const double v = z.v, v2 = v * v;
  const ConePoint gstar = barrier_grad(c, z.s, Side::Dual);
  const ConePoint xbar = z.x + v2 * gstar;
  const ConePoint gbar = barrier_grad(c, xbar, Side::Primal);
  const ConePoint hstar_hs = hess_apply(c, z.s, Side::Dual, h.gs);

  const ConePoint dxbar = h.gx + (2.0 * v * h.gv) * gstar + v2 * hstar_hs;
  const ConePoint t = hess_apply(c, xbar, Side::Primal, dxbar);

  CouplingGrad r;
  r.gx = t;
  r.gs = (2.0 * v * h.gv) * hess_apply(c, z.s, Side::Dual, gbar) +
         v2 * d3_form(c, z.s, Side::Dual, h.gs, gbar) + v2 * hess_apply(c, z.s, Side::Dual, t) +
         hstar_hs;
  r.gv = 2.0 * h.gv * gbar.dot(gstar) + 2.0 * v * t.dot(gstar) + 2.0 * v * gbar.dot(hstar_hs);
  return r;
}

void phi_dense(const ConeSpec& c, const CouplingPoint& z, Mat& hess, Vec& grad) {
  const Mat b = sym_basis(c);
  const int d = c.dim(), k = c.sym_dim();
  Mat basis = Mat::Zero(2 * d + 1, 2 * k + 1);
  basis.block(0, 0, d, k) = b;
  basis.block(d, k, d, k) = b;
  basis(2 * d, 2 * k) = 1.0;

  Mat hcols(2 * d + 1, 2 * k + 1);
  for (int j = 0; j < 2 * k + 1; ++j) {
    hcols.col(j) = flatten(phi_hess_apply(c, z, unflatten_grad(c, basis.col(j))));
  }
  hess = basis.transpose() * hcols;
  hess = 0.5 * (hess + hess.transpose()).eval();
  grad = basis.transpose() * flatten(phi_grad(c, z));
}

double phi_newton_decrement_sq(const ConeSpec& c, const CouplingPoint& z) {
  Mat h;
  Vec g;
  phi_dense(c, z, h, g);
  return g.dot(linalg::solve_spd(linalg::SymMat(h), g));
}

double sc_ratio_probe(const ConeSpec& c, const CouplingPoint& z, const CouplingGrad& h) {
  require_domain(c, z);
  auto quad = [&](double t) {
    const CouplingPoint zt = shifted(z, h, t);
    return dot(h, phi_hess_apply(c, zt, h));
  };
  const double d2 = quad(0.0);
  const double hn = flatten(h).cwiseAbs().maxCoeff();
  if (!(d2 > 0.0) || !(hn > 0.0)) throw Error(ErrorCode::DegenerateDirection, "D^2 Phi[h]^2 is not positive");

  const double scale = 1.0 + flatten(z).cwiseAbs().maxCoeff();
  double t = std::pow(std::numeric_limits<double>::epsilon(), 0.25) * scale / hn;
  for (int k = 0; k < 60 && !(domain_check(c, shifted(z, h, 2 * t)) &&
                              domain_check(c, shifted(z, h, -2 * t)));
       ++k) {
    t *= 0.5;
  }
  const double d3 = (8.0 * (quad(t) - quad(-t)) - (quad(2 * t) - quad(-2 * t))) / (12.0 * t);
  return d3 / (2.0 * std::pow(d2, 1.5));
}

Vec flatten(const CouplingPoint& z) {
  Vec f(z.x.size() + z.s.size() + 1);
  f << z.x, z.s, z.v;
  return f;
}

Vec flatten(const CouplingGrad& g) {
  Vec f(g.gx.size() + g.gs.size() + 1);
  f << g.gx, g.gs, g.gv;
  return f;
}

CouplingPoint unflatten_point(const ConeSpec& c, const Vec& f) {
  const int d = c.dim();
  if (f.size() != 2 * d + 1) throw Error(ErrorCode::ShapeMismatch, "coupling flat vector length");
  return {f.head(d), f.segment(d, d), f(2 * d)};
}

CouplingGrad unflatten_grad(const ConeSpec& c, const Vec& f) {
  const int d = c.dim();
  if (f.size() != 2 * d + 1) throw Error(ErrorCode::ShapeMismatch, "coupling flat vector length");
  return {f.head(d), f.segment(d, d), f(2 * d)};
}

}  // namespace mcopt
