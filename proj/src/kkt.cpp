#include "mcopt/kkt.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mcopt/error.hpp"

namespace mcopt {

namespace {

double inf_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

double target_slack(const Problem& p, const Iterate& u, const ControlVars& w) {
  return w.v0 - p.c().dot(u.x) + p.b().dot(u.y);
}

CouplingPoint block_point(const Problem& p, const Iterate& u, const ControlVars& w, int i) {
  return {p.block(u.x, i), p.block(u.s, i), w.v(i)};
}

bool in_ftilde_domain(const Problem& p, const Iterate& u, const ControlVars& w) {
  if (w.v.size() != p.n_blocks()) return false;
  for (int i = 0; i < p.n_blocks(); ++i) {
    if (!domain_check(p.cone(i), block_point(p, u, w, i))) return false;
  }
  return target_slack(p, u, w) > 0.0;
}

void require_ftilde_domain(const Problem& p, const Iterate& u, const ControlVars& w) {
  if (w.v.size() != p.n_blocks()) throw Error(ErrorCode::DimensionMismatch, "v length differs from block count");
  for (int i = 0; i < p.n_blocks(); ++i) {
    const ConeSpec& k = p.cone(i);
    if (!membership_interior(k, p.block(u.x, i))) {
      throw Error(ErrorCode::OutsideDomain, "x block " + std::to_string(i) + " not interior");
    }
    if (!membership_interior(k, p.block(u.s, i))) {
      throw Error(ErrorCode::OutsideDomain, "s block " + std::to_string(i) + " not interior");
    }
    if (!domain_check(k, block_point(p, u, w, i))) {
      throw Error(ErrorCode::OutsideDomain, "coupling block " + std::to_string(i) + " outside C(K)");
    }
  }
  if (!(target_slack(p, u, w) > 0.0)) {
    throw Error(ErrorCode::OutsideDomain, "v0 <= <c,x> - <b,y>");
  }
}

double ftilde_value(const Problem& p, const Iterate& u, const ControlVars& w) {
  require_ftilde_domain(p, u, w);
  double f = 0.0;
  for (int i = 0; i < p.n_blocks(); ++i) f += phi_value(p.cone(i), block_point(p, u, w, i));
  return f - std::log(target_slack(p, u, w));
}

SplitRhs ftilde_grad_split(const Problem& p, const Iterate& u, const ControlVars& w) {
  require_ftilde_domain(p, u, w);
  Vec gx(p.total_dim()), gs(p.total_dim());
  for (int i = 0; i < p.n_blocks(); ++i) {
    const CouplingGrad g = phi_grad(p.cone(i), block_point(p, u, w, i));
    p.block_ref(gx, i) = g.gx;
    p.block_ref(gs, i) = g.gs;
  }
  return {{gx, -(p.A() * gs)}, target_slack(p, u, w)};
}

XY assemble(const Problem& p, const Iterate& u, const ControlVars& w, const SplitRhs& r) {
  const double d = target_slack(p, u, w);
  const double k = r.shift / (d * d);
  return {r.base.x + k * p.c(), r.base.y - k * p.b()};
}

XY ftilde_grad(const Problem& p, const Iterate& u, const ControlVars& w) {
  return assemble(p, u, w, ftilde_grad_split(p, u, w));
}

XY ftilde_hess_apply(const Problem& p, const Iterate& u, const ControlVars& w, const XY& dir) {
  require_ftilde_domain(p, u, w);
  const double d = target_slack(p, u, w);
  const Vec hs = -(p.A().transpose() * dir.y);
  Vec tx(p.total_dim()), ts(p.total_dim());
  for (int i = 0; i < p.n_blocks(); ++i) {
    const CouplingGrad h{p.block(dir.x, i), p.block(hs, i), 0.0};
    const CouplingGrad t = phi_hess_apply(p.cone(i), block_point(p, u, w, i), h);
    p.block_ref(tx, i) = t.gx;
    p.block_ref(ts, i) = t.gs;
  }
  const double dd = (p.c().dot(dir.x) - p.b().dot(dir.y)) / (d * d);
  return {tx + dd * p.c(), -(p.A() * ts) - dd * p.b()};
}

SplitRhs predictor_rhs_split(const Problem& p, const Iterate& u, const ControlVars& w,
                             const ControlVars& dw) {
  require_ftilde_domain(p, u, w);
  if (dw.v.size() != p.n_blocks()) throw Error(ErrorCode::DimensionMismatch, "dv length differs from block count");
  Vec tx(p.total_dim()), ts(p.total_dim());
  for (int i = 0; i < p.n_blocks(); ++i) {
    const ConeSpec& k = p.cone(i);
    const CouplingGrad h{Vec::Zero(k.dim()), Vec::Zero(k.dim()), dw.v(i)};
    const CouplingGrad t = phi_hess_apply(k, block_point(p, u, w, i), h);
    p.block_ref(tx, i) = t.gx;
    p.block_ref(ts, i) = t.gs;
  }
  return {{tx, -(p.A() * ts)}, -dw.v0};
}

XY predictor_rhs(const Problem& p, const Iterate& u, const ControlVars& w, const ControlVars& dw) {
  return assemble(p, u, w, predictor_rhs_split(p, u, w, dw));
}

KktWorkspace::KktWorkspace(const Problem& p, const Iterate& u, const ControlVars& w) : p_(&p) {
  require_ftilde_domain(p, u, w);
  d_ = target_slack(p, u, w);
  const int m = p.m();
  const int nb = p.n_blocks();
  const int n = p.total_dim();
  const Mat& A = p.A();

  xbar_.resize(nb);
  s_.resize(nb);
  v2_.resize(nb);
  pts_.resize(nb);
  for (int i = 0; i < nb; ++i) {
    pts_[i] = block_point(p, u, w, i);
    xbar_[i] = coupled_x(p.cone(i), pts_[i]);
    s_[i] = pts_[i].s;
    v2_[i] = pts_[i].v * pts_[i].v;
  }

  binv_c_ = base_inv_apply(p.c());
  sm_denom_ = d_ * d_ + p.c().dot(binv_c_);
  // With dlam' = dlam + y rho the border uses s = c - A^T y in place of c;
  // c is nearly in the row space of A at the optimum, s is not.
  y_ = u.y;
  sflat_ = p.dual_slack(u.y);
  binv_s_ = base_inv_apply(sflat_);
  delta_ = d_ * d_ + sflat_.dot(binv_s_);

  // S = hess F*(s) + v^2 D3F*(s)[., grad F(xbar)] per block.
  ginv_at_.resize(n, m);
  vh_at_.resize(n, m);
  Mat s_at(n, m);
  for (int r = 0; r < m; ++r) {
    const Vec a = A.row(r).transpose();
    ginv_at_.col(r) = base_inv_apply(a);
    vh_at_.col(r) = vh_apply(a);
  }
  for (int i = 0; i < nb; ++i) {
    const ConeSpec& k = p.cone(i);
    const ConePoint gbar = barrier_grad(k, xbar_[i], Side::Primal);
    for (int r = 0; r < m; ++r) {
      const ConePoint a = A.row(r).segment(p.offset(i), k.dim()).transpose();
      s_at.col(r).segment(p.offset(i), k.dim()) =
          hess_apply(k, s_[i], Side::Dual, a) + v2_[i] * d3_form(k, s_[i], Side::Dual, a, gbar);
    }
  }
  auto sym = [](const Mat& x) { return Mat(0.5 * (x + x.transpose())); };
  const Mat k1 = sym(A * ginv_at_);
  const Mat k2 = sym(A * vh_at_);
  const Mat k3 = sym(A * s_at);
  const Vec e = A * binv_s_;
  const Vec f = A * vh_apply(sflat_) - p.b();

  Mat t(m + 1, m + 1);
  t.topLeftCorner(m, m) = k1;
  t.topRightCorner(m, 1) = e;
  t.bottomLeftCorner(1, m) = e.transpose();
  t(m, m) = delta_;
  auto lt = linalg::scaled_cholesky(linalg::SymMat(t));
  if (!lt) throw Error(ErrorCode::RankDeficientA, "A H^{-1} A^T is not positive definite");
  lt_ = *lt;
  const Vec ec = A * binv_c_;
  m_ = sym(k1 - ec * ec.transpose() / sm_denom_);

  q_.resize(m, m + 1);
  q_.leftCols(m) = k2;
  q_.col(m) = f;
  r_ = sym(k3 + q_ * lt_.solve(Mat(q_.transpose())));
  auto lr = linalg::scaled_cholesky(linalg::SymMat(r_));
  if (!lr) {
    regularized_ = true;
    const double reg = 1e-12 * std::max(r_.trace(), 0.0) / m;
    r_.diagonal().array() += reg;
    lr = linalg::scaled_cholesky(linalg::SymMat(r_));
    if (!lr) throw Error(ErrorCode::SingularReduced, "reduced y matrix not positive definite");
  }
  lr_ = *lr;
}

Vec KktWorkspace::base_inv_apply(const Vec& g) const {
  const Problem& p = *p_;
  Vec r(g.size());
  for (int i = 0; i < p.n_blocks(); ++i) {
    p.block_ref(r, i) = hess_inv_apply(p.cone(i), xbar_[i], Side::Primal, p.block(g, i));
  }
  if (!r.allFinite()) throw Error(ErrorCode::SingularBlock, "non-finite block inverse");
  return r;
}

Vec KktWorkspace::vh_apply(const Vec& g) const {
  const Problem& p = *p_;
  Vec r(g.size());
  for (int i = 0; i < p.n_blocks(); ++i) {
    p.block_ref(r, i) = v2_[i] * hess_apply(p.cone(i), s_[i], Side::Dual, p.block(g, i));
  }
  return r;
}

Vec KktWorkspace::hxx_apply(const Vec& g) const {
  const Problem& p = *p_;
  Vec r(g.size());
  for (int i = 0; i < p.n_blocks(); ++i) {
    p.block_ref(r, i) = hess_apply(p.cone(i), xbar_[i], Side::Primal, p.block(g, i));
  }
  return r + p.c() * (p.c().dot(g) / (d_ * d_));
}

Vec KktWorkspace::hxx_inv_apply(const Vec& g) const {
  const Vec bg = base_inv_apply(g);
  return bg - binv_c_ * (p_->c().dot(bg) / sm_denom_);
}

// Unknowns (dx, dy, dlam, rho):
//   Phi_xx dx + Phi_xs ds + c rho + A^T dlam + rx = 0,   ds = -A^T dy
//   -A (Phi_sx dx + Phi_ss ds) - b rho + ry = 0
//   A dx + rc = 0
//   <c,dx> - <b,dy> - D^2 rho + rr = 0
KktWorkspace::Aug KktWorkspace::solve_once(const Vec& rx, const Vec& ry, const Vec& rc, double rr) const {
  const Problem& p = *p_;
  const Mat& A = p.A();
  const int m = p.m();
  const Vec grx = base_inv_apply(rx);
  const Vec r1 = -ry - A * vh_apply(rx);
  Vec r23(m + 1);
  r23.head(m) = rc - A * grx;
  r23(m) = rr - y_.dot(rc) - sflat_.dot(grx);

  Aug out;
  Direction& d = out.d;
  d.dy = lr_.solve(Vec(r1 - q_ * lt_.solve(r23)));
  const Vec z = lt_.solve(Vec(r23 + q_.transpose() * d.dy));
  out.rho = z(m);
  d.dx = -(grx + binv_s_ * out.rho + ginv_at_ * z.head(m)) + vh_at_ * d.dy;
  d.dlam = z.head(m) - y_ * out.rho;
  return out;
}

Direction KktWorkspace::solve_direction(const XY& rhs) const { return solve_direction(SplitRhs{rhs, 0.0}); }

Direction KktWorkspace::solve_direction(const SplitRhs& rhs) const {
  const Problem& p = *p_;
  if (rhs.base.x.size() != p.total_dim() || rhs.base.y.size() != p.m()) {
    throw Error(ErrorCode::DimensionMismatch, "KKT right-hand side shape");
  }
  const Vec zero_c = Vec::Zero(p.m());
  Aug a = solve_once(rhs.base.x, rhs.base.y, zero_c, rhs.shift);

  // iterative refinement on the augmented system while corrections shrink
  double last = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 4; ++it) {
    const Vec ds = -(p.A().transpose() * a.d.dy);
    Vec tx(p.total_dim()), ts(p.total_dim());
    for (int i = 0; i < p.n_blocks(); ++i) {
      const CouplingGrad h{p.block(a.d.dx, i), p.block(ds, i), 0.0};
      const CouplingGrad t = phi_hess_apply(p.cone(i), pts_[i], h);
      p.block_ref(tx, i) = t.gx;
      p.block_ref(ts, i) = t.gs;
    }
    const Vec e1 = tx + p.c() * a.rho + p.A().transpose() * a.d.dlam + rhs.base.x;
    const Vec e2 = -(p.A() * ts) - p.b() * a.rho + rhs.base.y;
    const Vec e3 = p.A() * a.d.dx;
    const double e4 = p.c().dot(a.d.dx) - p.b().dot(a.d.dy) - d_ * d_ * a.rho + rhs.shift;
    const Aug c = solve_once(e1, e2, e3, e4);
    const double size = c.d.dx.norm() + c.d.dy.norm();
    if (!(size < 0.5 * last)) break;
    last = size;
    a.d.dx += c.d.dx;
    a.d.dy += c.d.dy;
    a.d.dlam += c.d.dlam;
    a.rho += c.rho;
    if (size <= 1e-15 * (a.d.dx.norm() + a.d.dy.norm())) break;
  }
  return a.d;
}

double kkt_residual(const Problem& p, const Iterate& u, const ControlVars& w, const XY& rhs,
                    const Direction& d) {
  const XY hd = ftilde_hess_apply(p, u, w, {d.dx, d.dy});
  const Vec atl = p.A().transpose() * d.dlam;
  const Vec r1 = hd.x + rhs.x + atl;
  const Vec r2 = hd.y + rhs.y;
  const Vec r3 = p.A() * d.dx;
  const double scale = std::max({1.0, inf_norm(rhs.x), inf_norm(rhs.y), inf_norm(hd.x),
                                 inf_norm(hd.y), inf_norm(atl)});
  const double scale_c = std::max(1.0, p.A().cwiseAbs().maxCoeff() * inf_norm(d.dx));
  return std::max({inf_norm(r1) / scale, inf_norm(r2) / scale, inf_norm(r3) / scale_c});
}

Direction dense_kkt_solve(const Problem& p, const Iterate& u, const ControlVars& w, const XY& rhs) {
  return dense_kkt_solve(p, u, w, SplitRhs{rhs, 0.0});
}

// Assembled in a symmetric basis, with rho = (<c,dx> - <b,dy>) / D^2 as an
// extra unknown so the matrix carries no 1/D^2 entries.
Direction dense_kkt_solve(const Problem& p, const Iterate& u, const ControlVars& w, const SplitRhs& rhs) {
  require_ftilde_domain(p, u, w);
  const int nb = p.n_blocks();
  int ns = 0;
  for (const ConeSpec& k : p.cones()) ns += k.sym_dim();
  Mat basis = Mat::Zero(p.total_dim(), ns);
  for (int i = 0, col = 0; i < nb; ++i) {
    const ConeSpec& k = p.cone(i);
    basis.block(p.offset(i), col, k.dim(), k.sym_dim()) = sym_basis(k);
    col += k.sym_dim();
  }
  const int m = p.m();
  const int n = ns + 2 * m + 1;
  auto blk = [&](const Vec& dx, const Vec& dy) {
    const Vec hs = -(p.A().transpose() * dy);
    Vec tx(p.total_dim()), ts(p.total_dim());
    for (int i = 0; i < nb; ++i) {
      const CouplingGrad h{p.block(dx, i), p.block(hs, i), 0.0};
      const CouplingGrad t = phi_hess_apply(p.cone(i), block_point(p, u, w, i), h);
      p.block_ref(tx, i) = t.gx;
      p.block_ref(ts, i) = t.gs;
    }
    return XY{tx, -(p.A() * ts)};
  };
  Mat kkt = Mat::Zero(n, n);
  for (int j = 0; j < ns + m; ++j) {
    const XY col = j < ns ? blk(basis.col(j), Vec::Zero(m)) : blk(Vec::Zero(p.total_dim()), Vec::Unit(m, j - ns));
    kkt.block(0, j, ns, 1) = basis.transpose() * col.x;
    kkt.block(ns, j, m, 1) = col.y;
  }
  const Mat ab = p.A() * basis;
  const Vec cb = basis.transpose() * p.c();
  const double d = target_slack(p, u, w);
  kkt.block(0, ns + m, ns, m) = ab.transpose();
  kkt.block(ns + m, 0, m, ns) = ab;
  kkt.block(0, n - 1, ns, 1) = cb;
  kkt.block(ns, n - 1, m, 1) = -p.b();
  kkt.block(n - 1, 0, 1, ns) = cb.transpose();
  kkt.block(n - 1, ns, 1, m) = -p.b().transpose();
  kkt(n - 1, n - 1) = -d * d;

  Vec r(n);
  r << -(basis.transpose() * rhs.base.x), -rhs.base.y, Vec::Zero(m), -rhs.shift;
  // symmetric Ruiz equilibration; rows span many orders of magnitude near the optimum
  Vec scale = Vec::Ones(n);
  for (int it = 0; it < 20; ++it) {
    const Vec rn = kkt.cwiseAbs().rowwise().maxCoeff();
    const Vec f = rn.unaryExpr([](double t) { return t > 0.0 ? 1.0 / std::sqrt(t) : 1.0; });
    kkt = f.asDiagonal() * kkt * f.asDiagonal();
    scale = scale.cwiseProduct(f);
  }
  const Eigen::FullPivLU<Mat> lu(kkt);
  Vec sol = scale.cwiseProduct(lu.solve(Vec(scale.cwiseProduct(r))));
  for (int it = 0; it < 2; ++it) {
    const Vec res = r - scale.cwiseInverse().asDiagonal() * (kkt * scale.cwiseInverse().cwiseProduct(sol));
    sol += scale.cwiseProduct(lu.solve(Vec(scale.cwiseProduct(res))));
  }
  Direction out;
  out.dx = basis * sol.head(ns);
  out.dy = sol.segment(ns, m);
  out.dlam = sol.segment(ns + m, m);
  return out;
}

}  // namespace mcopt
