#pragma once

// Test-only helpers: a dense Newton minimizer of F^(., w) over the feasible
// set and a sampler for control variables around a given iterate.

#include <cmath>
#include <random>

#include "mcopt/kkt.hpp"
#include "mcopt/solver.hpp"

namespace mcopt::testing {

inline Mat sym_basis_of(const Problem& p) {
  int ns = 0;
  for (const ConeSpec& k : p.cones()) ns += k.sym_dim();
  Mat b = Mat::Zero(p.total_dim(), ns);
  for (int i = 0, col = 0; i < p.n_blocks(); ++i) {
    b.block(p.offset(i), col, p.cone(i).dim(), p.cone(i).sym_dim()) = sym_basis(p.cone(i));
    col += p.cone(i).sym_dim();
  }
  return b;
}

struct MinResult {
  Iterate u;
  double value = 0.0;
  double decrement = 0.0;
  int steps = 0;
};

/// Damped Newton on F^(., w) in the coordinates x = x0 + B N xi, y free,
/// with N an orthonormal null-space basis of A B. Dense Hessian from columns.
inline MinResult minimize_ftilde(const Problem& p, const Iterate& u0, const ControlVars& w, int max_steps = 500) {
  const Mat b = sym_basis_of(p);
  const Eigen::JacobiSVD<Mat> svd(p.A() * b, Eigen::ComputeFullV);
  const Mat nb = b * svd.matrixV().rightCols(b.cols() - p.m());
  const int k = static_cast<int>(nb.cols()), m = p.m(), n = k + m;

  MinResult r{u0, ftilde_value(p, u0, w), 0.0, 0};
  for (; r.steps < max_steps; ++r.steps) {
    const XY g = ftilde_grad(p, r.u, w);
    Vec gz(n);
    gz << nb.transpose() * g.x, g.y;
    Mat h(n, n);
    for (int j = 0; j < n; ++j) {
      XY e{Vec::Zero(p.total_dim()), Vec::Zero(m)};
      if (j < k) e.x = nb.col(j);
      else e.y(j - k) = 1.0;
      const XY he = ftilde_hess_apply(p, r.u, w, e);
      h.block(0, j, k, 1) = nb.transpose() * he.x;
      h.block(k, j, m, 1) = he.y;
    }
    h = 0.5 * (h + h.transpose());
    const Vec dz = -h.ldlt().solve(gz);
    r.decrement = std::sqrt(std::max(0.0, -gz.dot(dz)));
    if (r.decrement < 1e-11) break;
    double a = r.decrement < 0.25 ? 1.0 : 1.0 / (1.0 + r.decrement);
    for (int it = 0; it < 60; ++it, a *= 0.5) {
      Iterate t{r.u.x + a * nb * dz.head(k), r.u.y + a * dz.tail(m), Vec()};
      refresh_slack(p, t);
      if (!in_ftilde_domain(p, t, w)) continue;
      const double v = ftilde_value(p, t, w);
      if (v <= r.value + 1e-15 * std::abs(r.value)) {
        r.u = t;
        r.value = v;
        break;
      }
    }
  }
  return r;
}

/// Control variables with u in dom F^(., w): each v_i^2 a random fraction of
/// its admissible range at (x_i, s_i), and v0 a random margin above both
/// <c,x> - <b,y> and |v|_nu^2.
inline ControlVars random_w(const Problem& p, const Iterate& u, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> frac(0.0, 0.8), margin(0.2, 3.0);
  ControlVars w{0.0, Vec::Zero(p.n_blocks())};
  for (int i = 0; i < p.n_blocks(); ++i) {
    const ConeSpec& c = p.cone(i);
    const ConePoint x = p.block(u.x, i), s = p.block(u.s, i);
    auto ok = [&](double t) { return domain_check(c, {x, s, std::sqrt(t)}); };
    double hi = 1.0;
    while (ok(hi)) hi *= 2.0;
    double lo = 0.0;
    for (int it = 0; it < 60; ++it) (ok(0.5 * (lo + hi)) ? lo : hi) = 0.5 * (lo + hi);
    w.v(i) = std::sqrt(frac(rng) * lo);
  }
  const double floor = std::max(objective_gap(p, u), vnorm_sq(p, w.v));
  w.v0 = floor + margin(rng) * (1.0 + std::abs(floor));
  return w;
}

// Instance with a prescribed strictly feasible (x, y, s): b = A x, c = s + A^T y.
inline std::pair<Problem, Iterate> with_point(const std::vector<ConeSpec>& cones, const Vec& x, const Vec& s, int m,
                                       std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat a(m, x.size());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) a(i, j) = g(rng);
  Vec y(m);
  for (int i = 0; i < m; ++i) y(i) = g(rng);
  Problem p(cones, a, Vec::Zero(m), Vec::Zero(x.size()));
  // the constructor symmetrizes Psd rows; rebuild b and c from the stored A
  Problem q(cones, p.A(), p.A() * x, s + p.A().transpose() * y);
  Iterate u{x, y, Vec()};
  refresh_slack(q, u);
  return {q, u};
}

// s_i = -mu_i grad F_i(x_i) with a different mu_i per block.
inline std::pair<Problem, Iterate> centered(std::uint64_t seed, const std::vector<ConeSpec>& cones, int m) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mu(0.2, 5.0);
  int n = 0;
  for (const ConeSpec& c : cones) n += c.dim();
  Vec x(n), s(n);
  for (std::size_t i = 0, off = 0; i < cones.size(); off += cones[i].dim(), ++i) {
    const ConePoint xi = sample_interior(cones[i], rng);
    x.segment(off, cones[i].dim()) = xi;
    s.segment(off, cones[i].dim()) = -mu(rng) * barrier_grad(cones[i], xi, Side::Primal);
  }
  return with_point(cones, x, s, m, rng);
}

inline double rel_own(const Vec& p, const Vec& q) {
  const double s = std::max(p.norm(), q.norm());
  return s > 0 ? (p - q).norm() / s : 0.0;
}

// Difference in the local norm |e|_H / |d|_H with H the F~ Hessian on (dx, dy),
// and dlam relative to its own size.
inline double local_diff(const Problem& p, const Iterate& u, const ControlVars& w, const Direction& a, const Direction& b) {
  const XY e{a.dx - b.dx, a.dy - b.dy};
  const XY he = ftilde_hess_apply(p, u, w, e);
  const XY hb = ftilde_hess_apply(p, u, w, {b.dx, b.dy});
  const double num = std::max(0.0, he.x.dot(e.x) + he.y.dot(e.y));
  const double den = hb.x.dot(b.dx) + hb.y.dot(b.dy);
  const double loc = den > 0 ? std::sqrt(num / den) : std::sqrt(num);
  return std::max(loc, rel_own(a.dlam, b.dlam));
}

}  // namespace mcopt::testing
