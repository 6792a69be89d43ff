#include "mcopt/init.hpp"

#include <algorithm>
#include <cmath>

#include "mcopt/error.hpp"
#include "mcopt/solver.hpp"

namespace mcopt {

namespace {

double block_gap(const Problem& p, const Iterate& u, int i) { return p.block(u.s, i).dot(p.block(u.x, i)); }

double gamma0_max(const Problem& p, const Iterate& u) {
  double hi = 0.0;
  for (int i = 0; i < p.n_blocks(); ++i) hi = std::max(hi, p.cone(i).nu() / block_gap(p, u, i));
  return hi;
}

}  // namespace

std::pair<double, double> gamma_bracket(const Problem& p, const Iterate& u) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (int i = 0; i < p.n_blocks(); ++i) {
    const double sx = block_gap(p, u, i);
    if (!(sx > 0.0)) throw Error(ErrorCode::OutsideDomain, "block with <s_i, x_i> <= 0");
    const double g0 = p.cone(i).nu() / sx;
    lo = std::min(lo, g0);
    hi = std::max(hi, g0);
  }
  lo = std::min(lo, p.nu() / duality_gap(p, u));
  return {lo, hi};
}

double vbar_block(const Problem& p, const Iterate& u, int i, double gamma) {
  const ConeSpec& k = p.cone(i);
  const Vec x = p.block(u.x, i), s = p.block(u.s, i);
  const double target = gamma * k.nu();
  if (target <= zeta(k, x, s, 0.0)) return 0.0;
  return zeta_solve(k, x, s, target);
}

double g_prime(const Problem& p, const Iterate& u, double gamma) {
  if (!(gamma > 0.0)) throw Error(ErrorCode::OutsideDomain, "gamma must be positive");
  double g = 0.0;
  for (int i = 0; i < p.n_blocks(); ++i) {
    const double nu = p.cone(i).nu();
    g += block_gap(p, u, i) - nu * vbar_block(p, u, i, gamma) - nu / gamma;
  }
  return g;
}

WStart choose_w_start_detail(const Problem& p, const Iterate& u, double tol) {
  auto [lo, hi] = gamma_bracket(p, u);
  double gamma;
  // g' vanishes at hi up to rounding on blocks with g_i' = 0 there
  const double gtol = tol * (1.0 + duality_gap(p, u));
  if (hi - lo <= 1e-14 * hi || g_prime(p, u, lo) >= 0.0) {
    gamma = hi - lo <= 1e-14 * hi ? hi : lo;
  } else {
    for (int k = 0; k < 5 && g_prime(p, u, hi) < -gtol; ++k) {
      lo = hi;
      hi *= 2.0;
    }
    while (hi - lo > tol * hi) {
      const double mid = 0.5 * (lo + hi);
      if (g_prime(p, u, mid) >= 0.0) hi = mid;
      else lo = mid;
    }
    gamma = hi;
  }

  WStart r;
  r.gamma = gamma;
  r.vbar.resize(p.n_blocks());
  r.w.v.resize(p.n_blocks());
  for (int i = 0; i < p.n_blocks(); ++i) {
    r.vbar(i) = vbar_block(p, u, i, gamma);
    r.w.v(i) = std::sqrt(r.vbar(i));
  }
  const double sx = duality_gap(p, u);
  r.w.v0 = sx + (sx - vnorm_sq(p, r.w.v)) / p.nu();
  return r;
}

ControlVars choose_w_start(const Problem& p, const Iterate& u, double tol) {
  return choose_w_start_detail(p, u, tol).w;
}

double mu_star_bound_check(const Problem& p, const Iterate& u, const ControlVars& w_s) {
  const double sx = duality_gap(p, u);
  const double bound = (3.0 * sx + gamma0_max(p, u) * sx * sx) / (1.0 + p.nu());
  return bound - mu_star(p, w_s);
}

}  // namespace mcopt
