#include "mcopt/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mcopt/error.hpp"
#include "mcopt/fdcheck.hpp"

namespace mcopt::verify {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double ninf(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

class Tracker {
 public:
  Tracker(std::string name, double tol) {
    r_.name = std::move(name);
    r_.tol = tol;
  }
  void add(double err) {
    ++r_.samples;
    if (std::isnan(err)) err = kInf;
    r_.worst = std::max(r_.worst, err);
  }
  CheckResult result() const { return r_; }

 private:
  CheckResult r_;
};

double uniform(std::mt19937_64& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

// Symmetrizes the Psd parts of a flat (x, s, v) vector.
Vec sym_flat(const ConeSpec& c, const Vec& f) {
  if (c.kind != ConeKind::Psd) return f;
  Vec r = f;
  const int d = c.dim();
  for (int part = 0; part < 2; ++part) {
    const Mat m = to_matrix(c, f.segment(part * d, d));
    r.segment(part * d, d) = from_matrix(0.5 * (m + m.transpose()));
  }
  return r;
}

ConePoint unit_direction(const ConeSpec& c, const ConePoint& x, std::mt19937_64& rng) {
  ConePoint h = sample_direction(c, rng);
  const double n = std::sqrt(h.dot(hess_apply(c, x, Side::Primal, h)));
  return h / n;
}

}  // namespace

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

double rel_err(const Vec& a, const Vec& b) {
  return (a - b).norm() / std::max({1.0, a.norm(), b.norm()});
}

std::vector<ConeSpec> family_members(const std::string& family) {
  if (family == "nonneg") return {ConeSpec::nonneg()};
  if (family == "lorentz") return {ConeSpec::lorentz(1), ConeSpec::lorentz(2), ConeSpec::lorentz(5)};
  if (family == "psd") return {ConeSpec::psd(1), ConeSpec::psd(2), ConeSpec::psd(3), ConeSpec::psd(5)};
  if (family == "all") {
    std::vector<ConeSpec> r;
    for (const char* f : {"nonneg", "lorentz", "psd"}) {
      auto m = family_members(f);
      r.insert(r.end(), m.begin(), m.end());
    }
    return r;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown cone family '" + family + "'");
}

std::string cone_label(const ConeSpec& c) {
  switch (c.kind) {
    case ConeKind::NonNeg: return "nonneg";
    case ConeKind::Lorentz: return "lorentz(" + std::to_string(c.param) + ")";
    case ConeKind::Psd: return "psd(" + std::to_string(c.param) + ")";
  }
  return "?";
}

ConePoint sample_scaled(const ConeSpec& c, std::mt19937_64& rng) {
  const double t = std::exp(uniform(rng, -1.0, 1.0));
  return t * sample_interior(c, rng);
}

CouplingPoint sample_coupling(const ConeSpec& c, std::mt19937_64& rng, bool scaled) {
  CouplingPoint z;
  z.x = scaled ? sample_scaled(c, rng) : sample_interior(c, rng);
  z.s = scaled ? sample_scaled(c, rng) : sample_interior(c, rng);
  const double tmax = max_step(c, z.x, barrier_grad(c, z.s, Side::Dual));
  const double frac = uniform(rng, 0.0, 0.8);
  z.v = std::sqrt(frac * tmax) * (uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0);
  return z;
}

CouplingGrad sample_coupling_direction(const ConeSpec& c, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  return {sample_direction(c, rng), sample_direction(c, rng), g(rng)};
}

std::vector<CheckResult> barrier_identities(const ConeSpec& c, int samples, std::mt19937_64& rng) {
  const std::string l = cone_label(c) + " ";
  const double nu = c.nu();
  Tracker hom(l + "log-homogeneity F(tx) = F(x) - nu ln t", 1e-10);
  Tracker gx(l + "<grad F(x), x> = -nu", 1e-10);
  Tracker hxx(l + "<hess F(x) x, x> = nu", 1e-10);
  Tracker dual_g(l + "grad F*(-grad F(x)) = -x", 1e-9);
  Tracker dual_v(l + "F*(-grad F(x)) = <grad F(x),x> - F(x)", 1e-9);
  Tracker fen(l + "two-sided Fenchel bound (violation)", 1e-10);
  Tracker fen_eq(l + "Fenchel equality on centered pairs", 1e-9);
  Tracker map(l + "grad F(x) = hess F(w) grad F*(s)", 1e-9);
  Tracker exch(l + "exchanging rule", 1e-9);
  Tracker expand(l + "expanding property -D3F(x)[u,u] in K*", 1e-10);
  Tracker inv(l + "hess_inv(hess(h)) = h", 1e-10);
  Tracker h3(l + "D3F(x)[x,h] = -2 hess F(x) h", 1e-9);
  Tracker h4(l + "D4F(x)[x][q,q] = -3 D3F(x)[q,q]", 1e-9);
  Tracker sc(l + "self-concordance |D3| <= 2 (D2)^1.5", 1e-10);
  Tracker zc(l + "zeta increasing and convex", 1e-9);

  for (int k = 0; k < samples; ++k) {
    const ConePoint x = sample_scaled(c, rng);
    const ConePoint s = sample_scaled(c, rng);
    const ConePoint u = sample_scaled(c, rng);
    const ConePoint h = sample_direction(c, rng);
    const ConePoint q = sample_direction(c, rng);

    for (double t : {0.5, 2.0}) {
      for (Side side : {Side::Primal, Side::Dual}) {
        hom.add(rel_err(barrier_eval(c, t * x, side), barrier_eval(c, x, side) - nu * std::log(t)));
      }
    }
    const ConePoint g = barrier_grad(c, x, Side::Primal);
    const ConePoint gs = barrier_grad(c, s, Side::Dual);
    gx.add(rel_err(g.dot(x), -nu));
    gx.add(rel_err(gs.dot(s), -nu));
    hxx.add(rel_err(hess_apply(c, x, Side::Primal, x).dot(x), nu));
    hxx.add(rel_err(hess_apply(c, s, Side::Dual, s).dot(s), nu));

    dual_g.add(rel_err(barrier_grad(c, -g, Side::Dual), -x));
    dual_v.add(rel_err(barrier_eval(c, -g, Side::Dual), g.dot(x) - barrier_eval(c, x, Side::Primal)));

    const double sx = s.dot(x);
    const double mid = barrier_eval(c, x, Side::Primal) + barrier_eval(c, s, Side::Dual) + nu;
    const double lo = nu * std::log(nu / sx);
    const double hi = nu * std::log(g.dot(gs) / nu);
    fen.add(std::max({0.0, lo - mid, mid - hi}) / std::max(1.0, std::abs(mid)));

    const double mu = std::exp(uniform(rng, -1.0, 1.0));
    const ConePoint sc_s = -mu * g;
    const double mid_c = barrier_eval(c, x, Side::Primal) + barrier_eval(c, sc_s, Side::Dual) + nu;
    const double lo_c = nu * std::log(nu / sc_s.dot(x));
    const double hi_c = nu * std::log(g.dot(barrier_grad(c, sc_s, Side::Dual)) / nu);
    fen_eq.add(std::max(rel_err(mid_c, lo_c), rel_err(mid_c, hi_c)));

    try {
      const ConePoint w = scaling_point(c, x, s);
      map.add(rel_err(g, hess_apply(c, w, Side::Primal, gs)));
    } catch (const Error&) {
      map.add(kInf);
    }

    const ConePoint gu = barrier_grad(c, u, Side::Primal);
    exch.add(rel_err(hess_apply(c, u, Side::Primal, x).dot(x), gu.dot(hess_inv_apply(c, x, Side::Primal, gu))));

    const ConePoint e = -d3_form(c, x, Side::Primal, u, u);
    expand.add(std::max(0.0, -boundary_slack(c, e)) / std::max(1.0, e.norm()));

    inv.add(rel_err(hess_inv_apply(c, x, Side::Primal, hess_apply(c, x, Side::Primal, h)), h));
    h3.add(rel_err(d3_form(c, x, Side::Primal, x, h), -2.0 * hess_apply(c, x, Side::Primal, h)));
    h4.add(rel_err(d4_form(c, x, Side::Primal, x, q), -3.0 * d3_form(c, x, Side::Primal, q, q)));

    const ConePoint hu = unit_direction(c, x, rng);
    const double d3 = hu.dot(d3_form(c, x, Side::Primal, hu, hu));
    const double d2 = hu.dot(hess_apply(c, x, Side::Primal, hu));
    sc.add(std::max(0.0, std::abs(d3) - 2.0 * std::pow(d2, 1.5)) / std::max(1.0, std::abs(d3)));

    const double tmax = zeta_tau_max(c, x, s);
    double prev_z = -kInf, prev_zp = -kInf;
    double zerr = 0.0;
    for (int j = 0; j < 8; ++j) {
      const double tau = tmax * j / 10.0;
      const double z = zeta(c, x, s, tau);
      const double zp = zeta_prime(c, x, s, tau);
      const double tol = 1e-12 * std::max(1.0, std::abs(zp));
      zerr = std::max({zerr, prev_z - z, prev_zp - zp - tol, -zp});
      prev_z = z;
      prev_zp = zp;
    }
    zc.add(std::max(0.0, zerr));
  }
  return {hom.result(), gx.result(), hxx.result(), dual_g.result(), dual_v.result(), fen.result(),
          fen_eq.result(), map.result(), exch.result(), expand.result(), inv.result(), h3.result(),
          h4.result(), sc.result(), zc.result()};
}

std::vector<CheckResult> scaling_residuals(const ConeSpec& c, int samples, std::mt19937_64& rng) {
  const std::string l = cone_label(c) + " ";
  Tracker gen(l + "scaling residual |s - hess F(w) x| / (1 + |s|)", 1e-9);
  Tracker near(l + "scaling residual on near-proportional pairs", 1e-9);
  auto residual = [&](const ConePoint& x, const ConePoint& s) {
    try {
      const ConePoint w = scaling_point(c, x, s);
      return (s - hess_apply(c, w, Side::Primal, x)).norm() / (1.0 + s.norm());
    } catch (const Error&) {
      return kInf;
    }
  };
  for (int k = 0; k < samples; ++k) {
    const ConePoint x = sample_scaled(c, rng);
    gen.add(residual(x, sample_scaled(c, rng)));

    // s close to a multiple of -grad F(x): Delta -> 0 for Lorentz.
    const ConePoint g = barrier_grad(c, x, Side::Primal);
    const double mu = std::exp(uniform(rng, -1.0, 1.0));
    const double eps = std::pow(10.0, -uniform(rng, 4.0, 12.0));
    ConePoint s = -mu * g;
    if (k % 5 != 0) s += eps * s.norm() * sample_direction(c, rng).normalized();
    if (!membership_interior(c, s)) s = -mu * g;
    const double cosang = s.dot(-g) / (s.norm() * g.norm());
    if (cosang < 1.0 - 1e-8) continue;
    near.add(residual(x, s));
  }
  return {gen.result(), near.result()};
}

std::vector<CheckResult> coupling_suite(const ConeSpec& c, int samples, std::mt19937_64& rng) {
  const std::string l = cone_label(c) + " ";
  const double nu = c.nu();
  Tracker rep(l + "Phi primal = dual representation", 1e-9);
  Tracker hom(l + "Phi 2nu-homogeneity", 1e-10);
  Tracker lam(l + "lambda_Phi^2 = 2 nu", 1e-8);
  Tracker cvx(l + "convex combination stays in C(K) (failures)", 0.0);
  Tracker fast(l + "fast path = generic composition", 1e-10);
  for (int k = 0; k < samples; ++k) {
    const CouplingPoint z = sample_coupling(c, rng);
    const double pv = phi_value(c, z, PhiRep::Primal);
    rep.add(rel_err(pv, phi_value(c, z, PhiRep::Dual)));
    const double t = std::exp(uniform(rng, -1.0, 1.0));
    const CouplingPoint tz{t * z.x, t * z.s, t * z.v};
    hom.add(rel_err(phi_value(c, tz), pv - 2.0 * nu * std::log(t)));
    lam.add(rel_err(phi_newton_decrement_sq(c, z), 2.0 * nu));

    const CouplingPoint z1 = sample_coupling(c, rng);
    const double a = uniform(rng, 0.0, 1.0);
    const CouplingPoint za{a * z1.x + (1 - a) * z.x, a * z1.s + (1 - a) * z.s, a * z1.v + (1 - a) * z.v};
    cvx.add(domain_check(c, za, 0.0) ? 0.0 : 1.0);

    if (c.kind != ConeKind::NonNeg) fast.add(rel_err(pv, phi_value(c, z, PhiRep::Fast)));
  }
  std::vector<CheckResult> r{rep.result(), hom.result(), lam.result(), cvx.result()};
  if (c.kind != ConeKind::NonNeg) r.push_back(fast.result());
  return r;
}

std::vector<CheckResult> self_concordance(const ConeSpec& c, int samples, std::mt19937_64& rng) {
  Tracker sc(cone_label(c) + " sc_ratio_probe excess over 1", 1e-4);
  for (int k = 0; k < samples; ++k) {
    const CouplingPoint z = sample_coupling(c, rng);
    const CouplingGrad h = sample_coupling_direction(c, rng);
    try {
      sc.add(std::max(0.0, std::abs(sc_ratio_probe(c, z, h)) - 1.0));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateDirection) sc.add(kInf);
    }
  }
  return {sc.result()};
}

std::vector<CheckResult> comp_assumption(const ConeSpec& c, int samples, std::mt19937_64& rng) {
  Tracker comp(cone_label(c) + " -3|h| D3[q,q] - D4[h][q,q] in K* (slack deficit)", 1e-9);
  const ConePoint xb = identity_point(c);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int k = 0; k < samples; ++k) {
    const ConePoint h = sample_direction(c, rng);
    const double a = g(rng), b = g(rng);
    const ConePoint q = a * xb + b * h;
    const double hn = std::sqrt(h.dot(hess_apply(c, xb, Side::Primal, h)));
    const ConePoint e = -3.0 * hn * d3_form(c, xb, Side::Primal, q, q) - d4_form(c, xb, Side::Primal, h, q);
    const double scale = std::max(1.0, e.norm());
    comp.add(std::max(0.0, -boundary_slack(c, e)) / scale);
  }
  return {comp.result()};
}

std::vector<CheckResult> coupling_derivatives(const ConeSpec& c, int samples, std::mt19937_64& rng) {
  const std::string l = cone_label(c) + " ";
  Tracker gt(l + "phi_grad vs finite differences", 1e-6);
  Tracker ht(l + "phi_hess_apply vs finite differences", 1e-5);
  Tracker st(l + "phi_hess_apply symmetry", 1e-9);
  Tracker pd(l + "phi_hess_apply positive semidefinite (deficit)", 1e-9);
  for (int k = 0; k < samples; ++k) {
    const CouplingPoint z = sample_coupling(c, rng, false);
    const Vec zf = flatten(z);
    const auto f = [&](const Vec& v) { return phi_value(c, unflatten_point(c, sym_flat(c, v))); };
    const Vec g = flatten(phi_grad(c, z));
    const Vec gfd = fd::fd_grad(f, zf);
    gt.add(ninf(g - gfd) / std::max(1.0, ninf(g)));

    const CouplingGrad h1 = sample_coupling_direction(c, rng);
    const CouplingGrad h2 = sample_coupling_direction(c, rng);
    const Vec hv = flatten(phi_hess_apply(c, z, h1));
    const auto grad_at = [&](const Vec& v) { return flatten(phi_grad(c, unflatten_point(c, v))); };
    const Vec hfd = fd::fd_jvp(grad_at, zf, flatten(h1));
    ht.add(ninf(hv - hfd) / std::max(1.0, ninf(hv)));

    const double a = hv.dot(flatten(h2));
    const double b = flatten(phi_hess_apply(c, z, h2)).dot(flatten(h1));
    st.add(rel_err(a, b));
    const double qf = hv.dot(flatten(h1));
    pd.add(std::max(0.0, -qf) / std::max(1.0, hv.norm() * flatten(h1).norm()));
  }
  return {gt.result(), ht.result(), st.result(), pd.result()};
}

std::vector<CheckResult> run_all(const ConeSpec& c, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<CheckResult> all;
  auto add = [&](std::vector<CheckResult> r) { all.insert(all.end(), r.begin(), r.end()); };
  add(barrier_identities(c, samples, rng));
  add(scaling_residuals(c, samples, rng));
  add(coupling_suite(c, samples, rng));
  add(self_concordance(c, std::max(1, samples / 2), rng));
  add(comp_assumption(c, std::max(1, samples / 2), rng));
  add(coupling_derivatives(c, std::max(1, samples / 5), rng));
  return all;
}

}  // namespace mcopt::verify
