#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mcopt/error.hpp"
#include "mcopt/fdcheck.hpp"
#include "mcopt/init.hpp"
#include "mcopt/kkt.hpp"
#include "mcopt/solver.hpp"
#include "support.hpp"

using namespace mcopt;

namespace {

struct Case {
  Problem p;
  Iterate u;
  ControlVars w;
};

std::vector<ConeSpec> mixed() {
  return {ConeSpec::nonneg(), ConeSpec::nonneg(), ConeSpec::nonneg(), ConeSpec::lorentz(2),
          ConeSpec::lorentz(3), ConeSpec::psd(2), ConeSpec::psd(3)};
}

Case start_case(std::uint64_t seed, int m, const std::vector<ConeSpec>& cones) {
  auto [p, u] = random_instance(seed, m, cones);
  ControlVars w = choose_w_start(p, u);
  return {p, u, w};
}

// A point further along the path, where the Hessian is no longer well scaled.
Case late_case(std::uint64_t seed, double eps) {
  Case c = start_case(seed, 6, mixed());
  SolverConfig cfg = SolverConfig::defaults();
  cfg.eps = eps;
  const SolveResult r = solve(c.p, c.u, c.w, cfg);
  REQUIRE(r.status == SolveStatus::Converged);
  return {c.p, r.u, r.w};
}

Mat basis_of(const Problem& p) {
  int ns = 0;
  for (const ConeSpec& k : p.cones()) ns += k.sym_dim();
  Mat b = Mat::Zero(p.total_dim(), ns);
  for (int i = 0, col = 0; i < p.n_blocks(); ++i) {
    b.block(p.offset(i), col, p.cone(i).dim(), p.cone(i).sym_dim()) = sym_basis(p.cone(i));
    col += p.cone(i).sym_dim();
  }
  return b;
}

struct Dense {
  Mat hxx, hxy, hyy;
};

Dense dense_hessian(const Case& c, const Mat& b) {
  const int m = c.p.m();
  Dense d;
  d.hxx.resize(b.cols(), b.cols());
  d.hxy.resize(b.cols(), m);
  d.hyy.resize(m, m);
  for (int j = 0; j < b.cols(); ++j) {
    d.hxx.col(j) = b.transpose() * ftilde_hess_apply(c.p, c.u, c.w, {b.col(j), Vec::Zero(m)}).x;
  }
  for (int j = 0; j < m; ++j) {
    const XY col = ftilde_hess_apply(c.p, c.u, c.w, {Vec::Zero(c.p.total_dim()), Vec::Unit(m, j)});
    d.hxy.col(j) = b.transpose() * col.x;
    d.hyy.col(j) = col.y;
  }
  return d;
}

double rel(const Vec& a, const Vec& b) { return (a - b).norm() / std::max(1.0, std::max(a.norm(), b.norm())); }

double rel(const Direction& a, const Direction& b) {
  return std::max({rel(a.dx, b.dx), rel(a.dy, b.dy), rel(a.dlam, b.dlam)});
}

}  // namespace

TEST_CASE("hxx_inv_apply inverts hxx_apply") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const Case c = start_case(seed, 4, mixed());
    const KktWorkspace ws(c.p, c.u, c.w);
    std::mt19937_64 rng(seed);
    Vec g(c.p.total_dim());
    for (int i = 0; i < c.p.n_blocks(); ++i) c.p.block_ref(g, i) = sample_direction(c.p.cone(i), rng);
    CHECK(rel(ws.hxx_apply(ws.hxx_inv_apply(g)), g) < 1e-9);
    CHECK(rel(ws.hxx_inv_apply(ws.hxx_apply(g)), g) < 1e-9);
  }
}

TEST_CASE("hxx_inv_apply on one NonNeg block") {
  const Problem p({ConeSpec::nonneg()}, Mat::Constant(1, 1, 2.0), Vec::Constant(1, 3.0), Vec::Constant(1, 1.0));
  Iterate u{Vec::Constant(1, 1.5), Vec::Constant(1, 0.25), Vec()};
  refresh_slack(p, u);
  ControlVars w{4.0, Vec::Constant(1, 0.3)};
  const KktWorkspace ws(p, u, w);
  const Vec g = Vec::Constant(1, 0.7);
  const Vec r = ws.hxx_inv_apply(g);
  CHECK(std::abs(ws.hxx_apply(r)(0) - g(0)) <= 1e-12);
  // closed form: xbar = x - v^2/s, H = 1/xbar^2 + c^2/D^2
  const double xbar = 1.5 - 0.09 / 0.5, d = 4.0 - 1.5 + 3 * 0.25;
  CHECK(r(0) == doctest::Approx(0.7 / (1 / (xbar * xbar) + 1 / (d * d))).epsilon(1e-13));

  // v = 0 and a huge v0 leave only the block inverse
  ControlVars far{1e12, Vec::Zero(1)};
  const KktWorkspace wf(p, u, far);
  CHECK(wf.hxx_inv_apply(g)(0) == doctest::Approx(0.7 * 1.5 * 1.5).epsilon(1e-12));
}

TEST_CASE("Psd block inverse uses X g X") {
  const ConeSpec c = ConeSpec::psd(2);
  std::mt19937_64 rng(5);
  const Vec x = sample_interior(c, rng);
  const Problem p({c}, sym_basis(c).transpose().topRows(1), Vec::Constant(1, x(0)), identity_point(c));
  Iterate u{x, Vec::Zero(1), Vec()};
  refresh_slack(p, u);
  ControlVars far{1e12, Vec::Zero(1)};
  const KktWorkspace ws(p, u, far);
  const Vec g = sample_direction(c, rng);
  const Mat xm = to_matrix(c, x);
  CHECK(rel(ws.hxx_inv_apply(g), from_matrix(xm * to_matrix(c, g) * xm)) < 1e-10);
}

TEST_CASE("one-dimensional reduced system") {
  // single NonNeg block, m = 1: A dx = 0 forces dx = 0, so R = d2 F~/dy2 = a^2 x^2/q^2 + b^2/D^2
  const double a = 2.0, b = 3.0, cc = 1.0, x = 1.5, y = 0.25, v = 0.3, v0 = 4.0;
  const Problem p({ConeSpec::nonneg()}, Mat::Constant(1, 1, a), Vec::Constant(1, b), Vec::Constant(1, cc));
  Iterate u{Vec::Constant(1, x), Vec::Constant(1, y), Vec()};
  refresh_slack(p, u);
  const ControlVars w{v0, Vec::Constant(1, v)};
  const KktWorkspace ws(p, u, w);
  const double s = cc - a * y, q = x * s - v * v, d = v0 - cc * x + b * y;
  CHECK(ws.reduced()(0, 0) == doctest::Approx(a * a * x * x / (q * q) + b * b / (d * d)).epsilon(1e-12));
  CHECK(ws.schur_a()(0, 0) == doctest::Approx(a * a / (s * s / (q * q) + cc * cc / (d * d))).epsilon(1e-12));

  const XY g = ftilde_grad(p, u, w);
  const Direction dir = ws.solve_direction(g);
  const Direction dd = dense_kkt_solve(p, u, w, g);
  CHECK(rel(dir, dd) < 1e-10);
  CHECK(std::abs(dir.dx(0)) < 1e-14);
  CHECK(dir.dy(0) == doctest::Approx(-g.y(0) / ws.reduced()(0, 0)).epsilon(1e-12));
}

TEST_CASE("cached matrices match dense assembly") {
  for (std::uint64_t seed : {4, 5}) {
    const Case c = start_case(seed, 5, mixed());
    const Mat b = basis_of(c.p);
    const Dense d = dense_hessian(c, b);
    const Mat ab = c.p.A() * b;
    const Mat hinv = d.hxx.inverse();
    const Mat m = ab * hinv * ab.transpose();
    const KktWorkspace ws(c.p, c.u, c.w);
    CHECK((ws.schur_a() - m).norm() <= 1e-9 * m.norm());
    CHECK((ws.schur_a() - ws.schur_a().transpose()).norm() <= 1e-12 * m.norm());

    const Mat proj = hinv - hinv * ab.transpose() * m.inverse() * ab * hinv;
    const Mat r = d.hyy - d.hxy.transpose() * proj * d.hxy;
    CHECK((ws.reduced() - r).norm() <= 1e-8 * r.norm());
    CHECK((ws.reduced() - ws.reduced().transpose()).norm() == 0.0);
    CHECK_FALSE(ws.regularized());

    // Schur complement of the Hessian is positive semidefinite
    const Mat schur = d.hyy - d.hxy.transpose() * hinv * d.hxy;
    CHECK(Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (schur + schur.transpose())).eigenvalues().minCoeff() >=
          -1e-10 * schur.norm());
  }
}

TEST_CASE("solve_direction") {
  const Case c0 = start_case(6, 5, mixed());
  const KktWorkspace ws0(c0.p, c0.u, c0.w);
  const Direction z = ws0.solve_direction(XY{Vec::Zero(c0.p.total_dim()), Vec::Zero(c0.p.m())});
  CHECK(z.dx.norm() == 0.0);
  CHECK(z.dy.norm() == 0.0);
  CHECK(z.dlam.norm() == 0.0);

  std::vector<Case> cases;
  for (std::uint64_t seed : {6, 7, 8}) cases.push_back(start_case(seed, 5, mixed()));
  cases.push_back(late_case(9, 1e-3));
  cases.push_back(late_case(10, 1e-5));
  for (const Case& c : cases) {
    const KktWorkspace ws(c.p, c.u, c.w);
    const XY g = ftilde_grad(c.p, c.u, c.w);
    const Direction d = ws.solve_direction(ftilde_grad_split(c.p, c.u, c.w));
    CHECK(kkt_residual(c.p, c.u, c.w, g, d) <= 1e-8);
    CHECK((c.p.A() * d.dx).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, d.dx.norm()));
    const Direction dn = dense_kkt_solve(c.p, c.u, c.w, ftilde_grad_split(c.p, c.u, c.w));
    CHECK(testing::local_diff(c.p, c.u, c.w, d, dn) <= 1e-8);
    // near the optimum dy is only determined to about cond * residual
    CHECK(testing::rel_own(d.dy, dn.dy) <= 1e-6);

    const ControlVars dw{-c.w.v0, -c.w.v};
    const SplitRhs pr = predictor_rhs_split(c.p, c.u, c.w, dw);
    const Direction dp = ws.solve_direction(pr);
    CHECK(kkt_residual(c.p, c.u, c.w, assemble(c.p, c.u, c.w, pr), dp) <= 1e-8);
    CHECK(testing::local_diff(c.p, c.u, c.w, dp, dense_kkt_solve(c.p, c.u, c.w, pr)) <= 1e-8);
  }
}

TEST_CASE("split right-hand sides assemble to the plain ones") {
  const Case c = start_case(11, 4, mixed());
  const XY g = ftilde_grad(c.p, c.u, c.w);
  const XY g2 = assemble(c.p, c.u, c.w, ftilde_grad_split(c.p, c.u, c.w));
  CHECK(rel(g.x, g2.x) == 0.0);
  const KktWorkspace ws(c.p, c.u, c.w);
  CHECK(rel(ws.solve_direction(g), ws.solve_direction(ftilde_grad_split(c.p, c.u, c.w))) < 1e-10);
}

TEST_CASE("gradient and Hessian of F~ against finite differences") {
  const Case c = start_case(12, 4, mixed());
  const int n = c.p.total_dim(), m = c.p.m();
  auto pack = [&](const Vec& z) {
    Iterate u{z.head(n), z.tail(m), Vec()};
    refresh_slack(c.p, u);
    return u;
  };
  Vec z0(n + m);
  z0 << c.u.x, c.u.y;
  std::mt19937_64 rng(12);
  Vec d(n + m);
  for (int i = 0; i < c.p.n_blocks(); ++i) d.segment(c.p.offset(i), c.p.cone(i).dim()) = sample_direction(c.p.cone(i), rng);
  d.tail(m) = Vec::LinSpaced(m, -0.5, 0.5);
  d *= 0.2;

  const XY g = ftilde_grad(c.p, c.u, c.w);
  const double fd1 = fd::fd_dirk([&](const Vec& z) { return ftilde_value(c.p, pack(z), c.w); }, z0, d, 1);
  CHECK(std::abs(fd1 - (g.x.dot(d.head(n)) + g.y.dot(d.tail(m)))) < 1e-6);

  auto grad = [&](const Vec& z) {
    const XY gz = ftilde_grad(c.p, pack(z), c.w);
    Vec r(n + m);
    r << gz.x, gz.y;
    return r;
  };
  const Vec jv = fd::fd_jvp(grad, z0, d);
  const XY hd = ftilde_hess_apply(c.p, c.u, c.w, {d.head(n), d.tail(m)});
  Vec h(n + m);
  h << hd.x, hd.y;
  CHECK((jv - h).cwiseAbs().maxCoeff() < 1e-5 * std::max(1.0, h.cwiseAbs().maxCoeff()));
}

TEST_CASE("predictor right-hand side") {
  const Case c = start_case(13, 4, mixed());
  const ControlVars zero{0.0, Vec::Zero(c.p.n_blocks())};
  const XY r0 = predictor_rhs(c.p, c.u, c.w, zero);
  CHECK(r0.x.norm() == 0.0);
  CHECK(r0.y.norm() == 0.0);

  // v0 direction on a NonNeg toy: d/dv0 of c/D is -c/D^2
  const Problem p({ConeSpec::nonneg()}, Mat::Constant(1, 1, 2.0), Vec::Constant(1, 3.0), Vec::Constant(1, 1.0));
  Iterate u{Vec::Constant(1, 1.5), Vec::Constant(1, 0.25), Vec()};
  refresh_slack(p, u);
  const ControlVars w{4.0, Vec::Constant(1, 0.3)};
  const double d = target_slack(p, u, w);
  const XY e = predictor_rhs(p, u, w, {1.0, Vec::Zero(1)});
  CHECK(e.x(0) == doctest::Approx(-1.0 / (d * d)).epsilon(1e-14));
  CHECK(e.y(0) == doctest::Approx(3.0 / (d * d)).epsilon(1e-14));

  // greedy dw = -w against finite differences of the gradient in w
  const int nb = c.p.n_blocks();
  auto grad_w = [&](const Vec& wf) {
    const XY g = ftilde_grad(c.p, c.u, {wf(0), wf.tail(nb)});
    Vec r(g.x.size() + g.y.size());
    r << g.x, g.y;
    return r;
  };
  Vec w0(nb + 1);
  w0 << c.w.v0, c.w.v;
  const Vec jv = fd::fd_jvp(grad_w, w0, -0.2 * w0);
  const XY pr = predictor_rhs(c.p, c.u, c.w, {-0.2 * c.w.v0, -0.2 * c.w.v});
  Vec an(jv.size());
  an << pr.x, pr.y;
  CHECK((jv - an).cwiseAbs().maxCoeff() < 1e-6 * std::max(1.0, an.cwiseAbs().maxCoeff()));
}

TEST_CASE("workspace rejects points outside the domain") {
  const Case c = start_case(14, 3, mixed());
  ControlVars bad = c.w;
  bad.v0 = objective_gap(c.p, c.u) * 0.5;
  CHECK_THROWS_AS(KktWorkspace(c.p, c.u, bad), Error);
}
