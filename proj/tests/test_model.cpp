#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mcopt/error.hpp"
#include "mcopt/model.hpp"

using namespace mcopt;

namespace {

std::vector<ConeSpec> mixed() {
  return {ConeSpec::nonneg(), ConeSpec::nonneg(), ConeSpec::nonneg(), ConeSpec::nonneg(),
          ConeSpec::lorentz(2), ConeSpec::psd(2)};
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::ParseError;
}

}  // namespace

TEST_CASE("smallest instance") {
  auto [p, u] = random_instance(1, 1, {ConeSpec::nonneg()});
  CHECK(p.m() == 1);
  CHECK(p.total_dim() == 1);
  CHECK(p.nu() == 1);
  CHECK(strictly_feasible(p, u, 1e-6));
}

TEST_CASE("mixed instance residuals") {
  auto [p, u] = random_instance(7, 5, mixed());
  CHECK(p.nu() == 8);
  CHECK(p.total_dim() == 4 + 3 + 4);
  CHECK(primal_residual(p, u.x) <= 1e-12);
  CHECK((u.s - p.dual_slack(u.y)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(strictly_feasible(p, u, 1e-6));
  CHECK(duality_gap(p, u) > 0);
  CHECK(std::abs(duality_gap(p, u) - objective_gap(p, u)) <= 1e-9 * (1 + std::abs(duality_gap(p, u))));
  // Psd rows of A and c blocks are symmetric
  for (int r = 0; r < p.m(); ++r) {
    const Vec a = p.A().row(r).segment(p.offset(5), 4).transpose();
    CHECK(a(1) == a(2));
  }
}

TEST_CASE("generator is deterministic") {
  auto [p1, u1] = random_instance(42, 3, mixed());
  auto [p2, u2] = random_instance(42, 3, mixed());
  CHECK(p1.A() == p2.A());
  CHECK(p1.b() == p2.b());
  CHECK(p1.c() == p2.c());
  CHECK(u1.x == u2.x);
  CHECK(u1.y == u2.y);
  auto [p3, u3] = random_instance(43, 3, mixed());
  CHECK(p1.A() != p3.A());
}

TEST_CASE("generated instances are strictly feasible") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto [p, u] = random_instance(seed, 1 + static_cast<int>(seed % 6), mixed());
    CHECK(strictly_feasible(p, u, 1e-6));
    CHECK(duality_gap(p, u) > 0);
  }
}

TEST_CASE("duality gap") {
  const int k = 4;
  std::vector<ConeSpec> cones(k, ConeSpec::nonneg());
  Mat A = Mat::Ones(1, k);
  const Problem p(cones, A, Vec::Constant(1, k), Vec::Constant(k, 1.0));
  Iterate u{Vec::Ones(k), Vec::Zero(1), Vec::Ones(k)};
  CHECK(duality_gap(p, u) == doctest::Approx(k));

  // deviated central path point: s_i = -vbar_i grad F(x_i), gap = sum nu_i vbar_i
  auto [q, w] = random_instance(3, 2, mixed());
  const Vec vbar = (Vec(6) << 0.5, 1, 2, 0.25, 1.5, 0.75).finished();
  Iterate z = w;
  for (int i = 0; i < q.n_blocks(); ++i) {
    q.block_ref(z.s, i) = -vbar(i) * barrier_grad(q.cone(i), q.block(z.x, i), Side::Primal);
  }
  double expect = 0;
  for (int i = 0; i < q.n_blocks(); ++i) expect += q.cone(i).nu() * vbar(i);
  CHECK(duality_gap(q, z) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("problem validation") {
  std::vector<ConeSpec> cones{ConeSpec::nonneg(), ConeSpec::nonneg()};
  Mat rank1(2, 2);
  rank1 << 1, 2, 2, 4;
  CHECK(code_of([&] { Problem(cones, rank1, Vec::Ones(2), Vec::Ones(2)); }) == ErrorCode::RankDeficientA);
  CHECK(code_of([&] { Problem(cones, Mat::Ones(1, 3), Vec::Ones(1), Vec::Ones(2)); }) ==
        ErrorCode::DimensionMismatch);
  CHECK(code_of([&] { Problem(cones, Mat::Ones(1, 2), Vec::Ones(2), Vec::Ones(2)); }) ==
        ErrorCode::DimensionMismatch);
  CHECK(code_of([&] { random_instance(1, 3, {ConeSpec::nonneg()}); }) == ErrorCode::DimensionMismatch);
  CHECK(full_row_rank(Mat::Identity(3, 3)));
  CHECK_FALSE(full_row_rank(rank1));
}

TEST_CASE("solver config bounds") {
  const SolverConfig d = SolverConfig::defaults();
  CHECK(d.beta1 == 0.25);
  CHECK(d.beta2 == 2.0);
  CHECK_NOTHROW(d.validate());
  SolverConfig bad = d;
  bad.beta1 = 0.31;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = d;
  bad.beta2 = 0.2;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = d;
  bad.eps = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
}
