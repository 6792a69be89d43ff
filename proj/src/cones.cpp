#include "mcopt/cones.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mcopt/error.hpp"

namespace mcopt {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_shape(const ConeSpec& c, const ConePoint& x, const char* what) {
  if (x.size() != c.dim()) {
    throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": expected length " +
                                              std::to_string(c.dim()) + ", got " +
                                              std::to_string(x.size()));
  }
}

Mat sym(const Mat& m) { return 0.5 * (m + m.transpose()); }

// J x for the Lorentz form diag(1, -I).
Vec jmul(const Vec& x) {
  Vec r = -x;
  r(0) = x(0);
  return r;
}

double jdot(const Vec& a, const Vec& b) { return a(0) * b(0) - a.tail(a.size() - 1).dot(b.tail(b.size() - 1)); }

double lorentz_omega_checked(const Vec& x) {
  if (!(x(0) - x.tail(x.size() - 1).norm() > 0.0)) {
    throw Error(ErrorCode::OutsideDomain, "Lorentz point not interior");
  }
  return jdot(x, x);
}

// Inverse of a Psd block, throws OutsideDomain if not positive definite.
Mat psd_inverse(const ConeSpec& c, const ConePoint& x) {
  const Mat xm = sym(to_matrix(c, x));
  Eigen::LLT<Mat> llt(xm);
  if (llt.info() != Eigen::Success || !linalg::cholesky(linalg::SymMat(xm))) {
    throw Error(ErrorCode::OutsideDomain, "Psd point not positive definite");
  }
  return sym(llt.solve(Mat::Identity(c.param, c.param)));
}

double nonneg_checked(const ConePoint& x) {
  if (!(x(0) > 0.0)) throw Error(ErrorCode::OutsideDomain, "NonNeg point not positive");
  return x(0);
}

}  // namespace

ConeSpec ConeSpec::lorentz(int n) {
  if (n < 1) throw Error(ErrorCode::DimensionMismatch, "Lorentz spatial dimension must be >= 1");
  return {ConeKind::Lorentz, n};
}

ConeSpec ConeSpec::psd(int p) {
  if (p < 1) throw Error(ErrorCode::DimensionMismatch, "Psd order must be >= 1");
  return {ConeKind::Psd, p};
}

int ConeSpec::dim() const {
  switch (kind) {
    case ConeKind::NonNeg: return 1;
    case ConeKind::Lorentz: return param + 1;
    case ConeKind::Psd: return param * param;
  }
  return 0;
}

int ConeSpec::sym_dim() const {
  switch (kind) {
    case ConeKind::NonNeg: return 1;
    case ConeKind::Lorentz: return param + 1;
    case ConeKind::Psd: return param * (param + 1) / 2;
  }
  return 0;
}

double ConeSpec::nu() const {
  switch (kind) {
    case ConeKind::NonNeg: return 1.0;
    case ConeKind::Lorentz: return 2.0;
    case ConeKind::Psd: return static_cast<double>(param);
  }
  return 0.0;
}

const char* kind_name(ConeKind k) {
  switch (k) {
    case ConeKind::NonNeg: return "nonneg";
    case ConeKind::Lorentz: return "lorentz";
    case ConeKind::Psd: return "psd";
  }
  return "?";
}

Mat to_matrix(const ConeSpec& c, const ConePoint& x) {
  check_shape(c, x, "to_matrix");
  const int p = c.kind == ConeKind::Psd ? c.param : 1;
  if (c.kind == ConeKind::Lorentz) throw Error(ErrorCode::ShapeMismatch, "Lorentz point is not a matrix");
  return Eigen::Map<const RowMat>(x.data(), p, p);
}

ConePoint from_matrix(const Mat& m) {
  RowMat r = m;
  return Eigen::Map<const Vec>(r.data(), r.size());
}

ConePoint identity_point(const ConeSpec& c) {
  switch (c.kind) {
    case ConeKind::NonNeg: return Vec::Ones(1);
    case ConeKind::Lorentz: return Vec::Unit(c.dim(), 0);
    case ConeKind::Psd: return from_matrix(Mat::Identity(c.param, c.param));
  }
  return {};
}

Mat sym_basis(const ConeSpec& c) {
  if (c.kind != ConeKind::Psd) return Mat::Identity(c.dim(), c.dim());
  const int p = c.param;
  Mat b = Mat::Zero(c.dim(), c.sym_dim());
  int k = 0;
  for (int i = 0; i < p; ++i) {
    for (int j = i; j < p; ++j) {
      b(i * p + j, k) = 1.0;
      b(j * p + i, k) = 1.0;
      ++k;
    }
  }
  return b;
}

bool membership_interior(const ConeSpec& c, const ConePoint& x, double margin) {
  check_shape(c, x, "membership_interior");
  if (!x.allFinite()) return false;
  switch (c.kind) {
    case ConeKind::NonNeg: return x(0) > margin;
    case ConeKind::Lorentz: return x(0) - x.tail(c.param).norm() > margin;
    case ConeKind::Psd: {
      Mat m = to_matrix(c, x) - margin * Mat::Identity(c.param, c.param);
      return linalg::cholesky(linalg::SymMat(m)).has_value();
    }
  }
  return false;
}

double boundary_slack(const ConeSpec& c, const ConePoint& x) {
  check_shape(c, x, "boundary_slack");
  switch (c.kind) {
    case ConeKind::NonNeg: return x(0);
    case ConeKind::Lorentz: return x(0) - x.tail(c.param).norm();
    case ConeKind::Psd: return linalg::min_eigenvalue(linalg::SymMat(to_matrix(c, x)));
  }
  return 0.0;
}

double barrier_eval(const ConeSpec& c, const ConePoint& x, Side side) {
  check_shape(c, x, "barrier_eval");
  const bool dual = side == Side::Dual;
  switch (c.kind) {
    case ConeKind::NonNeg:
      return -std::log(nonneg_checked(x)) - (dual ? 1.0 : 0.0);
    case ConeKind::Lorentz:
      return -std::log(lorentz_omega_checked(x)) + (dual ? -2.0 + 2.0 * std::log(2.0) : 0.0);
    case ConeKind::Psd: {
      auto l = linalg::cholesky(linalg::SymMat(to_matrix(c, x)));
      if (!l) throw Error(ErrorCode::OutsideDomain, "Psd point not positive definite");
      const double logdet = 2.0 * l->diagonal().array().log().sum();
      return -logdet - (dual ? c.nu() : 0.0);
    }
  }
  return 0.0;
}

ConePoint barrier_grad(const ConeSpec& c, const ConePoint& x, Side) {
  check_shape(c, x, "barrier_grad");
  switch (c.kind) {
    case ConeKind::NonNeg: return Vec::Constant(1, -1.0 / nonneg_checked(x));
    case ConeKind::Lorentz: return (-2.0 / lorentz_omega_checked(x)) * jmul(x);
    case ConeKind::Psd: return from_matrix(-psd_inverse(c, x));
  }
  return {};
}

ConePoint hess_apply(const ConeSpec& c, const ConePoint& x, Side, const ConePoint& h) {
  check_shape(c, x, "hess_apply");
  check_shape(c, h, "hess_apply direction");
  switch (c.kind) {
    case ConeKind::NonNeg: {
      const double v = nonneg_checked(x);
      return h / (v * v);
    }
    case ConeKind::Lorentz: {
      const double w = lorentz_omega_checked(x);
      const Vec a = jmul(x);
      return (-2.0 / w) * jmul(h) + (4.0 * a.dot(h) / (w * w)) * a;
    }
    case ConeKind::Psd: {
      const Mat y = psd_inverse(c, x);
      return from_matrix(sym(y * to_matrix(c, h) * y));
    }
  }
  return {};
}

ConePoint hess_inv_apply(const ConeSpec& c, const ConePoint& x, Side, const ConePoint& g) {
  check_shape(c, x, "hess_inv_apply");
  check_shape(c, g, "hess_inv_apply direction");
  switch (c.kind) {
    case ConeKind::NonNeg: {
      const double v = nonneg_checked(x);
      return g * (v * v);
    }
    case ConeKind::Lorentz: {
      const double w = lorentz_omega_checked(x);
      return x * x.dot(g) - (0.5 * w) * jmul(g);
    }
    case ConeKind::Psd: {
      psd_inverse(c, x);  // domain check
      const Mat xm = sym(to_matrix(c, x));
      return from_matrix(sym(xm * to_matrix(c, g) * xm));
    }
  }
  return {};
}

ConePoint d3_form(const ConeSpec& c, const ConePoint& x, Side, const ConePoint& h1,
                  const ConePoint& h2) {
  check_shape(c, x, "d3_form");
  check_shape(c, h1, "d3_form h1");
  check_shape(c, h2, "d3_form h2");
  switch (c.kind) {
    case ConeKind::NonNeg: {
      const double v = nonneg_checked(x);
      return Vec::Constant(1, -2.0 * h1(0) * h2(0) / (v * v * v));
    }
    case ConeKind::Lorentz: {
      const double w = lorentz_omega_checked(x);
      const Vec a2 = 2.0 * jmul(x);
      const Vec jh1 = 2.0 * jmul(h1), jh2 = 2.0 * jmul(h2);
      const double w1 = a2.dot(h1), w2 = a2.dot(h2), w12 = jh1.dot(h2);
      return (-2.0 * w1 * w2 / (w * w * w)) * a2 + (w12 * a2 + w1 * jh2 + w2 * jh1) / (w * w);
    }
    case ConeKind::Psd: {
      const Mat y = psd_inverse(c, x);
      const Mat a = y * to_matrix(c, h1) * y;
      const Mat b = y * to_matrix(c, h2) * y;
      const Mat m1 = to_matrix(c, h1), m2 = to_matrix(c, h2);
      return from_matrix(sym(-(a * m2 * y + b * m1 * y)));
    }
  }
  return {};
}

ConePoint d4_form(const ConeSpec& c, const ConePoint& x, Side, const ConePoint& h,
                  const ConePoint& q) {
  check_shape(c, x, "d4_form");
  check_shape(c, h, "d4_form h");
  check_shape(c, q, "d4_form q");
  switch (c.kind) {
    case ConeKind::NonNeg: {
      const double v = nonneg_checked(x);
      return Vec::Constant(1, 6.0 * h(0) * q(0) * q(0) / (v * v * v * v));
    }
    case ConeKind::Lorentz: {
      const double w = lorentz_omega_checked(x);
      const double w2 = w * w, w3 = w2 * w, w4 = w3 * w;
      const Vec a2 = 2.0 * jmul(x);
      const Vec jh = 2.0 * jmul(h), jq = 2.0 * jmul(q);
      const double wh = a2.dot(h), wq = a2.dot(q), whq = jh.dot(q), wqq = jq.dot(q);
      return (6.0 * wh * wq * wq / w4) * a2 -
             (2.0 / w3) * (2.0 * whq * wq * a2 + wq * wq * jh + wqq * wh * a2 + 2.0 * wh * wq * jq) +
             (2.0 * whq * jq + wqq * jh) / w2;
    }
    case ConeKind::Psd: {
      const Mat y = psd_inverse(c, x);
      const Mat hy = to_matrix(c, h) * y;
      const Mat qy = to_matrix(c, q) * y;
      const Mat r = y * (hy * qy * qy + qy * hy * qy + qy * qy * hy);
      return from_matrix(sym(2.0 * r));
    }
  }
  return {};
}

Mat hess_matrix(const ConeSpec& c, const ConePoint& x, Side side) {
  const int d = c.dim();
  Mat h(d, d);
  for (int j = 0; j < d; ++j) {
    if (c.kind == ConeKind::Psd) {
      // Apply the operator itself, without symmetrizing the unit input.
      const Mat y = psd_inverse(c, x);
      Mat e = Mat::Zero(c.param, c.param);
      e(j / c.param, j % c.param) = 1.0;
      h.col(j) = from_matrix(y * e * y);
    } else {
      h.col(j) = hess_apply(c, x, side, Vec::Unit(d, j));
    }
  }
  return h;
}

double max_step(const ConeSpec& c, const ConePoint& x, const ConePoint& d) {
  check_shape(c, x, "max_step");
  check_shape(c, d, "max_step direction");
  switch (c.kind) {
    case ConeKind::NonNeg:
      nonneg_checked(x);
      return d(0) < 0.0 ? -x(0) / d(0) : kInf;
    case ConeKind::Lorentz: {
      const double wx = lorentz_omega_checked(x);
      const double wd = jdot(d, d);
      const double bq = jdot(x, d);
      if (wd == 0.0) return bq < 0.0 ? -wx / (2.0 * bq) : kInf;
      const double disc = bq * bq - wx * wd;
      if (wd < 0.0) {
        const double sq = std::sqrt(std::max(disc, 0.0));
        return bq >= 0.0 ? (bq + sq) / (-wd) : wx / (sq - bq);
      }
      // wd > 0 and bq < 0 put d in -K, where disc >= 0 up to rounding
      if (bq >= 0.0) return kInf;
      return wx / (std::sqrt(std::max(disc, 0.0)) - bq);
    }
    case ConeKind::Psd: {
      auto l = linalg::cholesky(linalg::SymMat(to_matrix(c, x)));
      if (!l) throw Error(ErrorCode::OutsideDomain, "Psd point not positive definite");
      auto lt = l->triangularView<Eigen::Lower>();
      Mat t = lt.solve(to_matrix(c, d));
      Mat m = lt.solve(t.transpose());
      const double lmin = linalg::min_eigenvalue(linalg::SymMat(m));
      return lmin < 0.0 ? -1.0 / lmin : kInf;
    }
  }
  return kInf;
}

LorentzScalingDetail lorentz_scaling_detail(const ConeSpec& c, const ConePoint& x,
                                            const ConePoint& s) {
  check_shape(c, x, "scaling_point x");
  check_shape(c, s, "scaling_point s");
  const double wx = lorentz_omega_checked(x);
  const double ws = lorentz_omega_checked(s);
  const double sx = x.dot(s);
  const double na = x.tail(c.param).norm(), nb = s.tail(c.param).norm();
  const double pp = x.tail(c.param).dot(s.tail(c.param));
  const double cross = x(0) * nb - s(0) * na;

  LorentzScalingDetail d;
  d.delta = (na * nb + pp) * (2.0 * x(0) * s(0) - na * nb + pp) + cross * cross;
  d.alpha = sx / (sx + std::sqrt(wx * ws));
  d.beta = (sx / ws) * (1.0 - d.alpha);
  d.f_alpha = (sx * sx - d.alpha * d.delta) / (sx * sx - d.alpha * d.alpha * d.delta);

  Vec w = d.alpha * x;
  w(0) += d.beta * s(0);
  w.tail(c.param) -= d.beta * s.tail(c.param);
  d.w_unscaled = w;
  const double ratio = -barrier_grad(c, w, Side::Primal).dot(x) / sx;
  d.tau = std::sqrt(ratio);
  return d;
}

ConePoint scaling_point(const ConeSpec& c, const ConePoint& x, const ConePoint& s) {
  check_shape(c, x, "scaling_point x");
  check_shape(c, s, "scaling_point s");
  ConePoint w;
  switch (c.kind) {
    case ConeKind::NonNeg:
      w = Vec::Constant(1, std::sqrt(nonneg_checked(x) / nonneg_checked(s)));
      break;
    case ConeKind::Lorentz: {
      const LorentzScalingDetail d = lorentz_scaling_detail(c, x, s);
      w = d.tau * d.w_unscaled;
      break;
    }
    case ConeKind::Psd: {
      using linalg::SymMat;
      using linalg::SymFunc;
      const SymMat xm(to_matrix(c, x));
      const SymMat sm(to_matrix(c, s));
      if (!linalg::cholesky(xm) || !linalg::cholesky(sm)) {
        throw Error(ErrorCode::OutsideDomain, "Psd scaling_point needs interior points");
      }
      const Mat xh = linalg::sym_funcs(xm, SymFunc::Sqrt).mat();
      const Mat mid = linalg::sym_funcs(SymMat(xh * sm.mat() * xh), SymFunc::InvSqrt).mat();
      w = from_matrix(sym(xh * mid * xh));
      break;
    }
  }
  const Vec r = s - hess_apply(c, w, Side::Primal, x);
  if (!(r.norm() <= 1e-9 * (1.0 + s.norm()))) {
    throw Error(ErrorCode::ScalingResidualTooLarge,
                "residual " + std::to_string(r.norm()) + " for " + kind_name(c.kind) + " block");
  }
  return w;
}

double zeta(const ConeSpec& c, const ConePoint& x, const ConePoint& s, double tau) {
  const Vec g = barrier_grad(c, x, Side::Primal);
  const Vec sigma = s + tau * g;
  return g.dot(barrier_grad(c, sigma, Side::Dual));
}

double zeta_prime(const ConeSpec& c, const ConePoint& x, const ConePoint& s, double tau) {
  const Vec g = barrier_grad(c, x, Side::Primal);
  const Vec sigma = s + tau * g;
  return g.dot(hess_apply(c, sigma, Side::Dual, g));
}

double zeta_tau_max(const ConeSpec& c, const ConePoint& x, const ConePoint& s) {
  return max_step(c, s, barrier_grad(c, x, Side::Primal));
}

double zeta_solve(const ConeSpec& c, const ConePoint& x, const ConePoint& s, double target) {
  const Vec g = barrier_grad(c, x, Side::Primal);
  auto eval = [&](double tau, double* deriv) {
    const Vec sigma = s + tau * g;
    if (deriv) *deriv = g.dot(hess_apply(c, sigma, Side::Dual, g));
    return g.dot(barrier_grad(c, sigma, Side::Dual));
  };

  const double z0 = eval(0.0, nullptr);
  if (!(target > z0)) {
    throw Error(ErrorCode::TargetBelowZetaZero,
                "target " + std::to_string(target) + " <= zeta(0) = " + std::to_string(z0));
  }
  double lo = 0.0;
  double hi = max_step(c, s, g);
  if (!std::isfinite(hi)) throw Error(ErrorCode::NoConvergence, "zeta bracket is unbounded");

  double tau = 0.0;
  double best = 0.0, best_res = kInf;
  for (int it = 0; it < 200; ++it) {
    double zp = 0.0;
    const double z = eval(tau, &zp);
    const double res = std::abs(z - target);
    if (res < best_res) {
      best_res = res;
      best = tau;
    }
    if (res <= 1e-13 * target) return tau;
    if (z < target) lo = std::max(lo, tau);
    else hi = std::min(hi, tau);
    // Newton on 1/zeta - 1/target, which is nearly linear in tau.
    double next = zp > 0.0 ? tau + z * (1.0 - z / target) / zp : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    tau = next;
  }
  if (best_res <= 1e-10 * target) return best;
  throw Error(ErrorCode::NoConvergence, "zeta_solve residual " + std::to_string(best_res));
}

ConePoint sample_interior(const ConeSpec& c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.5, 2.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  switch (c.kind) {
    case ConeKind::NonNeg: return Vec::Constant(1, unif(rng));
    case ConeKind::Lorentz: {
      Vec x(c.dim());
      for (int i = 1; i < c.dim(); ++i) x(i) = gauss(rng);
      x(0) = x.tail(c.param).norm() + unif(rng);
      return x;
    }
    case ConeKind::Psd: {
      const int p = c.param;
      Mat g(p, p);
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) g(i, j) = gauss(rng);
      Mat q = Eigen::HouseholderQR<Mat>(g).householderQ();
      Vec d(p);
      for (int i = 0; i < p; ++i) d(i) = unif(rng);
      return from_matrix(sym(q.transpose() * d.asDiagonal() * q));
    }
  }
  return {};
}

ConePoint sample_direction(const ConeSpec& c, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec d(c.dim());
  for (int i = 0; i < c.dim(); ++i) d(i) = gauss(rng);
  if (c.kind == ConeKind::Psd) d = from_matrix(sym(to_matrix(c, d)));
  return d;
}

}  // namespace mcopt
