#include "mcopt/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "mcopt/error.hpp"

namespace mcopt::linalg {

SymMat::SymMat(const Mat& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::ShapeMismatch, "SymMat needs a square matrix");
  m_ = 0.5 * (m + m.transpose());
}

SymMat SymMat::identity(int order) { return SymMat(Mat::Identity(order, order)); }

SymMat SymMat::diagonal(const Vec& d) { return SymMat(Mat(d.asDiagonal())); }

std::optional<Mat> cholesky(const SymMat& sm) {
  const Mat& m = sm.mat();
  const int n = sm.order();
  if (n == 0) return Mat(0, 0);
  const double dmax = m.diagonal().maxCoeff();
  if (!(dmax > 0.0) || !std::isfinite(dmax)) return std::nullopt;
  const double tol = kPdTol * dmax;

  Mat l = Mat::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    double d = m(j, j) - l.row(j).head(j).squaredNorm();
    if (!(d > tol)) return std::nullopt;
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (int i = j + 1; i < n; ++i) {
      l(i, j) = (m(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / ljj;
    }
  }
  return l;
}

EigenDecomposition sym_eig(const SymMat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m.mat());
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::NoConvergence, "symmetric eigensolver did not converge");
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

SymMat sym_funcs(const SymMat& m, SymFunc which) {
  if (!cholesky(m)) throw Error(ErrorCode::NotPositiveDefinite, "sym_funcs needs a positive definite matrix");
  const EigenDecomposition ed = sym_eig(m);
  Vec f(ed.values.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const double l = ed.values(i);
    switch (which) {
      case SymFunc::Sqrt: f(i) = std::sqrt(l); break;
      case SymFunc::InvSqrt: f(i) = 1.0 / std::sqrt(l); break;
      case SymFunc::Inv: f(i) = 1.0 / l; break;
    }
  }
  return SymMat(ed.vectors * f.asDiagonal() * ed.vectors.transpose());
}

Vec cholesky_solve(const Mat& lower, const Vec& rhs) {
  Vec z = lower.triangularView<Eigen::Lower>().solve(rhs);
  return lower.transpose().triangularView<Eigen::Upper>().solve(z);
}

Mat cholesky_solve(const Mat& lower, const Mat& rhs) {
  Mat z = lower.triangularView<Eigen::Lower>().solve(rhs);
  return lower.transpose().triangularView<Eigen::Upper>().solve(z);
}

std::optional<ScaledCholesky> scaled_cholesky(const SymMat& m) {
  const Vec diag = m.mat().diagonal();
  if (!(diag.array() > 0.0).all() || !diag.allFinite()) return std::nullopt;
  ScaledCholesky out;
  out.d = diag.cwiseSqrt().cwiseInverse();
  auto l = cholesky(SymMat(out.d.asDiagonal() * m.mat() * out.d.asDiagonal()));
  if (!l) return std::nullopt;
  out.l = std::move(*l);
  return out;
}

Vec ScaledCholesky::solve(const Vec& rhs) const {
  return d.cwiseProduct(cholesky_solve(l, Vec(d.cwiseProduct(rhs))));
}

Mat ScaledCholesky::solve(const Mat& rhs) const {
  return d.asDiagonal() * cholesky_solve(l, Mat(d.asDiagonal() * rhs));
}

Vec solve_spd(const SymMat& m, const Vec& rhs) {
  if (rhs.size() != m.order()) throw Error(ErrorCode::ShapeMismatch, "solve_spd rhs length");
  auto l = cholesky(m);
  if (!l) throw Error(ErrorCode::NotPositiveDefinite, "solve_spd");
  Vec x = cholesky_solve(*l, rhs);
  // one refinement step
  Vec r = rhs - m.mat() * x;
  x += cholesky_solve(*l, r);
  return x;
}

double min_eigenvalue(const SymMat& m) {
  if (m.order() == 0) return 0.0;
  return sym_eig(m).values(0);
}

}  // namespace mcopt::linalg
