#include "mcopt/model.hpp"

#include <random>
#include <string>

#include "mcopt/error.hpp"

namespace mcopt {

Problem::Problem(std::vector<ConeSpec> cones, Mat A, Vec b, Vec c)
    : cones_(std::move(cones)), A_(std::move(A)), b_(std::move(b)), c_(std::move(c)) {
  if (cones_.empty()) throw Error(ErrorCode::DimensionMismatch, "problem has no cone blocks");
  int off = 0;
  offsets_.reserve(cones_.size() + 1);
  for (const ConeSpec& k : cones_) {
    offsets_.push_back(off);
    off += k.dim();
    nu_ += k.nu();
  }
  offsets_.push_back(off);
  if (A_.cols() != off) {
    throw Error(ErrorCode::DimensionMismatch,
                "A has " + std::to_string(A_.cols()) + " columns, cones need " + std::to_string(off));
  }
  if (A_.rows() < 1) throw Error(ErrorCode::DimensionMismatch, "m must be >= 1");
  if (b_.size() != A_.rows()) throw Error(ErrorCode::DimensionMismatch, "b length differs from m");
  if (c_.size() != off) throw Error(ErrorCode::DimensionMismatch, "c length differs from cone dimension");

  for (int i = 0; i < n_blocks(); ++i) {
    const ConeSpec& k = cones_[i];
    if (k.kind != ConeKind::Psd) continue;
    for (int r = 0; r < A_.rows(); ++r) {
      Vec row = A_.row(r).segment(offsets_[i], k.dim()).transpose();
      Mat mm = to_matrix(k, row);
      A_.row(r).segment(offsets_[i], k.dim()) = from_matrix(0.5 * (mm + mm.transpose())).transpose();
    }
    Mat cm = to_matrix(k, c_.segment(offsets_[i], k.dim()));
    c_.segment(offsets_[i], k.dim()) = from_matrix(0.5 * (cm + cm.transpose()));
  }
  if (!full_row_rank(A_)) throw Error(ErrorCode::RankDeficientA, "A does not have full row rank");
}

bool full_row_rank(const Mat& A) {
  if (A.rows() > A.cols()) return false;
  Eigen::ColPivHouseholderQR<Mat> qr(A.transpose());
  qr.setThreshold(1e-12);
  return qr.rank() == A.rows();
}

double vnorm_sq(const Problem& p, const Vec& v) {
  double r = 0.0;
  for (int i = 0; i < p.n_blocks(); ++i) r += p.cone(i).nu() * v(i) * v(i);
  return r;
}

double duality_gap(const Problem&, const Iterate& u) { return u.s.dot(u.x); }

double objective_gap(const Problem& p, const Iterate& u) { return p.c().dot(u.x) - p.b().dot(u.y); }

void refresh_slack(const Problem& p, Iterate& u) { u.s = p.dual_slack(u.y); }

double primal_residual(const Problem& p, const Vec& x) {
  return (p.A() * x - p.b()).cwiseAbs().maxCoeff();
}

bool strictly_feasible(const Problem& p, const Iterate& u, double margin, double feas_tol_rel) {
  if (u.x.size() != p.total_dim() || u.s.size() != p.total_dim() || u.y.size() != p.m()) return false;
  for (int i = 0; i < p.n_blocks(); ++i) {
    if (!membership_interior(p.cone(i), p.block(u.x, i), margin)) return false;
    if (!membership_interior(p.cone(i), p.block(u.s, i), margin)) return false;
  }
  const double tol = feas_tol_rel * (1.0 + p.b().cwiseAbs().maxCoeff());
  return primal_residual(p, u.x) <= tol;
}

std::pair<Problem, Iterate> random_instance(std::uint64_t seed, int m, const std::vector<ConeSpec>& cones) {
  if (m < 1) throw Error(ErrorCode::DimensionMismatch, "m must be >= 1");
  int total = 0;
  for (const ConeSpec& k : cones) total += k.dim();
  int real_dim = 0;
  for (const ConeSpec& k : cones) real_dim += k.sym_dim();
  if (cones.empty() || real_dim < m) {
    throw Error(ErrorCode::DimensionMismatch, "cone dimension " + std::to_string(real_dim) +
                                                  " is smaller than m = " + std::to_string(m));
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Mat A(m, total);
  for (int attempt = 0;; ++attempt) {
    for (int r = 0; r < m; ++r) {
      int off = 0;
      for (const ConeSpec& k : cones) {
        A.row(r).segment(off, k.dim()) = sample_direction(k, rng).transpose();
        off += k.dim();
      }
    }
    if (full_row_rank(A)) break;
    if (attempt > 100) throw Error(ErrorCode::RankDeficientA, "could not sample a full-rank A");
  }

  Iterate u;
  u.x.resize(total);
  u.s.resize(total);
  u.y.resize(m);
  int off = 0;
  for (const ConeSpec& k : cones) {
    u.x.segment(off, k.dim()) = sample_interior(k, rng);
    off += k.dim();
  }
  for (int r = 0; r < m; ++r) u.y(r) = gauss(rng);
  off = 0;
  for (const ConeSpec& k : cones) {
    u.s.segment(off, k.dim()) = sample_interior(k, rng);
    off += k.dim();
  }
  Vec b = A * u.x;
  Vec c = u.s + A.transpose() * u.y;
  Problem p(cones, A, b, c);
  refresh_slack(p, u);
  return {std::move(p), std::move(u)};
}

}  // namespace mcopt
