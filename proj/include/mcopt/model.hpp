#pragma once

#include <cstdint>
#include <vector>

#include "mcopt/cones.hpp"

namespace mcopt {

/// min <c,x> s.t. A x = b, x in K_1 x ... x K_n, and its dual.
/// A is stored as one dense m x N matrix over the flat block layout; rows
/// restricted to a Psd block hold flattened symmetric matrices.
class Problem {
 public:
  Problem() = default;
  /// Validates shapes, symmetrizes Psd rows, and checks full row rank.
  Problem(std::vector<ConeSpec> cones, Mat A, Vec b, Vec c);

  const std::vector<ConeSpec>& cones() const { return cones_; }
  const ConeSpec& cone(int i) const { return cones_[i]; }
  int n_blocks() const { return static_cast<int>(cones_.size()); }
  int m() const { return static_cast<int>(A_.rows()); }
  int total_dim() const { return static_cast<int>(A_.cols()); }
  int offset(int i) const { return offsets_[i]; }
  double nu() const { return nu_; }

  const Mat& A() const { return A_; }
  const Vec& b() const { return b_; }
  const Vec& c() const { return c_; }

  Vec block(const Vec& flat, int i) const { return flat.segment(offsets_[i], cones_[i].dim()); }
  auto block_ref(Vec& flat, int i) const { return flat.segment(offsets_[i], cones_[i].dim()); }

  /// c - A^T y.
  Vec dual_slack(const Vec& y) const { return c_ - A_.transpose() * y; }

 private:
  std::vector<ConeSpec> cones_;
  std::vector<int> offsets_;
  Mat A_;
  Vec b_;
  Vec c_;
  double nu_ = 0.0;
};

struct Iterate {
  Vec x;
  Vec y;
  Vec s;
};

struct ControlVars {
  double v0 = 0.0;
  Vec v;
};

struct SolverConfig {
  double beta1 = 0.25;
  double beta2 = 2.0;
  double eps = 1e-6;
  int max_corrector_steps = 200;
  int max_outer_iters = 5000;
  double ls_tol = 1e-3;
  double alpha_min = 1e-12;
  double stall_tol = 1e-14;
  double feas_tol_rel = 1e-8;

  /// Default beta2 = max(2, omega_*(omega^{-1}(beta1)) + 0.5).
  static SolverConfig defaults();
  /// Throws InvalidConfig unless 0 < beta1 < 1 - ln 2,
  /// beta2 > omega_*(omega^{-1}(beta1)) and eps > 0.
  void validate() const;
};

/// sum_i nu_i v_i^2.
double vnorm_sq(const Problem& p, const Vec& v);

/// <s, x>.
double duality_gap(const Problem& p, const Iterate& u);
/// <c, x> - <b, y>.
double objective_gap(const Problem& p, const Iterate& u);

/// Replaces s with c - A^T y.
void refresh_slack(const Problem& p, Iterate& u);

double primal_residual(const Problem& p, const Vec& x);

/// Every x_i and s_i interior with the given margin, and |Ax - b| within
/// feas_tol_rel (1 + |b|_inf).
bool strictly_feasible(const Problem& p, const Iterate& u, double margin = 0.0,
                       double feas_tol_rel = 1e-8);

/// Problem and a strictly feasible iterate with b = A x and c = s + A^T y.
std::pair<Problem, Iterate> random_instance(std::uint64_t seed, int m, const std::vector<ConeSpec>& cones);

/// Checks full row rank of A (numerical rank of A A^T).
bool full_row_rank(const Mat& A);

}  // namespace mcopt
