#pragma once

#include <optional>

#include <Eigen/Dense>

namespace mcopt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

namespace linalg {

/// Relative pivot tolerance used for every positive-definiteness decision.
inline constexpr double kPdTol = 1e-13;

/// Dense symmetric matrix. Entries are symmetrized on construction, so
/// `(i, j) == (j, i)` holds exactly.
class SymMat {
 public:
  SymMat() = default;
  explicit SymMat(const Mat& m);
  static SymMat identity(int order);
  static SymMat diagonal(const Vec& d);

  int order() const { return static_cast<int>(m_.rows()); }
  double operator()(int i, int j) const { return m_(i, j); }
  const Mat& mat() const { return m_; }

 private:
  Mat m_;
};

/// Lower Cholesky factor, or nullopt when a pivot falls below
/// kPdTol times the largest diagonal entry.
std::optional<Mat> cholesky(const SymMat& m);

struct EigenDecomposition {
  Vec values;   // ascending
  Mat vectors;  // columns are orthonormal eigenvectors
};

EigenDecomposition sym_eig(const SymMat& m);

enum class SymFunc { Sqrt, InvSqrt, Inv };

SymMat sym_funcs(const SymMat& m, SymFunc which);

/// Solves m * x = rhs for positive definite m.
Vec solve_spd(const SymMat& m, const Vec& rhs);

/// Solves with a precomputed lower Cholesky factor.
Vec cholesky_solve(const Mat& lower, const Vec& rhs);
Mat cholesky_solve(const Mat& lower, const Mat& rhs);

/// Cholesky of diag(d) M diag(d), d = diag(M)^{-1/2}. Accepts matrices whose
/// diagonal spans many orders of magnitude.
struct ScaledCholesky {
  Vec d;
  Mat l;
  Vec solve(const Vec& rhs) const;
  Mat solve(const Mat& rhs) const;
};
std::optional<ScaledCholesky> scaled_cholesky(const SymMat& m);

double min_eigenvalue(const SymMat& m);

}  // namespace linalg
}  // namespace mcopt
