#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>

namespace mose {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thrown when shapes of operands do not compose.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Thrown when an underlying numerical routine fails to converge.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_finite(const Matrix& m, const char* name);

/// Thin SVD m = u * diag(singular_values) * v_t with a deterministic sign
/// convention: in each left singular vector the entry of largest magnitude
/// (first index on ties) is non-negative.
struct SvdResult {
  Matrix u;                 // m x r, orthonormal columns
  Vector singular_values;   // length r, non-increasing, >= 0
  Matrix v_t;               // r x n, orthonormal rows
};

/// A square matrix R with R^T R = R R^T = I, validated at construction.
class OrthogonalMatrix {
 public:
  static constexpr double kOrthoTol = 1e-10;

  explicit OrthogonalMatrix(Matrix m);

  const Matrix& matrix() const { return mat_; }
  Eigen::Index dim() const { return mat_.rows(); }

 private:
  Matrix mat_;
};

SvdResult svd(const Matrix& m);

double frobenius_norm(const Matrix& m);
double spectral_norm(const Matrix& m);

/// Numerical-rank cutoff: sigma counts as nonzero iff
/// sigma > eps * max(rows, cols) * sigma_max. rank_tol > 0 overrides the
/// cutoff with an absolute threshold on sigma.
double rank_threshold(const Matrix& m, double sigma_max, double rank_tol = 0.0);

/// Moore-Penrose pseudoinverse; singular values at or below the rank cutoff
/// are treated as zero. A rank-0 input yields the zero matrix of transposed
/// shape.
Matrix pseudo_inverse(const Matrix& m, double rank_tol = 0.0);

/// kappa_2(m) = sigma_max / (smallest singular value above the rank cutoff).
/// Throws std::domain_error on the zero matrix.
double condition_number(const Matrix& m, double rank_tol = 0.0);

/// Haar-distributed orthogonal matrix: QR of a dim x dim standard Gaussian,
/// columns of Q sign-corrected by the diagonal of the triangular factor.
OrthogonalMatrix random_orthogonal(int dim, std::uint64_t seed);

/// Center the columns of `columns` by their mean and return the coordinates
/// of each column in the top-k left singular basis (k x n).
Matrix pca_project(const Matrix& columns, int k);

}  // namespace mose
