#include "mose/linalg.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace mose {

void require_finite(const Matrix& m, const char* name) {
  if (!m.allFinite()) {
    throw NumericalError(std::string(name) + ": non-finite entries");
  }
}

OrthogonalMatrix::OrthogonalMatrix(Matrix m) : mat_(std::move(m)) {
  if (mat_.rows() != mat_.cols() || mat_.rows() == 0) {
    throw DimensionError("OrthogonalMatrix: matrix must be square and nonempty");
  }
  const Matrix eye = Matrix::Identity(mat_.rows(), mat_.rows());
  const double e1 = (mat_.transpose() * mat_ - eye).cwiseAbs().maxCoeff();
  const double e2 = (mat_ * mat_.transpose() - eye).cwiseAbs().maxCoeff();
  if (!(e1 < kOrthoTol && e2 < kOrthoTol)) {
    throw NumericalError("OrthogonalMatrix: R^T R deviates from identity by " +
                         std::to_string(std::max(e1, e2)));
  }
}

namespace {

// Largest-magnitude entry of each left singular vector made non-negative,
// matching right singular vector negated with it.
void apply_sign_convention(Matrix& u, Matrix& v_t) {
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      const double a = std::abs(u(i, j));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (u(arg, j) < 0.0) {
      u.col(j) = -u.col(j);
      if (j < v_t.rows()) v_t.row(j) = -v_t.row(j);
    }
  }
}

}  // namespace

SvdResult svd(const Matrix& m) {
  if (m.size() == 0) throw std::invalid_argument("svd: empty matrix");
  require_finite(m, "svd");
  Eigen::JacobiSVD<Matrix> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (dec.info() != Eigen::Success) {
    throw NumericalError("svd: iteration failed to converge");
  }
  SvdResult out;
  out.u = dec.matrixU();
  out.singular_values = dec.singularValues();
  out.v_t = dec.matrixV().transpose();
  apply_sign_convention(out.u, out.v_t);
  return out;
}

double frobenius_norm(const Matrix& m) {
  require_finite(m, "frobenius_norm");
  return m.norm();
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return svd(m).singular_values(0);
}

double rank_threshold(const Matrix& m, double sigma_max, double rank_tol) {
  if (rank_tol < 0.0) throw std::invalid_argument("rank_tol must be >= 0");
  if (rank_tol > 0.0) return rank_tol;
  const double eps = std::numeric_limits<double>::epsilon();
  return eps * static_cast<double>(std::max(m.rows(), m.cols())) * sigma_max;
}

Matrix pseudo_inverse(const Matrix& m, double rank_tol) {
  const SvdResult dec = svd(m);
  const double thresh = rank_threshold(m, dec.singular_values(0), rank_tol);
  Vector inv = Vector::Zero(dec.singular_values.size());
  for (Eigen::Index i = 0; i < inv.size(); ++i) {
    if (dec.singular_values(i) > thresh) inv(i) = 1.0 / dec.singular_values(i);
  }
  return dec.v_t.transpose() * inv.asDiagonal() * dec.u.transpose();
}

double condition_number(const Matrix& m, double rank_tol) {
  const SvdResult dec = svd(m);
  const double sigma_max = dec.singular_values(0);
  if (sigma_max == 0.0) throw std::domain_error("condition_number: zero matrix");
  const double thresh = rank_threshold(m, sigma_max, rank_tol);
  double sigma_min = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = dec.singular_values.size() - 1; i >= 0; --i) {
    if (dec.singular_values(i) > thresh) {
      sigma_min = dec.singular_values(i);
      break;
    }
  }
  if (!std::isfinite(sigma_min)) {
    return std::numeric_limits<double>::infinity();
  }
  return sigma_max / sigma_min;
}

OrthogonalMatrix random_orthogonal(int dim, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("random_orthogonal: dim must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix g(dim, dim);
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = gauss(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return OrthogonalMatrix(std::move(q));
}

Matrix pca_project(const Matrix& columns, int k) {
  if (columns.cols() < 2) {
    throw std::invalid_argument("pca_project: need at least 2 columns");
  }
  if (k < 1 || k > std::min(columns.rows(), columns.cols())) {
    throw std::invalid_argument("pca_project: k out of range");
  }
  const Vector mean = columns.rowwise().mean();
  const Matrix centered = columns.colwise() - mean;
  if (centered.isZero(0.0)) {
    return Matrix::Zero(k, columns.cols());
  }
  const SvdResult dec = svd(centered);
  return dec.u.leftCols(k).transpose() * centered;
}

}  // namespace mose
