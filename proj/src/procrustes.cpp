#include "mose/procrustes.hpp"

#include <cmath>
#include <string>

namespace mose {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

ProcrustesProblem assemble(const Matrix& w, const Matrix& k0, const Matrix& ke,
                           const Matrix& ve, const EditConfig& cfg) {
  if (cfg.lambda <= 0.0) throw std::invalid_argument("lambda must be > 0");
  const Eigen::Index d = w.rows();
  const Eigen::Index p = w.cols();
  if (k0.cols() > 0 && k0.rows() != p) {
    throw DimensionError("assemble: k0 is " + shape(k0) + ", expected " +
                         std::to_string(p) + " rows to match w " + shape(w));
  }
  if (ke.rows() != p || ke.cols() < 1) {
    throw DimensionError("assemble: ke is " + shape(ke) + ", expected " +
                         std::to_string(p) + " rows and >= 1 column");
  }
  if (ve.rows() != d || ve.cols() != ke.cols()) {
    throw DimensionError("assemble: ve is " + shape(ve) + ", expected " +
                         std::to_string(d) + "x" + std::to_string(ke.cols()));
  }
  require_finite(w, "assemble: w");
  require_finite(ke, "assemble: ke");
  require_finite(ve, "assemble: ve");

  const Eigen::Index n0 = k0.cols();
  const Eigen::Index ne = ke.cols();
  const double root_lambda = std::sqrt(cfg.lambda);

  ProcrustesProblem prob;
  prob.n_preserve = n0;
  prob.lambda = cfg.lambda;
  prob.a.resize(d, n0 + ne);
  prob.b.resize(d, n0 + ne);
  if (n0 > 0) {
    require_finite(k0, "assemble: k0");
    const Matrix wk0 = root_lambda * (w * k0);
    prob.a.leftCols(n0) = wk0;
    prob.b.leftCols(n0) = wk0;
  }
  prob.a.rightCols(ne) = w * ke;
  prob.b.rightCols(ne) = ve;
  return prob;
}

OrthogonalMatrix solve(const ProcrustesProblem& prob) {
  if (prob.a.rows() != prob.b.rows() || prob.a.cols() != prob.b.cols()) {
    throw DimensionError("solve: a and b shapes differ");
  }
  require_finite(prob.a, "solve: a");
  require_finite(prob.b, "solve: b");
  const Eigen::Index d = prob.a.rows();
  const Matrix m = prob.b * prob.a.transpose();
  if (m.isZero(0.0)) {
    return OrthogonalMatrix(Matrix::Identity(d, d));
  }
  const SvdResult dec = svd(m);
  const double thresh = rank_threshold(m, dec.singular_values(0));
  Eigen::Index rank = 0;
  while (rank < d && dec.singular_values(rank) > thresh) ++rank;
  if (rank == d) {
    return OrthogonalMatrix(dec.u * dec.v_t);
  }
  // Rank-deficient b a^T: the minimizer is free on the null block. Pick the
  // representative closest to the identity, so directions the problem does
  // not constrain are left alone.
  const Matrix u1 = dec.u.leftCols(rank);
  const Matrix u2 = dec.u.rightCols(d - rank);
  const Matrix v1_t = dec.v_t.topRows(rank);
  const Matrix v2_t = dec.v_t.bottomRows(d - rank);
  const SvdResult gap = svd(u2.transpose() * v2_t.transpose());
  const Matrix q = gap.u * gap.v_t;
  return OrthogonalMatrix(u1 * v1_t + u2 * q * v2_t);
}

ResidualPair residual(const ProcrustesProblem& prob, const OrthogonalMatrix& r) {
  if (r.dim() != prob.a.rows()) {
    throw DimensionError("residual: R dimension does not match problem");
  }
  const double root_lambda = std::sqrt(prob.lambda);
  ResidualPair out;
  if (prob.n_preserve > 0) {
    // The preservation block of a carries the sqrt(lambda) weight; report it
    // unweighted.
    const Matrix wk0 = prob.a.leftCols(prob.n_preserve) / root_lambda;
    out.preserve_err = (r.matrix() * wk0 - wk0).norm();
  }
  const Eigen::Index ne = prob.a.cols() - prob.n_preserve;
  out.edit_err =
      (r.matrix() * prob.a.rightCols(ne) - prob.b.rightCols(ne)).norm();
  return out;
}

}  // namespace mose
