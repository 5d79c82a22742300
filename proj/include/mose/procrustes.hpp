#pragma once

#include "mose/linalg.hpp"

namespace mose {

/// Trade-off weight and rank tolerance shared by the editors.
struct EditConfig {
  double lambda = 1.0;
  double rank_tol = 0.0;
};

/// min over orthogonal R of ||R a - b||_F with
/// a = [sqrt(lambda) W K0 | W K_E] and b = [sqrt(lambda) W K0 | V_E].
struct ProcrustesProblem {
  Matrix a;  // d x (n0 + nE)
  Matrix b;  // d x (n0 + nE)
  Eigen::Index n_preserve = 0;
  double lambda = 1.0;
};

ProcrustesProblem assemble(const Matrix& w, const Matrix& k0, const Matrix& ke,
                           const Matrix& ve, const EditConfig& cfg);

/// Closed-form solution R = U V^T from the SVD of b a^T.
OrthogonalMatrix solve(const ProcrustesProblem& prob);

struct ResidualPair {
  double preserve_err = 0.0;  // ||R W K0 - W K0||_F, unweighted
  double edit_err = 0.0;      // ||R W K_E - V_E||_F
};

ResidualPair residual(const ProcrustesProblem& prob, const OrthogonalMatrix& r);

}  // namespace mose
