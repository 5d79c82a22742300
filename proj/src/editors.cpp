#include "mose/editors.hpp"

#include <cmath>
#include <random>

namespace mose {

EditStep mose_edit(const Matrix& w, const Matrix& mem_k0, const EditBatch& batch,
                   const EditConfig& cfg) {
  const ProcrustesProblem prob =
      assemble(w, mem_k0, batch.keys, batch.values, cfg);
  const OrthogonalMatrix r = solve(prob);
  EditStep step;
  step.kind = UpdateKind::multiplicative;
  step.update = r.matrix();
  step.w_after = r.matrix() * w;
  return step;
}

EditStep additive_edit(const Matrix& w, const Matrix& mem_k0,
                       const EditBatch& batch, const EditConfig& cfg) {
  // Shape checks shared with the multiplicative path.
  assemble(w, mem_k0, batch.keys, batch.values, cfg);
  Matrix normal = batch.keys * batch.keys.transpose();
  if (mem_k0.cols() > 0) {
    normal += cfg.lambda * (mem_k0 * mem_k0.transpose());
  }
  // Residual form of the normal-equation solution. When the normal matrix is
  // invertible this matches w* = (lambda w K0 K0^T + V_E K_E^T) normal^{-1};
  // when it is singular it picks the minimal-norm delta, so an already
  // satisfied batch leaves w untouched instead of zeroing the free subspace.
  const Matrix delta = (batch.values - w * batch.keys) * batch.keys.transpose() *
                       pseudo_inverse(normal, cfg.rank_tol);
  EditStep step;
  step.kind = UpdateKind::additive;
  step.update = delta;
  step.w_after = w + delta;
  return step;
}

EditStep random_orthogonal_edit(const Matrix& w, std::uint64_t seed) {
  const OrthogonalMatrix r =
      random_orthogonal(static_cast<int>(w.rows()), seed);
  EditStep step;
  step.kind = UpdateKind::multiplicative;
  step.update = r.matrix();
  step.w_after = r.matrix() * w;
  return step;
}

EditStep random_additive_edit(const Matrix& w, double scale, std::uint64_t seed) {
  if (scale <= 0.0) throw std::invalid_argument("random_additive_edit: scale > 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix delta(w.rows(), w.cols());
  for (Eigen::Index i = 0; i < delta.rows(); ++i)
    for (Eigen::Index j = 0; j < delta.cols(); ++j) delta(i, j) = gauss(rng);
  delta *= scale * w.norm() / delta.norm();
  EditStep step;
  step.kind = UpdateKind::additive;
  step.update = delta;
  step.w_after = w + delta;
  return step;
}

double edit_objective(const Matrix& w, const Matrix& w_anchor,
                      const Matrix& mem_k0, const EditBatch& batch,
                      double lambda) {
  double preserve = 0.0;
  if (mem_k0.cols() > 0) {
    preserve = (w * mem_k0 - w_anchor * mem_k0).squaredNorm();
  }
  const double edit = (w * batch.keys - batch.values).squaredNorm();
  return lambda * preserve + edit;
}

EditorKind editor_from_name(const std::string& name) {
  if (name == "mose") return EditorKind::mose;
  if (name == "additive") return EditorKind::additive;
  if (name == "random_orthogonal") return EditorKind::random_orthogonal;
  if (name == "random_additive") return EditorKind::random_additive;
  if (name == "identity") return EditorKind::identity;
  throw std::invalid_argument("unknown editor: " + name);
}

std::string editor_name(EditorKind kind) {
  switch (kind) {
    case EditorKind::mose: return "mose";
    case EditorKind::additive: return "additive";
    case EditorKind::random_orthogonal: return "random_orthogonal";
    case EditorKind::random_additive: return "random_additive";
    case EditorKind::identity: return "identity";
  }
  throw std::logic_error("unreachable");
}

namespace {

// Nearest orthogonal matrix (polar factor).
Matrix reorthogonalize(const Matrix& m) {
  const SvdResult dec = svd(m);
  return dec.u * dec.v_t;
}

// W0-anchored variants: the preservation block pulls the working K0's
// outputs back to fixed targets (W0 K0, plus each applied batch's values
// when refresh_k0 is on) instead of freezing whatever the current matrix
// does. Drift on preserved keys then stays bounded rather than compounding.
EditStep mose_edit_anchored(const Matrix& w, const Matrix& k0,
                            const Matrix& v0, const EditBatch& batch,
                            const EditConfig& cfg) {
  ProcrustesProblem prob = assemble(w, k0, batch.keys, batch.values, cfg);
  if (k0.cols() > 0) {
    prob.b.leftCols(k0.cols()) = std::sqrt(cfg.lambda) * v0;
  }
  const OrthogonalMatrix r = solve(prob);
  EditStep step;
  step.kind = UpdateKind::multiplicative;
  step.update = r.matrix();
  step.w_after = r.matrix() * w;
  return step;
}

EditStep additive_edit_anchored(const Matrix& w, const Matrix& k0,
                                const Matrix& v0, const EditBatch& batch,
                                const EditConfig& cfg) {
  assemble(w, k0, batch.keys, batch.values, cfg);
  Matrix normal = batch.keys * batch.keys.transpose();
  Matrix rhs = (batch.values - w * batch.keys) * batch.keys.transpose();
  if (k0.cols() > 0) {
    normal += cfg.lambda * (k0 * k0.transpose());
    rhs += cfg.lambda * (v0 - w * k0) * k0.transpose();
  }
  const Matrix delta = rhs * pseudo_inverse(normal, cfg.rank_tol);
  EditStep step;
  step.kind = UpdateKind::additive;
  step.update = delta;
  step.w_after = w + delta;
  return step;
}

}  // namespace

RunResult run_sequential(const EditorSpec& spec, const MemoryModel& mem,
                         const std::vector<EditBatch>& stream,
                         const StepHook& hook) {
  if (stream.empty()) {
    throw std::invalid_argument("run_sequential: empty stream");
  }
  const Eigen::Index d = mem.w0.rows();
  RunResult result;
  result.final_w = mem.w0;
  result.r_total = Matrix::Identity(d, d);
  result.records.push_back(record(0, mem.w0, mem.w0, spec.cfg.rank_tol));

  Matrix working_k0 = mem.preserved_keys;
  Matrix target_v0 = mem.w0 * mem.preserved_keys;  // anchor outputs
  int multiplicative_steps = 0;

  for (size_t i = 0; i < stream.size(); ++i) {
    const EditBatch& batch = stream[i];
    const int step_no = static_cast<int>(i) + 1;
    EditStep step;
    try {
      switch (spec.kind) {
        case EditorKind::mose:
          step = spec.anchor == Anchor::w0
                     ? mose_edit_anchored(result.final_w, working_k0,
                                          target_v0, batch, spec.cfg)
                     : mose_edit(result.final_w, working_k0, batch, spec.cfg);
          break;
        case EditorKind::additive:
          step = spec.anchor == Anchor::w0
                     ? additive_edit_anchored(result.final_w, working_k0,
                                              target_v0, batch, spec.cfg)
                     : additive_edit(result.final_w, working_k0, batch,
                                     spec.cfg);
          break;
        case EditorKind::random_orthogonal:
          step = random_orthogonal_edit(result.final_w,
                                        spec.seed + static_cast<std::uint64_t>(i));
          break;
        case EditorKind::random_additive:
          step = random_additive_edit(result.final_w, spec.scale,
                                      spec.seed + static_cast<std::uint64_t>(i));
          break;
        case EditorKind::identity:
          step.kind = UpdateKind::identity;
          step.w_after = result.final_w;
          break;
      }
    } catch (const std::exception& e) {
      result.error = "step " + std::to_string(step_no) + ": " + e.what();
      return result;
    }
    step.step_index = step_no;
    result.final_w = step.w_after;
    if (step.kind == UpdateKind::multiplicative) {
      result.r_total = step.update * result.r_total;
      ++multiplicative_steps;
      if (spec.reortho_interval > 0 &&
          multiplicative_steps % spec.reortho_interval == 0) {
        result.r_total = reorthogonalize(result.r_total);
      }
    }
    if (spec.refresh_k0 &&
        (spec.kind == EditorKind::mose || spec.kind == EditorKind::additive)) {
      Matrix grown(working_k0.rows(), working_k0.cols() + batch.keys.cols());
      grown << working_k0, batch.keys;
      working_k0 = std::move(grown);
      Matrix grown_v(target_v0.rows(), target_v0.cols() + batch.values.cols());
      grown_v << target_v0, batch.values;
      target_v0 = std::move(grown_v);
    }
    result.records.push_back(
        record(step_no, result.final_w, mem.w0, spec.cfg.rank_tol));
    result.steps.push_back(std::move(step));
    if (hook) hook(step_no, result.final_w);
  }
  return result;
}

}  // namespace mose
