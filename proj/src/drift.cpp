#include "mose/drift.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace mose {

DriftResult drift_analysis(const MemoryModel& mem,
                           const std::vector<EditStep>& steps,
                           const std::vector<EditBatch>& stream, int k,
                           int max_samples) {
  if (steps.size() != stream.size()) {
    throw std::invalid_argument("drift_analysis: steps and stream misaligned");
  }
  if (steps.empty()) throw std::invalid_argument("drift_analysis: empty chain");
  if (k < 1) throw std::invalid_argument("drift_analysis: k >= 1");
  if (max_samples < 1) throw std::invalid_argument("drift_analysis: max_samples >= 1");

  const Eigen::Index d = mem.w0.rows();
  const Matrix& w_final = steps.back().w_after;

  std::vector<Vector> cur, cum;
  for (size_t i = 0; i < steps.size(); ++i) {
    if (static_cast<int>(cur.size()) >= max_samples) break;
    const EditStep& step = steps[i];
    Matrix w_isolated;
    switch (step.kind) {
      case UpdateKind::multiplicative:
        w_isolated = step.update * mem.w0;
        break;
      case UpdateKind::additive:
        w_isolated = mem.w0 + step.update;
        break;
      case UpdateKind::identity:
        w_isolated = mem.w0;
        break;
    }
    const Matrix& keys = stream[i].keys;
    if (keys.cols() != static_cast<Eigen::Index>(
                           stream[i].target_value_ids.size())) {
      throw std::invalid_argument("drift_analysis: malformed batch");
    }
    for (Eigen::Index j = 0; j < keys.cols(); ++j) {
      if (static_cast<int>(cur.size()) >= max_samples) break;
      cur.push_back(w_isolated * keys.col(j));
      cum.push_back(w_final * keys.col(j));
    }
  }

  const Eigen::Index n = static_cast<Eigen::Index>(cur.size());
  DriftResult out;
  out.current.resize(d, n);
  out.cumulative.resize(d, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    out.current.col(j) = cur[static_cast<size_t>(j)];
    out.cumulative.col(j) = cum[static_cast<size_t>(j)];
  }

  Matrix stacked(d, 2 * n);
  stacked << out.current, out.cumulative;
  const int k_eff = std::min<int>(k, static_cast<int>(std::min(d, 2 * n)));
  out.projected = pca_project(stacked, k_eff);
  if (k_eff < k) {
    Matrix padded = Matrix::Zero(k, 2 * n);
    padded.topRows(k_eff) = out.projected;
    out.projected = std::move(padded);
  }

  const Vector c_cur = out.projected.leftCols(n).rowwise().mean();
  const Vector c_cum = out.projected.rightCols(n).rowwise().mean();
  const double dist = (c_cur - c_cum).norm();
  if (dist == 0.0) {
    out.separation = 0.0;
  } else {
    double radius = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      radius += (out.projected.col(j) - c_cur).norm();
      radius += (out.projected.col(n + j) - c_cum).norm();
    }
    radius /= static_cast<double>(2 * n);
    out.separation =
        radius == 0.0 ? std::numeric_limits<double>::infinity() : dist / radius;
  }
  return out;
}

void write_drift_csv(std::ostream& os, const DriftResult& result) {
  os << "edit_index,regime,pc1,pc2\n";
  const Eigen::Index n = result.current.cols();
  auto emit = [&](Eigen::Index col, Eigen::Index idx, const char* regime) {
    char buf[96];
    const double pc1 = result.projected(0, col);
    const double pc2 = result.projected.rows() > 1 ? result.projected(1, col) : 0.0;
    std::snprintf(buf, sizeof(buf), "%lld,%s,%.17g,%.17g\n",
                  static_cast<long long>(idx), regime, pc1, pc2);
    os << buf;
  };
  for (Eigen::Index j = 0; j < n; ++j) emit(j, j, "current");
  for (Eigen::Index j = 0; j < n; ++j) emit(n + j, j, "cumulative");
}

}  // namespace mose
