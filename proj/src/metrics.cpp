#include "mose/metrics.hpp"

namespace mose {

MetricsReport evaluate(const Matrix& w, const Matrix& w_pre,
                       const EvalSuite& suite, const Matrix& codebook) {
  if (w.rows() != w_pre.rows() || w.cols() != w_pre.cols()) {
    throw DimensionError("evaluate: w and w_pre shapes differ");
  }
  MetricsReport report;
  report.n_in = static_cast<int>(suite.in_scope.size());
  report.n_nbr = static_cast<int>(suite.neighborhood.size());
  report.n_out = static_cast<int>(suite.out_of_scope.size());

  auto score_expected = [&](const std::vector<EvalCase>& cases)
      -> std::optional<double> {
    if (cases.empty()) return std::nullopt;
    int hits = 0;
    for (const auto& cs : cases) {
      if (decode(w, cs.key, codebook) == cs.expected_value_id) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(cases.size());
  };
  report.reliability = score_expected(suite.in_scope);
  report.generalization = score_expected(suite.neighborhood);

  if (!suite.out_of_scope.empty()) {
    int hits = 0;
    for (const auto& cs : suite.out_of_scope) {
      if (decode(w, cs.key, codebook) == decode(w_pre, cs.key, codebook)) {
        ++hits;
      }
    }
    report.locality = static_cast<double>(hits) /
                      static_cast<double>(suite.out_of_scope.size());
  }
  return report;
}

}  // namespace mose
