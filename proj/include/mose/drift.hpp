#pragma once

#include "mose/editors.hpp"

#include <iosfwd>

namespace mose {

/// Per-edit output comparison: "current" is each edit's own update applied to
/// w0 in isolation, "cumulative" is the final matrix of the chain. Both
/// clouds are projected jointly onto the top-k principal components.
struct DriftResult {
  Matrix current;     // d x N, isolated-update outputs
  Matrix cumulative;  // d x N, final-matrix outputs
  Matrix projected;   // k x 2N: current columns first, then cumulative
  double separation = 0.0;
};

/// separation = distance between the projected clouds' centroids divided by
/// the pooled per-cloud mean radius (0 when the centroids coincide).
DriftResult drift_analysis(const MemoryModel& mem,
                           const std::vector<EditStep>& steps,
                           const std::vector<EditBatch>& stream, int k = 2,
                           int max_samples = 200);

/// columns: edit_index,regime,pc1,pc2  (regime in {current, cumulative})
void write_drift_csv(std::ostream& os, const DriftResult& result);

}  // namespace mose
