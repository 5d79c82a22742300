#pragma once

#include "mose/editors.hpp"
#include "mose/layers.hpp"
#include "mose/metrics.hpp"

#include <json.hpp>

namespace mose {

using Json = nlohmann::json;

// Matrices serialize as {"rows": r, "cols": c, "data": [row-major]}.
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

Json memory_to_json(const MemoryModel& mem);
MemoryModel memory_from_json(const Json& j);

Json batch_to_json(const EditBatch& batch);
/// The codebook rebuilds the target value columns, which are not serialized.
EditBatch batch_from_json(const Json& j, const Matrix& codebook);

Json stack_to_json(const LayerStack& stack);
LayerStack stack_from_json(const Json& j);

Json metrics_to_json(const MetricsReport& report);

/// One steps.jsonl line: step, kind, norm, cond, deviation, and reliability
/// when it was evaluated at that step.
Json step_record_to_json(const StabilityRecord& rec, UpdateKind kind,
                         std::optional<double> reliability = std::nullopt);

}  // namespace mose
