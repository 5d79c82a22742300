#include "mose/serialize.hpp"

namespace mose {

Json matrix_to_json(const Matrix& m) {
  std::vector<double> data;
  data.reserve(static_cast<size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Matrix matrix_from_json(const Json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw std::invalid_argument("matrix_from_json: data length mismatch");
  }
  Matrix m(rows, cols);
  size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = data[k++];
  return m;
}

Json memory_to_json(const MemoryModel& mem) {
  Json knowledge = Json::array();
  for (const auto& pair : mem.knowledge) {
    knowledge.push_back(
        {{"key", std::vector<double>(pair.key.data(),
                                     pair.key.data() + pair.key.size())},
         {"value_id", pair.value_id}});
  }
  return Json{{"w0", matrix_to_json(mem.w0)},
              {"knowledge", knowledge},
              {"codebook", matrix_to_json(mem.codebook)},
              {"preserved_keys", matrix_to_json(mem.preserved_keys)}};
}

MemoryModel memory_from_json(const Json& j) {
  MemoryModel mem;
  mem.w0 = matrix_from_json(j.at("w0"));
  mem.codebook = matrix_from_json(j.at("codebook"));
  mem.preserved_keys = matrix_from_json(j.at("preserved_keys"));
  for (const auto& entry : j.at("knowledge")) {
    const auto key = entry.at("key").get<std::vector<double>>();
    KnowledgePair pair;
    pair.key = Eigen::Map<const Vector>(key.data(),
                                        static_cast<Eigen::Index>(key.size()));
    pair.value_id = entry.at("value_id").get<int>();
    mem.knowledge.push_back(std::move(pair));
  }
  return mem;
}

Json batch_to_json(const EditBatch& batch) {
  return Json{{"keys", matrix_to_json(batch.keys)},
              {"target_value_ids", batch.target_value_ids}};
}

EditBatch batch_from_json(const Json& j, const Matrix& codebook) {
  EditBatch batch;
  batch.keys = matrix_from_json(j.at("keys"));
  batch.target_value_ids = j.at("target_value_ids").get<std::vector<int>>();
  batch.values.resize(codebook.rows(),
                      static_cast<Eigen::Index>(batch.target_value_ids.size()));
  for (size_t i = 0; i < batch.target_value_ids.size(); ++i) {
    batch.values.col(static_cast<Eigen::Index>(i)) =
        codebook.col(batch.target_value_ids[i]);
  }
  return batch;
}

Json stack_to_json(const LayerStack& stack) {
  Json layers = Json::array();
  for (const auto& layer : stack.layers) {
    layers.push_back({{"w_fc", matrix_to_json(layer.w_fc)},
                      {"w_proj", matrix_to_json(layer.w_proj)}});
  }
  return Json{{"layers", layers}};
}

LayerStack stack_from_json(const Json& j) {
  LayerStack stack;
  for (const auto& entry : j.at("layers")) {
    stack.layers.push_back({matrix_from_json(entry.at("w_fc")),
                            matrix_from_json(entry.at("w_proj"))});
  }
  return stack;
}

Json metrics_to_json(const MetricsReport& report) {
  auto field = [](const std::optional<double>& v) {
    return v ? Json(*v) : Json(nullptr);
  };
  return Json{{"reliability", field(report.reliability)},
              {"generalization", field(report.generalization)},
              {"locality", field(report.locality)},
              {"counts", {report.n_in, report.n_nbr, report.n_out}}};
}

Json step_record_to_json(const StabilityRecord& rec, UpdateKind kind,
                         std::optional<double> reliability) {
  const char* kind_name = kind == UpdateKind::multiplicative ? "multiplicative"
                          : kind == UpdateKind::additive     ? "additive"
                                                             : "identity";
  Json j{{"step", rec.step},
         {"kind", kind_name},
         {"norm", rec.frob_norm},
         {"cond", rec.cond_number},
         {"deviation", rec.deviation}};
  if (reliability) j["reliability"] = *reliability;
  return j;
}

}  // namespace mose
