#include "mose/layers.hpp"

#include <cmath>
#include <limits>

namespace mose {

void LayerStack::validate() const {
  if (depth() < 3) throw std::invalid_argument("LayerStack: depth must be >= 3");
  for (size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].w_proj.cols() != layers[l].w_fc.rows()) {
      throw DimensionError("LayerStack: w_proj/w_fc mismatch at layer " +
                           std::to_string(l));
    }
    if (l + 1 < layers.size() &&
        layers[l].w_proj.rows() != layers[l + 1].w_fc.cols()) {
      throw DimensionError("LayerStack: layers " + std::to_string(l) + " and " +
                           std::to_string(l + 1) + " do not compose");
    }
  }
}

Vector apply_activation(Activation act, const Vector& v) {
  switch (act) {
    case Activation::relu: return v.cwiseMax(0.0);
    case Activation::identity: return v;
  }
  throw std::logic_error("unreachable");
}

namespace {

// Layer inputs under forward propagation (or the raw x everywhere).
std::vector<Vector> layer_inputs(const LayerStack& stack, const Vector& x,
                                 bool propagate) {
  std::vector<Vector> inputs;
  inputs.reserve(stack.layers.size());
  Vector current = x;
  for (const auto& layer : stack.layers) {
    inputs.push_back(current);
    if (propagate) {
      current = layer.w_proj *
                apply_activation(stack.activation, layer.w_fc * current);
    }
  }
  return inputs;
}

}  // namespace

std::vector<LayerScore> score_activations(const LayerStack& stack,
                                          const Vector& x, bool propagate) {
  stack.validate();
  if (x.size() != stack.layers.front().w_fc.cols()) {
    throw DimensionError("score_activations: x does not match layer 0 input");
  }
  if (!x.allFinite() || x.norm() == 0.0) {
    throw std::invalid_argument("score_activations: x must be finite and nonzero");
  }
  const auto inputs = layer_inputs(stack, x, propagate);
  std::vector<LayerScore> scores;
  scores.reserve(stack.layers.size());
  for (size_t l = 0; l < stack.layers.size(); ++l) {
    LayerScore s;
    s.layer_index = static_cast<int>(l);
    s.activation_norm =
        apply_activation(stack.activation, stack.layers[l].w_fc * inputs[l])
            .norm();
    scores.push_back(s);
  }
  return scores;
}

int select_layer(const LayerStack& stack, const Vector& x,
                 const std::vector<LayerEdit>& per_layer_edits,
                 bool propagate) {
  stack.validate();
  if (per_layer_edits.size() != stack.layers.size()) {
    throw std::invalid_argument("select_layer: one edit block per layer required");
  }
  auto scores = score_activations(stack, x, propagate);
  bool any_activation = false;
  for (const auto& s : scores) any_activation |= s.activation_norm > 0.0;

  int best = -1;
  double best_score = std::numeric_limits<double>::infinity();
  for (size_t l = 0; l < stack.layers.size(); ++l) {
    const Matrix& w = stack.layers[l].w_proj;
    const LayerEdit& edit = per_layer_edits[l];
    if (edit.keys.rows() != w.cols() || edit.values.rows() != w.rows() ||
        edit.keys.cols() != edit.values.cols()) {
      throw DimensionError("select_layer: edit block mismatch at layer " +
                           std::to_string(l));
    }
    const double w_norm = spectral_norm(w);
    double denom = w_norm;
    if (any_activation) denom *= scores[l].activation_norm;
    if (denom == 0.0) continue;
    const double score = (edit.values - w * edit.keys).norm() / denom;
    scores[l].normalized_residual = score;
    if (score < best_score) {
      best_score = score;
      best = static_cast<int>(l);
    }
  }
  if (best < 0) {
    throw std::runtime_error("select_layer: every layer excluded (zero denominators)");
  }
  return best;
}

std::vector<int> neighbors(int l_star, int depth) {
  if (l_star < 0 || l_star >= depth) {
    throw std::invalid_argument("neighbors: l_star out of range");
  }
  std::vector<int> out;
  for (int l = l_star - 1; l <= l_star + 1; ++l) {
    if (l >= 0 && l < depth) out.push_back(l);
  }
  return out;
}

LayerStack edit_layers(const LayerStack& stack, const std::vector<int>& targets,
                       const std::vector<LayerEdit>& batches,
                       const EditConfig& cfg) {
  stack.validate();
  if (targets.size() != batches.size()) {
    throw std::invalid_argument("edit_layers: targets and batches must align");
  }
  LayerStack out = stack;
  for (size_t i = 0; i < targets.size(); ++i) {
    const int l = targets[i];
    if (l < 0 || l >= stack.depth()) {
      throw std::invalid_argument("edit_layers: target out of range");
    }
    Matrix& w = out.layers[static_cast<size_t>(l)].w_proj;
    EditBatch batch;
    batch.keys = batches[i].keys;
    batch.values = batches[i].values;
    batch.target_value_ids.assign(static_cast<size_t>(batch.keys.cols()), 0);
    // Preserve the layer's action on the whole hidden space; a layer has no
    // knowledge bank to supply K0.
    const Matrix k0 = Matrix::Identity(w.cols(), w.cols());
    w = mose_edit(w, k0, batch, cfg).w_after;
  }
  return out;
}

}  // namespace mose
