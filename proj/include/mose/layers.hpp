#pragma once

#include "mose/editors.hpp"

#include <vector>

namespace mose {

enum class Activation { relu, identity };

struct Layer {
  Matrix w_fc;    // h x p_in
  Matrix w_proj;  // d x h, the editable weight
};

/// Toy FFN stack: per layer, hidden = act(w_fc x), output = w_proj hidden.
/// Adjacent shapes must compose and depth must be >= 3.
struct LayerStack {
  std::vector<Layer> layers;
  Activation activation = Activation::relu;

  int depth() const { return static_cast<int>(layers.size()); }
  void validate() const;
};

struct LayerScore {
  int layer_index = 0;
  double activation_norm = 0.0;      // ||act(w_fc x_l)||_2
  double normalized_residual = 0.0;  // ||V - W K||_F / (||W||_2 ||act(...)||_2)
};

/// Per-layer edit targets: keys in the layer's hidden space, values in its
/// output space.
struct LayerEdit {
  Matrix keys;    // h x nE
  Matrix values;  // d x nE
};

Vector apply_activation(Activation act, const Vector& v);

/// Activation-strength scores under forward propagation (or against the raw
/// input at every layer when propagate = false).
std::vector<LayerScore> score_activations(const LayerStack& stack,
                                          const Vector& x,
                                          bool propagate = true);

/// argmin over layers of the normalized residual; layers with a zero
/// denominator are excluded unless every activation vanishes, in which case
/// the residual is normalized by ||W||_2 alone. Ties go to the lowest index.
int select_layer(const LayerStack& stack, const Vector& x,
                 const std::vector<LayerEdit>& per_layer_edits,
                 bool propagate = true);

/// {l-1, l, l+1} clamped to [0, depth), ascending.
std::vector<int> neighbors(int l_star, int depth);

/// Apply an orthogonal edit to w_proj of each target layer; other layers are
/// returned untouched.
LayerStack edit_layers(const LayerStack& stack, const std::vector<int>& targets,
                       const std::vector<LayerEdit>& batches,
                       const EditConfig& cfg);

}  // namespace mose
