#include "mose/layers.hpp"

#include <doctest.h>

#include <random>

using namespace mose;

namespace {

Matrix random_matrix(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = gauss(rng);
  return m;
}

// Uniform stack: every layer maps dim -> dim through h hidden units.
LayerStack make_stack(int depth, int dim, int h, std::uint64_t seed) {
  LayerStack stack;
  for (int l = 0; l < depth; ++l) {
    stack.layers.push_back({random_matrix(h, dim, seed + 2 * static_cast<std::uint64_t>(l)),
                            random_matrix(dim, h, seed + 2 * static_cast<std::uint64_t>(l) + 1)});
  }
  return stack;
}

// Independent re-evaluation of the normalized residual from raw matrices.
int brute_force_argmin(const LayerStack& stack, const Vector& x,
                       const std::vector<LayerEdit>& edits) {
  Vector input = x;
  int best = -1;
  double best_score = std::numeric_limits<double>::infinity();
  for (size_t l = 0; l < stack.layers.size(); ++l) {
    const auto& layer = stack.layers[l];
    const Vector act = apply_activation(stack.activation, layer.w_fc * input);
    const double denom = spectral_norm(layer.w_proj) * act.norm();
    if (denom > 0.0) {
      const double score =
          (edits[l].values - layer.w_proj * edits[l].keys).norm() / denom;
      if (score < best_score) {
        best_score = score;
        best = static_cast<int>(l);
      }
    }
    input = layer.w_proj * act;
  }
  return best;
}

}  // namespace

TEST_CASE("score_activations: planted alignment wins") {
  // Layer 2's w_fc has a row aligned with its propagated input; other layers
  // see inputs in their w_fc nullspace-by-construction is hard to arrange
  // exactly, so plant a large gain instead and verify by brute force.
  LayerStack stack = make_stack(4, 6, 8, 1);
  const Vector x = Vector::Ones(6).normalized();
  // Forward-propagate to find layer 2's input, then plant a huge aligned row.
  Vector input = x;
  for (int l = 0; l < 2; ++l) {
    input = stack.layers[static_cast<size_t>(l)].w_proj *
            apply_activation(stack.activation,
                             stack.layers[static_cast<size_t>(l)].w_fc * input);
  }
  stack.layers[2].w_fc.row(0) = 100.0 * input.transpose() / input.norm();
  const auto scores = score_activations(stack, x);
  int argmax = 0;
  for (size_t l = 1; l < scores.size(); ++l) {
    if (scores[l].activation_norm > scores[static_cast<size_t>(argmax)].activation_norm)
      argmax = static_cast<int>(l);
  }
  CHECK(argmax == 2);
}

TEST_CASE("score_activations rejects the zero vector") {
  const auto stack = make_stack(3, 4, 5, 2);
  CHECK_THROWS_AS(score_activations(stack, Vector::Zero(4)),
                  std::invalid_argument);
}

TEST_CASE("identical layers score identically") {
  LayerStack stack = make_stack(3, 4, 4, 3);
  // Orthogonal identical layers keep the propagated input norm constant.
  const Matrix q = random_orthogonal(4, 7).matrix();
  for (auto& layer : stack.layers) {
    layer.w_fc = q;
    layer.w_proj = q.transpose();
  }
  stack.activation = Activation::identity;
  const Vector x = random_matrix(4, 1, 8).col(0);
  const auto scores = score_activations(stack, x);
  for (size_t l = 1; l < scores.size(); ++l) {
    CHECK(scores[l].activation_norm ==
          doctest::Approx(scores[0].activation_norm));
  }
}

TEST_CASE("select_layer: zero numerator wins") {
  const auto stack = make_stack(5, 6, 8, 4);
  const Vector x = random_matrix(6, 1, 5).col(0);
  std::vector<LayerEdit> edits;
  for (int l = 0; l < 5; ++l) {
    LayerEdit e;
    e.keys = random_matrix(8, 2, 10 + static_cast<std::uint64_t>(l));
    if (l == 3) {
      e.values = stack.layers[3].w_proj * e.keys;  // already satisfied
    } else {
      e.values = random_matrix(6, 2, 20 + static_cast<std::uint64_t>(l));
    }
    edits.push_back(std::move(e));
  }
  CHECK(select_layer(stack, x, edits) == 3);
}

TEST_CASE("select_layer: full symmetry breaks ties at index 0") {
  LayerStack stack = make_stack(3, 4, 4, 6);
  for (auto& layer : stack.layers) {
    // Identity weights and a positive input: relu(I x) = x exactly, so every
    // layer sees a bit-identical input and all scores tie.
    layer.w_fc = Matrix::Identity(4, 4);
    layer.w_proj = Matrix::Identity(4, 4);
  }
  stack.activation = Activation::relu;
  const Vector x = random_matrix(4, 1, 7).col(0).cwiseAbs();
  LayerEdit e;
  e.keys = random_matrix(4, 1, 8);
  e.values = random_matrix(4, 1, 9);
  CHECK(select_layer(stack, x, {e, e, e}) == 0);
}

TEST_CASE("select_layer matches the brute-force oracle, seed 13") {
  std::mt19937_64 seeds(13);
  for (int trial = 0; trial < 10; ++trial) {
    const auto stack = make_stack(5, 6, 8, seeds());
    const Vector x = random_matrix(6, 1, seeds()).col(0).normalized();
    std::vector<LayerEdit> edits;
    for (int l = 0; l < 5; ++l) {
      edits.push_back({random_matrix(8, 2, seeds()), random_matrix(6, 2, seeds())});
    }
    CHECK(select_layer(stack, x, edits) == brute_force_argmin(stack, x, edits));
  }
}

TEST_CASE("select_layer scores are invariant under per-layer rescaling") {
  const auto stack = make_stack(4, 6, 8, 17);
  const Vector x = random_matrix(6, 1, 18).col(0);
  std::vector<LayerEdit> edits;
  for (int l = 0; l < 4; ++l) {
    edits.push_back({random_matrix(8, 2, 30 + static_cast<std::uint64_t>(l)),
                     random_matrix(6, 2, 40 + static_cast<std::uint64_t>(l))});
  }
  const int before = select_layer(stack, x, edits);

  // Scale the last layer's w_proj and its targets together; no downstream
  // input depends on the last w_proj, so only that layer's ratio is at stake.
  LayerStack scaled = stack;
  auto scaled_edits = edits;
  scaled.layers[3].w_proj *= 4.0;
  scaled_edits[3].values *= 4.0;
  CHECK(select_layer(scaled, x, scaled_edits) == before);
}

TEST_CASE("neighbors clamps at the boundaries") {
  CHECK(neighbors(0, 5) == std::vector<int>{0, 1});
  CHECK(neighbors(2, 5) == std::vector<int>{1, 2, 3});
  CHECK(neighbors(4, 5) == std::vector<int>{3, 4});
  for (int depth = 3; depth <= 7; ++depth) {
    for (int l = 0; l < depth; ++l) {
      const auto ns = neighbors(l, depth);
      CHECK(ns.size() >= 2);
      CHECK(ns.size() <= 3);
      CHECK(std::find(ns.begin(), ns.end(), l) != ns.end());
    }
  }
  CHECK_THROWS_AS(neighbors(5, 5), std::invalid_argument);
}

TEST_CASE("edit_layers: empty targets and zero-change batches") {
  const auto stack = make_stack(4, 6, 8, 21);
  const auto untouched = edit_layers(stack, {}, {}, {1.0, 0.0});
  for (size_t l = 0; l < stack.layers.size(); ++l) {
    CHECK(untouched.layers[l].w_proj == stack.layers[l].w_proj);
  }

  LayerEdit zero_change;
  zero_change.keys = random_matrix(8, 2, 22);
  zero_change.values = stack.layers[1].w_proj * zero_change.keys;
  const auto same = edit_layers(stack, {1}, {zero_change}, {1.0, 0.0});
  CHECK((same.layers[1].w_proj - stack.layers[1].w_proj).cwiseAbs().maxCoeff() <
        1e-8);
}

TEST_CASE("edit_layers touches exactly the targets and preserves norms") {
  const auto stack = make_stack(5, 6, 8, 23);
  const auto targets = neighbors(2, 5);
  std::vector<LayerEdit> batches;
  for (size_t i = 0; i < targets.size(); ++i) {
    batches.push_back({random_matrix(8, 2, 50 + i), random_matrix(6, 2, 60 + i)});
  }
  const auto edited = edit_layers(stack, targets, batches, {1.0, 0.0});
  for (int l = 0; l < 5; ++l) {
    const bool is_target =
        std::find(targets.begin(), targets.end(), l) != targets.end();
    const auto& before = stack.layers[static_cast<size_t>(l)].w_proj;
    const auto& after = edited.layers[static_cast<size_t>(l)].w_proj;
    if (is_target) {
      CHECK(std::abs(after.norm() - before.norm()) < 1e-9 * before.norm());
    } else {
      CHECK(after == before);
    }
    CHECK(edited.layers[static_cast<size_t>(l)].w_fc ==
          stack.layers[static_cast<size_t>(l)].w_fc);
  }
}
