#pragma once

#include "mose/linalg.hpp"

#include <vector>

namespace mose {

/// decode() result when w * key is the zero vector.
inline constexpr int kUndecodable = -1;

struct KnowledgePair {
  Vector key;    // unit-norm, length p
  int value_id;  // codebook column index
};

/// Synthetic linear associative memory: W0 maps unit keys onto codebook
/// prototypes; the full knowledge-bank key matrix doubles as K0.
struct MemoryModel {
  Matrix w0;             // d x p
  std::vector<KnowledgePair> knowledge;
  Matrix codebook;       // d x c, unit-norm columns
  Matrix preserved_keys; // p x n0
};

struct EditBatch {
  Matrix keys;    // p x nE, unit-norm columns
  std::vector<int> target_value_ids;
  Matrix values;  // d x nE, codebook columns of the targets
};

struct EvalCase {
  Vector key;
  int expected_value_id;
};

struct EvalSuite {
  std::vector<EvalCase> in_scope;
  std::vector<EvalCase> neighborhood;
  std::vector<EvalCase> out_of_scope;
};

/// Build a memory bank with n_knowledge random unit keys, a c-column unit
/// codebook (pairwise |cos| below `codebook_margin`), and W0 fit by ridge
/// least squares so every pair decodes to its value id. Deterministic per
/// seed. n_knowledge = 0 gives the zero matrix and no preserved keys.
MemoryModel build_memory(int d, int p, int n_knowledge, int c,
                         std::uint64_t seed, double codebook_margin = 0.5);

/// argmax over codebook columns of cosine similarity with w * key; ties go to
/// the lowest index; returns kUndecodable on a zero output vector.
int decode(const Matrix& w, const Vector& key, const Matrix& codebook);

/// ceil(n_edits / batch_size) batches of fresh unit keys (coherence < 0.9
/// with the bank and each other), targets drawn uniformly subject to
/// differing from the pre-edit decode. Deterministic per seed.
std::vector<EditBatch> make_edit_stream(const MemoryModel& mem, int n_edits,
                                        int batch_size, std::uint64_t seed);

/// in_scope = applied edits; neighborhood = m_neighbors Gaussian
/// perturbations per edit at noise-to-signal ratio rho, renormalized;
/// out_of_scope = the original knowledge bank.
EvalSuite make_eval_suite(const MemoryModel& mem,
                          const std::vector<EditBatch>& applied, double rho,
                          int m_neighbors, std::uint64_t seed);

}  // namespace mose
