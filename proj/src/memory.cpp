#include "mose/memory.hpp"

#include <cmath>
#include <random>

namespace mose {

namespace {

Vector random_unit_vector(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(dim);
  for (;;) {
    for (int i = 0; i < dim; ++i) v(i) = gauss(rng);
    const double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

// Max |cos| against the columns gathered so far.
double coherence_against(const Matrix& cols, Eigen::Index count, const Vector& v) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < count; ++j) {
    worst = std::max(worst, std::abs(cols.col(j).dot(v)));
  }
  return worst;
}

Matrix sample_incoherent_columns(int dim, int n, double max_coherence,
                                 std::mt19937_64& rng, int max_tries,
                                 const char* what) {
  Matrix cols(dim, n);
  for (int j = 0; j < n; ++j) {
    bool placed = false;
    for (int t = 0; t < max_tries; ++t) {
      const Vector v = random_unit_vector(dim, rng);
      if (coherence_against(cols, j, v) < max_coherence) {
        cols.col(j) = v;
        placed = true;
        break;
      }
    }
    if (!placed) {
      throw std::runtime_error(std::string(what) +
                               ": coherence bound unreachable after retries");
    }
  }
  return cols;
}

}  // namespace

MemoryModel build_memory(int d, int p, int n_knowledge, int c,
                         std::uint64_t seed, double codebook_margin) {
  if (d < 8 || p < 8) throw std::invalid_argument("build_memory: d, p must be >= 8");
  if (c < 1 || c > d) throw std::invalid_argument("build_memory: need 1 <= c <= d");
  if (n_knowledge < 0 || n_knowledge > p) {
    throw std::invalid_argument("build_memory: need 0 <= n_knowledge <= p");
  }
  std::mt19937_64 rng(seed);

  MemoryModel mem;
  mem.codebook =
      sample_incoherent_columns(d, c, codebook_margin, rng, 1000, "codebook");

  if (n_knowledge == 0) {
    mem.w0 = Matrix::Zero(d, p);
    mem.preserved_keys = Matrix(p, 0);
    return mem;
  }

  const Matrix keys =
      sample_incoherent_columns(p, n_knowledge, 0.9, rng, 1000, "keys");
  std::uniform_int_distribution<int> pick(0, c - 1);
  Matrix targets(d, n_knowledge);
  mem.knowledge.reserve(n_knowledge);
  for (int j = 0; j < n_knowledge; ++j) {
    const int id = pick(rng);
    targets.col(j) = mem.codebook.col(id);
    mem.knowledge.push_back({keys.col(j), id});
  }

  // Ridge fit W0 = V K^T (K K^T + alpha I)^-1; alpha small enough that every
  // pair decodes exactly at the 0.5 codebook margin.
  const double alpha = 1e-8;
  const Matrix gram = keys * keys.transpose() +
                      alpha * Matrix::Identity(p, p);
  mem.w0 = gram.ldlt().solve(keys * targets.transpose()).transpose();
  mem.preserved_keys = keys;

  // The ridge fit alone has rank at most c, so the step-0 condition number
  // would be set by the ridge epsilon. Complete W0 on the orthogonal
  // complement of the key span: bank keys lie in span(keys), so their
  // outputs -- and therefore their decodes -- are untouched exactly.
  if (n_knowledge < p) {
    const int extra = p - n_knowledge;
    if (extra > d) {
      throw std::invalid_argument(
          "build_memory: need p - n_knowledge <= d to complete the fit");
    }
    Eigen::HouseholderQR<Matrix> qr(keys);
    const Matrix q_full = qr.householderQ();
    const Matrix z = q_full.rightCols(extra);  // basis of span(keys)^perp
    const Matrix u = random_orthogonal(d, rng()).matrix().leftCols(extra);
    mem.w0 += 0.5 * spectral_norm(mem.w0) * u * z.transpose();
  }

  for (const auto& pair : mem.knowledge) {
    if (decode(mem.w0, pair.key, mem.codebook) != pair.value_id) {
      throw std::runtime_error("build_memory: ridge fit failed to decode a pair");
    }
  }
  return mem;
}

int decode(const Matrix& w, const Vector& key, const Matrix& codebook) {
  if (w.cols() != key.size() || w.rows() != codebook.rows()) {
    throw DimensionError("decode: incompatible shapes");
  }
  const Vector out = w * key;
  const double n = out.norm();
  if (n == 0.0) return kUndecodable;
  int best = 0;
  double best_cos = -2.0;
  for (Eigen::Index j = 0; j < codebook.cols(); ++j) {
    const double cs = out.dot(codebook.col(j)) / (n * codebook.col(j).norm());
    if (cs > best_cos) {
      best_cos = cs;
      best = static_cast<int>(j);
    }
  }
  return best;
}

std::vector<EditBatch> make_edit_stream(const MemoryModel& mem, int n_edits,
                                        int batch_size, std::uint64_t seed) {
  if (n_edits < 1) throw std::invalid_argument("make_edit_stream: n_edits >= 1");
  if (batch_size < 1) throw std::invalid_argument("make_edit_stream: batch_size >= 1");
  const int p = static_cast<int>(mem.w0.cols());
  const int c = static_cast<int>(mem.codebook.cols());
  if (c < 2) throw std::invalid_argument("make_edit_stream: codebook too small to change targets");

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, c - 1);

  // All existing keys (bank + previously generated edits) for the coherence
  // screen.
  Matrix existing(p, mem.knowledge.size() + n_edits);
  Eigen::Index count = 0;
  for (const auto& pair : mem.knowledge) existing.col(count++) = pair.key;

  std::vector<EditBatch> stream;
  int remaining = n_edits;
  while (remaining > 0) {
    const int width = std::min(batch_size, remaining);
    EditBatch batch;
    batch.keys.resize(p, width);
    batch.values.resize(mem.w0.rows(), width);
    batch.target_value_ids.reserve(width);
    for (int j = 0; j < width; ++j) {
      Vector key;
      for (int t = 0;; ++t) {
        key = random_unit_vector(p, rng);
        if (coherence_against(existing, count, key) < 0.9) break;
        if (t >= 1000) {
          throw std::runtime_error("make_edit_stream: key coherence bound unreachable");
        }
      }
      existing.col(count++) = key;
      const int pre = decode(mem.w0, key, mem.codebook);
      int target;
      do {
        target = pick(rng);
      } while (target == pre);
      batch.keys.col(j) = key;
      batch.values.col(j) = mem.codebook.col(target);
      batch.target_value_ids.push_back(target);
    }
    stream.push_back(std::move(batch));
    remaining -= width;
  }
  return stream;
}

EvalSuite make_eval_suite(const MemoryModel& mem,
                          const std::vector<EditBatch>& applied, double rho,
                          int m_neighbors, std::uint64_t seed) {
  if (!(rho > 0.0 && rho <= 0.5)) {
    throw std::invalid_argument("make_eval_suite: need 0 < rho <= 0.5");
  }
  if (m_neighbors < 1) throw std::invalid_argument("make_eval_suite: m_neighbors >= 1");

  std::mt19937_64 rng(seed);
  EvalSuite suite;
  for (const auto& batch : applied) {
    for (Eigen::Index j = 0; j < batch.keys.cols(); ++j) {
      suite.in_scope.push_back(
          {batch.keys.col(j), batch.target_value_ids[static_cast<size_t>(j)]});
    }
  }
  const int p = static_cast<int>(mem.w0.cols());
  for (const auto& cs : suite.in_scope) {
    for (int m = 0; m < m_neighbors; ++m) {
      Vector noise = random_unit_vector(p, rng) * rho;
      Vector perturbed = cs.key + noise;
      suite.neighborhood.push_back({perturbed / perturbed.norm(),
                                    cs.expected_value_id});
    }
  }
  for (const auto& pair : mem.knowledge) {
    suite.out_of_scope.push_back({pair.key, pair.value_id});
  }
  return suite;
}

}  // namespace mose
