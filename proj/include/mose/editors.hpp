#pragma once

#include "mose/memory.hpp"
#include "mose/procrustes.hpp"
#include "mose/stability.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mose {

enum class UpdateKind { multiplicative, additive, identity };

struct EditStep {
  int step_index = 0;
  UpdateKind kind = UpdateKind::identity;
  Matrix update;   // R (d x d) for multiplicative, delta-W for additive
  Matrix w_after;
};

/// One orthogonal Procrustes step: w_after = R w.
EditStep mose_edit(const Matrix& w, const Matrix& mem_k0, const EditBatch& batch,
                   const EditConfig& cfg);

/// Unconstrained minimizer of the same ridge objective:
/// W* = (lambda W K0 K0^T + V_E K_E^T)(lambda K0 K0^T + K_E K_E^T)^+,
/// reported as an additive step delta-W = W* - w.
EditStep additive_edit(const Matrix& w, const Matrix& mem_k0,
                       const EditBatch& batch, const EditConfig& cfg);

EditStep random_orthogonal_edit(const Matrix& w, std::uint64_t seed);

/// Gaussian delta-W scaled so ||delta||_F = scale * ||w||_F.
EditStep random_additive_edit(const Matrix& w, double scale, std::uint64_t seed);

/// Value of lambda ||W K0 - W_anchor K0||_F^2 + ||W K_E - V_E||_F^2.
double edit_objective(const Matrix& w, const Matrix& w_anchor,
                      const Matrix& mem_k0, const EditBatch& batch,
                      double lambda);

enum class EditorKind {
  mose,
  additive,
  random_orthogonal,
  random_additive,
  identity
};

EditorKind editor_from_name(const std::string& name);
std::string editor_name(EditorKind kind);

enum class Anchor { current, w0 };

struct EditorSpec {
  EditorKind kind = EditorKind::identity;
  EditConfig cfg;
  double scale = 0.05;       // random_additive step size
  std::uint64_t seed = 0;    // drives the random editors, per-step offset
  Anchor anchor = Anchor::current;
  int reortho_interval = 100;
  bool refresh_k0 = false;   // append edited keys to the working K0
};

struct RunResult {
  Matrix final_w;
  std::vector<EditStep> steps;
  std::vector<StabilityRecord> records;
  Matrix r_total;            // product of multiplicative updates
  std::optional<std::string> error;  // set when a step aborted the run
};

using StepHook = std::function<void(int step, const Matrix& w)>;

/// Fold the editor over the stream starting from mem.w0, recording stability
/// after every step. The first editor error aborts the run; partial records
/// are returned with the error set.
RunResult run_sequential(const EditorSpec& spec, const MemoryModel& mem,
                         const std::vector<EditBatch>& stream,
                         const StepHook& hook = {});

}  // namespace mose
