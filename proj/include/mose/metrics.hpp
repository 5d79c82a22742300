#pragma once

#include "mose/memory.hpp"

#include <optional>

namespace mose {

struct MetricsReport {
  std::optional<double> reliability;     // absent when the suite is empty
  std::optional<double> generalization;
  std::optional<double> locality;
  int n_in = 0;
  int n_nbr = 0;
  int n_out = 0;
};

/// reliability  = fraction of in_scope keys decoding to their target id;
/// generalization = same over the neighborhood;
/// locality     = fraction of out_of_scope keys whose decode matches w_pre.
MetricsReport evaluate(const Matrix& w, const Matrix& w_pre,
                       const EvalSuite& suite, const Matrix& codebook);

}  // namespace mose
