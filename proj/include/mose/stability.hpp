#pragma once

#include "mose/linalg.hpp"

#include <iosfwd>
#include <vector>

namespace mose {

struct StabilityRecord {
  int step = 0;
  double frob_norm = 0.0;
  double cond_number = 0.0;  // +inf sentinel allowed
  double deviation = 0.0;    // ||w_step - w0||_F
  double spectral_norm = 0.0;
};

StabilityRecord record(int step, const Matrix& w, const Matrix& w0,
                       double rank_tol = 0.0);

struct FieldSummary {
  double min = 0.0;
  double max = 0.0;
  double final_value = 0.0;
  double drift_ratio = 0.0;  // final / initial
};

struct StabilitySummary {
  FieldSummary frob_norm;
  FieldSummary cond_number;
  FieldSummary deviation;
  FieldSummary spectral_norm;
};

StabilitySummary summarize(const std::vector<StabilityRecord>& records);

/// header: step,frob_norm,spectral_norm,cond_number,deviation
/// values printed with 17 significant digits (round-trippable).
void write_stability_csv(std::ostream& os,
                         const std::vector<StabilityRecord>& records,
                         const std::string& editor_label = "");

std::vector<StabilityRecord> read_stability_csv(std::istream& is);

}  // namespace mose
