#include "mose/stability.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace mose {

StabilityRecord record(int step, const Matrix& w, const Matrix& w0,
                       double rank_tol) {
  if (w.rows() != w0.rows() || w.cols() != w0.cols()) {
    throw DimensionError("stability::record: w and w0 shapes differ");
  }
  StabilityRecord rec;
  rec.step = step;
  rec.frob_norm = frobenius_norm(w);
  rec.spectral_norm = spectral_norm(w);
  rec.cond_number = condition_number(w, rank_tol);
  rec.deviation = (w - w0).norm();
  return rec;
}

StabilitySummary summarize(const std::vector<StabilityRecord>& records) {
  if (records.empty()) {
    throw std::invalid_argument("summarize: no records");
  }
  auto fold = [&](auto field) {
    FieldSummary s;
    s.min = s.max = s.final_value = records.front().*field;
    for (const auto& r : records) {
      s.min = std::min(s.min, r.*field);
      s.max = std::max(s.max, r.*field);
    }
    s.final_value = records.back().*field;
    const double initial = records.front().*field;
    s.drift_ratio = initial == 0.0
                        ? (s.final_value == 0.0 ? 1.0 : std::numeric_limits<double>::infinity())
                        : s.final_value / initial;
    return s;
  };
  StabilitySummary out;
  out.frob_norm = fold(&StabilityRecord::frob_norm);
  out.cond_number = fold(&StabilityRecord::cond_number);
  out.deviation = fold(&StabilityRecord::deviation);
  out.spectral_norm = fold(&StabilityRecord::spectral_norm);
  return out;
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_stability_csv(std::ostream& os,
                         const std::vector<StabilityRecord>& records,
                         const std::string& editor_label) {
  const bool labeled = !editor_label.empty();
  os << (labeled ? "editor,step,frob_norm,spectral_norm,cond_number,deviation\n"
                 : "step,frob_norm,spectral_norm,cond_number,deviation\n");
  for (const auto& r : records) {
    if (labeled) os << editor_label << ',';
    os << r.step << ',' << fmt17(r.frob_norm) << ',' << fmt17(r.spectral_norm)
       << ',' << fmt17(r.cond_number) << ',' << fmt17(r.deviation) << '\n';
  }
}

std::vector<StabilityRecord> read_stability_csv(std::istream& is) {
  std::vector<StabilityRecord> out;
  std::string line;
  if (!std::getline(is, line)) return out;
  const bool labeled = line.rfind("editor,", 0) == 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    if (labeled) std::getline(ss, field, ',');
    StabilityRecord r;
    std::getline(ss, field, ',');
    r.step = std::stoi(field);
    std::getline(ss, field, ',');
    r.frob_norm = std::stod(field);
    std::getline(ss, field, ',');
    r.spectral_norm = std::stod(field);
    std::getline(ss, field, ',');
    r.cond_number = std::stod(field);
    std::getline(ss, field, ',');
    r.deviation = std::stod(field);
    out.push_back(r);
  }
  return out;
}

}  // namespace mose
