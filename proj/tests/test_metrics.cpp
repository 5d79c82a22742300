#include "mose/metrics.hpp"
#include "mose/editors.hpp"
#include "mose/serialize.hpp"

#include <doctest.h>

using namespace mose;

TEST_CASE("identity comparison gives locality 1.0 exactly") {
  const auto mem = build_memory(32, 32, 16, 8, 0);
  const auto stream = make_edit_stream(mem, 10, 1, 1);
  const auto suite = make_eval_suite(mem, stream, 0.1, 2, 2);
  const auto report = evaluate(mem.w0, mem.w0, suite, mem.codebook);
  CHECK(*report.locality == 1.0);
  CHECK(report.n_out == 16);
}

TEST_CASE("exactly satisfied edits give reliability 1.0 exactly") {
  const auto mem = build_memory(32, 32, 16, 8, 0);
  const auto stream = make_edit_stream(mem, 5, 1, 1);
  // Force every edit to be satisfied exactly: a rank-1 memory per edit
  // stacked additively would interfere, so check each edit against a matrix
  // built to output exactly its target.
  EvalSuite suite = make_eval_suite(mem, stream, 0.1, 2, 2);
  for (const auto& batch : stream) {
    const Matrix w = batch.values.col(0) * batch.keys.col(0).transpose();
    EvalSuite one;
    one.in_scope = {{batch.keys.col(0), batch.target_value_ids[0]}};
    const auto report = evaluate(w, mem.w0, one, mem.codebook);
    CHECK(*report.reliability == 1.0);
  }
}

TEST_CASE("empty suites report absent scores, never 0 or 1") {
  const auto mem = build_memory(16, 16, 0, 4, 0);
  EvalSuite empty;
  const auto report = evaluate(mem.w0, mem.w0, empty, mem.codebook);
  CHECK_FALSE(report.reliability.has_value());
  CHECK_FALSE(report.generalization.has_value());
  CHECK_FALSE(report.locality.has_value());
  const Json j = metrics_to_json(report);
  CHECK(j.at("reliability").is_null());
  CHECK(j.at("counts") == Json({0, 0, 0}));
}

TEST_CASE("scores are exact rationals in [0, 1]") {
  const auto mem = build_memory(32, 32, 16, 8, 3);
  const auto stream = make_edit_stream(mem, 8, 1, 4);
  const auto suite = make_eval_suite(mem, stream, 0.1, 3, 5);
  EditorSpec spec;
  spec.kind = EditorKind::mose;
  const auto run = run_sequential(spec, mem, stream);
  REQUIRE_FALSE(run.error.has_value());
  const auto report = evaluate(run.final_w, mem.w0, suite, mem.codebook);
  auto is_rational = [](double score, int count) {
    const double scaled = score * count;
    return scaled == std::round(scaled) && score >= 0.0 && score <= 1.0;
  };
  CHECK(is_rational(*report.reliability, report.n_in));
  CHECK(is_rational(*report.generalization, report.n_nbr));
  CHECK(is_rational(*report.locality, report.n_out));
}

TEST_CASE("scores are invariant under positive scaling of w") {
  const auto mem = build_memory(32, 32, 16, 8, 6);
  const auto stream = make_edit_stream(mem, 8, 1, 7);
  const auto suite = make_eval_suite(mem, stream, 0.1, 2, 8);
  EditorSpec spec;
  spec.kind = EditorKind::additive;
  const auto run = run_sequential(spec, mem, stream);
  REQUIRE_FALSE(run.error.has_value());
  const auto a = evaluate(run.final_w, mem.w0, suite, mem.codebook);
  const auto b = evaluate(3.0 * run.final_w, mem.w0, suite, mem.codebook);
  CHECK(*a.reliability == *b.reliability);
  CHECK(*a.generalization == *b.generalization);
  CHECK(*a.locality == *b.locality);
}

TEST_CASE("metrics JSON uses the documented keys") {
  MetricsReport report;
  report.reliability = 0.5;
  report.generalization = 0.25;
  report.locality = 1.0;
  report.n_in = 2;
  report.n_nbr = 4;
  report.n_out = 8;
  const Json j = metrics_to_json(report);
  CHECK(j.at("reliability") == 0.5);
  CHECK(j.at("generalization") == 0.25);
  CHECK(j.at("locality") == 1.0);
  CHECK(j.at("counts") == Json({2, 4, 8}));
}
