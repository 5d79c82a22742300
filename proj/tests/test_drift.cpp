#include "mose/drift.hpp"

#include <doctest.h>

#include <sstream>

using namespace mose;

namespace {

struct Chain {
  MemoryModel mem;
  std::vector<EditBatch> stream;
  RunResult run;
};

Chain run_chain(EditorKind kind, int n_edits, std::uint64_t seed) {
  Chain chain;
  chain.mem = build_memory(32, 32, 16, 8, seed);
  chain.stream = make_edit_stream(chain.mem, n_edits, 1, seed + 100);
  EditorSpec spec;
  spec.kind = kind;
  spec.seed = seed + 200;
  chain.run = run_sequential(spec, chain.mem, chain.stream);
  REQUIRE_FALSE(chain.run.error.has_value());
  return chain;
}

}  // namespace

TEST_CASE("identity editor: clouds coincide, separation 0") {
  const auto chain = run_chain(EditorKind::identity, 10, 0);
  const auto result =
      drift_analysis(chain.mem, chain.run.steps, chain.stream);
  CHECK(result.separation == 0.0);
  CHECK(result.current == result.cumulative);
}

TEST_CASE("single-edit chain: current equals cumulative") {
  const auto chain = run_chain(EditorKind::mose, 1, 1);
  const auto result =
      drift_analysis(chain.mem, chain.run.steps, chain.stream);
  CHECK(result.separation == 0.0);
}

TEST_CASE("additive chains separate more than orthogonal ones") {
  // Full 10-seed sweep lives in the acceptance suite.
  int additive_wins = 0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto orth = run_chain(EditorKind::mose, 60, seed);
    const auto add = run_chain(EditorKind::additive, 60, seed);
    const double s_orth =
        drift_analysis(orth.mem, orth.run.steps, orth.stream).separation;
    const double s_add =
        drift_analysis(add.mem, add.run.steps, add.stream).separation;
    if (s_add > s_orth) ++additive_wins;
  }
  CHECK(additive_wins >= 2);
}

TEST_CASE("separation is invariant under global rotation of the values") {
  const auto chain = run_chain(EditorKind::additive, 20, 3);
  const auto base = drift_analysis(chain.mem, chain.run.steps, chain.stream);

  // Rotate every update and w0 by the same Q: all output vectors rotate
  // together and the separation statistic is unchanged.
  const Matrix q = random_orthogonal(32, 9).matrix();
  MemoryModel rotated = chain.mem;
  rotated.w0 = q * chain.mem.w0;
  std::vector<EditStep> steps = chain.run.steps;
  for (auto& step : steps) {
    step.update = q * step.update;  // additive updates rotate directly
    step.w_after = q * step.w_after;
  }
  const auto rot = drift_analysis(rotated, steps, chain.stream);
  CHECK(rot.separation == doctest::Approx(base.separation).epsilon(1e-9));
}

TEST_CASE("max_samples caps the clouds") {
  const auto chain = run_chain(EditorKind::mose, 12, 4);
  const auto result =
      drift_analysis(chain.mem, chain.run.steps, chain.stream, 2, 5);
  CHECK(result.current.cols() == 5);
  CHECK(result.projected.cols() == 10);
}

TEST_CASE("drift CSV schema and round-trip") {
  const auto chain = run_chain(EditorKind::additive, 8, 5);
  const auto result =
      drift_analysis(chain.mem, chain.run.steps, chain.stream);
  std::stringstream ss;
  write_drift_csv(ss, result);
  std::string header;
  std::getline(ss, header);
  CHECK(header == "edit_index,regime,pc1,pc2");
  int rows = 0;
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string idx, regime, pc1, pc2;
    std::getline(fields, idx, ',');
    std::getline(fields, regime, ',');
    std::getline(fields, pc1, ',');
    std::getline(fields, pc2, ',');
    CHECK((regime == "current" || regime == "cumulative"));
    const int j = std::stoi(idx);
    const Eigen::Index col = regime == "current" ? j : result.current.cols() + j;
    CHECK(std::stod(pc1) == result.projected(0, col));
    CHECK(std::stod(pc2) == result.projected(1, col));
    ++rows;
  }
  CHECK(rows == 16);
}

TEST_CASE("misaligned steps and stream are rejected") {
  const auto chain = run_chain(EditorKind::mose, 5, 6);
  auto truncated = chain.run.steps;
  truncated.pop_back();
  CHECK_THROWS_AS(drift_analysis(chain.mem, truncated, chain.stream),
                  std::invalid_argument);
}
