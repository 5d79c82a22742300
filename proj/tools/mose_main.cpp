#include "mose/drift.hpp"
#include "mose/metrics.hpp"
#include "mose/serialize.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using mose::Json;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Json default_config() {
  return Json{
      {"dims", {{"d", 64}, {"p", 64}, {"h", 128}, {"depth", 5}}},
      {"memory",
       {{"n_knowledge", 32}, {"c", 8}, {"seed", 0}, {"codebook_margin", 0.5}}},
      {"editing",
       {{"editor", "mose"},
        {"editors", Json::array({"mose", "additive"})},
        {"lambda", 1.0},
        {"n_edits", 200},
        {"batch_size", 1},
        {"rank_tol", 0.0},
        {"reortho_interval", 100},
        {"anchor", "current"},
        {"scale", 0.05},
        {"refresh_k0", false},
        {"stream_seed", 1},
        {"editor_seed", 2}}},
      {"eval", {{"rho", 0.1}, {"m_neighbors", 4}, {"eval_every", 50}}},
      {"output", {{"directory", "out"}, {"formats", Json::array({"csv", "json"})}}},
  };
}

const Json* find_path(const Json& j, const std::string& dotted) {
  const Json* cur = &j;
  size_t start = 0;
  while (true) {
    const size_t dot = dotted.find('.', start);
    const std::string part = dotted.substr(start, dot - start);
    if (!cur->is_object() || !cur->contains(part)) return nullptr;
    cur = &cur->at(part);
    if (dot == std::string::npos) return cur;
    start = dot + 1;
  }
}

template <typename T>
T get_field(const Json& cfg, const std::string& dotted) {
  const Json* node = find_path(cfg, dotted);
  if (node == nullptr) throw ConfigError("missing config field: " + dotted);
  try {
    return node->get<T>();
  } catch (const Json::exception&) {
    throw ConfigError("config field has wrong type: " + dotted);
  }
}

void apply_override(Json& cfg, const std::string& token) {
  // --a.b.c=value
  if (token.rfind("--", 0) != 0) {
    throw ConfigError("unrecognized argument: " + token);
  }
  const size_t eq = token.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override must be --key=value: " + token);
  }
  const std::string path = token.substr(2, eq - 2);
  const std::string raw = token.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const Json::exception&) {
    value = raw;  // plain string
  }
  Json* cur = &cfg;
  size_t start = 0;
  while (true) {
    const size_t dot = path.find('.', start);
    const std::string part = path.substr(start, dot - start);
    if (part.empty()) throw ConfigError("bad override path: " + path);
    if (dot == std::string::npos) {
      (*cur)[part] = value;
      return;
    }
    cur = &(*cur)[part];
    start = dot + 1;
  }
}

struct Resolved {
  Json echo;
  int d, p;
  int n_knowledge, c;
  std::uint64_t memory_seed, stream_seed, editor_seed;
  double codebook_margin;
  int n_edits, batch_size;
  mose::EditorSpec spec;  // kind filled per editor
  double rho;
  int m_neighbors, eval_every;
  fs::path out_dir;
};

Resolved resolve(Json cfg) {
  Resolved r;
  r.d = get_field<int>(cfg, "dims.d");
  r.p = get_field<int>(cfg, "dims.p");
  r.n_knowledge = get_field<int>(cfg, "memory.n_knowledge");
  r.c = get_field<int>(cfg, "memory.c");
  r.memory_seed = get_field<std::uint64_t>(cfg, "memory.seed");
  r.codebook_margin = get_field<double>(cfg, "memory.codebook_margin");
  r.n_edits = get_field<int>(cfg, "editing.n_edits");
  r.batch_size = get_field<int>(cfg, "editing.batch_size");
  r.stream_seed = get_field<std::uint64_t>(cfg, "editing.stream_seed");
  r.editor_seed = get_field<std::uint64_t>(cfg, "editing.editor_seed");
  r.spec.cfg.lambda = get_field<double>(cfg, "editing.lambda");
  r.spec.cfg.rank_tol = get_field<double>(cfg, "editing.rank_tol");
  r.spec.scale = get_field<double>(cfg, "editing.scale");
  r.spec.seed = r.editor_seed;
  r.spec.reortho_interval = get_field<int>(cfg, "editing.reortho_interval");
  r.spec.refresh_k0 = get_field<bool>(cfg, "editing.refresh_k0");
  const auto anchor = get_field<std::string>(cfg, "editing.anchor");
  if (anchor == "current") {
    r.spec.anchor = mose::Anchor::current;
  } else if (anchor == "w0") {
    r.spec.anchor = mose::Anchor::w0;
  } else {
    throw ConfigError("editing.anchor must be 'current' or 'w0'");
  }
  r.rho = get_field<double>(cfg, "eval.rho");
  r.m_neighbors = get_field<int>(cfg, "eval.m_neighbors");
  r.eval_every = get_field<int>(cfg, "eval.eval_every");
  if (r.n_edits < 1) throw ConfigError("editing.n_edits must be >= 1");
  if (r.batch_size < 1) throw ConfigError("editing.batch_size must be >= 1");
  if (r.spec.cfg.lambda <= 0.0) throw ConfigError("editing.lambda must be > 0");
  if (!(r.rho > 0.0 && r.rho <= 0.5)) throw ConfigError("eval.rho must be in (0, 0.5]");
  if (r.m_neighbors < 1) throw ConfigError("eval.m_neighbors must be >= 1");
  if (r.eval_every < 1) throw ConfigError("eval.eval_every must be >= 1");

  std::string dir = get_field<std::string>(cfg, "output.directory");
  if (const char* env = std::getenv("MOSE_OUTPUT_DIR")) {
    dir = env;
    cfg["output"]["directory"] = dir;
  }
  r.out_dir = dir;
  r.echo = std::move(cfg);
  return r;
}

Json load_config(const std::string& path, const std::vector<std::string>& extras) {
  Json cfg = default_config();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    Json user;
    try {
      user = Json::parse(in);
    } catch (const Json::exception& e) {
      throw ConfigError(std::string("config parse error: ") + e.what());
    }
    cfg.merge_patch(user);
  }
  for (const auto& token : extras) apply_override(cfg, token);
  return cfg;
}

std::uint64_t eval_seed_from(std::uint64_t stream_seed) {
  // splitmix64 step, so the suite draws an independent stream.
  std::uint64_t z = stream_seed + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct EditorOutputs {
  mose::RunResult run;
  mose::MetricsReport metrics;
  mose::DriftResult drift;
  mose::StabilitySummary summary;
  std::vector<std::optional<double>> reliability_trace;  // per step, 1-based
};

EditorOutputs execute_editor(const Resolved& r, mose::EditorKind kind,
                             const mose::MemoryModel& mem,
                             const std::vector<mose::EditBatch>& stream,
                             const mose::EvalSuite& suite) {
  mose::EditorSpec spec = r.spec;
  spec.kind = kind;

  // Reliability monitor over the edits applied so far.
  std::vector<mose::EvalCase> applied_cases;
  std::vector<size_t> batch_start;
  {
    size_t count = 0;
    for (const auto& b : stream) {
      batch_start.push_back(count);
      count += static_cast<size_t>(b.keys.cols());
    }
    applied_cases.reserve(count);
    for (const auto& b : stream) {
      for (Eigen::Index j = 0; j < b.keys.cols(); ++j) {
        applied_cases.push_back(
            {b.keys.col(j), b.target_value_ids[static_cast<size_t>(j)]});
      }
    }
  }

  EditorOutputs out;
  out.reliability_trace.assign(stream.size() + 1, std::nullopt);
  auto hook = [&](int step, const mose::Matrix& w) {
    if (step % r.eval_every != 0 && step != static_cast<int>(stream.size()))
      return;
    const size_t upto = static_cast<size_t>(step) < batch_start.size()
                            ? batch_start[static_cast<size_t>(step)]
                            : applied_cases.size();
    if (upto == 0) return;
    int hits = 0;
    for (size_t i = 0; i < upto; ++i) {
      if (mose::decode(w, applied_cases[i].key, mem.codebook) ==
          applied_cases[i].expected_value_id) {
        ++hits;
      }
    }
    out.reliability_trace[static_cast<size_t>(step)] =
        static_cast<double>(hits) / static_cast<double>(upto);
  };

  out.run = mose::run_sequential(spec, mem, stream, hook);
  if (out.run.error) return out;
  out.metrics = mose::evaluate(out.run.final_w, mem.w0, suite, mem.codebook);
  out.drift = mose::drift_analysis(mem, out.run.steps, stream);
  out.summary = mose::summarize(out.run.records);
  return out;
}

void write_steps_jsonl(const fs::path& path, const EditorOutputs& out) {
  std::ofstream os(path);
  for (size_t i = 0; i < out.run.records.size(); ++i) {
    const auto& rec = out.run.records[i];
    const mose::UpdateKind kind =
        i == 0 ? mose::UpdateKind::identity : out.run.steps[i - 1].kind;
    const auto reliability = i < out.reliability_trace.size()
                                 ? out.reliability_trace[i]
                                 : std::nullopt;
    os << mose::step_record_to_json(rec, kind, reliability).dump() << '\n';
  }
}

void write_editor_outputs(const fs::path& dir, const EditorOutputs& out) {
  fs::create_directories(dir);
  {
    std::ofstream os(dir / "stability.csv");
    mose::write_stability_csv(os, out.run.records);
  }
  {
    std::ofstream os(dir / "metrics.json");
    os << mose::metrics_to_json(out.metrics).dump(2) << '\n';
  }
  {
    std::ofstream os(dir / "drift.csv");
    mose::write_drift_csv(os, out.drift);
  }
  write_steps_jsonl(dir / "steps.jsonl", out);
}

Json summary_entry(const EditorOutputs& out) {
  return Json{{"metrics", mose::metrics_to_json(out.metrics)},
              {"norm_ratio", out.summary.frob_norm.drift_ratio},
              {"cond_ratio", out.summary.cond_number.drift_ratio},
              {"final_deviation", out.summary.deviation.final_value},
              {"drift_separation", out.drift.separation}};
}

int check_failure(const EditorOutputs& out) {
  if (out.run.error) {
    std::cerr << "numerical failure: " << *out.run.error << '\n';
    return 3;
  }
  return 0;
}

int cmd_run(const Json& cfg_in) {
  const Resolved r = resolve(cfg_in);
  const auto editor =
      mose::editor_from_name(get_field<std::string>(r.echo, "editing.editor"));
  const auto mem = mose::build_memory(r.d, r.p, r.n_knowledge, r.c,
                                      r.memory_seed, r.codebook_margin);
  const auto stream =
      mose::make_edit_stream(mem, r.n_edits, r.batch_size, r.stream_seed);
  const auto suite = mose::make_eval_suite(mem, stream, r.rho, r.m_neighbors,
                                           eval_seed_from(r.stream_seed));

  const EditorOutputs out = execute_editor(r, editor, mem, stream, suite);
  fs::create_directories(r.out_dir);
  {
    std::ofstream os(r.out_dir / "config.json");
    os << r.echo.dump(2) << '\n';
  }
  if (const int rc = check_failure(out); rc != 0) {
    write_editor_outputs(r.out_dir, out);  // partial records
    return rc;
  }
  write_editor_outputs(r.out_dir, out);
  std::cout << "run complete: " << mose::editor_name(editor) << ", "
            << r.n_edits << " edits -> " << r.out_dir.string() << '\n';
  return 0;
}

int cmd_compare(const Json& cfg_in, std::vector<std::string> editors) {
  const Resolved r = resolve(cfg_in);
  if (editors.empty()) {
    editors = get_field<std::vector<std::string>>(r.echo, "editing.editors");
  }
  if (editors.size() < 2) throw ConfigError("compare needs at least 2 editors");

  const auto mem = mose::build_memory(r.d, r.p, r.n_knowledge, r.c,
                                      r.memory_seed, r.codebook_margin);
  const auto stream =
      mose::make_edit_stream(mem, r.n_edits, r.batch_size, r.stream_seed);
  const auto suite = mose::make_eval_suite(mem, stream, r.rho, r.m_neighbors,
                                           eval_seed_from(r.stream_seed));

  fs::create_directories(r.out_dir);
  {
    Json echo = r.echo;
    echo["editing"]["editors"] = editors;
    std::ofstream os(r.out_dir / "config.json");
    os << echo.dump(2) << '\n';
  }

  std::ofstream merged(r.out_dir / "stability.csv");
  merged << "editor,step,frob_norm,spectral_norm,cond_number,deviation\n";
  Json summary = Json::object();
  for (const auto& name : editors) {
    const auto kind = mose::editor_from_name(name);
    const EditorOutputs out = execute_editor(r, kind, mem, stream, suite);
    if (const int rc = check_failure(out); rc != 0) return rc;
    {
      std::ostringstream rows;
      mose::write_stability_csv(rows, out.run.records, name);
      std::istringstream in(rows.str());
      std::string line;
      std::getline(in, line);  // drop the per-editor header
      while (std::getline(in, line)) merged << line << '\n';
    }
    write_editor_outputs(r.out_dir / name, out);
    summary[name] = summary_entry(out);
  }
  {
    std::ofstream os(r.out_dir / "summary.json");
    os << summary.dump(2) << '\n';
  }
  std::cout << "compare complete: " << editors.size() << " editors -> "
            << r.out_dir.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiplicative orthogonal sequential editing on synthetic "
               "linear associative memories"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> compare_editors;

  auto* run = app.add_subcommand("run", "run one editor over an edit stream");
  run->add_option("config", config_path, "JSON config file");
  run->allow_extras();

  auto* compare = app.add_subcommand(
      "compare", "run several editors on a shared memory/stream/seed");
  compare->add_option("config", config_path, "JSON config file");
  compare->add_option("--editors", compare_editors, "editors to compare")
      ->delimiter(',');
  compare->allow_extras();

  auto* figure2 = app.add_subcommand(
      "figure2",
      "preset: random orthogonal vs random additive chains, 500 steps");
  figure2->add_option("config", config_path, "JSON config file");
  figure2->allow_extras();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return cmd_run(load_config(config_path, run->remaining()));
    }
    if (compare->parsed()) {
      return cmd_compare(load_config(config_path, compare->remaining()),
                         compare_editors);
    }
    Json cfg = load_config(config_path, figure2->remaining());
    cfg["editing"]["n_edits"] = 500;
    cfg["editing"]["batch_size"] = 1;
    return cmd_compare(cfg, {"random_orthogonal", "random_additive"});
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
}
