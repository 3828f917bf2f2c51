#include <doctest.h>

#include <cstdlib>
#include <nlohmann/json.hpp>

#include "dsukit/demo.hpp"
#include "dsukit/digest.hpp"
#include "dsukit/error.hpp"
#include "dsukit/pipeline.hpp"
#include "dsukit/rng.hpp"
#include "dsukit/stats.hpp"
#include "test_util.hpp"

using namespace dsukit;
using testutil::error_code;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

PipelineConfig demo_config(const testutil::TempDir& dir, unsigned workers = 1, const std::string& out = "out") {
  DemoOptions o;
  o.workers = workers;
  const auto files = generate_demo(dir.path(), o);
  auto cfg = load_pipeline_config(files.config);
  cfg.output_dir = dir / out;
  return cfg;
}

std::string minimal(const std::string& extra) {
  return R"({"version": 1, "seed": 1, "output_dir": "o", )" + extra + "}";
}

}  // namespace

TEST_CASE("stage graph ordering") {
  StageGraph g;
  g.add("c", {"a", "b"});
  g.add("a", {});
  g.add("b", {"a"});
  g.add("d", {});
  CHECK(g.order() == std::vector<std::string>{"a", "b", "c", "d"});

  StageGraph cyc;
  cyc.add("x", {"y"});
  cyc.add("y", {"x"});
  CHECK(error_code([&] { cyc.order(); }) == Errc::config);
  StageGraph unknown;
  unknown.add("x", {"nope"});
  CHECK(error_code([&] { unknown.order(); }) == Errc::config);

  CHECK(pipeline_stage_graph().order() == pipeline_stage_names());
  CHECK(pipeline_stage_names().size() == 9);
  CHECK(pipeline_stage_names().front() == "select");
  CHECK(pipeline_stage_names().back() == "score");
}

TEST_CASE("config schema errors") {
  const fs::path base = "/tmp";
  CHECK(error_code([&] { parse_pipeline_config("{", base); }) == Errc::config);
  CHECK(error_code([&] { parse_pipeline_config(R"({"seed": 1})", base); }) == Errc::config);
  CHECK(error_code([&] { parse_pipeline_config(R"({"version": 2})", base); }) == Errc::config);
  CHECK(error_code([&] { parse_pipeline_config(minimal(R"("colour": "red")"), base); }) == Errc::config);
  CHECK(error_code([&] { parse_pipeline_config(minimal(R"("inputs": {"manifesto": "m"})"), base); }) == Errc::config);
  CHECK(error_code([&] { parse_pipeline_config(minimal(R"("stages": {"train": {}})"), base); }) == Errc::config);
  CHECK(error_code([&] { parse_pipeline_config(minimal(R"("workers": 0)"), base); }) == Errc::config);

  const auto c = parse_pipeline_config(minimal(R"("inputs": {"manifest": "m.jsonl"}, "stages": {"select": {"seed": 5}})"), base);
  CHECK(c.output_dir == base / "o");
  CHECK(c.inputs.at("manifest") == base / "m.jsonl");
  CHECK(c.stage_seed("select") == 5);
  CHECK(c.stage_seed("dedup") == derive_seed(1, std::string_view("dedup")));
}

TEST_CASE("validation happens before any work") {
  testutil::TempDir dir("val");
  auto c = parse_pipeline_config(minimal(R"("stages": {"select": {}})"), dir.path());
  CHECK(error_code([&] { validate_pipeline_config(c); }) == Errc::validation);
  CHECK(error_code([&] { run_pipeline(c); }) == Errc::validation);
  CHECK_FALSE(fs::exists(dir / "o"));

  c = parse_pipeline_config(minimal(R"("inputs": {"manifest": "absent.jsonl"}, "stages": {"select": {}})"), dir.path());
  CHECK(error_code([&] { run_pipeline(c); }) == Errc::validation);
  CHECK_FALSE(fs::exists(dir / "o"));

  testutil::write_file(dir / "m.jsonl", "");
  c = parse_pipeline_config(minimal(R"("inputs": {"manifest": "m.jsonl"}, "stages": {"encode": {}})"), dir.path());
  CHECK(error_code([&] { validate_pipeline_config(c); }) == Errc::config);
  c = parse_pipeline_config(minimal(R"("inputs": {"manifest": "m.jsonl"}, "stages": {"train_kmeans": {"init": "bogus"}})"),
                            dir.path());
  CHECK(error_code([&] { validate_pipeline_config(c); }) == Errc::config);
  c = parse_pipeline_config(minimal(R"("stages": {})"), dir.path());
  CHECK(error_code([&] { validate_pipeline_config(c); }) == Errc::config);
}

TEST_CASE("environment overrides") {
  auto c = parse_pipeline_config(minimal(R"("inputs": {"manifest": "m.jsonl"})"), "/base");
  ::setenv("DSUKIT_WORKERS", "3", 1);
  ::setenv("DSUKIT_OUTPUT_DIR", "/elsewhere", 1);
  ::setenv("DSUKIT_INPUT_EVAL_REFS", "/refs.txt", 1);
  ::setenv("DSUKIT_SEED", "99", 1);
  apply_environment_overrides(c);
  CHECK(c.workers == 3);
  CHECK(c.output_dir == "/elsewhere");
  CHECK(c.inputs.at("eval_refs") == "/refs.txt");
  CHECK(c.inputs.at("manifest") == "/base/m.jsonl");
  CHECK(c.seed == 1);
  ::setenv("DSUKIT_WORKERS", "zero", 1);
  CHECK(error_code([&] { apply_environment_overrides(c); }) == Errc::config);
  for (const char* v : {"DSUKIT_WORKERS", "DSUKIT_OUTPUT_DIR", "DSUKIT_INPUT_EVAL_REFS", "DSUKIT_SEED"}) ::unsetenv(v);
}

TEST_CASE("demo run, cache and worker invariance") {
  testutil::TempDir dir("demo");
  auto cfg = demo_config(dir);
  const auto first = run_pipeline(cfg);
  REQUIRE(first.stages.size() == 9);
  for (const auto& s : first.stages) CHECK(s.status == "ran");
  CHECK(fs::exists(cfg.output_dir / "run_report.json"));
  const auto digests = first.digests();
  CHECK(digests.size() == 13);
  for (const auto& [name, sha] : digests) CHECK(sha256_file(cfg.output_dir / name) == sha);

  const auto second = run_pipeline(cfg);
  for (const auto& s : second.stages) CHECK(s.status == "cached");
  CHECK(second.digests() == digests);

  auto par = cfg;
  par.output_dir = dir / "out4";
  par.workers = 4;
  CHECK(run_pipeline(par).digests() == digests);

  const json report = json::parse(testutil::read_file(cfg.output_dir / "run_report.json"));
  CHECK(report.at("stages").size() == 9);
  const json scores = json::parse(testutil::read_file(cfg.output_dir / "scores.json"));
  CHECK(scores.at("metric") == "wer");
  CHECK(scores.at("details").contains("bootstrap"));

  SUBCASE("tampered artifact") {
    testutil::write_file(cfg.output_dir / "units.dedup.jsonl", "tampered\n");
    const auto e = error_code([&] { run_pipeline(cfg); });
    CHECK(e == Errc::stale_cache);
    RunOptions force;
    force.force = true;
    const auto again = run_pipeline(cfg, force);
    for (const auto& s : again.stages) CHECK(s.status == "ran");
    CHECK(again.digests() == digests);
  }
  SUBCASE("changed block reruns that stage and its dependents") {
    auto changed = cfg;
    changed.stages["score"] = R"({"task": "asr", "bootstrap": 200, "alpha": 0.05})";
    const auto rep = run_pipeline(changed);
    for (const auto& s : rep.stages) CHECK(s.status == (s.name == "score" ? "ran" : "cached"));
  }
}

TEST_CASE("stage failure leaves a partial report") {
  testutil::TempDir dir("fail");
  auto cfg = demo_config(dir);
  testutil::write_file(dir / "embeddings.spem", "not an embedding file");
  try {
    run_pipeline(cfg);
    FAIL("expected a stage failure");
  } catch (const PipelineError& e) {
    CHECK(e.stage() == "extend_vocab");
    CHECK(e.code() == Errc::format);
    CHECK(e.partial_report().failed_stage == "extend_vocab");
    CHECK(e.partial_report().stages.size() == 4);
  }
  const json report = json::parse(testutil::read_file(cfg.output_dir / "run_report.json"));
  CHECK(report.at("failed_stage") == "extend_vocab");
}

TEST_CASE("corpus statistics") {
  CHECK(corpus_stats({}, {}).empty());
  testutil::TempDir dir("stats");
  auto cfg = demo_config(dir);
  run_pipeline(cfg);
  const auto manifest = read_manifest(dir / "manifest.jsonl");
  const auto units = read_dsu_corpus(cfg.output_dir / "units.dedup.jsonl");
  const auto rows = corpus_stats(manifest, units);
  REQUIRE(rows.size() == 8);
  CHECK(rows[0].corpus == Corpus::SPGI);
  CHECK(rows[0].utterances == 15);
  CHECK(rows[0].speakers == 5);
  std::uint64_t total = 0;
  for (const auto& r : rows) {
    total += r.dedup_units;
    CHECK(r.estimated_hours == doctest::Approx(estimate_hours(r.dedup_units)));
  }
  std::uint64_t expect = 0;
  for (const auto& u : units) expect += u.ids.size();
  CHECK(total == expect);
  CHECK(format_stats_table(rows).find("GigaSpeech") != std::string::npos);
  CHECK(json::parse(stats_to_json(rows)).size() == 8);
  const auto only_units = corpus_stats({}, units);
  REQUIRE(only_units.size() == 1);
  CHECK(only_units[0].corpus == Corpus::OTHER);
}

TEST_CASE("score requests") {
  ScoreRequest r;
  r.refs = {"the cat sat on mat"};
  r.hyps = {"the cat sat on the mat"};
  json j = json::parse(score_to_json(r));
  CHECK(j.at("metric") == "wer");
  CHECK(j.at("value").get<double>() == doctest::Approx(0.2));
  r.task = "mt";
  r.refs = {"a b c d"};
  r.hyps = {"a b c d e"};
  j = json::parse(score_to_json(r));
  CHECK(j.at("metric") == "bleu");
  CHECK(j.at("value").get<double>() == doctest::Approx(66.874).epsilon(1e-4));
  r.task = "cer";
  CHECK(error_code([&] { score_to_json(r); }) == Errc::config);
}

TEST_CASE("shipped production config parses") {
  const fs::path path = fs::path(DSUKIT_CONFIGS) / "default.json";
  const auto cfg = load_pipeline_config(path);
  CHECK(cfg.version == 1);
  CHECK(cfg.output_dir == fs::path(DSUKIT_CONFIGS) / "run");
  for (const auto& name : pipeline_stage_names()) CHECK(cfg.has_stage(name));
  const auto km = json::parse(cfg.stages.at("train_kmeans"));
  CHECK(km.at("k") == 5000);
  const auto cpt = json::parse(cfg.stages.at("build_cpt"));
  CHECK(cpt.at("total_token_budget") == 6000000000LL);
  CHECK(cpt.at("speech_fraction").get<double>() * 6.0 == doctest::Approx(5.0));
  // the data files are site-specific, so validation stops at the first missing input
  CHECK(error_code([&] { validate_pipeline_config(cfg); }) == Errc::validation);
}
