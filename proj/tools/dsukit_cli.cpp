// dsukit: command-line front end for every pipeline stage.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric error.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dsukit/corpus.hpp"
#include "dsukit/demo.hpp"
#include "dsukit/dsu_codec.hpp"
#include "dsukit/error.hpp"
#include "dsukit/pipeline.hpp"
#include "dsukit/pseudo_st.hpp"
#include "dsukit/quantizer.hpp"
#include "dsukit/rng.hpp"
#include "dsukit/stats.hpp"
#include "dsukit/subset.hpp"
#include "dsukit/vocab_embed.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dsukit;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(Errc::config, "cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream o(p, std::ios::trunc);
  if (!o) throw Error(Errc::io, "cannot create " + p.string());
  o << text << '\n';
}

fs::path dir_of(const fs::path& p) { return fs::absolute(p).parent_path(); }

struct SelectArgs {
  std::string manifest, rules, out;
  std::uint64_t seed = 0;
};

struct KMeansArgs {
  std::string manifest, out, init = "kmeanspp";
  std::size_t k = kDefaultCodebookSize, minibatch = 0, local_trials = 0;
  int max_iters = 100, n_init = 1;
  double tol = 1e-4;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  bool normalize = false;
};

struct EncodeArgs {
  std::string manifest, codebook, out;
  bool normalize = false;
  unsigned workers = 1;
};

struct DedupArgs {
  std::string in, out, render;
  std::int64_t index_base = 0;
};

struct ExtendArgs {
  std::string embeddings, plain_tokens, plain_matrix, codebook, out;
  std::size_t k = 0;
  double scale = kDefaultEmbeddingInitScale;
  std::uint64_t seed = 0;
  std::int64_t index_base = 0;
};

struct CptArgs {
  std::string spec, manifest, units, bitext, out, report;
  std::vector<std::string> speech;
  std::uint64_t seed = 0;
  std::int64_t index_base = 0;
  bool no_caps = false;
};

struct PseudoArgs {
  std::string manifest, translations, scores, out_direct, out_multiturn, report;
  double threshold = kDefaultQeThreshold;
  std::int64_t n_direct = kDefaultPseudoSampleSize, n_multiturn = kDefaultPseudoSampleSize;
  std::uint64_t seed = 0;
};

struct ItArgs {
  std::string config, out, report;
  std::optional<std::uint64_t> seed;
};

struct ScoreArgs {
  std::string task = "asr", refs, hyps, hyps_b, out;
  std::size_t bootstrap = 0;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

struct StatsArgs {
  std::string manifest, units;
  double units_per_sec = kDefaultUnitsPerSecond;
  bool as_json = false;
};

struct RunArgs {
  std::string config;
  bool force = false;
  unsigned workers = 0;
};

struct DemoArgs {
  std::string dir = "dsukit-demo";
  std::uint64_t seed = 7;
  unsigned workers = 1;
  bool no_run = false;
  bool force = false;
};

void do_select(const SelectArgs& a) {
  const auto manifest = read_manifest(a.manifest);
  const auto rules = a.rules.empty() ? default_kmeans_subset_rules() : read_cap_rules(a.rules);
  auto subset = select_subset(manifest, rules, a.seed);
  // keep relative feature paths valid from the output's directory
  const fs::path from = dir_of(a.manifest), to = dir_of(a.out);
  for (auto& r : subset) {
    const fs::path p(r.feature_path);
    if (p.is_relative()) r.feature_path = (from / p).lexically_normal().lexically_relative(to).generic_string();
  }
  write_manifest(a.out, subset);
  std::cerr << "selected " << subset.size() << " of " << manifest.size() << " utterances\n";
}

void do_train(const KMeansArgs& a) {
  auto manifest = read_manifest(a.manifest);
  KMeansOptions o;
  o.k = a.k;
  o.max_iters = a.max_iters;
  o.tol = a.tol;
  o.seed = a.seed;
  o.init = kmeans_init_from_string(a.init);
  o.workers = a.workers;
  o.minibatch_size = a.minibatch;
  o.local_trials = a.local_trials;
  o.n_init = a.n_init;
  o.feature_source = fs::path(a.manifest).filename().string();
  ManifestFeatures data(std::move(manifest), dir_of(a.manifest), a.normalize);
  KMeansTrace trace;
  const auto cb = train_kmeans(data, o, &trace);
  save_codebook(cb, a.out);
  std::cout << json{{"k", cb.k()},
                    {"dim", cb.dim()},
                    {"iterations_run", cb.iterations_run},
                    {"final_inertia", cb.final_inertia},
                    {"frames", trace.frames},
                    {"inertia_history", trace.inertia}}
                   .dump(2)
            << '\n';
}

void do_encode(const EncodeArgs& a) {
  const auto manifest = read_manifest(a.manifest);
  const auto cb = load_codebook(a.codebook);
  write_dsu_corpus(a.out, encode_manifest(cb, manifest, dir_of(a.manifest), a.normalize, a.workers));
}

void do_dedup(const DedupArgs& a) {
  auto units = read_dsu_corpus(a.in);
  std::uint64_t before = 0, after = 0;
  for (auto& u : units) {
    before += u.ids.size();
    u = dedup(u);
    after += u.ids.size();
  }
  write_dsu_corpus(a.out, units);
  if (!a.render.empty()) {
    std::ofstream o(a.render);
    for (const auto& u : units) o << u.utterance_id << '\t' << render_tokens(u, a.index_base) << '\n';
  }
  std::cerr << "units " << before << " -> " << after << " (" << estimate_hours(after) << " h at "
            << kDefaultUnitsPerSecond << " units/s)\n";
}

void do_extend(const ExtendArgs& a) {
  EmbeddingTable table;
  if (!a.embeddings.empty()) {
    table = load_embeddings(a.embeddings);
  } else if (!a.plain_tokens.empty() && !a.plain_matrix.empty()) {
    table = import_plain_embeddings(a.plain_tokens, a.plain_matrix);
  } else {
    throw Error(Errc::config, "extend-vocab needs --embeddings or --plain-tokens with --plain-matrix");
  }
  std::size_t k = a.k;
  if (!a.codebook.empty()) k = load_codebook(a.codebook).k();
  if (k == 0) throw Error(Errc::config, "extend-vocab needs --k or --codebook");
  ExtendReport rep;
  const auto ext = extend_vocab(table, unit_token_names(k, a.index_base), fit_gaussian(table, a.scale, a.seed), &rep);
  save_embeddings(ext, a.out);
  std::cerr << "vocabulary " << table.size() << " -> " << ext.size() << '\n';
}

void do_cpt(const CptArgs& a) {
  MixtureSpec spec = parse_mixture_spec(slurp(a.spec));
  spec.seed = a.seed;
  const auto manifest = read_manifest(a.manifest);
  const auto units = read_dsu_corpus(a.units);
  const auto bitext = a.bitext.empty() ? std::vector<BitextRow>{} : read_bitext(a.bitext);
  std::vector<Corpus> speech = default_cpt_speech_corpora();
  if (!a.speech.empty()) {
    speech.clear();
    for (const auto& s : a.speech) speech.push_back(corpus_from_string(s));
  }
  if (spec.speech_sources.empty()) {
    for (Corpus c : speech) spec.speech_sources.emplace_back(to_string(c));
  }
  if (spec.text_sources.empty()) {
    std::set<std::string> names;
    for (const auto& b : bitext) names.insert(b.source);
    for (const auto& n : names) spec.text_sources.push_back({n, 1.0});
  }
  const auto sources = cpt_sources(manifest, units, bitext, speech, derive_seed(a.seed, std::string_view("caps")),
                                   a.index_base, !a.no_caps);
  const auto result = build_mixture(sources, spec);
  write_records(a.out, result.records);
  const auto report = to_json(result.report);
  if (!a.report.empty()) spit(a.report, report);
  std::cout << report << '\n';
}

void do_pseudo(const PseudoArgs& a) {
  const auto manifest = read_manifest(a.manifest);
  const auto joined = join_pseudo_labels(manifest, read_translations(a.translations), read_scores(a.scores));
  const auto kept = filter_by_qe(joined, a.threshold);
  PseudoSampleReport rep;
  const auto sample = sample_pseudo_sets(group_streams(kept), a.n_direct, a.n_multiturn, a.seed, &rep);
  write_triples(a.out_direct, sample.direct);
  write_triples(a.out_multiturn, sample.multiturn);
  const auto text = to_json(rep);
  if (!a.report.empty()) spit(a.report, text);
  std::cerr << "kept " << kept.size() << " of " << joined.size() << " at threshold " << a.threshold << '\n';
  std::cout << text << '\n';
}

// {"seed", "inputs": {"manifest", "units", "pseudo_direct", "pseudo_multiturn",
// "text_instructions", "exclude_transcripts"}, "output", "report", ...spec}
void do_it(const ItArgs& a) {
  const std::string text = slurp(a.config);
  json cfg;
  try {
    cfg = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::config, a.config + ": " + e.what());
  }
  const fs::path base = dir_of(a.config);
  auto path = [&](const json& j, const char* key) -> std::optional<fs::path> {
    if (!j.contains(key)) return std::nullopt;
    fs::path p = j.at(key).get<std::string>();
    return p.is_relative() ? base / p : p;
  };
  const json inputs = cfg.value("inputs", json::object());
  const auto spec = parse_it_build_spec(text);
  const std::uint64_t seed = a.seed ? *a.seed : cfg.value("seed", std::uint64_t{0});

  Manifest manifest;
  std::vector<DsuSequence> units;
  std::vector<ScoredTriple> direct, multiturn;
  std::vector<TextInstruction> instr;
  ItInputs in;
  if (auto p = path(inputs, "manifest")) {
    manifest = read_manifest(*p);
    in.manifest = &manifest;
  }
  if (auto p = path(inputs, "units")) {
    units = read_dsu_corpus(*p);
    in.units = &units;
  }
  if (auto p = path(inputs, "pseudo_direct")) {
    direct = read_triples(*p);
    in.pseudo_direct = &direct;
  }
  if (auto p = path(inputs, "pseudo_multiturn")) {
    multiturn = read_triples(*p);
    in.pseudo_multiturn = &multiturn;
  }
  if (auto p = path(inputs, "text_instructions")) {
    instr = read_text_instructions(*p);
    in.text = &instr;
  }
  std::set<std::string> exclude;
  if (auto p = path(inputs, "exclude_transcripts")) exclude = read_exclusion_list(*p);

  ItReport rep;
  const auto records = build_it_set(it_sources(in, spec, derive_seed(seed, std::string_view("caps"))), exclude, seed,
                                    default_language_names(), default_token_counter(), &rep);
  fs::path out = a.out.empty() ? path(cfg, "output").value_or("it.jsonl") : fs::path(a.out);
  write_records(out, records);
  const auto summary = json{{"selected", rep.selected}, {"excluded", rep.excluded}, {"available", rep.available}}.dump(2);
  fs::path report = a.report.empty() ? path(cfg, "report").value_or("") : fs::path(a.report);
  if (!report.empty()) spit(report, summary);
  std::cout << summary << '\n';
}

void do_score(const ScoreArgs& a) {
  ScoreRequest r;
  r.task = a.task;
  r.refs = read_lines(a.refs);
  r.hyps = read_lines(a.hyps);
  if (!a.hyps_b.empty()) {
    r.hyps_b = read_lines(a.hyps_b);
    r.bootstrap = a.bootstrap;
  }
  r.alpha = a.alpha;
  r.seed = a.seed;
  r.workers = a.workers;
  const auto text = score_to_json(r);
  if (!a.out.empty()) spit(a.out, text);
  std::cout << text << '\n';
}

void do_stats(const StatsArgs& a) {
  const Manifest manifest = a.manifest.empty() ? Manifest{} : read_manifest(a.manifest);
  const auto units = a.units.empty() ? std::vector<DsuSequence>{} : read_dsu_corpus(a.units);
  const auto rows = corpus_stats(manifest, units, a.units_per_sec);
  std::cout << (a.as_json ? stats_to_json(rows) + "\n" : format_stats_table(rows));
}

int print_run(const RunReport& report) {
  json digests = report.digests();
  std::cout << json{{"stages", report.stages.size()}, {"digests", digests}}.dump(2) << '\n';
  for (const auto& s : report.stages) {
    std::fprintf(stderr, "%-13s %-6s %8.3f s  in=%zu out=%zu\n", s.name.c_str(), s.status.c_str(), s.seconds,
                 s.input_records, s.output_records);
  }
  return 0;
}

int do_run(const RunArgs& a) {
  auto cfg = load_pipeline_config(a.config);
  apply_environment_overrides(cfg);
  if (a.workers) cfg.workers = a.workers;
  return print_run(run_pipeline(cfg, {a.force}));
}

int do_demo(const DemoArgs& a) {
  DemoOptions o;
  o.seed = a.seed;
  o.workers = a.workers;
  const auto t0 = std::chrono::steady_clock::now();
  const auto files = generate_demo(a.dir, o);
  std::cerr << "demo corpus written to " << a.dir << " (config " << files.config.string() << ")\n";
  if (a.no_run) return 0;
  auto cfg = load_pipeline_config(files.config);
  apply_environment_overrides(cfg);
  const int rc = print_run(run_pipeline(cfg, {a.force}));
  std::cerr << "demo finished in "
            << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s\n";
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dsukit: discrete speech unit data pipeline"};
  app.require_subcommand(1);
  int rc = 0;

  SelectArgs sel;
  auto* s = app.add_subcommand("select-subset", "Speaker-capped k-means training subset");
  s->add_option("--manifest", sel.manifest)->required();
  s->add_option("--rules", sel.rules, "Cap rules JSON (default: built-in subset caps)");
  s->add_option("--seed", sel.seed);
  s->add_option("--out", sel.out)->required();
  s->callback([&] { do_select(sel); });

  KMeansArgs km;
  s = app.add_subcommand("train-kmeans", "Train a k-means codebook on manifest features");
  s->add_option("--manifest", km.manifest)->required();
  s->add_option("--k", km.k);
  s->add_option("--max-iters", km.max_iters);
  s->add_option("--tol", km.tol);
  s->add_option("--init", km.init)->check(CLI::IsMember({"kmeanspp", "random"}));
  s->add_option("--minibatch", km.minibatch, "Mini-batch size (0: exact Lloyd)");
  s->add_option("--local-trials", km.local_trials, "k-means++ candidates per step (0: 2 + ln k)");
  s->add_option("--n-init", km.n_init, "Restarts; the lowest inertia wins");
  s->add_option("--seed", km.seed);
  s->add_option("--workers", km.workers);
  s->add_flag("--normalize", km.normalize, "Per-utterance mean/variance normalization");
  s->add_option("--out", km.out)->required();
  s->callback([&] { do_train(km); });

  EncodeArgs enc;
  s = app.add_subcommand("encode", "Assign every frame to its nearest centroid");
  s->add_option("--manifest", enc.manifest)->required();
  s->add_option("--codebook", enc.codebook)->required();
  s->add_flag("--normalize", enc.normalize);
  s->add_option("--workers", enc.workers);
  s->add_option("--out", enc.out)->required();
  s->callback([&] { do_encode(enc); });

  DedupArgs dd;
  s = app.add_subcommand("dedup", "Collapse repeated units");
  s->add_option("--in", dd.in)->required();
  s->add_option("--out", dd.out)->required();
  s->add_option("--render", dd.render, "Also write id<TAB>tokens lines");
  s->add_option("--index-base", dd.index_base);
  s->callback([&] { do_dedup(dd); });

  ExtendArgs ex;
  s = app.add_subcommand("extend-vocab", "Append unit tokens to an embedding table");
  s->add_option("--embeddings", ex.embeddings);
  s->add_option("--plain-tokens", ex.plain_tokens);
  s->add_option("--plain-matrix", ex.plain_matrix);
  s->add_option("--codebook", ex.codebook);
  s->add_option("--k", ex.k);
  s->add_option("--scale", ex.scale);
  s->add_option("--seed", ex.seed);
  s->add_option("--index-base", ex.index_base);
  s->add_option("--out", ex.out)->required();
  s->callback([&] { do_extend(ex); });

  CptArgs cpt;
  s = app.add_subcommand("build-cpt", "Token-budgeted continued pre-training mixture");
  s->add_option("--spec", cpt.spec)->required();
  s->add_option("--seed", cpt.seed);
  s->add_option("--manifest", cpt.manifest)->required();
  s->add_option("--units", cpt.units, "Deduplicated unit corpus")->required();
  s->add_option("--bitext", cpt.bitext);
  s->add_option("--speech-corpora", cpt.speech);
  s->add_option("--index-base", cpt.index_base);
  s->add_flag("--no-caps", cpt.no_caps);
  s->add_option("--out", cpt.out)->required();
  s->add_option("--report", cpt.report);
  s->callback([&] { do_cpt(cpt); });

  PseudoArgs ps;
  s = app.add_subcommand("pseudo-filter", "QE-filter pseudo translations and sample direct/multi-turn sets");
  s->add_option("--manifest", ps.manifest)->required();
  s->add_option("--translations", ps.translations)->required();
  s->add_option("--scores", ps.scores)->required();
  s->add_option("--threshold", ps.threshold);
  s->add_option("--n-direct", ps.n_direct);
  s->add_option("--n-multiturn", ps.n_multiturn);
  s->add_option("--seed", ps.seed);
  s->add_option("--out-direct", ps.out_direct)->required();
  s->add_option("--out-multiturn", ps.out_multiturn)->required();
  s->add_option("--report", ps.report);
  s->callback([&] { do_pseudo(ps); });

  ItArgs it;
  s = app.add_subcommand("build-it", "Instruction-tuning set");
  s->add_option("--config", it.config)->required();
  s->add_option("--seed", it.seed);
  s->add_option("--out", it.out);
  s->add_option("--report", it.report);
  s->callback([&] { do_it(it); });

  ScoreArgs sc;
  s = app.add_subcommand("score", "WER or BLEU, optionally with paired bootstrap");
  s->add_option("--task", sc.task)->check(CLI::IsMember({"asr", "mt"}));
  s->add_option("--refs", sc.refs)->required();
  s->add_option("--hyps", sc.hyps)->required();
  s->add_option("--hyps-b", sc.hyps_b);
  s->add_option("--bootstrap", sc.bootstrap, "Resamples for comparison with --hyps-b");
  s->add_option("--alpha", sc.alpha);
  s->add_option("--seed", sc.seed);
  s->add_option("--workers", sc.workers);
  s->add_option("--out", sc.out);
  s->callback([&] { do_score(sc); });

  StatsArgs st;
  s = app.add_subcommand("stats", "Per-corpus utterance, speaker, unit and hour counts");
  s->add_option("--manifest", st.manifest);
  s->add_option("--units", st.units);
  s->add_option("--units-per-sec", st.units_per_sec);
  s->add_flag("--json", st.as_json);
  s->callback([&] { do_stats(st); });

  RunArgs run;
  s = app.add_subcommand("run", "Run the configured pipeline");
  s->add_option("--config", run.config)->required();
  s->add_flag("--force", run.force, "Ignore cached stage results");
  s->add_option("--workers", run.workers);
  s->callback([&] { rc = do_run(run); });

  DemoArgs demo;
  s = app.add_subcommand("demo", "Generate the synthetic demo corpus and run every stage");
  s->add_option("--dir", demo.dir);
  s->add_option("--seed", demo.seed);
  s->add_option("--workers", demo.workers);
  s->add_flag("--no-run", demo.no_run);
  s->add_flag("--force", demo.force);
  s->callback([&] { rc = do_demo(demo); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const PipelineError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return rc;
}
