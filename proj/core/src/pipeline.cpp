#include "dsukit/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>

#include "dsukit/digest.hpp"
#include "dsukit/log.hpp"
#include "dsukit/rng.hpp"
#include "dsukit/subset.hpp"
#include "dsukit/vocab_embed.hpp"
#include "jsonl.hpp"

namespace dsukit {

using detail::json;
namespace fs = std::filesystem;

// --- stage graph --------------------------------------------------------------

void StageGraph::add(std::string name, std::vector<std::string> deps) {
  for (const auto& n : nodes_) {
    if (n.first == name) throw Error(Errc::config, "stage '" + name + "' declared twice");
  }
  nodes_.emplace_back(std::move(name), std::move(deps));
}

std::vector<std::string> StageGraph::order() const {
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < nodes_.size(); ++i) pos[nodes_[i].first] = i;
  std::vector<std::size_t> pending(nodes_.size(), 0);
  std::vector<std::vector<std::size_t>> users(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    for (const auto& d : nodes_[i].second) {
      const auto it = pos.find(d);
      if (it == pos.end()) throw Error(Errc::config, "stage '" + nodes_[i].first + "' depends on unknown '" + d + "'");
      users[it->second].push_back(i);
      ++pending[i];
    }
  }
  std::vector<std::string> out;
  std::vector<bool> done(nodes_.size(), false);
  while (out.size() < nodes_.size()) {
    // lowest-index ready node keeps the order stable
    std::size_t pick = nodes_.size();
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (!done[i] && pending[i] == 0) {
        pick = i;
        break;
      }
    }
    if (pick == nodes_.size()) {
      std::string cyc;
      for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!done[i]) cyc += (cyc.empty() ? "" : ", ") + nodes_[i].first;
      }
      throw Error(Errc::config, "stage graph has a cycle among: " + cyc);
    }
    done[pick] = true;
    out.push_back(nodes_[pick].first);
    for (auto u : users[pick]) --pending[u];
  }
  return out;
}

namespace {

struct StageDecl {
  const char* name;
  std::vector<std::string> order_after;  // ordering edges
  std::vector<std::string> requires_stages;
  std::vector<std::string> requires_inputs;
  std::vector<std::string> optional_inputs;
  bool reads_features;
};

const std::vector<StageDecl>& stage_decls() {
  static const std::vector<StageDecl> d{
      {"select", {}, {}, {"manifest"}, {}, false},
      {"train_kmeans", {"select"}, {}, {"manifest"}, {}, true},
      {"encode", {"train_kmeans"}, {"train_kmeans"}, {"manifest"}, {}, true},
      {"dedup", {"encode"}, {"encode"}, {}, {}, false},
      {"extend_vocab", {"train_kmeans", "dedup"}, {"train_kmeans"}, {"embeddings"}, {}, false},
      {"build_cpt", {"dedup", "extend_vocab"}, {"dedup"}, {"manifest"}, {"bitext"}, false},
      {"pseudo_st", {"build_cpt"}, {}, {"manifest", "translations", "scores"}, {}, false},
      {"build_it", {"dedup", "pseudo_st"}, {"dedup"}, {"manifest"}, {"text_instructions", "exclude_transcripts"}, false},
      {"score", {"build_it"}, {}, {"eval_refs", "eval_hyps"}, {"eval_hyps_b"}, false},
  };
  return d;
}

const StageDecl& decl_of(const std::string& name) {
  for (const auto& d : stage_decls()) {
    if (name == d.name) return d;
  }
  throw Error(Errc::config, "unknown stage '" + name + "'");
}

const std::set<std::string>& known_inputs() {
  static const std::set<std::string> k{"manifest",     "embeddings", "bitext",    "text_instructions",
                                       "translations", "scores",     "exclude_transcripts",
                                       "eval_refs",    "eval_hyps",  "eval_hyps_b"};
  return k;
}

fs::path resolve(const fs::path& base, const fs::path& p) { return p.is_relative() ? base / p : p; }

}  // namespace

const std::vector<std::string>& pipeline_stage_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& d : stage_decls()) n.emplace_back(d.name);
    return n;
  }();
  return names;
}

StageGraph pipeline_stage_graph() {
  StageGraph g;
  for (const auto& d : stage_decls()) g.add(d.name, d.order_after);
  return g;
}

// --- config -------------------------------------------------------------------

std::uint64_t PipelineConfig::stage_seed(const std::string& name) const {
  const auto it = stages.find(name);
  if (it != stages.end()) {
    const json j = json::parse(it->second);
    if (j.contains("seed")) return j.at("seed").get<std::uint64_t>();
  }
  return derive_seed(seed, std::string_view(name));
}

PipelineConfig parse_pipeline_config(std::string_view json_text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::config, std::string("pipeline config: ") + e.what());
  }
  PipelineConfig c;
  c.base_dir = base_dir;
  try {
    if (!j.is_object()) throw Error(Errc::config, "pipeline config must be a JSON object");
    for (const auto& [key, _] : j.items()) {
      static const std::set<std::string> top{"version", "seed", "output_dir", "workers", "inputs", "stages"};
      if (!top.count(key)) throw Error(Errc::config, "unknown config key '" + key + "'");
    }
    if (!j.contains("version")) throw Error(Errc::config, "config lacks \"version\"");
    c.version = j.at("version").get<int>();
    if (c.version != 1) throw Error(Errc::config, "unsupported config version " + std::to_string(c.version));
    c.seed = j.value("seed", std::uint64_t{0});
    c.output_dir = resolve(base_dir, j.value("output_dir", std::string("out")));
    const int workers = j.value("workers", 1);
    if (workers < 1) throw Error(Errc::config, "workers must be >= 1");
    c.workers = static_cast<unsigned>(workers);
    if (j.contains("inputs")) {
      for (const auto& [key, v] : j.at("inputs").items()) {
        if (!known_inputs().count(key)) throw Error(Errc::config, "unknown input '" + key + "'");
        c.inputs[key] = resolve(base_dir, v.get<std::string>());
      }
    }
    if (j.contains("stages")) {
      for (const auto& [key, v] : j.at("stages").items()) {
        decl_of(key);
        if (!v.is_object()) throw Error(Errc::config, "stage block '" + key + "' must be an object");
        c.stages[key] = v.dump();
      }
    }
  } catch (const json::exception& e) {
    throw Error(Errc::config, std::string("pipeline config: ") + e.what());
  }
  return c;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::config, "cannot read config " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_pipeline_config(text, fs::absolute(path).parent_path());
}

void apply_environment_overrides(PipelineConfig& c) {
  if (const char* v = std::getenv("DSUKIT_OUTPUT_DIR"); v && *v) c.output_dir = v;
  if (const char* v = std::getenv("DSUKIT_WORKERS"); v && *v) {
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (*end != '\0' || n < 1) throw Error(Errc::config, std::string("DSUKIT_WORKERS must be a positive integer, got '") + v + "'");
    c.workers = static_cast<unsigned>(n);
  }
  for (const auto& key : known_inputs()) {
    std::string var = "DSUKIT_INPUT_";
    for (char ch : key) var.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
    if (const char* v = std::getenv(var.c_str()); v && *v) c.inputs[key] = v;
  }
}

void validate_pipeline_config(const PipelineConfig& c) {
  if (c.version != 1) throw Error(Errc::config, "unsupported config version " + std::to_string(c.version));
  if (c.stages.empty()) throw Error(Errc::config, "config enables no stages");
  if (c.output_dir.empty()) throw Error(Errc::config, "output_dir is empty");
  pipeline_stage_graph().order();
  for (const auto& [name, _] : c.stages) {
    const auto& d = decl_of(name);
    for (const auto& s : d.requires_stages) {
      if (!c.has_stage(s)) throw Error(Errc::config, "stage '" + name + "' needs stage '" + s + "' to be enabled");
    }
    auto check = [&](const std::string& key, bool required) {
      const auto it = c.inputs.find(key);
      if (it == c.inputs.end()) {
        if (required) throw Error(Errc::validation, "stage '" + name + "' needs input '" + key + "', which the config does not declare");
        return;
      }
      if (!fs::is_regular_file(it->second)) {
        throw Error(Errc::validation, "input '" + key + "' (" + it->second.string() + ") does not exist");
      }
    };
    for (const auto& k : d.requires_inputs) check(k, true);
    for (const auto& k : d.optional_inputs) check(k, false);
  }
  // stage blocks are parsed here so that bad parameters fail up front
  try {
    if (c.has_stage("select")) {
      const json b = json::parse(c.stages.at("select"));
      if (b.contains("rules")) parse_cap_rules(b.dump());
    }
    if (c.has_stage("train_kmeans")) {
      const json b = json::parse(c.stages.at("train_kmeans"));
      if (b.value("k", std::int64_t{1}) < 1) throw Error(Errc::config, "train_kmeans.k must be >= 1");
      kmeans_init_from_string(b.value("init", std::string("kmeanspp")));
    }
    if (c.has_stage("build_cpt")) parse_mixture_spec(c.stages.at("build_cpt"));
    if (c.has_stage("build_it")) parse_it_build_spec(c.stages.at("build_it"));
    if (c.has_stage("score")) {
      const json b = json::parse(c.stages.at("score"));
      const auto task = b.value("task", std::string("asr"));
      if (task != "asr" && task != "mt") throw Error(Errc::config, "score.task must be asr or mt");
    }
  } catch (const json::exception& e) {
    throw Error(Errc::config, std::string("stage block: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::config) throw;
    throw Error(Errc::config, e.what());
  }
}

// --- run report ---------------------------------------------------------------

std::map<std::string, std::string> RunReport::digests() const {
  std::map<std::string, std::string> out;
  for (const auto& s : stages) {
    for (const auto& [k, v] : s.artifacts) out[k] = v;
  }
  return out;
}

namespace {

json stage_json(const StageReport& s) {
  return {{"name", s.name},
          {"status", s.status},
          {"seconds", s.seconds},
          {"input_records", s.input_records},
          {"output_records", s.output_records},
          {"metrics", s.metrics},
          {"artifacts", s.artifacts}};
}

}  // namespace

std::string RunReport::to_json() const {
  json j;
  j["version"] = 1;
  j["seed"] = seed;
  j["stages"] = json::array();
  for (const auto& s : stages) j["stages"].push_back(stage_json(s));
  j["digests"] = digests();
  if (!failed_stage.empty()) {
    j["failed_stage"] = failed_stage;
    j["error"] = error;
  }
  return j.dump(2);
}

PipelineError::PipelineError(Errc code, const std::string& stage, const std::string& message, RunReport partial)
    : Error(code, "stage '" + stage + "': " + message), stage_(stage), partial_(std::move(partial)) {}

// --- stages -------------------------------------------------------------------

namespace {

struct Ctx {
  const PipelineConfig& cfg;
  json block;
  std::uint64_t seed;
  fs::path out;
  StageReport& rep;

  fs::path input(const std::string& key) const { return cfg.inputs.at(key); }
  bool has_input(const std::string& key) const { return cfg.inputs.count(key) != 0; }
  fs::path artifact(const std::string& name) {
    rep.artifacts[name];
    return out / name;
  }
  fs::path upstream(const std::string& name) const { return out / name; }
};

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream o(p, std::ios::binary | std::ios::trunc);
  if (!o) throw Error(Errc::io, "cannot create " + p.string());
  o << text << '\n';
  if (!o) throw Error(Errc::io, "write failed for " + p.string());
}

fs::path manifest_dir(const Ctx& c) { return fs::absolute(c.input("manifest")).parent_path(); }

void stage_select(Ctx& c) {
  const auto manifest = read_manifest(c.input("manifest"));
  const auto rules =
      c.block.contains("rules") ? parse_cap_rules(c.block.dump()) : default_kmeans_subset_rules();
  const auto subset = select_subset(manifest, rules, c.seed);
  write_manifest(c.artifact("subset.jsonl"), subset);
  c.rep.input_records = manifest.size();
  c.rep.output_records = subset.size();
}

void stage_train_kmeans(Ctx& c) {
  const fs::path src = c.cfg.has_stage("select") ? c.upstream("subset.jsonl") : c.input("manifest");
  auto manifest = read_manifest(src);
  KMeansOptions o;
  o.k = c.block.value("k", kDefaultCodebookSize);
  o.max_iters = c.block.value("max_iters", o.max_iters);
  o.tol = c.block.value("tol", o.tol);
  o.init = kmeans_init_from_string(c.block.value("init", std::string("kmeanspp")));
  o.minibatch_size = c.block.value("minibatch_size", o.minibatch_size);
  o.local_trials = c.block.value("local_trials", o.local_trials);
  o.n_init = c.block.value("n_init", o.n_init);
  o.seed = c.seed;
  o.workers = c.cfg.workers;
  o.feature_source = src.filename().string();
  const bool normalize = c.block.value("normalize", false);
  ManifestFeatures data(manifest, manifest_dir(c), normalize);
  KMeansTrace trace;
  const auto cb = train_kmeans(data, o, &trace);
  save_codebook(cb, c.artifact("codebook.spkm"));
  c.rep.input_records = manifest.size();
  c.rep.output_records = cb.k();
  c.rep.metrics["inertia"] = cb.final_inertia;
  c.rep.metrics["iterations"] = cb.iterations_run;
  c.rep.metrics["frames"] = static_cast<double>(trace.frames);
  c.rep.metrics["reseeded_clusters"] = static_cast<double>(trace.reseeded_clusters);
}

void stage_encode(Ctx& c) {
  const auto manifest = read_manifest(c.input("manifest"));
  const auto cb = load_codebook(c.upstream("codebook.spkm"));
  bool normalize = false;
  if (c.cfg.has_stage("train_kmeans")) normalize = json::parse(c.cfg.stages.at("train_kmeans")).value("normalize", false);
  const auto units = encode_manifest(cb, manifest, manifest_dir(c), normalize, c.cfg.workers);
  write_dsu_corpus(c.artifact("units.jsonl"), units);
  std::size_t frames = 0;
  for (const auto& u : units) frames += u.ids.size();
  c.rep.input_records = manifest.size();
  c.rep.output_records = units.size();
  c.rep.metrics["frames"] = static_cast<double>(frames);
}

void stage_dedup(Ctx& c) {
  auto units = read_dsu_corpus(c.upstream("units.jsonl"));
  std::uint64_t before = 0, after = 0;
  for (auto& u : units) {
    before += u.ids.size();
    u = dedup(u);
    after += u.ids.size();
  }
  write_dsu_corpus(c.artifact("units.dedup.jsonl"), units);
  c.rep.input_records = units.size();
  c.rep.output_records = units.size();
  c.rep.metrics["units_before"] = static_cast<double>(before);
  c.rep.metrics["units_after"] = static_cast<double>(after);
  c.rep.metrics["estimated_hours"] = estimate_hours(after, c.block.value("units_per_sec", kDefaultUnitsPerSecond));
}

void stage_extend_vocab(Ctx& c) {
  const auto table = load_embeddings(c.input("embeddings"));
  const auto cb = load_codebook(c.upstream("codebook.spkm"));
  const double scale = c.block.value("scale", kDefaultEmbeddingInitScale);
  const auto spec = fit_gaussian(table, scale, c.seed);
  ExtendReport er;
  const auto ext = extend_vocab(table, unit_token_names(cb.k(), c.block.value("index_base", std::int64_t{0})), spec, &er);
  save_embeddings(ext, c.artifact("embeddings.extended.spem"));
  c.rep.input_records = table.size();
  c.rep.output_records = ext.size();
  c.rep.metrics["added"] = static_cast<double>(er.added);
  c.rep.metrics["jitter"] = er.jitter;
  c.rep.metrics["diagonal_fallback"] = er.factor == CovarianceFactor::diagonal ? 1.0 : 0.0;
}

std::vector<Corpus> corpora_field(const json& b, const char* key, const std::vector<Corpus>& dflt) {
  if (!b.contains(key)) return dflt;
  std::vector<Corpus> out;
  for (const auto& n : b.at(key)) out.push_back(corpus_from_string(n.get<std::string>()));
  return out;
}

void stage_build_cpt(Ctx& c) {
  const auto manifest = read_manifest(c.input("manifest"));
  const auto units = read_dsu_corpus(c.upstream("units.dedup.jsonl"));
  const auto bitext = c.has_input("bitext") ? read_bitext(c.input("bitext")) : std::vector<BitextRow>{};
  const auto speech = corpora_field(c.block, "speech_corpora", default_cpt_speech_corpora());
  const auto sources = cpt_sources(manifest, units, bitext, speech, derive_seed(c.seed, std::string_view("caps")),
                                   c.block.value("index_base", std::int64_t{0}), c.block.value("apply_caps", true));
  MixtureSpec spec = parse_mixture_spec(c.block.dump());
  spec.seed = c.seed;
  if (spec.speech_sources.empty()) {
    for (Corpus s : speech) spec.speech_sources.emplace_back(to_string(s));
  }
  if (spec.text_sources.empty()) {
    std::set<std::string> names;
    for (const auto& b : bitext) names.insert(b.source);
    for (const auto& n : names) spec.text_sources.push_back({n, 1.0});
  }
  const auto result = build_mixture(sources, spec);
  write_records(c.artifact("cpt.jsonl"), result.records);
  write_text(c.artifact("cpt_report.json"), to_json(result.report));
  std::size_t available = 0;
  for (const auto& [_, v] : sources) available += v.size();
  c.rep.input_records = available;
  c.rep.output_records = result.records.size();
  c.rep.metrics["total_tokens"] = static_cast<double>(result.report.total_tokens);
  c.rep.metrics["speech_tokens"] = static_cast<double>(result.report.speech_tokens);
  c.rep.metrics["text_tokens"] = static_cast<double>(result.report.text_tokens);
  c.rep.metrics["dsu_tokens"] = static_cast<double>(result.report.dsu_tokens);
  c.rep.metrics["speech_fraction"] = result.report.speech_fraction();
  c.rep.metrics["dsu_fraction_within_speech"] = result.report.dsu_fraction_within_speech();
}

void stage_pseudo_st(Ctx& c) {
  const auto manifest = read_manifest(c.input("manifest"));
  const auto translations = read_translations(c.input("translations"));
  const auto scores = read_scores(c.input("scores"));
  const auto joined = join_pseudo_labels(manifest, translations, scores);
  const auto kept = filter_by_qe(joined, c.block.value("threshold", kDefaultQeThreshold));
  PseudoSampleReport rep;
  const auto sample = sample_pseudo_sets(group_streams(kept), c.block.value("n_direct", kDefaultPseudoSampleSize),
                                         c.block.value("n_multiturn", kDefaultPseudoSampleSize), c.seed, &rep);
  write_triples(c.artifact("pseudo_direct.jsonl"), sample.direct);
  write_triples(c.artifact("pseudo_multiturn.jsonl"), sample.multiturn);
  write_text(c.artifact("pseudo_report.json"), to_json(rep));
  c.rep.input_records = joined.size();
  c.rep.output_records = sample.direct.size() + sample.multiturn.size();
  c.rep.metrics["kept_after_qe"] = static_cast<double>(kept.size());
  c.rep.metrics["direct"] = static_cast<double>(sample.direct.size());
  c.rep.metrics["multiturn"] = static_cast<double>(sample.multiturn.size());
}

void stage_build_it(Ctx& c) {
  const auto manifest = read_manifest(c.input("manifest"));
  const auto units = read_dsu_corpus(c.upstream("units.dedup.jsonl"));
  std::vector<ScoredTriple> direct, multiturn;
  std::vector<TextInstruction> text;
  ItInputs in;
  in.manifest = &manifest;
  in.units = &units;
  if (c.cfg.has_stage("pseudo_st")) {
    direct = read_triples(c.upstream("pseudo_direct.jsonl"));
    multiturn = read_triples(c.upstream("pseudo_multiturn.jsonl"));
    in.pseudo_direct = &direct;
    in.pseudo_multiturn = &multiturn;
  }
  if (c.has_input("text_instructions")) {
    text = read_text_instructions(c.input("text_instructions"));
    in.text = &text;
  }
  const auto spec = parse_it_build_spec(c.block.dump());
  const auto sources = it_sources(in, spec, derive_seed(c.seed, std::string_view("caps")));
  const auto exclude = c.has_input("exclude_transcripts") ? read_exclusion_list(c.input("exclude_transcripts"))
                                                          : std::set<std::string>{};
  ItReport rep;
  const auto records = build_it_set(sources, exclude, c.seed, default_language_names(), default_token_counter(), &rep);
  write_records(c.artifact("it.jsonl"), records);
  write_text(c.artifact("it_report.json"),
             json{{"selected", rep.selected}, {"excluded", rep.excluded}, {"available", rep.available}}.dump(2));
  std::size_t available = 0, tokens = 0, excluded = 0;
  for (const auto& [_, n] : rep.available) available += n;
  for (const auto& [_, n] : rep.excluded) excluded += n;
  for (const auto& r : records) tokens += r.token_count;
  c.rep.input_records = available;
  c.rep.output_records = records.size();
  c.rep.metrics["tokens"] = static_cast<double>(tokens);
  c.rep.metrics["excluded"] = static_cast<double>(excluded);
}

void stage_score(Ctx& c) {
  ScoreRequest req;
  req.task = c.block.value("task", std::string("asr"));
  req.refs = read_lines(c.input("eval_refs"));
  req.hyps = read_lines(c.input("eval_hyps"));
  if (c.has_input("eval_hyps_b")) {
    req.hyps_b = read_lines(c.input("eval_hyps_b"));
    req.bootstrap = c.block.value("bootstrap", std::size_t{1000});
  }
  req.alpha = c.block.value("alpha", req.alpha);
  req.seed = c.seed;
  req.workers = c.cfg.workers;
  const auto text = score_to_json(req);
  write_text(c.artifact("scores.json"), text);
  c.rep.input_records = req.refs.size();
  c.rep.output_records = 1;
  c.rep.metrics["value"] = json::parse(text).at("value").get<double>();
}

using StageFn = std::function<void(Ctx&)>;

const std::map<std::string, StageFn>& stage_fns() {
  static const std::map<std::string, StageFn> m{
      {"select", stage_select},       {"train_kmeans", stage_train_kmeans}, {"encode", stage_encode},
      {"dedup", stage_dedup},         {"extend_vocab", stage_extend_vocab}, {"build_cpt", stage_build_cpt},
      {"pseudo_st", stage_pseudo_st}, {"build_it", stage_build_it},         {"score", stage_score},
  };
  return m;
}

// Digest over the feature files a manifest names, in manifest order.
std::string features_digest(const PipelineConfig& cfg) {
  const auto mpath = cfg.inputs.at("manifest");
  const auto base = fs::absolute(mpath).parent_path();
  std::string acc;
  for (const auto& r : read_manifest(mpath)) {
    fs::path p = r.feature_path;
    if (p.is_relative()) p = base / p;
    acc += r.feature_path + '\t' + sha256_file(p) + '\n';
  }
  return sha256_hex(acc);
}

struct CacheRecord {
  std::string key;
  StageReport report;
};

std::optional<CacheRecord> read_cache(const fs::path& p) {
  if (!fs::exists(p)) return std::nullopt;
  try {
    const json j = detail::read_json_file(p);
    CacheRecord r;
    r.key = j.at("key").get<std::string>();
    r.report.input_records = j.at("input_records").get<std::size_t>();
    r.report.output_records = j.at("output_records").get<std::size_t>();
    r.report.metrics = j.at("metrics").get<std::map<std::string, double>>();
    r.report.artifacts = j.at("artifacts").get<std::map<std::string, std::string>>();
    return r;
  } catch (const std::exception& e) {
    log_warning("ignoring unreadable cache record " + p.string() + ": " + e.what());
    return std::nullopt;
  }
}

void write_cache(const fs::path& p, const std::string& key, const StageReport& s) {
  json j{{"key", key},
         {"input_records", s.input_records},
         {"output_records", s.output_records},
         {"metrics", s.metrics},
         {"artifacts", s.artifacts}};
  write_text(p, j.dump(2));
}

}  // namespace

RunReport run_pipeline(const PipelineConfig& cfg, const RunOptions& opts) {
  validate_pipeline_config(cfg);
  RunReport report;
  report.seed = cfg.seed;
  const fs::path out = cfg.output_dir;
  const fs::path cache_dir = out / ".cache";
  std::error_code ec;
  fs::create_directories(cache_dir, ec);
  if (ec) throw Error(Errc::io, "cannot create " + cache_dir.string() + ": " + ec.message());

  std::map<std::string, std::string> input_digests;
  for (const auto& [k, p] : cfg.inputs) input_digests[k] = sha256_file(p);
  std::optional<std::string> feat_digest;

  auto abort = [&](const std::string& stage, Errc code, const std::string& msg) {
    report.failed_stage = stage;
    report.error = msg;
    try {
      write_text(out / "run_report.json", report.to_json());
    } catch (const Error&) {
    }
    throw PipelineError(code, stage, msg, report);
  };

  for (const auto& name : pipeline_stage_graph().order()) {
    if (!cfg.has_stage(name)) continue;
    const auto& d = decl_of(name);
    const auto t0 = std::chrono::steady_clock::now();
    StageReport rep;
    rep.name = name;
    try {
      json keyj;
      keyj["stage"] = name;
      keyj["block"] = json::parse(cfg.stages.at(name));
      keyj["seed"] = cfg.stage_seed(name);
      for (const auto& k : d.requires_inputs) keyj["inputs"][k] = input_digests.at(k);
      for (const auto& k : d.optional_inputs) {
        if (input_digests.count(k)) keyj["inputs"][k] = input_digests.at(k);
      }
      if (d.reads_features) {
        if (!feat_digest) feat_digest = features_digest(cfg);
        keyj["features"] = *feat_digest;
      }
      keyj["upstream"] = report.digests();
      // train_kmeans settings change what encode produces
      if (name == "encode" && cfg.has_stage("train_kmeans")) keyj["train_kmeans"] = json::parse(cfg.stages.at("train_kmeans"));
      const std::string key = sha256_hex(keyj.dump());
      const fs::path cache_file = cache_dir / (name + ".json");

      bool hit = false;
      if (!opts.force) {
        if (auto cached = read_cache(cache_file); cached && cached->key == key) {
          for (const auto& [file, digest] : cached->report.artifacts) {
            const fs::path p = out / file;
            if (!fs::exists(p) || sha256_file(p) != digest) {
              throw Error(Errc::stale_cache, "artifact '" + file + "' no longer matches its cached digest; remove " +
                                                 cache_file.string() + " or rerun with --force");
            }
          }
          rep.input_records = cached->report.input_records;
          rep.output_records = cached->report.output_records;
          rep.metrics = cached->report.metrics;
          rep.artifacts = cached->report.artifacts;
          rep.status = "cached";
          hit = true;
        }
      }
      if (!hit) {
        fs::remove(cache_file, ec);
        Ctx c{cfg, json::parse(cfg.stages.at(name)), cfg.stage_seed(name), out, rep};
        stage_fns().at(name)(c);
        for (auto& [file, digest] : rep.artifacts) digest = sha256_file(out / file);
        rep.status = "ran";
        write_cache(cache_file, key, rep);
      }
    } catch (const PipelineError&) {
      throw;
    } catch (const Error& e) {
      abort(name, e.code(), e.what());
    } catch (const json::exception& e) {
      abort(name, Errc::config, e.what());
    } catch (const std::exception& e) {
      abort(name, Errc::io, e.what());
    }
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log_info("stage " + name + ": " + rep.status + " in " + std::to_string(rep.seconds) + " s");
    report.stages.push_back(std::move(rep));
  }
  write_text(out / "run_report.json", report.to_json());
  return report;
}

}  // namespace dsukit
