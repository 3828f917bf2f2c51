#include <fstream>
#include <map>
#include <unordered_map>

#include "dsukit/eval.hpp"
#include "dsukit/pipeline.hpp"
#include "dsukit/prompt.hpp"
#include "jsonl.hpp"
#include "parallel.hpp"

namespace dsukit {

using detail::json;
namespace fs = std::filesystem;

std::vector<DsuSequence> encode_manifest(const Codebook& codebook, const Manifest& manifest,
                                         const fs::path& base_dir, bool normalize, unsigned workers) {
  std::vector<DsuSequence> out(manifest.size());
  detail::parallel_for(manifest.size(), workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& r = manifest[i];
      fs::path p = r.feature_path;
      if (p.is_relative()) p = base_dir / p;
      auto seq = read_features(p);
      if (normalize) normalize_mean_variance(seq);
      out[i] = assign(codebook, seq);
      out[i].utterance_id = r.id;
    }
  });
  return out;
}

std::vector<BitextRow> read_bitext(const fs::path& path) {
  std::vector<BitextRow> rows;
  detail::for_each_jsonl(path, [&](const json& j, std::size_t lineno) {
    BitextRow r;
    r.id = j.value("id", "bitext-" + std::to_string(lineno));
    r.source = j.value("source", r.source);
    r.src_lang = detail::required<std::string>(j, "src_lang");
    r.tgt_lang = detail::required<std::string>(j, "tgt_lang");
    r.src = detail::required<std::string>(j, "src");
    r.tgt = detail::required<std::string>(j, "tgt");
    rows.push_back(std::move(r));
  });
  return rows;
}

std::vector<TextInstruction> read_text_instructions(const fs::path& path) {
  std::vector<TextInstruction> rows;
  detail::for_each_jsonl(path, [&](const json& j, std::size_t) {
    TextInstruction t;
    t.id = detail::required<std::string>(j, "id");
    t.task = task_from_string(detail::required<std::string>(j, "task"));
    t.text = detail::required<std::string>(j, "text");
    t.source = j.value("source", "text_" + std::string(to_string(t.task)));
    rows.push_back(std::move(t));
  });
  return rows;
}

const std::vector<Corpus>& default_cpt_speech_corpora() {
  static const std::vector<Corpus> c{Corpus::SPGI, Corpus::GigaSpeech, Corpus::MLS, Corpus::VoxPopuli};
  return c;
}

namespace {

using UnitIndex = std::unordered_map<std::string, const DsuSequence*>;

UnitIndex index_units(const std::vector<DsuSequence>& units) {
  UnitIndex idx;
  for (const auto& s : units) {
    if (!idx.emplace(s.utterance_id, &s).second) {
      throw Error(Errc::validation, "unit corpus repeats utterance '" + s.utterance_id + "'");
    }
  }
  return idx;
}

std::string rendered_units(const DsuSequence& s, std::int64_t base) {
  return s.deduplicated ? render_tokens(s, base) : render_tokens(dedup(s), base);
}

}  // namespace

SourceRecords cpt_sources(const Manifest& manifest, const std::vector<DsuSequence>& units,
                          const std::vector<BitextRow>& bitext, const std::vector<Corpus>& speech_corpora,
                          std::uint64_t seed, std::int64_t index_base, bool apply_caps, const TokenCounter& counter) {
  SourceRecords out;
  const auto idx = index_units(units);
  const Manifest capped = apply_caps ? apply_corpus_caps(manifest, seed) : manifest;
  const std::set<Corpus> wanted(speech_corpora.begin(), speech_corpora.end());
  for (Corpus c : speech_corpora) out[std::string(to_string(c))];
  for (const auto& r : capped) {
    if (!wanted.count(r.corpus)) continue;
    const auto it = idx.find(r.id);
    if (it == idx.end()) continue;
    TrainingRecord rec;
    rec.record_id = r.id;
    rec.phase = Phase::CPT;
    rec.task = Task::ASR;
    rec.source = std::string(to_string(r.corpus));
    rec.text = render_prompt(PromptKind::ASR_CPT, {{"dsu", rendered_units(*it->second, index_base)},
                                                   {"transcript", normalize_transcript(r.transcript, r.corpus)}});
    rec.token_count = counter.count(rec.text);
    out[rec.source].push_back(std::move(rec));
  }
  for (const auto& b : bitext) {
    TrainingRecord rec;
    rec.record_id = b.id;
    rec.phase = Phase::CPT;
    rec.task = Task::MT;
    rec.source = b.source;
    rec.lang_pair = std::make_pair(b.src_lang, b.tgt_lang);
    rec.text = render_prompt(PromptKind::MT_CPT, {{"source_lang", b.src_lang},
                                                  {"target_lang", b.tgt_lang},
                                                  {"source", b.src},
                                                  {"translation", b.tgt}});
    rec.token_count = counter.count(rec.text);
    out[rec.source].push_back(std::move(rec));
  }
  return out;
}

namespace {

std::optional<std::size_t> count_field(const json& j) {
  if (!j.contains("count") || j.at("count").is_null()) return std::nullopt;
  const auto& c = j.at("count");
  if (c.is_string()) {
    if (c.get<std::string>() == "all") return std::nullopt;
    throw Error(Errc::config, "count must be a number or \"all\"");
  }
  const auto v = c.get<std::int64_t>();
  if (v < 0) throw Error(Errc::config, "count must be non-negative");
  return static_cast<std::size_t>(v);
}

std::vector<ItBuildSpec::Entry> entries(const json& j, const char* key, std::vector<ItBuildSpec::Entry> dflt) {
  if (!j.contains(key)) return dflt;
  std::vector<ItBuildSpec::Entry> out;
  for (const auto& e : j.at(key)) out.push_back({corpus_from_string(detail::required<std::string>(e, "corpus")), count_field(e)});
  return out;
}

}  // namespace

ItBuildSpec parse_it_build_spec(std::string_view json_text) {
  const json j = detail::parse_json(json_text, "IT build spec");
  ItBuildSpec s;
  try {
    s.asr = entries(j, "asr", {{Corpus::CV, std::nullopt}});
    s.st = entries(j, "st", {{Corpus::EuroparlST, std::nullopt}, {Corpus::FLEURS, std::nullopt}, {Corpus::CoVoST2, std::nullopt}});
    if (j.contains("pseudo_direct")) s.pseudo_direct = count_field(j.at("pseudo_direct"));
    if (j.contains("pseudo_multiturn")) s.pseudo_multiturn = count_field(j.at("pseudo_multiturn"));
    if (j.contains("text")) s.text = count_field(j.at("text"));
    s.apply_caps = j.value("apply_caps", s.apply_caps);
    s.index_base = j.value("index_base", s.index_base);
  } catch (const json::exception& e) {
    throw Error(Errc::config, std::string("IT build spec: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::config) throw;
    throw Error(Errc::config, std::string("IT build spec: ") + e.what());
  }
  return s;
}

std::vector<ItSource> it_sources(const ItInputs& in, const ItBuildSpec& spec, std::uint64_t seed) {
  std::vector<ItSource> out;
  static const std::vector<DsuSequence> no_units;
  const auto idx = index_units(in.units ? *in.units : no_units);
  auto take = [](std::optional<std::size_t> c, std::size_t n) { return c ? std::min(*c, n) : n; };

  if (in.manifest) {
    const Manifest capped = spec.apply_caps ? apply_corpus_caps(*in.manifest, seed) : *in.manifest;
    for (const auto& e : spec.asr) {
      ItSource src{"asr_" + std::string(to_string(e.corpus)), Task::ASR, e.corpus, {}, 0};
      for (const auto& r : capped) {
        if (r.corpus != e.corpus) continue;
        const auto it = idx.find(r.id);
        if (it == idx.end()) continue;
        ItExample ex;
        ex.id = r.id;
        ex.dsu = rendered_units(*it->second, spec.index_base);
        ex.transcript = normalize_transcript(r.transcript, r.corpus);
        src.examples.push_back(std::move(ex));
      }
      src.count = take(e.count, src.examples.size());
      out.push_back(std::move(src));
    }
    for (const auto& e : spec.st) {
      ItSource src{"st_" + std::string(to_string(e.corpus)), Task::ST_DIRECT, e.corpus, {}, 0};
      for (const auto& r : *in.manifest) {
        if (r.corpus != e.corpus) continue;
        const auto it = idx.find(r.id);
        if (it == idx.end()) continue;
        for (const auto& [lang, tr] : r.translations) {
          ItExample ex;
          ex.id = r.id + ":" + lang;
          ex.dsu = rendered_units(*it->second, spec.index_base);
          ex.transcript = normalize_transcript(r.transcript, r.corpus);
          ex.translation = tr.text;
          ex.target_lang = lang;
          src.examples.push_back(std::move(ex));
        }
      }
      src.count = take(e.count, src.examples.size());
      out.push_back(std::move(src));
    }
  }

  auto pseudo = [&](const std::vector<ScoredTriple>* triples, const char* name, Task task,
                    std::optional<std::size_t> count) {
    if (!triples) return;
    ItSource src{name, task, Corpus::OTHER, {}, 0};
    for (const auto& t : *triples) {
      const auto it = idx.find(t.utterance_id);
      if (it == idx.end()) {
        throw Error(Errc::validation, std::string(name) + ": no units for utterance '" + t.utterance_id + "'");
      }
      ItExample ex;
      ex.id = t.utterance_id + ":" + t.target_lang;
      ex.dsu = rendered_units(*it->second, spec.index_base);
      ex.transcript = t.transcript;
      ex.translation = t.translation;
      ex.target_lang = t.target_lang;
      src.examples.push_back(std::move(ex));
    }
    src.count = take(count, src.examples.size());
    out.push_back(std::move(src));
  };
  pseudo(in.pseudo_direct, "pseudo_direct", Task::ST_DIRECT, spec.pseudo_direct);
  pseudo(in.pseudo_multiturn, "pseudo_multiturn", Task::ST_MULTITURN, spec.pseudo_multiturn);

  if (in.text) {
    std::map<std::string, ItSource> groups;
    for (const auto& t : *in.text) {
      auto [it, fresh] = groups.try_emplace(t.source);
      if (fresh) {
        it->second.name = t.source;
        it->second.task = t.task;
      }
      ItExample ex;
      ex.id = t.id;
      ex.text = t.text;
      it->second.examples.push_back(std::move(ex));
    }
    for (auto& [name, src] : groups) {
      src.count = take(spec.text, src.examples.size());
      out.push_back(std::move(src));
    }
  }
  return out;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

std::string score_to_json(const ScoreRequest& req) {
  if (req.refs.size() != req.hyps.size()) {
    throw Error(Errc::validation, "references and hypotheses differ in length (" + std::to_string(req.refs.size()) +
                                      " vs " + std::to_string(req.hyps.size()) + ")");
  }
  const bool compare = !req.hyps_b.empty() && req.bootstrap > 0;
  if (!req.hyps_b.empty() && req.hyps_b.size() != req.refs.size()) {
    throw Error(Errc::validation, "second system differs in length from the references");
  }
  json out;
  json details;
  BootstrapOptions bo;
  bo.n_resamples = req.bootstrap;
  bo.alpha = req.alpha;
  bo.seed = req.seed;
  bo.workers = req.workers;
  std::optional<BootstrapResult> boot;
  if (req.task == "asr") {
    std::vector<EvalPair> pairs;
    pairs.reserve(req.refs.size());
    for (std::size_t i = 0; i < req.refs.size(); ++i) pairs.push_back({req.refs[i], req.hyps[i]});
    const auto r = wer(pairs);
    out["metric"] = "wer";
    out["value"] = r.wer;
    details = {{"substitutions", r.totals.substitutions},
               {"insertions", r.totals.insertions},
               {"deletions", r.totals.deletions},
               {"reference_words", r.totals.reference_words},
               {"segments", r.pairs}};
    if (compare) {
      bo.higher_is_better = false;
      boot = paired_bootstrap(make_wer_scorer(req.refs, req.hyps), make_wer_scorer(req.refs, req.hyps_b),
                              req.refs.size(), bo);
    }
  } else if (req.task == "mt") {
    const auto r = bleu(req.refs, req.hyps);
    out["metric"] = "bleu";
    out["value"] = r.score;
    details = {{"precisions", r.precisions},
               {"brevity_penalty", r.brevity_penalty},
               {"hyp_len", r.hyp_len},
               {"ref_len", r.ref_len},
               {"segments", req.refs.size()}};
    if (compare) boot = paired_bootstrap_bleu(req.hyps, req.hyps_b, req.refs, bo);
  } else {
    throw Error(Errc::config, "unknown scoring task '" + req.task + "' (expected asr or mt)");
  }
  if (boot) {
    details["bootstrap"] = {{"score_a", boot->score_a},  {"score_b", boot->score_b},
                            {"wins_a", boot->wins_a},    {"wins_b", boot->wins_b},
                            {"ties", boot->ties},        {"n_resamples", boot->n_resamples},
                            {"alpha", req.alpha},        {"verdict", std::string(to_string(boot->verdict))}};
  }
  out["details"] = std::move(details);
  return out.dump(2);
}

}  // namespace dsukit
