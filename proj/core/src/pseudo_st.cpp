#include "dsukit/pseudo_st.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "dsukit/corpus.hpp"
#include "dsukit/error.hpp"
#include "dsukit/log.hpp"
#include "dsukit/rng.hpp"
#include "jsonl.hpp"

namespace dsukit {
namespace {

using detail::json;

constexpr double kUnitScaleCeiling = 1.5;

std::string stream_name(const StreamKey& key) {
  return std::string(to_string(key.first)) + "/en-" + key.second;
}

}  // namespace

std::vector<ScoredTriple> filter_by_qe(const std::vector<ScoredTriple>& triples, double threshold) {
  std::vector<ScoredTriple> out;
  for (const auto& t : triples) {
    if (t.qe_score >= threshold) out.push_back(t);
  }
  return out;
}

PseudoStreams group_streams(const std::vector<ScoredTriple>& triples) {
  PseudoStreams out;
  for (const auto& t : triples) out[{t.source_corpus, t.target_lang}].push_back(t);
  return out;
}

PseudoSample sample_pseudo_sets(const PseudoStreams& streams, std::int64_t n_direct, std::int64_t n_multiturn,
                                std::uint64_t seed, PseudoSampleReport* report) {
  if (n_direct < 0 || n_multiturn < 0) {
    throw Error(Errc::validation, "sample counts must be non-negative");
  }
  const auto want_direct = static_cast<std::size_t>(n_direct);
  const auto want_multi = static_cast<std::size_t>(n_multiturn);
  PseudoSampleReport local;
  PseudoSampleReport& rep = report ? *report : local;
  rep = PseudoSampleReport{};
  PseudoSample out;

  for (const auto& [key, triples] : streams) {
    std::vector<const ScoredTriple*> pool;
    pool.reserve(triples.size());
    std::set<std::string_view> ids;
    for (const auto& t : triples) {
      if (!ids.insert(t.utterance_id).second) {
        throw Error(Errc::validation, "stream " + stream_name(key) + " repeats utterance '" + t.utterance_id + "'");
      }
      pool.push_back(&t);
    }
    std::sort(pool.begin(), pool.end(), [](auto* a, auto* b) { return a->utterance_id < b->utterance_id; });

    Rng rng(derive_seed(derive_seed(seed, std::string_view("pseudo-st")), stream_name(key)));
    const std::size_t n_d = std::min(want_direct, pool.size());
    const std::size_t n_m = std::min(want_multi, pool.size() - n_d);
    const auto order = sample_without_replacement(pool.size(), n_d + n_m, rng);
    for (std::size_t i = 0; i < order.size(); ++i) {
      (i < n_d ? out.direct : out.multiturn).push_back(*pool[order[i]]);
    }

    auto& s = rep.streams[key];
    s.available = pool.size();
    s.direct = n_d;
    s.multiturn = n_m;
    s.direct_shortfall = want_direct - n_d;
    s.multiturn_shortfall = want_multi - n_m;
    auto& lang = rep.languages[key.second];
    lang.direct += n_d;
    lang.multiturn += n_m;
    lang.requested_direct += want_direct;
    lang.requested_multiturn += want_multi;
    if (s.direct_shortfall || s.multiturn_shortfall) {
      std::string note = stream_name(key) + ": " + std::to_string(pool.size()) + " filtered triples; direct " +
                         std::to_string(n_d) + "/" + std::to_string(want_direct) + ", multi-turn " +
                         std::to_string(n_m) + "/" + std::to_string(want_multi);
      log_warning("pseudo-ST shortfall, " + note);
      rep.shortfalls.push_back(std::move(note));
    }
  }
  return out;
}

std::vector<TranslationRow> read_translations(const std::filesystem::path& path) {
  std::vector<TranslationRow> out;
  detail::for_each_jsonl(path, [&](const json& j, std::size_t) {
    out.push_back({detail::required<std::string>(j, "id"), detail::required<std::string>(j, "lang"),
                   detail::required<std::string>(j, "text")});
  });
  return out;
}

void rescale_scores(std::vector<ScoreRow>& scores) {
  if (scores.empty()) return;
  double max_score = -std::numeric_limits<double>::infinity();
  for (const auto& s : scores) {
    if (!std::isfinite(s.score)) throw Error(Errc::validation, "non-finite QE score for '" + s.id + "'");
    max_score = std::max(max_score, s.score);
  }
  if (max_score <= kUnitScaleCeiling) {
    log_warning("QE scores look like 0..1 values (max " + std::to_string(max_score) + "); rescaling by 100");
    for (auto& s : scores) s.score *= 100.0;
  }
  for (const auto& s : scores) {
    if (s.score < 0.0 || s.score > 100.0) {
      throw Error(Errc::validation, "QE score " + std::to_string(s.score) + " for '" + s.id + "' outside [0,100]");
    }
  }
}

std::vector<ScoreRow> read_scores(const std::filesystem::path& path) {
  std::vector<ScoreRow> out;
  detail::for_each_jsonl(path, [&](const json& j, std::size_t) {
    out.push_back({detail::required<std::string>(j, "id"), detail::required<std::string>(j, "lang"),
                   detail::required<double>(j, "score")});
  });
  rescale_scores(out);
  return out;
}

std::vector<ScoredTriple> join_pseudo_labels(const Manifest& manifest, const std::vector<TranslationRow>& translations,
                                             const std::vector<ScoreRow>& scores) {
  std::map<std::string_view, const UtteranceRecord*> by_id;
  for (const auto& r : manifest) by_id.emplace(r.id, &r);
  std::map<std::pair<std::string_view, std::string_view>, double> score_of;
  for (const auto& s : scores) {
    if (!score_of.emplace(std::make_pair(std::string_view(s.id), std::string_view(s.lang)), s.score).second) {
      throw Error(Errc::validation, "duplicate score for ('" + s.id + "', '" + s.lang + "')");
    }
  }
  std::vector<ScoredTriple> out;
  out.reserve(translations.size());
  for (const auto& t : translations) {
    const auto rec = by_id.find(t.id);
    if (rec == by_id.end()) throw Error(Errc::validation, "translation for unknown utterance '" + t.id + "'");
    const auto sc = score_of.find({t.id, t.lang});
    if (sc == score_of.end()) throw Error(Errc::validation, "no QE score for ('" + t.id + "', '" + t.lang + "')");
    out.push_back({t.id, normalize_transcript(rec->second->transcript, rec->second->corpus), t.lang, t.text, sc->second, rec->second->corpus});
  }
  return out;
}

std::string to_triple_line(const ScoredTriple& t) {
  json j;
  j["id"] = t.utterance_id;
  j["transcript"] = t.transcript;
  j["lang"] = t.target_lang;
  j["translation"] = t.translation;
  j["qe_score"] = t.qe_score;
  j["corpus"] = std::string(to_string(t.source_corpus));
  return j.dump();
}

std::vector<ScoredTriple> read_triples(const std::filesystem::path& path) {
  std::vector<ScoredTriple> out;
  detail::for_each_jsonl(path, [&](const json& j, std::size_t) {
    out.push_back({detail::required<std::string>(j, "id"), detail::required<std::string>(j, "transcript"),
                   detail::required<std::string>(j, "lang"), detail::required<std::string>(j, "translation"),
                   detail::required<double>(j, "qe_score"),
                   corpus_from_string(j.value("corpus", std::string("OTHER")))});
  });
  return out;
}

void write_triples(const std::filesystem::path& path, const std::vector<ScoredTriple>& triples) {
  detail::JsonlWriter w(path);
  for (const auto& t : triples) w.write_line(to_triple_line(t));
  w.close();
}

std::string to_json(const PseudoSampleReport& report) {
  json j;
  json streams = json::array();
  for (const auto& [key, s] : report.streams) {
    streams.push_back({{"corpus", std::string(to_string(key.first))},
                       {"lang", key.second},
                       {"available", s.available},
                       {"direct", s.direct},
                       {"multiturn", s.multiturn},
                       {"direct_shortfall", s.direct_shortfall},
                       {"multiturn_shortfall", s.multiturn_shortfall}});
  }
  j["streams"] = std::move(streams);
  json langs = json::object();
  for (const auto& [lang, l] : report.languages) {
    langs[lang] = {{"direct", l.direct},
                   {"multiturn", l.multiturn},
                   {"requested_direct", l.requested_direct},
                   {"requested_multiturn", l.requested_multiturn}};
  }
  j["languages"] = std::move(langs);
  j["shortfalls"] = report.shortfalls;
  return j.dump(2);
}

}  // namespace dsukit
