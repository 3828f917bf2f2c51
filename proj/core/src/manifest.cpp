#include "dsukit/manifest.hpp"

#include <array>
#include <cmath>
#include <set>
#include <utility>

#include "dsukit/error.hpp"
#include "jsonl.hpp"

namespace dsukit {
namespace {

using detail::json;

constexpr std::array<std::pair<Corpus, std::string_view>, 9> kCorpusNames{{
    {Corpus::SPGI, "SPGI"},
    {Corpus::GigaSpeech, "GigaSpeech"},
    {Corpus::MLS, "MLS"},
    {Corpus::VoxPopuli, "VoxPopuli"},
    {Corpus::CV, "CV"},
    {Corpus::EuroparlST, "EuroparlST"},
    {Corpus::FLEURS, "FLEURS"},
    {Corpus::CoVoST2, "CoVoST2"},
    {Corpus::OTHER, "OTHER"},
}};

UtteranceRecord from_json(const json& j) {
  UtteranceRecord r;
  r.id = detail::required<std::string>(j, "id");
  r.speaker = detail::required<std::string>(j, "speaker");
  r.duration_sec = detail::required<double>(j, "duration_sec");
  r.transcript = j.value("transcript", std::string{});
  r.feature_path = j.value("feature_path", std::string{});
  r.corpus = corpus_from_string(j.value("corpus", std::string("OTHER")));
  if (!(r.duration_sec >= 0.0) || !std::isfinite(r.duration_sec)) {
    throw Error(Errc::validation, "record '" + r.id + "' has invalid duration_sec");
  }
  if (j.contains("translations") && !j.at("translations").is_null()) {
    for (const auto& [lang, t] : j.at("translations").items()) {
      Translation tr;
      tr.text = detail::required<std::string>(t, "text");
      if (!t.contains("qe_score")) {
        throw Error(Errc::validation, "record '" + r.id + "' translation '" + lang + "' has no qe_score");
      }
      tr.qe_score = t.at("qe_score").get<double>();
      if (!(tr.qe_score >= 0.0 && tr.qe_score <= 100.0)) {
        throw Error(Errc::validation, "record '" + r.id + "' qe_score out of [0,100]");
      }
      r.translations.emplace(lang, std::move(tr));
    }
  }
  return r;
}

}  // namespace

std::string_view to_string(Corpus corpus) {
  for (const auto& [c, name] : kCorpusNames) {
    if (c == corpus) return name;
  }
  return "OTHER";
}

Corpus corpus_from_string(std::string_view name) {
  for (const auto& [c, n] : kCorpusNames) {
    if (n == name) return c;
  }
  throw Error(Errc::parse, "unknown corpus tag '" + std::string(name) + "'");
}

UtteranceRecord parse_manifest_line(std::string_view line) {
  const json j = detail::parse_json(line, "manifest line");
  try {
    return from_json(j);
  } catch (const json::exception& e) {
    throw Error(Errc::parse, std::string("manifest line: ") + e.what());
  }
}

std::string to_manifest_line(const UtteranceRecord& r) {
  json j;
  j["id"] = r.id;
  j["speaker"] = r.speaker;
  j["duration_sec"] = r.duration_sec;
  j["transcript"] = r.transcript;
  json tr = json::object();
  for (const auto& [lang, t] : r.translations) tr[lang] = {{"text", t.text}, {"qe_score", t.qe_score}};
  j["translations"] = std::move(tr);
  j["feature_path"] = r.feature_path;
  j["corpus"] = std::string(to_string(r.corpus));
  return j.dump();
}

Manifest read_manifest(const std::filesystem::path& path) {
  Manifest out;
  detail::for_each_jsonl(path, [&](const json& j, std::size_t lineno) {
    try {
      out.push_back(from_json(j));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  });
  return out;
}

void write_manifest(const std::filesystem::path& path, const Manifest& records) {
  detail::JsonlWriter w(path);
  for (const auto& r : records) w.write_line(to_manifest_line(r));
  w.close();
}

void require_unique_ids(const Manifest& records) {
  std::set<std::string_view> seen;
  for (const auto& r : records) {
    if (!seen.insert(r.id).second) {
      throw Error(Errc::validation, "duplicate utterance_id '" + r.id + "'");
    }
  }
}

}  // namespace dsukit
