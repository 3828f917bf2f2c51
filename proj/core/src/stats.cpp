#include "dsukit/stats.hpp"

#include <cstdio>
#include <map>
#include <set>

#include "jsonl.hpp"

namespace dsukit {

std::vector<CorpusStatsRow> corpus_stats(const Manifest& manifest, const std::vector<DsuSequence>& units,
                                         double units_per_sec) {
  std::map<Corpus, CorpusStatsRow> rows;
  std::map<Corpus, std::set<std::string>> speakers;
  std::map<std::string_view, Corpus> corpus_of;
  for (const auto& r : manifest) {
    auto& row = rows[r.corpus];
    row.corpus = r.corpus;
    ++row.utterances;
    row.audio_hours += r.duration_sec / 3600.0;
    speakers[r.corpus].insert(r.speaker);
    corpus_of.emplace(r.id, r.corpus);
  }
  for (const auto& s : units) {
    const auto it = corpus_of.find(s.utterance_id);
    const Corpus c = it == corpus_of.end() ? Corpus::OTHER : it->second;
    auto& row = rows[c];
    row.corpus = c;
    if (it == corpus_of.end()) ++row.utterances;
    row.dedup_units += s.deduplicated ? s.ids.size() : dedup(s).ids.size();
  }
  std::vector<CorpusStatsRow> out;
  for (auto& [c, row] : rows) {
    row.speakers = speakers[c].size();
    row.estimated_hours = estimate_hours(row.dedup_units, units_per_sec);
    out.push_back(row);
  }
  return out;
}

std::string format_stats_table(const std::vector<CorpusStatsRow>& rows) {
  std::string out = "corpus        utterances  speakers  dedup_units   est_hours  audio_hours\n";
  char line[160];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-12s  %10zu  %8zu  %11llu  %10.3f  %11.3f\n", std::string(to_string(r.corpus)).c_str(),
                  r.utterances, r.speakers, static_cast<unsigned long long>(r.dedup_units), r.estimated_hours,
                  r.audio_hours);
    out += line;
  }
  return out;
}

std::string stats_to_json(const std::vector<CorpusStatsRow>& rows) {
  detail::json j = detail::json::array();
  for (const auto& r : rows) {
    j.push_back({{"corpus", std::string(to_string(r.corpus))},
                 {"utterances", r.utterances},
                 {"speakers", r.speakers},
                 {"dedup_units", r.dedup_units},
                 {"estimated_hours", r.estimated_hours},
                 {"audio_hours", r.audio_hours}});
  }
  return j.dump(2);
}

}  // namespace dsukit
