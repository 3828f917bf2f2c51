#include <algorithm>
#include <map>
#include <set>

#include "dsukit/corpus.hpp"
#include "dsukit/rng.hpp"

namespace dsukit {

Manifest apply_corpus_caps(const Manifest& manifest, std::uint64_t seed) {
  std::vector<bool> keep(manifest.size(), true);

  // CV: duration floor, then at most 4 speakers per transcript.
  std::map<std::string, std::set<std::string>> speakers_by_transcript;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const auto& r = manifest[i];
    if (r.corpus != Corpus::CV) continue;
    if (r.duration_sec < kCvMinDurationSec) {
      keep[i] = false;
      continue;
    }
    speakers_by_transcript[normalize_transcript(r.transcript, r.corpus)].insert(r.speaker);
  }
  std::map<std::string, std::set<std::string>> chosen_speakers;
  for (const auto& [transcript, speakers] : speakers_by_transcript) {
    std::vector<std::string> ordered(speakers.begin(), speakers.end());
    Rng rng(derive_seed(derive_seed(seed, std::string_view("cv-speakers")), transcript));
    auto& chosen = chosen_speakers[transcript];
    for (auto idx : sample_without_replacement(ordered.size(), kCvMaxSpeakersPerTranscript, rng)) {
      chosen.insert(ordered[idx]);
    }
  }
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const auto& r = manifest[i];
    if (r.corpus != Corpus::CV || !keep[i]) continue;
    keep[i] = chosen_speakers[normalize_transcript(r.transcript, r.corpus)].count(r.speaker) > 0;
  }

  // MLS: at most 13 transcriptions per speaker.
  std::map<std::string, std::vector<std::size_t>> mls_by_speaker;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    if (manifest[i].corpus == Corpus::MLS) mls_by_speaker[manifest[i].speaker].push_back(i);
  }
  for (auto& [speaker, rows] : mls_by_speaker) {
    if (rows.size() <= kMlsMaxTranscriptsPerSpeaker) continue;
    std::sort(rows.begin(), rows.end(), [&](auto a, auto b) { return manifest[a].id < manifest[b].id; });
    Rng rng(derive_seed(derive_seed(seed, std::string_view("mls-speakers")), speaker));
    std::vector<bool> picked(rows.size(), false);
    for (auto idx : sample_without_replacement(rows.size(), kMlsMaxTranscriptsPerSpeaker, rng)) picked[idx] = true;
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (!picked[j]) keep[rows[j]] = false;
    }
  }

  Manifest out;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    if (keep[i]) out.push_back(manifest[i]);
  }
  return out;
}

}  // namespace dsukit
