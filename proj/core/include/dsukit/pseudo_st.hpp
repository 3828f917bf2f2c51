#pragma once

// Pseudo-labelled speech translation data: externally produced translations
// and quality-estimation scores are joined onto ASR transcripts, filtered at
// a QE threshold, and split into disjoint direct / multi-turn samples per
// (corpus, target language) stream.
//
// Input files (JSON Lines):
//   translations  {"id": ..., "lang": ..., "text": ...}
//   scores        {"id": ..., "lang": ..., "score": ...}
// Scores are on the 0..100 scale; a file whose maximum is <= 1.5 is taken to
// be on 0..1 and multiplied by 100 with a warning.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dsukit/manifest.hpp"

namespace dsukit {

inline constexpr double kDefaultQeThreshold = 85.0;
inline constexpr std::int64_t kDefaultPseudoSampleSize = 60000;

struct ScoredTriple {
  std::string utterance_id;
  std::string transcript;
  std::string target_lang;
  std::string translation;
  double qe_score = 0.0;
  Corpus source_corpus = Corpus::OTHER;

  friend bool operator==(const ScoredTriple&, const ScoredTriple&) = default;
};

// Keeps triples with qe_score >= threshold, in input order.
std::vector<ScoredTriple> filter_by_qe(const std::vector<ScoredTriple>& triples, double threshold);

using StreamKey = std::pair<Corpus, std::string>;  // (source corpus, target language)
using PseudoStreams = std::map<StreamKey, std::vector<ScoredTriple>>;

PseudoStreams group_streams(const std::vector<ScoredTriple>& triples);

struct StreamSampleReport {
  std::size_t available = 0;
  std::size_t direct = 0;
  std::size_t multiturn = 0;
  std::size_t direct_shortfall = 0;
  std::size_t multiturn_shortfall = 0;
};

struct LanguageSampleReport {
  std::size_t direct = 0;
  std::size_t multiturn = 0;
  std::size_t requested_direct = 0;
  std::size_t requested_multiturn = 0;
};

struct PseudoSampleReport {
  std::map<StreamKey, StreamSampleReport> streams;
  std::map<std::string, LanguageSampleReport> languages;
  std::vector<std::string> shortfalls;
};

struct PseudoSample {
  std::vector<ScoredTriple> direct;
  std::vector<ScoredTriple> multiturn;
};

// Per stream: a seeded permutation; the first min(n_direct, available)
// triples go to the direct set and the next min(n_multiturn, remaining) to
// the multi-turn set. Streams must not repeat an utterance id.
PseudoSample sample_pseudo_sets(const PseudoStreams& streams, std::int64_t n_direct, std::int64_t n_multiturn,
                                std::uint64_t seed, PseudoSampleReport* report = nullptr);

struct TranslationRow {
  std::string id;
  std::string lang;
  std::string text;
};

struct ScoreRow {
  std::string id;
  std::string lang;
  double score = 0.0;
};

std::vector<TranslationRow> read_translations(const std::filesystem::path& path);
// Applies the 0..1 auto-detection.
std::vector<ScoreRow> read_scores(const std::filesystem::path& path);
void rescale_scores(std::vector<ScoreRow>& scores);

// One triple per translation row; every translation needs a score and a
// manifest record.
std::vector<ScoredTriple> join_pseudo_labels(const Manifest& manifest, const std::vector<TranslationRow>& translations,
                                             const std::vector<ScoreRow>& scores);

std::string to_triple_line(const ScoredTriple& t);
std::vector<ScoredTriple> read_triples(const std::filesystem::path& path);
void write_triples(const std::filesystem::path& path, const std::vector<ScoredTriple>& triples);
std::string to_json(const PseudoSampleReport& report);

}  // namespace dsukit
