#pragma once

// Training corpus construction: transcript normalization, per-corpus caps,
// token-budgeted CPT mixtures and instruction-tuning sets.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dsukit/manifest.hpp"
#include "dsukit/prompt.hpp"
#include "dsukit/tokenizer.hpp"

namespace dsukit {

enum class Phase { CPT, IT };
enum class Task { ASR, MT, ST_DIRECT, ST_MULTITURN, NER, APE, OTHER_TEXT };

std::string_view to_string(Phase phase);
std::string_view to_string(Task task);
Phase phase_from_string(std::string_view name);
Task task_from_string(std::string_view name);

struct TrainingRecord {
  std::string record_id;
  Phase phase = Phase::CPT;
  std::string text;
  std::size_t token_count = 0;
  Task task = Task::OTHER_TEXT;
  std::optional<std::pair<std::string, std::string>> lang_pair;
  std::string source;

  friend bool operator==(const TrainingRecord&, const TrainingRecord&) = default;
};

std::string to_record_line(const TrainingRecord& record);
TrainingRecord parse_record_line(std::string_view line);
std::vector<TrainingRecord> read_records(const std::filesystem::path& path);
void write_records(const std::filesystem::path& path, const std::vector<TrainingRecord>& records);

// GigaSpeech: lowercase and map <COMMA> <PERIOD> <QUESTIONMARK>
// <EXCLAMATIONPOINT> to , . ? ! with no space before and one space after.
// Every corpus: whitespace collapsed and trimmed.
std::string normalize_transcript(std::string_view text, Corpus corpus);

inline constexpr double kCvMinDurationSec = 3.0;
inline constexpr std::size_t kCvMaxSpeakersPerTranscript = 4;
inline constexpr std::size_t kMlsMaxTranscriptsPerSpeaker = 13;

// CV: drop utterances shorter than 3 s (3.0 kept); per distinct transcript
// keep the utterances of at most 4 seeded-chosen speakers.
// MLS: at most 13 seeded-chosen utterances per speaker.
// Other corpora pass through. Input order is preserved.
Manifest apply_corpus_caps(const Manifest& manifest, std::uint64_t seed);

// --- CPT mixture ---------------------------------------------------------

struct TextSourceWeight {
  std::string source;
  double weight = 1.0;
};

struct MixtureSpec {
  std::uint64_t total_token_budget = 6'000'000'000ULL;
  double speech_fraction = 5.0 / 6.0;
  double dsu_fraction_within_speech = 0.88;
  std::vector<TextSourceWeight> text_sources;
  // Empty: every source not listed in text_sources.
  std::vector<std::string> speech_sources;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SourceUsage {
  std::size_t available_records = 0;
  std::size_t used_records = 0;
  std::uint64_t tokens = 0;
  bool exhausted = false;
};

struct MixtureReport {
  std::uint64_t total_budget = 0;
  std::uint64_t speech_budget = 0;
  std::uint64_t text_budget = 0;
  std::uint64_t speech_tokens = 0;
  std::uint64_t dsu_tokens = 0;
  std::uint64_t transcript_tokens = 0;
  std::uint64_t text_tokens = 0;
  std::uint64_t total_tokens = 0;
  bool speech_exhausted = false;
  std::map<std::string, std::uint64_t> text_budget_per_source;
  std::map<std::string, SourceUsage> sources;
  // Human-readable shortfall notes, one per exhausted category or source.
  std::vector<std::string> shortfalls;

  double speech_fraction() const;
  double dsu_fraction_within_speech() const;
};

std::string to_json(const MixtureReport& report);

struct MixtureResult {
  std::vector<TrainingRecord> records;
  MixtureReport report;
};

using SourceRecords = std::map<std::string, std::vector<TrainingRecord>>;

// Samples without replacement until each category budget is met. Speech
// records are drawn alternately from DSU-heavy and transcript-heavy strata so
// the DSU share of speech tokens tracks dsu_fraction_within_speech. Record
// token counts are recomputed with `counter`; DSU tokens are the unit tokens.
MixtureResult build_mixture(const SourceRecords& sources, const MixtureSpec& spec,
                            const TokenCounter& counter = default_token_counter());

MixtureSpec parse_mixture_spec(std::string_view json_text);

// --- IT set ----------------------------------------------------------------

struct ItExample {
  std::string id;
  std::string dsu;  // rendered unit tokens; empty for text tasks
  std::string transcript;
  std::string translation;
  std::string source_lang = "en";
  std::string target_lang;
  std::string text;  // pre-rendered instruction for text tasks
};

struct ItSource {
  std::string name;
  Task task = Task::ASR;
  Corpus corpus = Corpus::OTHER;
  std::vector<ItExample> examples;
  std::size_t count = 0;
};

struct ItReport {
  std::map<std::string, std::size_t> selected;
  std::map<std::string, std::size_t> excluded;
  std::map<std::string, std::size_t> available;
};

// Speech tasks (ASR, ST_DIRECT, ST_MULTITURN) are rendered with the IT
// templates; text tasks are taken verbatim. FLEURS examples whose transcript
// is in `exclude_transcripts` are dropped before sampling.
std::vector<TrainingRecord> build_it_set(const std::vector<ItSource>& sources,
                                         const std::set<std::string>& exclude_transcripts, std::uint64_t seed,
                                         const LanguageNames& names = default_language_names(),
                                         const TokenCounter& counter = default_token_counter(),
                                         ItReport* report = nullptr);

// One transcript per line, whitespace-collapsed. Unreadable: Errc::config.
std::set<std::string> read_exclusion_list(const std::filesystem::path& path);

}  // namespace dsukit
