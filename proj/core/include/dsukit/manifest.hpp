#pragma once

// Utterance manifests: JSON Lines, one record per line, with the fields
//   id, speaker, duration_sec, transcript, translations, feature_path, corpus
// where translations maps a language code to {"text": ..., "qe_score": ...}.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dsukit {

enum class Corpus { SPGI, GigaSpeech, MLS, VoxPopuli, CV, EuroparlST, FLEURS, CoVoST2, OTHER };

std::string_view to_string(Corpus corpus);
// Throws Error(Errc::parse) for unknown names.
Corpus corpus_from_string(std::string_view name);

struct Translation {
  std::string text;
  double qe_score = 0.0;  // [0, 100]

  friend bool operator==(const Translation&, const Translation&) = default;
};

struct UtteranceRecord {
  std::string id;
  std::string speaker;
  double duration_sec = 0.0;
  std::string transcript;
  std::map<std::string, Translation> translations;
  std::string feature_path;
  Corpus corpus = Corpus::OTHER;

  friend bool operator==(const UtteranceRecord&, const UtteranceRecord&) = default;
};

using Manifest = std::vector<UtteranceRecord>;

UtteranceRecord parse_manifest_line(std::string_view line);
std::string to_manifest_line(const UtteranceRecord& record);

// Blank lines are skipped; errors carry the 1-based line number.
Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const Manifest& records);

// Throws Error(Errc::validation) naming the first repeated id.
void require_unique_ids(const Manifest& records);

}  // namespace dsukit
