#pragma once

// Speaker-capped selection of the k-means training subset.
//
// Per corpus, each speaker is first reduced to at most max_files_per_speaker
// files; the corpus is then downsampled to target_file_count. Both steps are
// seeded uniform sampling without replacement over id-sorted candidates, so
// the result depends only on (manifest contents, rules, seed). Records of a
// corpus with no rule pass through unchanged.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "dsukit/manifest.hpp"

namespace dsukit {

struct CapRule {
  Corpus corpus = Corpus::OTHER;
  std::optional<std::size_t> max_files_per_speaker;  // nullopt: unlimited
  std::optional<std::size_t> target_file_count;
};

// Output sorted by utterance id.
Manifest select_subset(const Manifest& manifest, const std::vector<CapRule>& rules, std::uint64_t seed);

// The per-corpus caps used for the k-means subset: CoVoST-2 8 files per
// speaker (62K files), VoxPopuli 250 per speaker (65K), MLS uncapped (107K).
std::vector<CapRule> default_kmeans_subset_rules();

// {"rules": [{"corpus": "CoVoST2", "max_files_per_speaker": 8 | "unlimited" | null,
//             "target_file_count": 62000}, ...]}
std::vector<CapRule> read_cap_rules(const std::filesystem::path& path);
std::vector<CapRule> parse_cap_rules(std::string_view json_text);

}  // namespace dsukit
