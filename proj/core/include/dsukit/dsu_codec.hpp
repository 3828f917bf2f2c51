#pragma once

// Discrete speech unit sequences: run-length deduplication, rendering as
// <extra_id_N> vocabulary tokens, parsing back, and the DSU corpus JSONL
// format {id, ids, deduplicated, source_frame_count}.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dsukit {

using UnitId = std::uint32_t;

inline constexpr double kDefaultUnitsPerSecond = 35.0;

struct DsuSequence {
  std::string utterance_id;
  std::vector<UnitId> ids;
  bool deduplicated = false;
  std::size_t source_frame_count = 0;

  friend bool operator==(const DsuSequence&, const DsuSequence&) = default;
};

// Collapses each run of equal ids to its first element.
DsuSequence dedup(const DsuSequence& seq);

// "<extra_id_{id + index_base}>" per unit, no separators. Requires a
// deduplicated sequence (Errc::state otherwise).
std::string render_tokens(const DsuSequence& seq, std::int64_t index_base = 0);
std::string unit_token(UnitId id, std::int64_t index_base = 0);

// Inverse of render_tokens. Errors (Errc::parse, Errc::range) report the
// character offset of the offending token.
std::vector<UnitId> parse_tokens(std::string_view text, std::int64_t index_base, std::size_t k);

// Number of well-formed <extra_id_N> tokens in arbitrary text.
std::size_t count_unit_tokens(std::string_view text);

// hours = count / units_per_sec / 3600
double estimate_hours(std::uint64_t dedup_dsu_count, double units_per_sec = kDefaultUnitsPerSecond);

std::string to_dsu_line(const DsuSequence& seq);
DsuSequence parse_dsu_line(std::string_view line);
std::vector<DsuSequence> read_dsu_corpus(const std::filesystem::path& path);
void write_dsu_corpus(const std::filesystem::path& path, const std::vector<DsuSequence>& corpus);

}  // namespace dsukit
