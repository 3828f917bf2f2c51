#include "dsukit/dsu_codec.hpp"

#include <charconv>
#include <cmath>

#include "dsukit/error.hpp"
#include "jsonl.hpp"

namespace dsukit {
namespace {

using detail::json;

constexpr std::string_view kPrefix = "<extra_id_";

// Parses one token starting at `pos`; returns the index and advances pos.
// Returns false without throwing when the text at pos is not a token.
bool scan_token(std::string_view text, std::size_t& pos, std::uint64_t& value) {
  if (text.substr(pos, kPrefix.size()) != kPrefix) return false;
  std::size_t p = pos + kPrefix.size();
  const std::size_t digits_begin = p;
  while (p < text.size() && text[p] >= '0' && text[p] <= '9') ++p;
  if (p == digits_begin || p - digits_begin > 18 || p >= text.size() || text[p] != '>') return false;
  std::from_chars(text.data() + digits_begin, text.data() + p, value);
  pos = p + 1;
  return true;
}

DsuSequence from_json(const json& j) {
  DsuSequence s;
  s.utterance_id = detail::required<std::string>(j, "id");
  s.ids = detail::required<std::vector<UnitId>>(j, "ids");
  s.deduplicated = j.value("deduplicated", false);
  s.source_frame_count = j.value("source_frame_count", s.ids.size());
  if (s.deduplicated) {
    for (std::size_t i = 1; i < s.ids.size(); ++i) {
      if (s.ids[i] == s.ids[i - 1]) {
        throw Error(Errc::validation, "sequence '" + s.utterance_id +
                                          "' is marked deduplicated but repeats id at position " + std::to_string(i));
      }
    }
  }
  return s;
}

}  // namespace

DsuSequence dedup(const DsuSequence& seq) {
  DsuSequence out;
  out.utterance_id = seq.utterance_id;
  out.source_frame_count = seq.source_frame_count;
  out.deduplicated = true;
  out.ids.reserve(seq.ids.size());
  for (UnitId id : seq.ids) {
    if (out.ids.empty() || out.ids.back() != id) out.ids.push_back(id);
  }
  return out;
}

std::string unit_token(UnitId id, std::int64_t index_base) {
  const std::int64_t n = static_cast<std::int64_t>(id) + index_base;
  if (n < 0) throw Error(Errc::range, "unit " + std::to_string(id) + " with base " + std::to_string(index_base) + " is negative");
  std::string s(kPrefix);
  s += std::to_string(n);
  s += '>';
  return s;
}

std::string render_tokens(const DsuSequence& seq, std::int64_t index_base) {
  if (!seq.deduplicated) {
    throw Error(Errc::state, "refusing to render non-deduplicated sequence '" + seq.utterance_id + "'");
  }
  std::string out;
  out.reserve(seq.ids.size() * 15);
  for (UnitId id : seq.ids) out += unit_token(id, index_base);
  return out;
}

std::vector<UnitId> parse_tokens(std::string_view text, std::int64_t index_base, std::size_t k) {
  std::vector<UnitId> ids;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t start = pos;
    std::uint64_t n = 0;
    if (!scan_token(text, pos, n)) {
      throw Error(Errc::parse, "malformed unit token at character offset " + std::to_string(start));
    }
    const std::int64_t id = static_cast<std::int64_t>(n) - index_base;
    if (id < 0 || static_cast<std::uint64_t>(id) >= k) {
      throw Error(Errc::range, "unit index " + std::to_string(id) + " outside [0, " + std::to_string(k) +
                                   ") at character offset " + std::to_string(start));
    }
    ids.push_back(static_cast<UnitId>(id));
  }
  return ids;
}

std::size_t count_unit_tokens(std::string_view text) {
  std::size_t count = 0;
  std::size_t pos = 0;
  while ((pos = text.find('<', pos)) != std::string_view::npos) {
    std::uint64_t n = 0;
    if (scan_token(text, pos, n)) {
      ++count;
    } else {
      ++pos;
    }
  }
  return count;
}

double estimate_hours(std::uint64_t dedup_dsu_count, double units_per_sec) {
  if (!(units_per_sec > 0.0) || !std::isfinite(units_per_sec)) {
    throw Error(Errc::validation, "units_per_sec must be positive");
  }
  return static_cast<double>(dedup_dsu_count) / units_per_sec / 3600.0;
}

std::string to_dsu_line(const DsuSequence& seq) {
  json j;
  j["id"] = seq.utterance_id;
  j["ids"] = seq.ids;
  j["deduplicated"] = seq.deduplicated;
  j["source_frame_count"] = seq.source_frame_count;
  return j.dump();
}

DsuSequence parse_dsu_line(std::string_view line) {
  const json j = detail::parse_json(line, "dsu line");
  try {
    return from_json(j);
  } catch (const json::exception& e) {
    throw Error(Errc::parse, std::string("dsu line: ") + e.what());
  }
}

std::vector<DsuSequence> read_dsu_corpus(const std::filesystem::path& path) {
  std::vector<DsuSequence> out;
  detail::for_each_jsonl(path, [&](const json& j, std::size_t) { out.push_back(from_json(j)); });
  return out;
}

void write_dsu_corpus(const std::filesystem::path& path, const std::vector<DsuSequence>& corpus) {
  detail::JsonlWriter w(path);
  for (const auto& s : corpus) w.write_line(to_dsu_line(s));
  w.close();
}

}  // namespace dsukit
