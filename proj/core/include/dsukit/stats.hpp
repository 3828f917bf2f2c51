#pragma once

#include <string>
#include <vector>

#include "dsukit/dsu_codec.hpp"
#include "dsukit/manifest.hpp"

namespace dsukit {

// One row of the per-corpus speech statistics table.
struct CorpusStatsRow {
  Corpus corpus = Corpus::OTHER;
  std::size_t utterances = 0;
  std::size_t speakers = 0;
  std::uint64_t dedup_units = 0;
  double estimated_hours = 0.0;  // from dedup_units
  double audio_hours = 0.0;      // from manifest durations
};

// Either input may be empty. Units are counted after deduplication;
// sequences are attributed to corpora through the manifest (OTHER when the
// id is unknown). Rows are ordered by corpus enum.
std::vector<CorpusStatsRow> corpus_stats(const Manifest& manifest, const std::vector<DsuSequence>& units,
                                         double units_per_sec = kDefaultUnitsPerSecond);

std::string format_stats_table(const std::vector<CorpusStatsRow>& rows);
std::string stats_to_json(const std::vector<CorpusStatsRow>& rows);

}  // namespace dsukit
