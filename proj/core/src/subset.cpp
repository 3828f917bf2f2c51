#include "dsukit/subset.hpp"

#include <algorithm>
#include <map>

#include "dsukit/error.hpp"
#include "dsukit/rng.hpp"
#include "jsonl.hpp"

namespace dsukit {
namespace {

using detail::json;

// Keeps `keep` of `items` (already id-sorted) chosen uniformly by `rng`,
// returned in id order.
std::vector<const UtteranceRecord*> sample_sorted(const std::vector<const UtteranceRecord*>& items,
                                                  std::size_t keep, Rng& rng) {
  if (keep >= items.size()) return items;
  auto picked = sample_without_replacement(items.size(), keep, rng);
  std::sort(picked.begin(), picked.end());
  std::vector<const UtteranceRecord*> out;
  out.reserve(keep);
  for (auto i : picked) out.push_back(items[i]);
  return out;
}

std::vector<CapRule> rules_from_json(const json& j) {
  if (!j.contains("rules") || !j.at("rules").is_array()) {
    throw Error(Errc::config, "rules file must contain a 'rules' array");
  }
  std::vector<CapRule> rules;
  for (const auto& r : j.at("rules")) {
    CapRule rule;
    rule.corpus = corpus_from_string(detail::required<std::string>(r, "corpus"));
    if (r.contains("max_files_per_speaker")) {
      const auto& v = r.at("max_files_per_speaker");
      if (v.is_number_integer()) {
        const auto n = v.get<long long>();
        if (n < 1) throw Error(Errc::config, "max_files_per_speaker must be >= 1");
        rule.max_files_per_speaker = static_cast<std::size_t>(n);
      } else if (!(v.is_null() || (v.is_string() && v.get<std::string>() == "unlimited"))) {
        throw Error(Errc::config, "max_files_per_speaker must be a positive integer or \"unlimited\"");
      }
    }
    if (r.contains("target_file_count") && !r.at("target_file_count").is_null()) {
      const auto n = r.at("target_file_count").get<long long>();
      if (n < 1) throw Error(Errc::config, "target_file_count must be positive");
      rule.target_file_count = static_cast<std::size_t>(n);
    }
    rules.push_back(rule);
  }
  return rules;
}

}  // namespace

Manifest select_subset(const Manifest& manifest, const std::vector<CapRule>& rules, std::uint64_t seed) {
  require_unique_ids(manifest);
  std::map<Corpus, const CapRule*> by_corpus;
  for (const auto& rule : rules) {
    if (rule.max_files_per_speaker && *rule.max_files_per_speaker < 1) {
      throw Error(Errc::validation, "cap for " + std::string(to_string(rule.corpus)) + " must be >= 1");
    }
    if (!by_corpus.emplace(rule.corpus, &rule).second) {
      throw Error(Errc::validation, "corpus " + std::string(to_string(rule.corpus)) + " matched by more than one rule");
    }
  }

  std::vector<const UtteranceRecord*> sorted;
  sorted.reserve(manifest.size());
  for (const auto& r : manifest) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->id < b->id; });

  // corpus -> speaker -> id-sorted records
  std::map<Corpus, std::map<std::string, std::vector<const UtteranceRecord*>>> grouped;
  std::vector<const UtteranceRecord*> selected;
  for (auto* r : sorted) {
    if (by_corpus.count(r->corpus)) {
      grouped[r->corpus][r->speaker].push_back(r);
    } else {
      selected.push_back(r);
    }
  }

  for (const auto& [corpus, speakers] : grouped) {
    const CapRule& rule = *by_corpus.at(corpus);
    const std::string corpus_key(to_string(corpus));
    std::vector<const UtteranceRecord*> kept;
    for (const auto& [speaker, files] : speakers) {
      if (rule.max_files_per_speaker) {
        Rng rng(derive_seed(derive_seed(seed, corpus_key), speaker));
        auto picked = sample_sorted(files, *rule.max_files_per_speaker, rng);
        kept.insert(kept.end(), picked.begin(), picked.end());
      } else {
        kept.insert(kept.end(), files.begin(), files.end());
      }
    }
    std::sort(kept.begin(), kept.end(), [](auto* a, auto* b) { return a->id < b->id; });
    if (rule.target_file_count) {
      Rng rng(derive_seed(derive_seed(seed, corpus_key), std::string_view("target")));
      kept = sample_sorted(kept, *rule.target_file_count, rng);
    }
    selected.insert(selected.end(), kept.begin(), kept.end());
  }

  std::sort(selected.begin(), selected.end(), [](auto* a, auto* b) { return a->id < b->id; });
  Manifest out;
  out.reserve(selected.size());
  for (auto* r : selected) out.push_back(*r);
  return out;
}

std::vector<CapRule> default_kmeans_subset_rules() {
  return {
      {Corpus::CoVoST2, 8, 62000},
      {Corpus::VoxPopuli, 250, 65000},
      {Corpus::MLS, std::nullopt, 107000},
  };
}

std::vector<CapRule> parse_cap_rules(std::string_view json_text) {
  return rules_from_json(detail::parse_json(json_text, "cap rules"));
}

std::vector<CapRule> read_cap_rules(const std::filesystem::path& path) {
  return rules_from_json(detail::read_json_file(path, Errc::config));
}

}  // namespace dsukit
