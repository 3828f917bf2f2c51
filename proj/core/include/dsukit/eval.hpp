#pragma once

// ASR and translation scoring: English text normalization, corpus WER,
// corpus BLEU, and paired-bootstrap significance testing.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dsukit {

struct EvalPair {
  std::string reference;
  std::string hypothesis;
};

// Lowercase; drop [...] and (...) spans; every Unicode punctuation or symbol
// character becomes a space, except an apostrophe between two letters or
// digits; whitespace collapsed and trimmed. This is the basic normalizer
// only: no number spelling, spelling-variant or contraction rules.
std::string normalize_english(std::string_view text);

std::vector<std::string> split_words(std::string_view text);

struct EditCounts {
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;
  std::size_t reference_words = 0;

  std::size_t errors() const noexcept { return substitutions + insertions + deletions; }
  EditCounts& operator+=(const EditCounts& o);
};

// Unit-cost Levenshtein distance over words.
std::size_t edit_distance(std::span<const std::string> reference, std::span<const std::string> hypothesis);
// Same distance, split into operation counts along one optimal alignment.
EditCounts align_words(std::span<const std::string> reference, std::span<const std::string> hypothesis);

struct WerResult {
  double wer = 0.0;
  EditCounts totals;
  std::size_t pairs = 0;
};

// Corpus-level: total edits / total reference words, after normalizing
// both sides (unless normalize is false). Errc::undefined_metric when the
// references contain no words.
WerResult wer(std::span<const EvalPair> pairs, bool normalize = true);

using BleuTokenizer = std::function<std::vector<std::string>(std::string_view)>;

// Whitespace split with punctuation and symbols as separate tokens;
// apostrophes and hyphens inside words and . , between digits stay attached.
std::vector<std::string> tokenize_punctuation(std::string_view text);

enum class BleuSmoothing { exp, none };

struct BleuOptions {
  int max_n = 4;
  BleuSmoothing smoothing = BleuSmoothing::exp;
  BleuTokenizer tokenizer;  // empty: tokenize_punctuation
};

// Additive n-gram sufficient statistics.
struct BleuStats {
  std::vector<std::size_t> matches;
  std::vector<std::size_t> totals;
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;

  explicit BleuStats(int max_n = 4) : matches(static_cast<std::size_t>(max_n)), totals(static_cast<std::size_t>(max_n)) {}
  BleuStats& operator+=(const BleuStats& o);
};

BleuStats sentence_stats(std::span<const std::string> reference, std::span<const std::string> hypothesis, int max_n);

struct BleuResult {
  double score = 0.0;  // [0, 100]
  std::vector<double> precisions;  // percent
  double brevity_penalty = 0.0;
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;
};

// Geometric mean of modified n-gram precisions times the brevity penalty.
// With exp smoothing the k-th zero-match order gets precision
// 100 / (2^k * total); a hypothesis too short for some order scores 0.
BleuResult bleu_from_stats(const BleuStats& stats, BleuSmoothing smoothing);
BleuResult bleu(std::span<const std::string> refs, std::span<const std::string> hyps, const BleuOptions& options = {});

// Scores the corpus restricted to (and weighted by repeats in) `indices`.
using IndexScorer = std::function<double(std::span<const std::size_t> indices)>;

IndexScorer make_bleu_scorer(std::span<const std::string> refs, std::span<const std::string> hyps,
                             const BleuOptions& options = {});
// Returns WER as a percentage; use with higher_is_better = false.
IndexScorer make_wer_scorer(std::span<const std::string> refs, std::span<const std::string> hyps);

struct BootstrapOptions {
  std::size_t n_resamples = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  bool higher_is_better = true;
  unsigned workers = 1;
};

enum class Verdict { a_better, b_better, not_significant };
std::string_view to_string(Verdict v);

struct BootstrapResult {
  double score_a = 0.0;
  double score_b = 0.0;
  std::size_t wins_a = 0;
  std::size_t wins_b = 0;
  std::size_t ties = 0;
  std::size_t n_resamples = 0;
  Verdict verdict = Verdict::not_significant;
};

// Resamples segment indices with replacement; a system is better when it
// wins at least (1 - alpha) of the resamples. Resample r uses its own seed
// derived from (seed, r), so results do not depend on workers.
BootstrapResult paired_bootstrap(const IndexScorer& score_a, const IndexScorer& score_b, std::size_t n_segments,
                                 const BootstrapOptions& options = {});

BootstrapResult paired_bootstrap_bleu(std::span<const std::string> sys_a, std::span<const std::string> sys_b,
                                      std::span<const std::string> refs, const BootstrapOptions& options = {},
                                      const BleuOptions& bleu_options = {});

struct SignificanceSummary {
  std::size_t n_sys_a_better = 0;
  std::size_t n_sys_b_better = 0;
  std::size_t n_not_significant = 0;
  double alpha = 0.05;

  void add(Verdict v);
  std::size_t total() const noexcept { return n_sys_a_better + n_sys_b_better + n_not_significant; }
};

}  // namespace dsukit
