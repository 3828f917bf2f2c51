#include <cmath>
#include <map>

#include "dsukit/error.hpp"
#include "dsukit/eval.hpp"

namespace dsukit {
namespace {

using Ngram = std::vector<std::string_view>;

std::map<Ngram, std::size_t> count_ngrams(std::span<const std::string> tokens, std::size_t n) {
  std::map<Ngram, std::size_t> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    Ngram g;
    g.reserve(n);
    for (std::size_t k = 0; k < n; ++k) g.emplace_back(tokens[i + k]);
    ++counts[g];
  }
  return counts;
}

std::vector<std::string> tokenize(const BleuOptions& options, std::string_view text) {
  return options.tokenizer ? options.tokenizer(text) : tokenize_punctuation(text);
}

}  // namespace

BleuStats& BleuStats::operator+=(const BleuStats& o) {
  for (std::size_t i = 0; i < matches.size() && i < o.matches.size(); ++i) {
    matches[i] += o.matches[i];
    totals[i] += o.totals[i];
  }
  hyp_len += o.hyp_len;
  ref_len += o.ref_len;
  return *this;
}

BleuStats sentence_stats(std::span<const std::string> ref, std::span<const std::string> hyp, int max_n) {
  if (max_n < 1) throw Error(Errc::validation, "BLEU max_n must be positive");
  BleuStats s(max_n);
  s.hyp_len = hyp.size();
  s.ref_len = ref.size();
  for (int n = 1; n <= max_n; ++n) {
    const auto h = count_ngrams(hyp, static_cast<std::size_t>(n));
    const auto r = count_ngrams(ref, static_cast<std::size_t>(n));
    std::size_t total = 0;
    std::size_t match = 0;
    for (const auto& [g, c] : h) {
      total += c;
      const auto it = r.find(g);
      if (it != r.end()) match += std::min(c, it->second);
    }
    s.matches[static_cast<std::size_t>(n - 1)] = match;
    s.totals[static_cast<std::size_t>(n - 1)] = total;
  }
  return s;
}

BleuResult bleu_from_stats(const BleuStats& stats, BleuSmoothing smoothing) {
  BleuResult r;
  const std::size_t max_n = stats.matches.size();
  r.hyp_len = stats.hyp_len;
  r.ref_len = stats.ref_len;
  r.precisions.assign(max_n, 0.0);
  double smooth = 1.0;
  for (std::size_t n = 0; n < max_n; ++n) {
    if (stats.totals[n] == 0) break;
    if (stats.matches[n] == 0) {
      if (smoothing == BleuSmoothing::exp) {
        smooth *= 2.0;
        r.precisions[n] = 100.0 / (smooth * static_cast<double>(stats.totals[n]));
      }
    } else {
      r.precisions[n] = 100.0 * static_cast<double>(stats.matches[n]) / static_cast<double>(stats.totals[n]);
    }
  }
  if (stats.hyp_len == 0) {
    r.brevity_penalty = 0.0;
  } else if (stats.hyp_len < stats.ref_len) {
    r.brevity_penalty = std::exp(1.0 - static_cast<double>(stats.ref_len) / static_cast<double>(stats.hyp_len));
  } else {
    r.brevity_penalty = 1.0;
  }
  // log of the fractions, so a perfect match is exactly 100
  double log_sum = 0.0;
  for (double p : r.precisions) {
    if (p <= 0.0) {
      r.score = 0.0;
      return r;
    }
    log_sum += std::log(p / 100.0);
  }
  r.score = 100.0 * r.brevity_penalty * std::exp(log_sum / static_cast<double>(max_n));
  return r;
}

BleuResult bleu(std::span<const std::string> refs, std::span<const std::string> hyps, const BleuOptions& options) {
  if (refs.size() != hyps.size()) {
    throw Error(Errc::validation, "BLEU needs equal-length lists, got " + std::to_string(refs.size()) +
                                      " references and " + std::to_string(hyps.size()) + " hypotheses");
  }
  if (refs.empty()) throw Error(Errc::validation, "BLEU needs at least one segment");
  BleuStats total(options.max_n);
  for (std::size_t i = 0; i < refs.size(); ++i) {
    total += sentence_stats(tokenize(options, refs[i]), tokenize(options, hyps[i]), options.max_n);
  }
  return bleu_from_stats(total, options.smoothing);
}

IndexScorer make_bleu_scorer(std::span<const std::string> refs, std::span<const std::string> hyps,
                             const BleuOptions& options) {
  if (refs.size() != hyps.size()) throw Error(Errc::validation, "BLEU scorer needs aligned corpora");
  std::vector<BleuStats> stats;
  stats.reserve(refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    stats.push_back(sentence_stats(tokenize(options, refs[i]), tokenize(options, hyps[i]), options.max_n));
  }
  const int max_n = options.max_n;
  const BleuSmoothing smoothing = options.smoothing;
  return [stats = std::move(stats), max_n, smoothing](std::span<const std::size_t> idx) {
    BleuStats total(max_n);
    for (auto i : idx) total += stats[i];
    return bleu_from_stats(total, smoothing).score;
  };
}

IndexScorer make_wer_scorer(std::span<const std::string> refs, std::span<const std::string> hyps) {
  if (refs.size() != hyps.size()) throw Error(Errc::validation, "WER scorer needs aligned corpora");
  std::vector<EditCounts> counts;
  counts.reserve(refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    counts.push_back(align_words(split_words(normalize_english(refs[i])), split_words(normalize_english(hyps[i]))));
  }
  return [counts = std::move(counts)](std::span<const std::size_t> idx) {
    EditCounts total;
    for (auto i : idx) total += counts[i];
    if (total.reference_words == 0) return 0.0;
    return 100.0 * static_cast<double>(total.errors()) / static_cast<double>(total.reference_words);
  };
}

}  // namespace dsukit
