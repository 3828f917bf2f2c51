#include "dsukit/error.hpp"
#include "dsukit/eval.hpp"
#include "dsukit/rng.hpp"
#include "parallel.hpp"

namespace dsukit {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::a_better: return "a_better";
    case Verdict::b_better: return "b_better";
    case Verdict::not_significant: return "not_significant";
  }
  return "not_significant";
}

void SignificanceSummary::add(Verdict v) {
  switch (v) {
    case Verdict::a_better: ++n_sys_a_better; break;
    case Verdict::b_better: ++n_sys_b_better; break;
    case Verdict::not_significant: ++n_not_significant; break;
  }
}

BootstrapResult paired_bootstrap(const IndexScorer& score_a, const IndexScorer& score_b, std::size_t n_segments,
                                 const BootstrapOptions& options) {
  if (options.n_resamples < 100) {
    throw Error(Errc::config, "paired bootstrap needs at least 100 resamples, got " +
                                  std::to_string(options.n_resamples));
  }
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw Error(Errc::config, "alpha must be in (0,1)");
  if (n_segments == 0) throw Error(Errc::validation, "paired bootstrap needs at least one segment");

  BootstrapResult result;
  result.n_resamples = options.n_resamples;
  std::vector<std::size_t> all(n_segments);
  for (std::size_t i = 0; i < n_segments; ++i) all[i] = i;
  result.score_a = score_a(all);
  result.score_b = score_b(all);

  // +1: a wins, -1: b wins, 0: tie
  std::vector<int> outcome(options.n_resamples);
  detail::parallel_for(options.n_resamples, options.workers, [&](std::size_t begin, std::size_t end) {
    std::vector<std::size_t> idx(n_segments);
    for (std::size_t r = begin; r < end; ++r) {
      Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(r)));
      for (auto& i : idx) i = static_cast<std::size_t>(rng.below(n_segments));
      const double a = score_a(idx);
      const double b = score_b(idx);
      const bool a_wins = options.higher_is_better ? a > b : a < b;
      const bool b_wins = options.higher_is_better ? b > a : b < a;
      outcome[r] = a_wins ? 1 : (b_wins ? -1 : 0);
    }
  });
  for (int o : outcome) {
    if (o > 0) {
      ++result.wins_a;
    } else if (o < 0) {
      ++result.wins_b;
    } else {
      ++result.ties;
    }
  }
  const double needed = (1.0 - options.alpha) * static_cast<double>(options.n_resamples);
  if (static_cast<double>(result.wins_a) >= needed) {
    result.verdict = Verdict::a_better;
  } else if (static_cast<double>(result.wins_b) >= needed) {
    result.verdict = Verdict::b_better;
  }
  return result;
}

BootstrapResult paired_bootstrap_bleu(std::span<const std::string> sys_a, std::span<const std::string> sys_b,
                                      std::span<const std::string> refs, const BootstrapOptions& options,
                                      const BleuOptions& bleu_options) {
  if (sys_a.size() != refs.size() || sys_b.size() != refs.size()) {
    throw Error(Errc::validation, "paired bootstrap needs aligned corpora");
  }
  BootstrapOptions opts = options;
  opts.higher_is_better = true;
  return paired_bootstrap(make_bleu_scorer(refs, sys_a, bleu_options), make_bleu_scorer(refs, sys_b, bleu_options),
                          refs.size(), opts);
}

}  // namespace dsukit
