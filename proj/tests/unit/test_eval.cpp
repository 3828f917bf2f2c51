#include <doctest.h>

#include <algorithm>
#include <functional>

#include "dsukit/error.hpp"
#include "dsukit/eval.hpp"
#include "dsukit/rng.hpp"
#include "test_util.hpp"

using namespace dsukit;
using testutil::error_code;

namespace {

using Words = std::vector<std::string>;

// Exponential reference: the three-way recursion without memoization.
std::size_t naive_distance(const Words& a, std::size_t i, const Words& b, std::size_t j) {
  if (i == a.size()) return b.size() - j;
  if (j == b.size()) return a.size() - i;
  const std::size_t sub = naive_distance(a, i + 1, b, j + 1) + (a[i] == b[j] ? 0 : 1);
  const std::size_t del = naive_distance(a, i + 1, b, j) + 1;
  const std::size_t ins = naive_distance(a, i, b, j + 1) + 1;
  return std::min({sub, del, ins});
}

Words random_words(Rng& r, std::size_t max_len) {
  static const char* v[] = {"a", "b", "c", "d"};
  Words w(r.below(max_len + 1));
  for (auto& x : w) x = v[r.below(4)];
  return w;
}

std::string join(const Words& w) {
  std::string s;
  for (const auto& x : w) s += (s.empty() ? "" : " ") + x;
  return s;
}

std::vector<std::string> sentences(std::uint64_t seed, std::size_t n) {
  Rng r(seed);
  static const char* v[] = {"the", "cat", "dog", "sat", "on", "mat", "red", "big", "ran", "far", "home", "now"};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string s;
    const auto len = 6 + r.below(8);
    for (std::size_t k = 0; k < len; ++k) s += (k ? " " : "") + std::string(v[r.below(12)]);
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST_CASE("English normalization") {
  CHECK(normalize_english("Hello, World!") == "hello world");
  CHECK(normalize_english("it's [noise] fine") == "it's fine");
  CHECK(normalize_english("") == "");
  CHECK(normalize_english("  A (laughs)  b\tC  ") == "a b c");
  CHECK(normalize_english("'quoted' rock'n'roll") == "quoted rock'n'roll");
  CHECK(normalize_english("50% off — now €5") == "50 off now 5");
  CHECK(normalize_english("ÉCOLE Straße") == "école straße");
  for (const char* s : {"Hello, World!", "it's [noise] fine", "x -- y ; 'z'"}) {
    CHECK(normalize_english(normalize_english(s)) == normalize_english(s));
  }
}

TEST_CASE("WER hand case") {
  const std::vector<EvalPair> p{{"the cat sat on mat", "the cat sat on the mat"}};
  const auto r = wer(p);
  CHECK(r.wer == doctest::Approx(0.2));
  CHECK(r.totals.insertions == 1);
  CHECK(r.totals.reference_words == 5);
  CHECK(wer(std::vector<EvalPair>{{"Same words, here.", "same WORDS here"}}).wer == 0.0);
  CHECK(error_code([] { wer(std::vector<EvalPair>{{"[noise]", "x"}}); }) == Errc::undefined_metric);
  CHECK(error_code([] { wer(std::vector<EvalPair>{}); }) == Errc::undefined_metric);
}

TEST_CASE("corpus WER pools edits over pairs") {
  const std::vector<EvalPair> p{{"a b c d", "a x c d"}, {"e f", "e f g h"}};
  CHECK(wer(p).wer == doctest::Approx(3.0 / 6.0));
}

TEST_CASE("DP distance equals exhaustive recursion") {
  Rng r(77);
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_words(r, 8), b = random_words(r, 8);
    const auto d = edit_distance(a, b);
    REQUIRE(d == naive_distance(a, 0, b, 0));
    const auto ops = align_words(a, b);
    CHECK(ops.errors() == d);
    CHECK(ops.reference_words == a.size());
    CHECK(a.size() - ops.deletions + ops.insertions == b.size());
    CHECK(edit_distance(a, a) == 0);
    if (!a.empty()) CHECK(wer(std::vector<EvalPair>{{join(a), join(a)}}).wer == 0.0);
  }
}

TEST_CASE("triangle inequality") {
  Rng r(5);
  for (int i = 0; i < 300; ++i) {
    const auto a = random_words(r, 10), b = random_words(r, 10), c = random_words(r, 10);
    CHECK(edit_distance(a, c) <= edit_distance(a, b) + edit_distance(b, c));
  }
}

TEST_CASE("BLEU hand case") {
  const std::vector<std::string> ref{"a b c d"}, hyp{"a b c d e"};
  const auto b = bleu(ref, hyp);
  // (4/5 * 3/4 * 2/3 * 1/2)^(1/4), BP = 1; sacrebleu agrees
  CHECK(b.score == doctest::Approx(66.874).epsilon(1e-4));
  CHECK(b.brevity_penalty == 1.0);
  REQUIRE(b.precisions.size() == 4);
  CHECK(b.precisions[0] == doctest::Approx(80.0));
  CHECK(b.precisions[3] == doctest::Approx(50.0));
}

TEST_CASE("BLEU reference values") {
  const auto refs = sentences(1, 50), hyps = refs;
  CHECK(bleu(refs, hyps).score == 100.0);
  CHECK(bleu(std::vector<std::string>{"a b c"}, std::vector<std::string>{"x y z"}, {4, BleuSmoothing::none, {}}).score == 0.0);
  // sacrebleu 2.x, default 13a tokenizer and exp smoothing
  const std::vector<std::string> r{"hello world, it's fine.", "the quick brown fox jumps over"};
  const std::vector<std::string> h{"hello, world! it's fine.", "the quick brown fox jumped"};
  CHECK(bleu(r, h).score == doctest::Approx(40.1714).epsilon(1e-4));
  CHECK(error_code([&] { bleu(refs, std::vector<std::string>{"x"}); }) == Errc::validation);
}

TEST_CASE("BLEU is invariant under joint permutation") {
  auto refs = sentences(2, 30);
  auto hyps = sentences(3, 30);
  const double base = bleu(refs, hyps).score;
  Rng r(1);
  std::vector<std::size_t> perm(30);
  for (std::size_t i = 0; i < 30; ++i) perm[i] = i;
  shuffle(perm, r);
  std::vector<std::string> pr, ph;
  for (auto i : perm) {
    pr.push_back(refs[i]);
    ph.push_back(hyps[i]);
  }
  CHECK(bleu(pr, ph).score == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("punctuation tokenizer") {
  CHECK(tokenize_punctuation("Hello, world! it's 3.5 e-mail") ==
        std::vector<std::string>{"Hello", ",", "world", "!", "it's", "3.5", "e-mail"});
}

TEST_CASE("paired bootstrap") {
  const auto refs = sentences(4, 200);
  auto shuffled = refs;
  Rng r(3);
  shuffle(shuffled, r);
  BootstrapOptions o;
  o.n_resamples = 1000;
  o.seed = 11;

  const auto same = paired_bootstrap_bleu(refs, refs, refs, o);
  CHECK(same.verdict == Verdict::not_significant);
  CHECK(same.ties == 1000);

  const auto sep = paired_bootstrap_bleu(refs, shuffled, refs, o);
  CHECK(sep.verdict == Verdict::a_better);
  CHECK(sep.wins_a >= 950);
  const auto rev = paired_bootstrap_bleu(shuffled, refs, refs, o);
  CHECK(rev.verdict == Verdict::b_better);

  const auto again = paired_bootstrap_bleu(refs, shuffled, refs, o);
  CHECK(again.wins_a == sep.wins_a);
  CHECK(again.wins_b == sep.wins_b);
  o.workers = 4;
  const auto par = paired_bootstrap_bleu(refs, shuffled, refs, o);
  CHECK(par.wins_a == sep.wins_a);
  CHECK(par.ties == sep.ties);

  o.n_resamples = 99;
  CHECK(error_code([&] { paired_bootstrap_bleu(refs, refs, refs, o); }) == Errc::config);
}

TEST_CASE("bootstrap on WER, lower is better") {
  const auto refs = sentences(5, 120);
  auto worse = refs;
  for (std::size_t i = 0; i < worse.size(); i += 2) worse[i] = "noise " + worse[i] + " noise";
  BootstrapOptions o;
  o.higher_is_better = false;
  o.seed = 2;
  const auto res = paired_bootstrap(make_wer_scorer(refs, refs), make_wer_scorer(refs, worse), refs.size(), o);
  CHECK(res.verdict == Verdict::a_better);
  CHECK(res.score_a == 0.0);
}

TEST_CASE("significance summary") {
  SignificanceSummary s;
  s.add(Verdict::a_better);
  s.add(Verdict::not_significant);
  s.add(Verdict::not_significant);
  CHECK(s.total() == 3);
  CHECK(s.n_not_significant == 2);
  CHECK(s.alpha == 0.05);
}
