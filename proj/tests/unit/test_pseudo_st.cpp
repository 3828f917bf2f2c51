#include <doctest.h>

#include <set>

#include "dsukit/error.hpp"
#include "dsukit/pseudo_st.hpp"
#include "dsukit/rng.hpp"
#include "test_util.hpp"

using namespace dsukit;
using testutil::error_code;

namespace {

ScoredTriple triple(std::string id, double score, Corpus c = Corpus::SPGI, std::string lang = "de") {
  return {std::move(id), "transcript", std::move(lang), "translation", score, c};
}

std::vector<ScoredTriple> pool(Corpus c, const std::string& lang, std::size_t n) {
  std::vector<ScoredTriple> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(triple(std::string(to_string(c)) + std::to_string(i), 90.0, c, lang));
  return v;
}

std::set<std::string> ids_of(const std::vector<ScoredTriple>& v) {
  std::set<std::string> s;
  for (const auto& t : v) s.insert(t.utterance_id);
  return s;
}

}  // namespace

TEST_CASE("QE threshold boundary") {
  const std::vector<ScoredTriple> in{triple("a", 84.999), triple("b", 85.0), triple("c", 100.0), triple("d", 0.0)};
  const auto kept = filter_by_qe(in, kDefaultQeThreshold);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].utterance_id == "b");
  CHECK(kept[1].utterance_id == "c");
  CHECK(filter_by_qe(in, 0.0) == in);
  CHECK(kDefaultQeThreshold == 85.0);
}

TEST_CASE("filter is monotone in the threshold") {
  Rng r(4);
  std::vector<ScoredTriple> in;
  for (int i = 0; i < 300; ++i) in.push_back(triple(std::to_string(i), std::round(r.uniform01() * 1000) / 10));
  std::set<std::string> prev = ids_of(in);
  for (double th = 0; th <= 100; th += 2.5) {
    const auto now = ids_of(filter_by_qe(in, th));
    CHECK(std::includes(prev.begin(), prev.end(), now.begin(), now.end()));
    prev = now;
  }
}

TEST_CASE("three corpora give 3n direct and 3n multi-turn per pair") {
  PseudoStreams s;
  for (auto c : {Corpus::SPGI, Corpus::GigaSpeech, Corpus::VoxPopuli}) s[{c, "de"}] = pool(c, "de", 300);
  PseudoSampleReport rep;
  const auto out = sample_pseudo_sets(s, 100, 100, 1, &rep);
  CHECK(out.direct.size() == 300);
  CHECK(out.multiturn.size() == 300);
  CHECK(rep.languages.at("de").direct == 300);
  CHECK(rep.languages.at("de").multiturn == 300);
  CHECK(rep.shortfalls.empty());
  const auto d = ids_of(out.direct), m = ids_of(out.multiturn);
  CHECK(d.size() == 300);
  for (const auto& id : m) CHECK(d.count(id) == 0);
}

TEST_CASE("short supply") {
  PseudoStreams s;
  s[{Corpus::SPGI, "zh"}] = pool(Corpus::SPGI, "zh", 50);
  PseudoSampleReport rep;
  const auto out = sample_pseudo_sets(s, 60, 60, 2, &rep);
  CHECK(out.direct.size() == 50);
  CHECK(out.multiturn.empty());
  const auto& st = rep.streams.at({Corpus::SPGI, "zh"});
  CHECK(st.direct_shortfall == 10);
  CHECK(st.multiturn_shortfall == 60);
  CHECK_FALSE(rep.shortfalls.empty());
  CHECK(rep.languages.at("zh").requested_direct == 60);
}

TEST_CASE("disjoint over 1000 random runs") {
  Rng r(9);
  for (int run = 0; run < 1000; ++run) {
    PseudoStreams s;
    const auto n = r.below(40);
    s[{Corpus::GigaSpeech, "de"}] = pool(Corpus::GigaSpeech, "de", n);
    const auto out = sample_pseudo_sets(s, static_cast<std::int64_t>(r.below(30)), static_cast<std::int64_t>(r.below(30)),
                                        static_cast<std::uint64_t>(run));
    const auto d = ids_of(out.direct), m = ids_of(out.multiturn);
    REQUIRE(d.size() == out.direct.size());
    REQUIRE(m.size() == out.multiturn.size());
    for (const auto& id : m) REQUIRE(d.count(id) == 0);
  }
}

TEST_CASE("sampling errors and determinism") {
  PseudoStreams s;
  s[{Corpus::SPGI, "de"}] = pool(Corpus::SPGI, "de", 20);
  CHECK(error_code([&] { sample_pseudo_sets(s, -1, 5, 0); }) == Errc::validation);
  CHECK(error_code([&] { sample_pseudo_sets(s, 5, -1, 0); }) == Errc::validation);
  const auto a = sample_pseudo_sets(s, 5, 5, 3);
  const auto b = sample_pseudo_sets(s, 5, 5, 3);
  CHECK(a.direct == b.direct);
  CHECK(a.multiturn == b.multiturn);
  s[{Corpus::SPGI, "de"}].push_back(s[{Corpus::SPGI, "de"}][0]);
  CHECK(error_code([&] { sample_pseudo_sets(s, 5, 5, 0); }) == Errc::validation);
}

TEST_CASE("score files and joining") {
  testutil::TempDir dir("qe");
  testutil::write_file(dir / "unit.jsonl", R"({"id":"a","lang":"de","score":0.9}
{"id":"b","lang":"de","score":0.849}
)");
  const auto unit = read_scores(dir / "unit.jsonl");
  CHECK(unit[0].score == doctest::Approx(90.0));
  CHECK(unit[1].score == doctest::Approx(84.9));

  testutil::write_file(dir / "pct.jsonl", R"({"id":"a","lang":"de","score":85}
{"id":"b","lang":"de","score":1.2}
)");
  const auto pct = read_scores(dir / "pct.jsonl");
  CHECK(pct[0].score == 85.0);
  CHECK(pct[1].score == 1.2);

  testutil::write_file(dir / "bad.jsonl", R"({"id":"a","lang":"de","score":140})" "\n");
  CHECK(error_code([&] { read_scores(dir / "bad.jsonl"); }) == Errc::validation);

  std::vector<ScoreRow> rows{{"a", "de", 0.5}};
  rescale_scores(rows);
  CHECK(rows[0].score == 50.0);

  UtteranceRecord g;
  g.id = "a";
  g.corpus = Corpus::GigaSpeech;
  g.transcript = "HI <COMMA> THERE <PERIOD>";
  const auto joined = join_pseudo_labels({g}, {{"a", "de", "hallo, da."}}, {{"a", "de", 91.0}});
  REQUIRE(joined.size() == 1);
  CHECK(joined[0].transcript == "hi, there.");
  CHECK(joined[0].source_corpus == Corpus::GigaSpeech);
  CHECK(joined[0].qe_score == 91.0);
  CHECK(error_code([&] { join_pseudo_labels({g}, {{"a", "zh", "x"}}, {{"a", "de", 91.0}}); }) == Errc::validation);
  CHECK(error_code([&] { join_pseudo_labels({g}, {{"b", "de", "x"}}, {{"b", "de", 91.0}}); }) == Errc::validation);

  write_triples(dir / "t.jsonl", joined);
  CHECK(read_triples(dir / "t.jsonl") == joined);
}
