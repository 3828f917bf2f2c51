#include <doctest.h>

#include <set>

#include "dsukit/dsu_codec.hpp"
#include "dsukit/error.hpp"
#include "dsukit/rng.hpp"
#include "test_util.hpp"

using namespace dsukit;

namespace {

DsuSequence raw(std::vector<UnitId> ids) {
  DsuSequence s;
  s.utterance_id = "u";
  s.source_frame_count = ids.size();
  s.ids = std::move(ids);
  return s;
}

std::vector<UnitId> random_ids(Rng& r, std::size_t k) {
  std::vector<UnitId> ids(r.below(40));
  for (auto& v : ids) v = static_cast<UnitId>(r.below(k));
  return ids;
}

}  // namespace

TEST_CASE("run-length collapse") {
  const auto d = dedup(raw({1, 1, 2, 2, 2, 3, 1}));
  CHECK(d.ids == std::vector<UnitId>{1, 2, 3, 1});
  CHECK(d.deduplicated);
  CHECK(d.source_frame_count == 7);
  CHECK(dedup(raw({})).ids.empty());
  CHECK(dedup(raw({5, 5, 5, 5})).ids == std::vector<UnitId>{5});
}

TEST_CASE("dedup properties on random sequences") {
  Rng r(3);
  for (int i = 0; i < 500; ++i) {
    const auto x = raw(random_ids(r, i % 2 ? 3 : 50));
    const auto d = dedup(x);
    CHECK(dedup(d) == d);
    CHECK(d.ids.size() <= x.ids.size());
    CHECK(std::set<UnitId>(d.ids.begin(), d.ids.end()) == std::set<UnitId>(x.ids.begin(), x.ids.end()));
    for (std::size_t j = 1; j < d.ids.size(); ++j) CHECK(d.ids[j] != d.ids[j - 1]);
    if (!x.ids.empty()) {
      CHECK(d.ids.front() == x.ids.front());
      CHECK(d.ids.back() == x.ids.back());
    }
  }
}

TEST_CASE("rendering") {
  auto s = dedup(raw({0, 4999}));
  CHECK(render_tokens(s) == "<extra_id_0><extra_id_4999>");
  CHECK(render_tokens(s, 100) == "<extra_id_100><extra_id_5099>");
  CHECK(render_tokens(dedup(raw({}))) == "");
  CHECK(unit_token(7) == "<extra_id_7>");
  CHECK(testutil::error_code([] { render_tokens(raw({1, 1})); }) == Errc::state);
}

TEST_CASE("render/parse round trip") {
  Rng r(10);
  for (int i = 0; i < 1000; ++i) {
    const std::int64_t base = i % 3 == 0 ? 32000 : 0;
    const auto d = dedup(raw(random_ids(r, 5000)));
    CHECK(parse_tokens(render_tokens(d, base), base, 5000) == d.ids);
  }
}

TEST_CASE("parse errors") {
  CHECK(parse_tokens("<extra_id_3>", 0, 5000) == std::vector<UnitId>{3});
  CHECK(parse_tokens("", 0, 5000).empty());
  CHECK(testutil::error_code([] { parse_tokens("<extra_id_5000>", 0, 5000); }) == Errc::range);
  CHECK(testutil::error_code([] { parse_tokens("<extra_id_1>x", 0, 5000); }) == Errc::parse);
  CHECK(testutil::error_code([] { parse_tokens("<extra_id_>", 0, 5000); }) == Errc::parse);
  CHECK(testutil::error_code([] { parse_tokens("<extra_id_2>", 5, 5000); }) == Errc::range);
  try {
    parse_tokens("<extra_id_1><extra_id_9999>", 0, 5000);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("12") != std::string::npos);
  }
  CHECK(count_unit_tokens("Speech:<extra_id_1><extra_id_22>\nEnglish: <extra_id_> hi") == 2);
}

TEST_CASE("hours from unit counts") {
  const double spgi = estimate_hours(645'000'000);
  CHECK(spgi == doctest::Approx(645e6 / 35.0 / 3600.0));
  CHECK(std::abs(spgi - 5100.0) / 5100.0 < 0.01);
  const double mls = estimate_hours(2'400'000'000ULL);
  CHECK(std::abs(mls - 19200.0) / 19200.0 < 0.02);
  CHECK(estimate_hours(0) == 0.0);
  CHECK(estimate_hours(3600, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("DSU corpus JSONL") {
  testutil::TempDir dir("dsu");
  std::vector<DsuSequence> corpus{dedup(raw({1, 2, 2})), raw({4, 4})};
  corpus[1].utterance_id = "v";
  write_dsu_corpus(dir / "u.jsonl", corpus);
  CHECK(read_dsu_corpus(dir / "u.jsonl") == corpus);
  CHECK(parse_dsu_line(to_dsu_line(corpus[0])) == corpus[0]);
  CHECK_THROWS_AS(parse_dsu_line("{\"id\": \"x\"}"), Error);
  CHECK_THROWS_AS(parse_dsu_line(R"({"id":"x","ids":[1,1],"deduplicated":true,"source_frame_count":2})"), Error);
}
