#include <doctest.h>

#include "dsukit/error.hpp"
#include "dsukit/manifest.hpp"
#include "test_util.hpp"

using namespace dsukit;

TEST_CASE("manifest line round trip") {
  UtteranceRecord r;
  r.id = "cv-001";
  r.speaker = "spk\"1";
  r.duration_sec = 3.25;
  r.transcript = "héllo world";
  r.translations["de"] = {"hallo welt", 91.5};
  r.feature_path = "feats/cv-001.spfe";
  r.corpus = Corpus::CV;
  CHECK(parse_manifest_line(to_manifest_line(r)) == r);
}

TEST_CASE("manifest file io skips blank lines and reports line numbers") {
  testutil::TempDir dir("man");
  testutil::write_file(dir / "m.jsonl",
                       "{\"id\":\"a\",\"speaker\":\"s\",\"duration_sec\":1,\"transcript\":\"x\",\"feature_path\":\"a.spfe\","
                       "\"corpus\":\"MLS\"}\n\n"
                       "{\"id\":\"b\",\"speaker\":\"s\",\"duration_sec\":1,\"transcript\":\"y\",\"feature_path\":\"b.spfe\","
                       "\"corpus\":\"SPGI\"}\n");
  const auto m = read_manifest(dir / "m.jsonl");
  REQUIRE(m.size() == 2);
  CHECK(m[0].corpus == Corpus::MLS);
  CHECK(m[1].translations.empty());

  testutil::write_file(dir / "bad.jsonl", "{\"id\":\"a\"}\n{not json\n");
  try {
    read_manifest(dir / "bad.jsonl");
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::parse);
    CHECK(std::string(e.what()).find(":1") != std::string::npos);
  }

  write_manifest(dir / "out.jsonl", m);
  CHECK(read_manifest(dir / "out.jsonl") == m);
}

TEST_CASE("corpus names") {
  for (Corpus c : {Corpus::SPGI, Corpus::GigaSpeech, Corpus::MLS, Corpus::VoxPopuli, Corpus::CV, Corpus::EuroparlST,
                   Corpus::FLEURS, Corpus::CoVoST2, Corpus::OTHER}) {
    CHECK(corpus_from_string(to_string(c)) == c);
  }
  CHECK_THROWS_AS(corpus_from_string("LibriSpeech"), Error);
}

TEST_CASE("duplicate ids are named") {
  Manifest m(3);
  m[0].id = "a";
  m[1].id = "b";
  m[2].id = "a";
  try {
    require_unique_ids(m);
    FAIL("expected validation error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::validation);
    CHECK(std::string(e.what()).find("'a'") != std::string::npos);
  }
}
