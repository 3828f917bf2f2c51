#include <doctest.h>

#include <map>
#include <set>

#include "dsukit/corpus.hpp"
#include "dsukit/error.hpp"
#include "synthetic_sources.hpp"
#include "test_util.hpp"

using namespace dsukit;
using testutil::error_code;

namespace {

UtteranceRecord utt(std::string id, Corpus c, std::string speaker, std::string transcript, double dur = 5.0) {
  UtteranceRecord r;
  r.id = std::move(id);
  r.corpus = c;
  r.speaker = std::move(speaker);
  r.transcript = std::move(transcript);
  r.duration_sec = dur;
  return r;
}

std::uint64_t token_sum(const std::vector<TrainingRecord>& v) {
  std::uint64_t n = 0;
  for (const auto& r : v) n += r.token_count;
  return n;
}

ItSource asr_source(const std::string& name, Corpus c, std::size_t n, std::size_t count) {
  ItSource s;
  s.name = name;
  s.task = Task::ASR;
  s.corpus = c;
  s.count = count;
  for (std::size_t i = 0; i < n; ++i) {
    ItExample ex;
    ex.id = name + std::to_string(i);
    ex.dsu = unit_token(static_cast<UnitId>(i));
    ex.transcript = "sentence number " + std::to_string(i);
    s.examples.push_back(ex);
  }
  return s;
}

}  // namespace

TEST_CASE("transcript normalization") {
  CHECK(normalize_transcript("HELLO <COMMA> WORLD <PERIOD>", Corpus::GigaSpeech) == "hello, world.");
  CHECK(normalize_transcript("WHY <QUESTIONMARK> NO <EXCLAMATIONPOINT>", Corpus::GigaSpeech) == "why? no!");
  CHECK(normalize_transcript("", Corpus::GigaSpeech) == "");
  CHECK(normalize_transcript("", Corpus::MLS) == "");
  CHECK(normalize_transcript("  Keep  The CASE,  here ", Corpus::MLS) == "Keep The CASE, here");
  CHECK(normalize_transcript("A\tB\n C", Corpus::SPGI) == "A B C");
}

TEST_CASE("CV duration floor") {
  const Manifest m{utt("a", Corpus::CV, "s1", "x", 2.9), utt("b", Corpus::CV, "s2", "y", 3.0),
                   utt("c", Corpus::SPGI, "s3", "z", 0.5)};
  const auto out = apply_corpus_caps(m, 1);
  REQUIRE(out.size() == 2);
  CHECK(out[0].id == "b");
  CHECK(out[1].id == "c");
}

TEST_CASE("CV speakers per transcript") {
  Manifest m;
  for (int s = 0; s < 6; ++s) m.push_back(utt("u" + std::to_string(s), Corpus::CV, "spk" + std::to_string(s), "same words"));
  m.push_back(utt("other", Corpus::CV, "spk0", "different"));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto out = apply_corpus_caps(m, seed);
    std::set<std::string> spk;
    for (const auto& r : out) {
      if (r.transcript == "same words") spk.insert(r.speaker);
    }
    CHECK(spk.size() == 4);
    CHECK(out.back().id == "other");
    CHECK(out == apply_corpus_caps(m, seed));
  }
}

TEST_CASE("MLS transcriptions per speaker") {
  Manifest m;
  for (int i = 0; i < 13; ++i) m.push_back(utt("a" + std::to_string(i), Corpus::MLS, "A", "t"));
  for (int i = 0; i < 20; ++i) m.push_back(utt("b" + std::to_string(i), Corpus::MLS, "B", "t"));
  const auto out = apply_corpus_caps(m, 3);
  std::map<std::string, int> per;
  for (const auto& r : out) ++per[r.speaker];
  CHECK(per["A"] == 13);
  CHECK(per["B"] == 13);
  // input order preserved
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i].speaker == out[i - 1].speaker) CHECK(std::stoi(out[i].id.substr(1)) > std::stoi(out[i - 1].id.substr(1)));
  }
}

TEST_CASE("full-scale mixture ratios at 6M tokens") {
  const auto sources = testutil::synthetic_cpt_sources(42, 15000, 40000);
  MixtureSpec spec;
  spec.total_token_budget = 6'000'000;
  spec.text_sources = {{"bitext", 1.0}};
  spec.seed = 9;
  const auto res = build_mixture(sources, spec);
  const auto& rep = res.report;
  CHECK(rep.shortfalls.empty());
  CHECK(std::abs(double(rep.speech_tokens) / 5'000'000.0 - 1) <= 0.01);
  CHECK(std::abs(double(rep.text_tokens) / 1'000'000.0 - 1) <= 0.01);
  CHECK(std::abs(double(rep.speech_tokens) / double(rep.text_tokens) / 5.0 - 1) <= 0.01);
  CHECK(std::abs(rep.dsu_fraction_within_speech() / 0.88 - 1) <= 0.01);
  MESSAGE("dsu/transcript " << double(rep.dsu_tokens) / double(rep.transcript_tokens) << " fraction " << rep.dsu_fraction_within_speech());
  CHECK(std::abs(double(rep.dsu_tokens) / double(rep.transcript_tokens) / (4.4 / 0.6) - 1) <= 0.01);
  CHECK(token_sum(res.records) == rep.total_tokens);
  CHECK(rep.total_tokens == rep.speech_tokens + rep.text_tokens);
  CHECK(rep.speech_tokens == rep.dsu_tokens + rep.transcript_tokens);
  for (const auto& r : res.records) CHECK(r.token_count == default_token_counter().count(r.text));
  std::set<std::string> ids;
  for (const auto& r : res.records) ids.insert(r.record_id);
  CHECK(ids.size() == res.records.size());

  const auto again = build_mixture(sources, spec);
  CHECK(again.records == res.records);
}

TEST_CASE("exhausted source reports a shortfall") {
  SourceRecords src;
  dsukit::Rng r(1);
  for (int i = 0; i < 10; ++i) src["only"].push_back(testutil::speech_record(r, "r" + std::to_string(i), 20, 5));
  MixtureSpec spec;
  spec.total_token_budget = 1'000'000;
  spec.speech_sources = {"only"};
  const auto res = build_mixture(src, spec);
  CHECK(res.records.size() == 10);
  CHECK(res.report.speech_exhausted);
  CHECK(res.report.sources.at("only").exhausted);
  CHECK_FALSE(res.report.shortfalls.empty());
  std::set<std::string> ids;
  for (const auto& x : res.records) ids.insert(x.record_id);
  CHECK(ids.size() == 10);
}

TEST_CASE("mixture configuration errors") {
  SourceRecords src = testutil::synthetic_cpt_sources(1, 5, 5);
  MixtureSpec spec;
  spec.total_token_budget = 1000;
  spec.text_sources = {{"bitext", 1.0}, {"missing", 1.0}};
  try {
    build_mixture(src, spec);
    FAIL("expected budget error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::budget);
    CHECK(std::string(e.what()).find("missing") != std::string::npos);
  }
  src["empty"] = {};
  spec.text_sources = {{"bitext", 1.0}};
  CHECK(error_code([&] { build_mixture(src, spec); }) == Errc::budget);
  spec.speech_fraction = 1.0;
  CHECK(error_code([&] { spec.validate(); }) == Errc::config);
  spec.speech_fraction = 0.5;
  spec.text_sources = {{"bitext", -1.0}};
  CHECK(error_code([&] { spec.validate(); }) == Errc::config);
  CHECK(error_code([] { parse_mixture_spec(R"({"total_token_budget": 0})"); }) == Errc::config);
  const auto parsed = parse_mixture_spec(R"({"total_token_budget": 100, "text_sources": [{"source": "b", "weight": 2}]})");
  CHECK(parsed.total_token_budget == 100);
  CHECK(parsed.speech_fraction == doctest::Approx(5.0 / 6.0));
  CHECK(parsed.dsu_fraction_within_speech == 0.88);
}

TEST_CASE("text budget follows source weights") {
  auto src = testutil::synthetic_cpt_sources(2, 200, 2000);
  src["bitext2"] = src["bitext"];
  MixtureSpec spec;
  spec.total_token_budget = 60000;
  spec.text_sources = {{"bitext", 3.0}, {"bitext2", 1.0}};
  const auto res = build_mixture(src, spec);
  CHECK(res.report.text_budget_per_source.at("bitext") == 3 * res.report.text_budget_per_source.at("bitext2"));
  CHECK(res.report.sources.at("bitext").tokens == doctest::Approx(3.0 * res.report.sources.at("bitext2").tokens).epsilon(0.02));
}

TEST_CASE("record JSONL round trip") {
  testutil::TempDir dir("rec");
  TrainingRecord a;
  a.record_id = "x";
  a.text = "English: a\nGerman: b";
  a.token_count = 4;
  a.task = Task::MT;
  a.lang_pair = std::make_pair("en", "de");
  a.source = "bitext";
  TrainingRecord b = a;
  b.record_id = "y";
  b.phase = Phase::IT;
  b.lang_pair.reset();
  write_records(dir / "r.jsonl", {a, b});
  CHECK(read_records(dir / "r.jsonl") == std::vector<TrainingRecord>{a, b});
  CHECK(parse_record_line(to_record_line(a)) == a);
}

TEST_CASE("IT set: exclusion, zero counts, determinism") {
  auto fleurs = asr_source("st_FLEURS", Corpus::FLEURS, 10, 10);
  fleurs.task = Task::ST_DIRECT;
  for (auto& ex : fleurs.examples) {
    ex.translation = "uebersetzung";
    ex.target_lang = "de";
  }
  const auto cv = asr_source("asr_CV", Corpus::CV, 10, 4);
  auto none = asr_source("asr_zero", Corpus::CV, 10, 0);
  ItSource text;
  text.name = "text_NER";
  text.task = Task::NER;
  text.count = 3;
  for (int i = 0; i < 5; ++i) text.examples.push_back({"n" + std::to_string(i), "", "", "", "en", "", "tag this " + std::to_string(i)});

  const std::set<std::string> exclude{"sentence  number 2", "sentence number 7", "sentence number 4"};
  ItReport rep;
  const auto set = build_it_set({fleurs, cv, none, text}, exclude, 5, default_language_names(), default_token_counter(), &rep);
  CHECK(rep.excluded.at("st_FLEURS") == 3);
  CHECK(rep.selected.at("st_FLEURS") == 7);
  CHECK(rep.selected.at("asr_CV") == 4);
  CHECK(rep.selected.at("asr_zero") == 0);
  CHECK(rep.selected.at("text_NER") == 3);
  CHECK(set.size() == 14);
  for (const auto& r : set) {
    CHECK(r.phase == Phase::IT);
    CHECK(r.source != "asr_zero");
    CHECK(r.text.find("sentence number 2\n") == std::string::npos);
    if (r.task == Task::ST_DIRECT) CHECK(r.text.rfind("<|im_start|>user\nSpeech: <extra_id_", 0) == 0);
    if (r.task == Task::NER) CHECK(r.text.rfind("tag this", 0) == 0);
  }
  // ASR examples from CV: exclusion applies to FLEURS only
  const auto cv_ex = build_it_set({asr_source("asr_CV", Corpus::CV, 10, 10)}, exclude, 5);
  CHECK(cv_ex.size() == 10);

  CHECK(build_it_set({fleurs, cv, none, text}, exclude, 5) == set);
  CHECK_FALSE(build_it_set({fleurs, cv, none, text}, exclude, 6) == set);
}

TEST_CASE("exclusion list file") {
  testutil::TempDir dir("ex");
  testutil::write_file(dir / "x.txt", "a  b\n\n c \n");
  CHECK(read_exclusion_list(dir / "x.txt") == std::set<std::string>{"a b", "c"});
  CHECK(error_code([&] { read_exclusion_list(dir / "nope.txt"); }) == Errc::config);
}
