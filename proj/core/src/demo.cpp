#include "dsukit/demo.hpp"

#include <cmath>
#include <fstream>
#include <vector>

#include "dsukit/corpus.hpp"
#include "dsukit/feature_io.hpp"
#include "dsukit/manifest.hpp"
#include "dsukit/rng.hpp"
#include "dsukit/vocab_embed.hpp"
#include "jsonl.hpp"

namespace dsukit {

using detail::json;
namespace fs = std::filesystem;

double min_anchor_separation(std::uint64_t seed, std::size_t n, std::size_t dim) {
  std::vector<std::vector<float>> a;
  for (std::size_t i = 0; i < n; ++i) a.push_back(anchor_vector(seed, i, dim));
  double best = INFINITY;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double d = 0;
      for (std::size_t c = 0; c < dim; ++c) {
        const double x = double(a[i][c]) - a[j][c];
        d += x * x;
      }
      best = std::min(best, std::sqrt(d));
    }
  }
  return best;
}

namespace {

// Covers all 26 letters and the apostrophe.
const std::vector<std::string> kWords{
    "the",  "quick", "brown", "fox",   "jumps", "over",  "lazy",  "dog",   "pack",   "my",
    "box",  "with",  "five",  "dozen", "liquor", "jugs", "it's",  "we're", "zebra",  "vex",
    "jazz", "quiz",  "world", "hello", "speech", "units", "model", "data",  "train", "text"};

std::string sentence(Rng& rng, std::size_t min_words, std::size_t max_words) {
  const std::size_t n = min_words + rng.below(max_words - min_words + 1);
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) s += ' ';
    s += kWords[rng.below(kWords.size())];
    if (i + 1 < n && rng.below(5) == 0) s += ',';
  }
  return s + '.';
}

// "hello, world." -> "HELLO <COMMA> WORLD <PERIOD>"
std::string giga_form(const std::string& clean) {
  std::string out;
  for (char c : clean) {
    if (c == ',') {
      out += " <COMMA>";
    } else if (c == '.') {
      out += " <PERIOD>";
    } else if (c >= 'a' && c <= 'z') {
      out.push_back(static_cast<char>(c - 'a' + 'A'));
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string fake_translation(const std::string& text, const std::string& lang) {
  std::string out = lang + ":";
  std::string word;
  auto flush = [&] {
    if (!word.empty()) out += " " + word + "-" + lang;
    word.clear();
  };
  for (char c : text) {
    if (c == ' ' || c == ',' || c == '.') {
      flush();
    } else {
      word.push_back(c);
    }
  }
  flush();
  return out + ".";
}

struct Plan {
  Corpus corpus;
  std::size_t count;
  std::size_t speakers;
  std::vector<std::string> langs;
};

}  // namespace

DemoFiles generate_demo(const fs::path& dir, const DemoOptions& o) {
  fs::create_directories(dir / "features");
  const Alphabet alphabet(kDemoAlphabet);
  DemoFiles files;
  files.anchor_seed = derive_seed(o.seed, std::string_view("anchors"));
  files.noise_sigma = o.noise_factor * min_anchor_separation(files.anchor_seed, alphabet.size(), o.dim);
  SynthOptions so;
  so.dim = o.dim;
  so.frames_per_symbol = o.frames_per_symbol;
  so.noise_sigma = files.noise_sigma;
  so.seed = files.anchor_seed;

  const std::vector<Plan> plans{
      {Corpus::SPGI, 15, 5, {}},        {Corpus::GigaSpeech, 15, 5, {}}, {Corpus::MLS, 15, 1, {}},
      {Corpus::VoxPopuli, 10, 3, {}},   {Corpus::CV, 20, 0, {}},         {Corpus::EuroparlST, 10, 3, {"de", "fr"}},
      {Corpus::FLEURS, 10, 5, {"de"}},  {Corpus::CoVoST2, 5, 1, {"de"}},
  };

  Rng rng(derive_seed(o.seed, std::string_view("demo-text")));
  Manifest manifest;
  std::vector<std::string> cv_sentences;
  for (int i = 0; i < 8; ++i) cv_sentences.push_back(sentence(rng, 4, 10));
  std::vector<std::string> fleurs_excluded;

  for (const auto& plan : plans) {
    const std::string cname(to_string(plan.corpus));
    for (std::size_t i = 0; i < plan.count; ++i) {
      UtteranceRecord r;
      char idbuf[64];
      std::snprintf(idbuf, sizeof idbuf, "%s-%03zu", cname.c_str(), i);
      r.id = idbuf;
      r.corpus = plan.corpus;
      std::string clean;
      if (plan.corpus == Corpus::CV) {
        // one sentence read by six speakers, seven read by two each
        const std::size_t t = i < 6 ? 0 : 1 + (i - 6) / 2;
        clean = cv_sentences[t];
        r.speaker = "CV-spk" + std::to_string(i);
      } else {
        clean = sentence(rng, 3, 9);
        r.speaker = cname + "-spk" + std::to_string(i % plan.speakers);
      }
      r.transcript = plan.corpus == Corpus::GigaSpeech ? giga_form(clean) : clean;
      for (const auto& lang : plan.langs) r.translations[lang] = {fake_translation(clean, lang), 90.0};
      if (plan.corpus == Corpus::FLEURS && i < 3) fleurs_excluded.push_back(clean);

      const auto feats = synth_features(r.id, clean, alphabet, so);
      r.feature_path = "features/" + r.id + ".spfe";
      write_features(feats, dir / r.feature_path);
      r.duration_sec = static_cast<double>(feats.frame_count()) / so.frame_rate_hz;
      manifest.push_back(std::move(r));
    }
  }
  files.manifest = dir / "manifest.jsonl";
  write_manifest(files.manifest, manifest);

  {
    std::ofstream ex(dir / "exclude_transcripts.txt");
    for (const auto& s : fleurs_excluded) ex << s << '\n';
  }

  // pseudo labels for the ASR-only corpora
  {
    detail::JsonlWriter tr(dir / "translations.jsonl");
    detail::JsonlWriter sc(dir / "scores.jsonl");
    Rng qe(derive_seed(o.seed, std::string_view("demo-qe")));
    std::size_t n = 0;
    for (const auto& r : manifest) {
      if (r.corpus != Corpus::SPGI && r.corpus != Corpus::GigaSpeech && r.corpus != Corpus::VoxPopuli) continue;
      for (const std::string lang : {"de", "zh"}) {
        double score = 70.0 + 30.0 * qe.uniform01();
        if (n == 0) score = 84.999;
        if (n == 1) score = 85.0;
        ++n;
        const std::string clean = normalize_transcript(r.transcript, r.corpus);
        tr.write({{"id", r.id}, {"lang", lang}, {"text", fake_translation(clean, lang)}});
        sc.write({{"id", r.id}, {"lang", lang}, {"score", std::round(score * 1000.0) / 1000.0}});
      }
    }
    tr.close();
    sc.close();
  }

  {
    EmbeddingTable table;
    Rng er(derive_seed(o.seed, std::string_view("demo-embeddings")));
    const std::size_t V = 100, d = 16;
    table.vectors = Matrix(V, d);
    for (std::size_t v = 0; v < V; ++v) {
      table.tokens.push_back("tok" + std::to_string(v));
      for (std::size_t c = 0; c < d; ++c) table.vectors(v, c) = static_cast<float>(er.normal() * (1.0 + 0.1 * double(c)));
    }
    save_embeddings(table, dir / "embeddings.spem");
  }

  {
    detail::JsonlWriter bt(dir / "bitext.jsonl");
    Rng br(derive_seed(o.seed, std::string_view("demo-bitext")));
    for (int i = 0; i < 60; ++i) {
      const auto s = sentence(br, 3, 8);
      char id[32];
      std::snprintf(id, sizeof id, "bitext-%03d", i);
      bt.write({{"id", id}, {"src_lang", "en"}, {"tgt_lang", "de"}, {"src", s}, {"tgt", fake_translation(s, "de")}});
    }
    bt.close();
  }

  {
    detail::JsonlWriter ti(dir / "text_instructions.jsonl");
    Rng tr(derive_seed(o.seed, std::string_view("demo-text-it")));
    for (int i = 0; i < 10; ++i) {
      const auto s = sentence(tr, 3, 8);
      ti.write({{"id", "ner-" + std::to_string(i)}, {"task", "NER"}, {"text", "Find the named entities: " + s}});
      ti.write({{"id", "ape-" + std::to_string(i)}, {"task", "APE"}, {"text", "Post-edit the translation: " + fake_translation(s, "de")}});
    }
    ti.close();
  }

  {
    std::ofstream refs(dir / "eval_refs.txt"), a(dir / "eval_hyps.txt"), b(dir / "eval_hyps_b.txt");
    Rng ev(derive_seed(o.seed, std::string_view("demo-eval")));
    for (int i = 0; i < 40; ++i) {
      const auto s = sentence(ev, 5, 10);
      refs << s << '\n';
      std::string ha = s;
      if (i % 4 == 0) ha = "the " + s;
      a << ha << '\n';
      b << sentence(ev, 5, 10) << '\n';
    }
  }

  json cfg;
  cfg["version"] = 1;
  cfg["seed"] = o.seed;
  cfg["output_dir"] = "out";
  cfg["workers"] = o.workers;
  cfg["inputs"] = {{"manifest", "manifest.jsonl"},
                   {"embeddings", "embeddings.spem"},
                   {"bitext", "bitext.jsonl"},
                   {"text_instructions", "text_instructions.jsonl"},
                   {"translations", "translations.jsonl"},
                   {"scores", "scores.jsonl"},
                   {"exclude_transcripts", "exclude_transcripts.txt"},
                   {"eval_refs", "eval_refs.txt"},
                   {"eval_hyps", "eval_hyps.txt"},
                   {"eval_hyps_b", "eval_hyps_b.txt"}};
  cfg["stages"]["select"] = {{"rules",
                              {{{"corpus", "CoVoST2"}, {"max_files_per_speaker", 8}, {"target_file_count", 62000}},
                               {{"corpus", "VoxPopuli"}, {"max_files_per_speaker", 250}, {"target_file_count", 65000}},
                               {{"corpus", "MLS"}, {"max_files_per_speaker", "unlimited"}, {"target_file_count", 107000}}}}};
  cfg["stages"]["train_kmeans"] = {{"k", o.k}, {"max_iters", 100}, {"tol", 1e-4}, {"init", "kmeanspp"}};
  cfg["stages"]["encode"] = json::object();
  cfg["stages"]["dedup"] = json::object();
  cfg["stages"]["extend_vocab"] = {{"scale", 1e-5}};
  cfg["stages"]["build_cpt"] = {{"total_token_budget", 2400}, {"speech_fraction", 5.0 / 6.0},
                                {"dsu_fraction_within_speech", 0.88}};
  cfg["stages"]["pseudo_st"] = {{"threshold", 85.0}, {"n_direct", 6}, {"n_multiturn", 6}};
  cfg["stages"]["build_it"] = {{"asr", {{{"corpus", "CV"}, {"count", 10}}}}, {"text", {{"count", 5}}}};
  cfg["stages"]["score"] = {{"task", "asr"}, {"bootstrap", 1000}, {"alpha", 0.05}};
  files.config = dir / "demo.json";
  std::ofstream(files.config) << cfg.dump(2) << '\n';
  return files;
}

}  // namespace dsukit
