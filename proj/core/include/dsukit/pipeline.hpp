#pragma once
// End-to-end orchestration: stage helpers shared with the command-line tool,
// the versioned JSON run configuration, the stage graph, the artifact cache
// and the run report.
//
// Run configuration (version 1):
//   {
//     "version": 1, "seed": 7, "output_dir": "out", "workers": 1,
//     "inputs":  {"manifest": ..., "embeddings": ..., "bitext": ...,
//                 "text_instructions": ..., "translations": ..., "scores": ...,
//                 "exclude_transcripts": ..., "eval_refs": ..., "eval_hyps": ...,
//                 "eval_hyps_b": ...},
//     "stages":  {"select": {...}, "train_kmeans": {...}, "encode": {...},
//                 "dedup": {...}, "extend_vocab": {...}, "build_cpt": {...},
//                 "pseudo_st": {...}, "build_it": {...}, "score": {...}}
//   }
// A stage runs when its block is present. Relative paths resolve against the
// directory of the config file. Each stage takes "seed" from its block or,
// when absent, derive_seed(seed, stage name).
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dsukit/corpus.hpp"
#include "dsukit/dsu_codec.hpp"
#include "dsukit/error.hpp"
#include "dsukit/manifest.hpp"
#include "dsukit/pseudo_st.hpp"
#include "dsukit/quantizer.hpp"

namespace dsukit {

// --- stage helpers ----------------------------------------------------------

// Assigns every manifest row's features. Feature paths resolve against
// base_dir. Output follows manifest order.
std::vector<DsuSequence> encode_manifest(const Codebook& codebook, const Manifest& manifest,
                                         const std::filesystem::path& base_dir, bool normalize = false,
                                         unsigned workers = 1);

// {"id", "src_lang", "tgt_lang", "src", "tgt", optional "source"}; source
// defaults to "bitext".
struct BitextRow {
  std::string id;
  std::string source = "bitext";
  std::string src_lang;
  std::string tgt_lang;
  std::string src;
  std::string tgt;
};
std::vector<BitextRow> read_bitext(const std::filesystem::path& path);

// {"id", "task", "text", optional "source"}; source defaults to "text_<task>".
struct TextInstruction {
  std::string id;
  Task task = Task::OTHER_TEXT;
  std::string text;
  std::string source;
};
std::vector<TextInstruction> read_text_instructions(const std::filesystem::path& path);

// The corpora whose ASR data feeds continued pre-training by default.
const std::vector<Corpus>& default_cpt_speech_corpora();

// ASR_CPT records (one source per corpus, after apply_corpus_caps when
// apply_caps) plus MT_CPT records (one source per bitext source name).
// Utterances without units are skipped.
SourceRecords cpt_sources(const Manifest& manifest, const std::vector<DsuSequence>& units,
                          const std::vector<BitextRow>& bitext, const std::vector<Corpus>& speech_corpora,
                          std::uint64_t seed, std::int64_t index_base = 0, bool apply_caps = true,
                          const TokenCounter& counter = default_token_counter());

// Instruction-tuning source counts; nullopt takes every available example.
struct ItBuildSpec {
  struct Entry {
    Corpus corpus = Corpus::OTHER;
    std::optional<std::size_t> count;
  };
  std::vector<Entry> asr;  // default: CV, all
  std::vector<Entry> st;   // default: EuroparlST, FLEURS, CoVoST2, all
  std::optional<std::size_t> pseudo_direct;
  std::optional<std::size_t> pseudo_multiturn;
  std::optional<std::size_t> text;  // per text task
  bool apply_caps = true;
  std::int64_t index_base = 0;
};
ItBuildSpec parse_it_build_spec(std::string_view json_text);

struct ItInputs {
  const Manifest* manifest = nullptr;
  const std::vector<DsuSequence>* units = nullptr;  // deduplicated
  const std::vector<ScoredTriple>* pseudo_direct = nullptr;
  const std::vector<ScoredTriple>* pseudo_multiturn = nullptr;
  const std::vector<TextInstruction>* text = nullptr;
};
std::vector<ItSource> it_sources(const ItInputs& inputs, const ItBuildSpec& spec, std::uint64_t seed);

// Reads one segment per line, keeping empty lines.
std::vector<std::string> read_lines(const std::filesystem::path& path);

// task "asr" scores WER (value is a fraction), "mt" scores BLEU. With
// hyps_b and bootstrap > 0 a paired bootstrap compares hyps against hyps_b.
struct ScoreRequest {
  std::string task = "asr";
  std::vector<std::string> refs;
  std::vector<std::string> hyps;
  std::vector<std::string> hyps_b;
  std::size_t bootstrap = 0;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};
// {"metric": ..., "value": ..., "details": {...}}
std::string score_to_json(const ScoreRequest& request);

// --- orchestration ----------------------------------------------------------

class StageGraph {
 public:
  void add(std::string name, std::vector<std::string> deps);
  // Kahn's algorithm, ties broken by insertion order. Errc::config on an
  // unknown dependency or a cycle.
  std::vector<std::string> order() const;

 private:
  std::vector<std::pair<std::string, std::vector<std::string>>> nodes_;
};

// The built-in stage names, in dependency order.
const std::vector<std::string>& pipeline_stage_names();
StageGraph pipeline_stage_graph();

struct PipelineConfig {
  int version = 1;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  unsigned workers = 1;
  std::filesystem::path base_dir;
  std::map<std::string, std::filesystem::path> inputs;  // resolved
  std::map<std::string, std::string> stages;           // stage name -> canonical JSON block

  bool has_stage(const std::string& name) const { return stages.count(name) != 0; }
  std::uint64_t stage_seed(const std::string& name) const;
};

PipelineConfig parse_pipeline_config(std::string_view json_text, const std::filesystem::path& base_dir);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
// DSUKIT_OUTPUT_DIR, DSUKIT_WORKERS and DSUKIT_INPUT_<NAME> (upper case).
// Nothing else can be overridden from the environment.
void apply_environment_overrides(PipelineConfig& config);
// Schema, stage dependencies and the existence of every input the enabled
// stages read. Throws before any work is done.
void validate_pipeline_config(const PipelineConfig& config);

struct StageReport {
  std::string name;
  std::string status;  // "ran" or "cached"
  double seconds = 0.0;
  std::size_t input_records = 0;
  std::size_t output_records = 0;
  std::map<std::string, double> metrics;
  std::map<std::string, std::string> artifacts;  // file name -> sha256
};

struct RunReport {
  std::uint64_t seed = 0;
  std::vector<StageReport> stages;
  std::string failed_stage;
  std::string error;
  // Every artifact of every stage; stable across reruns.
  std::map<std::string, std::string> digests() const;
  std::string to_json() const;
};

struct RunOptions {
  bool force = false;  // ignore the cache
};

// Carries the partial report of an aborted run.
class PipelineError : public Error {
 public:
  PipelineError(Errc code, const std::string& stage, const std::string& message, RunReport partial);
  const std::string& stage() const noexcept { return stage_; }
  const RunReport& partial_report() const noexcept { return partial_; }

 private:
  std::string stage_;
  RunReport partial_;
};

// Writes artifacts and run_report.json under config.output_dir; the cache
// lives in output_dir/.cache. A cached stage whose artifacts no longer match
// their recorded digests raises Errc::stale_cache.
RunReport run_pipeline(const PipelineConfig& config, const RunOptions& options = {});

}  // namespace dsukit
