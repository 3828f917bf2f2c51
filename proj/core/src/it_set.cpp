#include <algorithm>
#include <fstream>

#include "dsukit/corpus.hpp"
#include "dsukit/error.hpp"
#include "dsukit/rng.hpp"

namespace dsukit {
namespace {

std::string collapse(std::string_view s) { return normalize_transcript(s, Corpus::OTHER); }

TrainingRecord render_example(const ItSource& src, const ItExample& ex, const LanguageNames& names,
                              const TokenCounter& counter) {
  TrainingRecord r;
  r.record_id = src.name + ":" + ex.id;
  r.phase = Phase::IT;
  r.task = src.task;
  r.source = src.name;
  PromptFields f{{"dsu", ex.dsu}, {"transcript", ex.transcript}};
  switch (src.task) {
    case Task::ASR:
      r.text = render_prompt(PromptKind::ASR_IT, f, names);
      r.lang_pair = std::make_pair(ex.source_lang, ex.source_lang);
      break;
    case Task::ST_DIRECT:
    case Task::ST_MULTITURN:
      f["translation"] = ex.translation;
      f["target_lang"] = ex.target_lang;
      r.text = render_prompt(src.task == Task::ST_DIRECT ? PromptKind::ST_DIRECT_IT : PromptKind::ST_MULTITURN_IT, f,
                             names);
      r.lang_pair = std::make_pair(ex.source_lang, ex.target_lang);
      break;
    default:
      if (ex.text.empty()) {
        throw Error(Errc::validation, "text instruction '" + ex.id + "' in source '" + src.name + "' is empty");
      }
      r.text = ex.text;
      if (!ex.target_lang.empty()) r.lang_pair = std::make_pair(ex.source_lang, ex.target_lang);
      break;
  }
  r.token_count = counter.count(r.text);
  return r;
}

}  // namespace

std::vector<TrainingRecord> build_it_set(const std::vector<ItSource>& sources,
                                         const std::set<std::string>& exclude_transcripts, std::uint64_t seed,
                                         const LanguageNames& names, const TokenCounter& counter, ItReport* report) {
  std::set<std::string> excluded;
  for (const auto& t : exclude_transcripts) excluded.insert(collapse(t));

  std::set<std::string> seen_names;
  std::vector<TrainingRecord> out;
  ItReport local;
  ItReport& rep = report ? *report : local;
  for (const auto& src : sources) {
    if (!seen_names.insert(src.name).second) throw Error(Errc::config, "IT source '" + src.name + "' listed twice");
    std::vector<const ItExample*> pool;
    std::size_t dropped = 0;
    for (const auto& ex : src.examples) {
      if (src.corpus == Corpus::FLEURS && excluded.count(collapse(ex.transcript))) {
        ++dropped;
        continue;
      }
      pool.push_back(&ex);
    }
    std::sort(pool.begin(), pool.end(), [](auto* a, auto* b) { return a->id < b->id; });
    Rng rng(derive_seed(derive_seed(seed, std::string_view("it-source")), src.name));
    auto picks = sample_without_replacement(pool.size(), src.count, rng);
    std::sort(picks.begin(), picks.end());
    for (auto i : picks) out.push_back(render_example(src, *pool[i], names, counter));
    rep.available[src.name] = pool.size();
    rep.excluded[src.name] = dropped;
    rep.selected[src.name] = picks.size();
  }
  Rng rng(derive_seed(seed, std::string_view("it-interleave")));
  shuffle(out, rng);
  return out;
}

std::set<std::string> read_exclusion_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::config, "cannot read exclusion list " + path.string());
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto s = collapse(line);
    if (!s.empty()) out.insert(std::move(s));
  }
  if (in.bad()) throw Error(Errc::config, "error reading exclusion list " + path.string());
  return out;
}

}  // namespace dsukit
