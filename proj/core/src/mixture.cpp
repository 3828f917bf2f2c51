#include <algorithm>
#include <cmath>
#include <numeric>

#include "dsukit/corpus.hpp"
#include "dsukit/dsu_codec.hpp"
#include "dsukit/error.hpp"
#include "dsukit/log.hpp"
#include "dsukit/rng.hpp"
#include "jsonl.hpp"

namespace dsukit {
namespace {

using detail::json;

TrainingRecord record_from_json(const json& j) {
  TrainingRecord r;
  r.record_id = detail::required<std::string>(j, "id");
  r.phase = phase_from_string(j.value("phase", std::string("CPT")));
  r.text = detail::required<std::string>(j, "text");
  r.token_count = j.value("token_count", std::size_t{0});
  r.task = task_from_string(j.value("task", std::string("OTHER_TEXT")));
  if (j.contains("lang_pair") && j.at("lang_pair").is_array() && j.at("lang_pair").size() == 2) {
    r.lang_pair = std::make_pair(j.at("lang_pair")[0].get<std::string>(), j.at("lang_pair")[1].get<std::string>());
  }
  r.source = j.value("source", std::string{});
  return r;
}

struct Candidate {
  const TrainingRecord* record;
  std::string source;
  std::size_t tokens;
  std::size_t units;
};

std::vector<Candidate> ordered_candidates(const std::vector<TrainingRecord>& records, const std::string& source,
                                          const TokenCounter& counter) {
  std::vector<Candidate> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    out.push_back({&r, source, counter.count(r.text), count_unit_tokens(r.text)});
  }
  std::sort(out.begin(), out.end(),
            [](const Candidate& a, const Candidate& b) { return a.record->record_id < b.record->record_id; });
  return out;
}

TrainingRecord emit(const Candidate& c) {
  TrainingRecord r = *c.record;
  r.token_count = c.tokens;
  r.phase = Phase::CPT;
  if (r.source.empty()) r.source = c.source;
  return r;
}

}  // namespace

std::string_view to_string(Phase phase) { return phase == Phase::CPT ? "CPT" : "IT"; }

std::string_view to_string(Task task) {
  switch (task) {
    case Task::ASR: return "ASR";
    case Task::MT: return "MT";
    case Task::ST_DIRECT: return "ST_DIRECT";
    case Task::ST_MULTITURN: return "ST_MULTITURN";
    case Task::NER: return "NER";
    case Task::APE: return "APE";
    case Task::OTHER_TEXT: return "OTHER_TEXT";
  }
  return "OTHER_TEXT";
}

Phase phase_from_string(std::string_view name) {
  if (name == "CPT") return Phase::CPT;
  if (name == "IT") return Phase::IT;
  throw Error(Errc::parse, "unknown phase '" + std::string(name) + "'");
}

Task task_from_string(std::string_view name) {
  for (auto t : {Task::ASR, Task::MT, Task::ST_DIRECT, Task::ST_MULTITURN, Task::NER, Task::APE, Task::OTHER_TEXT}) {
    if (to_string(t) == name) return t;
  }
  throw Error(Errc::parse, "unknown task '" + std::string(name) + "'");
}

std::string to_record_line(const TrainingRecord& r) {
  json j;
  j["id"] = r.record_id;
  j["phase"] = std::string(to_string(r.phase));
  j["task"] = std::string(to_string(r.task));
  j["source"] = r.source;
  j["lang_pair"] = r.lang_pair ? json::array({r.lang_pair->first, r.lang_pair->second}) : json(nullptr);
  j["token_count"] = r.token_count;
  j["text"] = r.text;
  return j.dump();
}

TrainingRecord parse_record_line(std::string_view line) {
  const json j = detail::parse_json(line, "record line");
  try {
    return record_from_json(j);
  } catch (const json::exception& e) {
    throw Error(Errc::parse, std::string("record line: ") + e.what());
  }
}

std::vector<TrainingRecord> read_records(const std::filesystem::path& path) {
  std::vector<TrainingRecord> out;
  detail::for_each_jsonl(path, [&](const json& j, std::size_t) { out.push_back(record_from_json(j)); });
  return out;
}

void write_records(const std::filesystem::path& path, const std::vector<TrainingRecord>& records) {
  detail::JsonlWriter w(path);
  for (const auto& r : records) w.write_line(to_record_line(r));
  w.close();
}

void MixtureSpec::validate() const {
  if (total_token_budget == 0) throw Error(Errc::config, "total_token_budget must be positive");
  if (!(speech_fraction > 0.0 && speech_fraction < 1.0)) throw Error(Errc::config, "speech_fraction must be in (0,1)");
  if (!(dsu_fraction_within_speech > 0.0 && dsu_fraction_within_speech < 1.0)) {
    throw Error(Errc::config, "dsu_fraction_within_speech must be in (0,1)");
  }
  for (const auto& t : text_sources) {
    if (!(t.weight > 0.0) || !std::isfinite(t.weight)) {
      throw Error(Errc::config, "text source '" + t.source + "' needs a positive weight");
    }
  }
}

double MixtureReport::speech_fraction() const {
  return total_tokens ? static_cast<double>(speech_tokens) / static_cast<double>(total_tokens) : 0.0;
}

double MixtureReport::dsu_fraction_within_speech() const {
  return speech_tokens ? static_cast<double>(dsu_tokens) / static_cast<double>(speech_tokens) : 0.0;
}

std::string to_json(const MixtureReport& r) {
  json j;
  j["total_budget"] = r.total_budget;
  j["speech_budget"] = r.speech_budget;
  j["text_budget"] = r.text_budget;
  j["total_tokens"] = r.total_tokens;
  j["speech_tokens"] = r.speech_tokens;
  j["dsu_tokens"] = r.dsu_tokens;
  j["transcript_tokens"] = r.transcript_tokens;
  j["text_tokens"] = r.text_tokens;
  j["speech_fraction"] = r.speech_fraction();
  j["dsu_fraction_within_speech"] = r.dsu_fraction_within_speech();
  j["speech_exhausted"] = r.speech_exhausted;
  j["text_budget_per_source"] = r.text_budget_per_source;
  json sources = json::object();
  for (const auto& [name, u] : r.sources) {
    sources[name] = {{"available_records", u.available_records},
                     {"used_records", u.used_records},
                     {"tokens", u.tokens},
                     {"exhausted", u.exhausted}};
  }
  j["sources"] = std::move(sources);
  j["shortfalls"] = r.shortfalls;
  return j.dump(2);
}

MixtureResult build_mixture(const SourceRecords& sources, const MixtureSpec& spec, const TokenCounter& counter) {
  spec.validate();

  std::set<std::string> text_names;
  for (const auto& t : spec.text_sources) {
    if (!text_names.insert(t.source).second) throw Error(Errc::config, "text source '" + t.source + "' listed twice");
  }
  std::vector<std::string> speech_names = spec.speech_sources;
  if (speech_names.empty()) {
    for (const auto& [name, records] : sources) {
      if (!text_names.count(name)) speech_names.push_back(name);
    }
  }
  std::sort(speech_names.begin(), speech_names.end());

  std::vector<std::string> unusable;
  auto require = [&](const std::string& name) {
    const auto it = sources.find(name);
    if (it == sources.end() || it->second.empty()) unusable.push_back(name);
  };
  for (const auto& n : speech_names) require(n);
  for (const auto& t : spec.text_sources) require(t.source);
  if (speech_names.empty()) unusable.push_back("<speech>");
  if (!unusable.empty()) {
    std::string list;
    for (const auto& n : unusable) list += (list.empty() ? "" : ", ") + n;
    throw Error(Errc::budget, "no records for required source(s): " + list);
  }

  MixtureResult result;
  MixtureReport& rep = result.report;
  rep.total_budget = spec.total_token_budget;
  rep.speech_budget = static_cast<std::uint64_t>(std::llround(static_cast<double>(spec.total_token_budget) * spec.speech_fraction));
  rep.text_budget = spec.total_token_budget - rep.speech_budget;

  // Speech: one pooled permutation, split into DSU-heavy and
  // transcript-heavy strata; each step draws from the stratum that moves the
  // running DSU share toward the target.
  std::vector<Candidate> pool;
  for (const auto& name : speech_names) {
    auto c = ordered_candidates(sources.at(name), name, counter);
    rep.sources[name].available_records = c.size();
    pool.insert(pool.end(), c.begin(), c.end());
  }
  {
    Rng rng(derive_seed(spec.seed, std::string_view("mixture-speech")));
    shuffle(pool, rng);
  }
  const double target = spec.dsu_fraction_within_speech;
  std::vector<const Candidate*> heavy;
  std::vector<const Candidate*> light;
  for (const auto& c : pool) {
    const bool dsu_heavy = c.tokens > 0 && static_cast<double>(c.units) >= target * static_cast<double>(c.tokens);
    (dsu_heavy ? heavy : light).push_back(&c);
  }
  std::size_t hi = 0;
  std::size_t lo = 0;
  std::size_t speech_used = 0;
  while (hi < heavy.size() || lo < light.size()) {
    const bool want_heavy = rep.speech_tokens == 0 ||
                            static_cast<double>(rep.dsu_tokens) < target * static_cast<double>(rep.speech_tokens);
    const Candidate* c = nullptr;
    if ((want_heavy && hi < heavy.size()) || lo >= light.size()) {
      c = heavy[hi++];
    } else {
      c = light[lo++];
    }
    if (rep.speech_tokens + c->tokens > rep.speech_budget) continue;
    rep.speech_tokens += c->tokens;
    rep.dsu_tokens += c->units;
    rep.transcript_tokens += c->tokens - c->units;
    auto& usage = rep.sources[c->source];
    ++usage.used_records;
    usage.tokens += c->tokens;
    ++speech_used;
    result.records.push_back(emit(*c));
    if (rep.speech_tokens == rep.speech_budget) break;
  }
  for (const auto& name : speech_names) {
    auto& u = rep.sources[name];
    u.exhausted = u.used_records == u.available_records;
  }
  rep.speech_exhausted = speech_used == pool.size();
  if (rep.speech_exhausted && rep.speech_tokens < rep.speech_budget) {
    rep.shortfalls.push_back("speech: " + std::to_string(rep.speech_budget - rep.speech_tokens) +
                             " tokens short of budget " + std::to_string(rep.speech_budget));
  }

  // Text: each source gets its weighted share, filled first-fit from a
  // seeded permutation.
  double weight_sum = 0.0;
  for (const auto& t : spec.text_sources) weight_sum += t.weight;
  std::uint64_t allotted = 0;
  for (std::size_t i = 0; i < spec.text_sources.size(); ++i) {
    const auto& t = spec.text_sources[i];
    std::uint64_t budget = i + 1 == spec.text_sources.size()
                               ? rep.text_budget - allotted
                               : static_cast<std::uint64_t>(std::floor(static_cast<double>(rep.text_budget) * t.weight / weight_sum));
    allotted += budget;
    rep.text_budget_per_source[t.source] = budget;

    auto cands = ordered_candidates(sources.at(t.source), t.source, counter);
    Rng rng(derive_seed(derive_seed(spec.seed, std::string_view("mixture-text")), t.source));
    shuffle(cands, rng);
    auto& usage = rep.sources[t.source];
    usage.available_records = cands.size();
    for (const auto& c : cands) {
      if (usage.tokens + c.tokens > budget) continue;
      usage.tokens += c.tokens;
      ++usage.used_records;
      rep.text_tokens += c.tokens;
      result.records.push_back(emit(c));
      if (usage.tokens == budget) break;
    }
    usage.exhausted = usage.used_records == usage.available_records;
    if (usage.exhausted && usage.tokens < budget) {
      rep.shortfalls.push_back("text source " + t.source + ": " + std::to_string(budget - usage.tokens) +
                               " tokens short of budget " + std::to_string(budget));
    }
  }

  rep.total_tokens = rep.speech_tokens + rep.text_tokens;
  for (const auto& s : rep.shortfalls) log_warning("mixture shortfall, " + s);

  Rng rng(derive_seed(spec.seed, std::string_view("mixture-order")));
  shuffle(result.records, rng);
  return result;
}

MixtureSpec parse_mixture_spec(std::string_view json_text) {
  const json j = detail::parse_json(json_text, "mixture spec");
  MixtureSpec spec;
  try {
    spec.total_token_budget = j.value("total_token_budget", spec.total_token_budget);
    spec.speech_fraction = j.value("speech_fraction", spec.speech_fraction);
    spec.dsu_fraction_within_speech = j.value("dsu_fraction_within_speech", spec.dsu_fraction_within_speech);
    spec.seed = j.value("seed", spec.seed);
    if (j.contains("text_sources")) {
      for (const auto& t : j.at("text_sources")) {
        spec.text_sources.push_back({detail::required<std::string>(t, "source"), t.value("weight", 1.0)});
      }
    }
    if (j.contains("speech_sources")) spec.speech_sources = j.at("speech_sources").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw Error(Errc::config, std::string("mixture spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

}  // namespace dsukit
