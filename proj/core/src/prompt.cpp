#include "dsukit/prompt.hpp"

#include "dsukit/error.hpp"

namespace dsukit {

std::string_view to_string(PromptKind kind) {
  switch (kind) {
    case PromptKind::ASR_CPT: return "ASR_CPT";
    case PromptKind::MT_CPT: return "MT_CPT";
    case PromptKind::ASR_IT: return "ASR_IT";
    case PromptKind::ST_DIRECT_IT: return "ST_DIRECT_IT";
    case PromptKind::ST_MULTITURN_IT: return "ST_MULTITURN_IT";
  }
  return "?";
}

PromptKind prompt_kind_from_string(std::string_view name) {
  for (auto k : {PromptKind::ASR_CPT, PromptKind::MT_CPT, PromptKind::ASR_IT, PromptKind::ST_DIRECT_IT,
                 PromptKind::ST_MULTITURN_IT}) {
    if (to_string(k) == name) return k;
  }
  throw Error(Errc::config, "unknown prompt kind '" + std::string(name) + "'");
}

bool is_instruction_kind(PromptKind kind) {
  return kind == PromptKind::ASR_IT || kind == PromptKind::ST_DIRECT_IT || kind == PromptKind::ST_MULTITURN_IT;
}

const LanguageNames& default_language_names() {
  static const LanguageNames names{
      {"en", "English"}, {"de", "German"},     {"fr", "French"}, {"nl", "Dutch"},   {"it", "Italian"},
      {"es", "Spanish"}, {"pt", "Portuguese"}, {"ko", "Korean"}, {"ru", "Russian"}, {"zh", "Chinese"},
  };
  return names;
}

std::string apply_chatml(const std::vector<ChatTurn>& turns) {
  std::string out;
  for (const auto& t : turns) {
    out += kChatmlStart;
    out += t.role;
    out += '\n';
    out += t.content;
    out += kChatmlEnd;
    out += '\n';
  }
  return out;
}

PromptTemplate::PromptTemplate(PromptKind kind, LanguageNames names) : kind_(kind), names_(std::move(names)) {}

const std::string& PromptTemplate::field(const PromptFields& fields, const char* name) const {
  const auto it = fields.find(name);
  if (it == fields.end()) {
    throw Error(Errc::template_field, std::string(to_string(kind_)) + " prompt is missing field '" + name + "'");
  }
  return it->second;
}

const std::string& PromptTemplate::language(const PromptFields& fields, const char* name) const {
  const std::string& code = field(fields, name);
  const auto it = names_.find(code);
  if (it == names_.end()) {
    throw Error(Errc::template_field, std::string("no display name for language '") + code + "' (field '" + name + "')");
  }
  return it->second;
}

std::string PromptTemplate::render_body(const PromptFields& f) const {
  switch (kind_) {
    case PromptKind::ASR_CPT:
      return "Speech:" + field(f, "dsu") + "\nEnglish: " + field(f, "transcript");
    case PromptKind::MT_CPT:
      return language(f, "source_lang") + ": " + field(f, "source") + "\n" + language(f, "target_lang") + ": " +
             field(f, "translation");
    case PromptKind::ASR_IT:
      return "Speech: " + field(f, "dsu") + "\nEnglish: " + field(f, "transcript");
    case PromptKind::ST_DIRECT_IT:
      return "Speech: " + field(f, "dsu") + "\n" + language(f, "target_lang") + ": " + field(f, "translation");
    case PromptKind::ST_MULTITURN_IT:
      return "Speech: " + field(f, "dsu") + "\nEnglish:" + field(f, "transcript") + "\n" +
             language(f, "target_lang") + ": " + field(f, "translation");
  }
  throw Error(Errc::template_field, "unknown prompt kind");
}

std::vector<ChatTurn> PromptTemplate::conversation(const PromptFields& f) const {
  switch (kind_) {
    case PromptKind::ASR_IT:
      return {{"user", "Speech: " + field(f, "dsu") + "\nEnglish:"}, {"assistant", field(f, "transcript")}};
    case PromptKind::ST_DIRECT_IT:
      return {{"user", "Speech: " + field(f, "dsu") + "\n" + language(f, "target_lang") + ":"},
              {"assistant", field(f, "translation")}};
    case PromptKind::ST_MULTITURN_IT:
      return {{"user", "Speech: " + field(f, "dsu") + "\nEnglish:"},
              {"assistant", field(f, "transcript")},
              {"user", language(f, "target_lang") + ":"},
              {"assistant", field(f, "translation")}};
    default:
      throw Error(Errc::template_field, std::string(to_string(kind_)) + " is not an instruction prompt");
  }
}

std::string PromptTemplate::render(const PromptFields& fields) const {
  if (is_instruction_kind(kind_)) return apply_chatml(conversation(fields));
  return render_body(fields);
}

std::string render_prompt(PromptKind kind, const PromptFields& fields, const LanguageNames& names) {
  return PromptTemplate(kind, names).render(fields);
}

}  // namespace dsukit
