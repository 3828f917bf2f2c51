#pragma once

// Training prompt formats.
//
// Continued pre-training records are plain text:
//   ASR_CPT          "Speech:{dsu}\nEnglish: {transcript}"
//   MT_CPT           "{Source}: {source}\n{Target}: {translation}"
// Instruction-tuning bodies:
//   ASR_IT           "Speech: {dsu}\nEnglish: {transcript}"
//   ST_DIRECT_IT     "Speech: {dsu}\n{Target}: {translation}"
//   ST_MULTITURN_IT  "Speech: {dsu}\nEnglish:{transcript}\n{Target}: {translation}"
// Instruction-tuning records are rendered as chatml dialogues: the user turn
// runs up to and including the output-language label, the assistant turn is
// the target text. Multi-turn ST is two exchanges, transcript first.

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace dsukit {

enum class PromptKind { ASR_CPT, MT_CPT, ASR_IT, ST_DIRECT_IT, ST_MULTITURN_IT };

std::string_view to_string(PromptKind kind);
PromptKind prompt_kind_from_string(std::string_view name);
bool is_instruction_kind(PromptKind kind);

// Field names: "dsu", "transcript", "translation", "source", "source_lang",
// "target_lang" (language codes, resolved through the display-name map).
using PromptFields = std::map<std::string, std::string>;
using LanguageNames = std::map<std::string, std::string>;

// en, de, fr, nl, it, es, pt, ko, ru, zh
const LanguageNames& default_language_names();

struct ChatTurn {
  std::string role;  // "user" or "assistant"
  std::string content;

  friend bool operator==(const ChatTurn&, const ChatTurn&) = default;
};

inline constexpr std::string_view kChatmlStart = "<|im_start|>";
inline constexpr std::string_view kChatmlEnd = "<|im_end|>";

// "<|im_start|>{role}\n{content}<|im_end|>\n" per turn.
std::string apply_chatml(const std::vector<ChatTurn>& turns);

class PromptTemplate {
 public:
  explicit PromptTemplate(PromptKind kind, LanguageNames names = default_language_names());

  PromptKind kind() const noexcept { return kind_; }

  // The plain template instantiation. Errc::template_field names a missing
  // field or unknown language code.
  std::string render_body(const PromptFields& fields) const;
  // IT kinds only.
  std::vector<ChatTurn> conversation(const PromptFields& fields) const;
  // CPT kinds: the body. IT kinds: the chatml-wrapped conversation.
  std::string render(const PromptFields& fields) const;

 private:
  const std::string& field(const PromptFields& fields, const char* name) const;
  const std::string& language(const PromptFields& fields, const char* name) const;

  PromptKind kind_;
  LanguageNames names_;
};

std::string render_prompt(PromptKind kind, const PromptFields& fields,
                          const LanguageNames& names = default_language_names());

}  // namespace dsukit
