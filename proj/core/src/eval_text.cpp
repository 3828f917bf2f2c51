#include <unicode/uchar.h>

#include "dsukit/eval.hpp"
#include "dsukit/utf8.hpp"

namespace dsukit {
namespace {

bool is_punct_or_symbol(char32_t c) {
  const auto mask = U_GET_GC_MASK(static_cast<UChar32>(c));
  return (mask & (U_GC_P_MASK | U_GC_S_MASK)) != 0;
}

bool is_apostrophe(char32_t c) { return c == U'\'' || c == U'’'; }

bool is_word_char(char32_t c) { return u_isalnum(static_cast<UChar32>(c)) != 0; }

bool is_space(char32_t c) { return u_isUWhiteSpace(static_cast<UChar32>(c)) != 0; }

// Removes "[...]" and "(...)" spans; an unmatched opener is left in place.
std::u32string drop_bracketed(const std::u32string& s) {
  std::u32string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char32_t c = s[i];
    if (c == U'[' || c == U'(') {
      const char32_t close = c == U'[' ? U']' : U')';
      const auto end = s.find(close, i + 1);
      if (end != std::u32string::npos) {
        i = end;
        continue;
      }
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::string normalize_english(std::string_view text) {
  std::u32string s = decode_utf8(text);
  for (auto& c : s) c = static_cast<char32_t>(u_tolower(static_cast<UChar32>(c)));
  s = drop_bracketed(s);

  std::u32string mapped;
  mapped.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char32_t c = s[i];
    if (is_apostrophe(c)) {
      const bool inner = i > 0 && i + 1 < s.size() && is_word_char(s[i - 1]) && is_word_char(s[i + 1]);
      mapped.push_back(inner ? U'\'' : U' ');
    } else if (is_punct_or_symbol(c)) {
      mapped.push_back(U' ');
    } else {
      mapped.push_back(c);
    }
  }

  std::string out;
  bool pending_space = false;
  for (char32_t c : mapped) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    append_utf8(out, c);
  }
  return out;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
  while (i < text.size()) {
    while (i < text.size() && ws(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !ws(text[i])) ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

std::vector<std::string> tokenize_punctuation(std::string_view text) {
  const std::u32string s = decode_utf8(text);
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char32_t c = s[i];
    if (is_space(c)) {
      flush();
      continue;
    }
    if (is_punct_or_symbol(c)) {
      const bool prev_word = i > 0 && is_word_char(s[i - 1]);
      const bool next_word = i + 1 < s.size() && is_word_char(s[i + 1]);
      const bool digits = i > 0 && i + 1 < s.size() && u_isdigit(static_cast<UChar32>(s[i - 1])) &&
                          u_isdigit(static_cast<UChar32>(s[i + 1]));
      const bool attached = (is_apostrophe(c) || c == U'-') ? (prev_word && next_word)
                            : (c == U'.' || c == U',')     ? digits
                                                            : false;
      if (!attached) {
        flush();
        append_utf8(current, c);
        flush();
        continue;
      }
    }
    append_utf8(current, c);
  }
  flush();
  return out;
}

}  // namespace dsukit
