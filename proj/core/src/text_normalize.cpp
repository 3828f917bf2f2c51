#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "dsukit/corpus.hpp"

namespace dsukit {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::vector<std::string_view> split_ws(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) out.push_back(text.substr(start, i - start));
  }
  return out;
}

constexpr std::array<std::pair<std::string_view, char>, 4> kGigaTags{{
    {"<COMMA>", ','},
    {"<PERIOD>", '.'},
    {"<QUESTIONMARK>", '?'},
    {"<EXCLAMATIONPOINT>", '!'},
}};

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && ascii_lower(a) == ascii_lower(b);
}

// Splits tags glued to words ("WORLD<PERIOD>") into separate pieces.
std::vector<std::string> split_tags(std::string_view piece) {
  std::vector<std::string> out;
  std::size_t i = 0;
  std::string word;
  while (i < piece.size()) {
    bool matched = false;
    if (piece[i] == '<') {
      for (const auto& [tag, punct] : kGigaTags) {
        if (i + tag.size() <= piece.size() && iequals(piece.substr(i, tag.size()), tag)) {
          if (!word.empty()) out.push_back(std::move(word));
          word.clear();
          out.emplace_back(tag);
          i += tag.size();
          matched = true;
          break;
        }
      }
    }
    if (!matched) word.push_back(piece[i++]);
  }
  if (!word.empty()) out.push_back(std::move(word));
  return out;
}

}  // namespace

std::string normalize_transcript(std::string_view text, Corpus corpus) {
  std::string out;
  if (corpus != Corpus::GigaSpeech) {
    for (auto w : split_ws(text)) {
      if (!out.empty()) out += ' ';
      out += w;
    }
    return out;
  }
  for (auto raw : split_ws(text)) {
    for (const auto& piece : split_tags(raw)) {
      char punct = 0;
      for (const auto& [tag, p] : kGigaTags) {
        if (iequals(piece, tag)) punct = p;
      }
      if (punct != 0) {
        out += punct;
      } else {
        if (!out.empty()) out += ' ';
        out += ascii_lower(piece);
      }
    }
  }
  return out;
}

}  // namespace dsukit
