#include "dsukit/tokenizer.hpp"

#include "dsukit/dsu_codec.hpp"

namespace dsukit {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::size_t count_piece(std::string_view piece) {
  const std::size_t units = count_unit_tokens(piece);
  if (units == 0) return 1;
  // Characters not covered by unit tokens form one extra token.
  std::size_t covered = 0;
  std::size_t pos = 0;
  while ((pos = piece.find("<extra_id_", pos)) != std::string_view::npos) {
    std::size_t end = pos + 10;
    while (end < piece.size() && piece[end] >= '0' && piece[end] <= '9') ++end;
    if (end > pos + 10 && end < piece.size() && piece[end] == '>') {
      covered += end + 1 - pos;
      pos = end + 1;
    } else {
      ++pos;
    }
  }
  return units + (covered < piece.size() ? 1 : 0);
}

}  // namespace

std::size_t WhitespaceUnitCounter::count(std::string_view text) const {
  std::size_t total = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) total += count_piece(text.substr(start, i - start));
  }
  return total;
}

const TokenCounter& default_token_counter() {
  static const WhitespaceUnitCounter counter;
  return counter;
}

}  // namespace dsukit
