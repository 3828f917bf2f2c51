#pragma once

#include <cstddef>
#include <string_view>

namespace dsukit {

// Token counting used for corpus budgets. The real budget is defined by the
// target model's tokenizer; implement this interface to plug one in.
class TokenCounter {
 public:
  virtual ~TokenCounter() = default;
  virtual std::size_t count(std::string_view text) const = 0;
};

// Default approximation: each <extra_id_N> unit is one token, and each
// whitespace-separated piece that has text left after removing units is one
// more token.
class WhitespaceUnitCounter final : public TokenCounter {
 public:
  std::size_t count(std::string_view text) const override;
};

const TokenCounter& default_token_counter();

}  // namespace dsukit
