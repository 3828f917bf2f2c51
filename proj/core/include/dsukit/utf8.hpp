#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dsukit {

// Strict UTF-8 decoding; throws Error(Errc::parse) on malformed input.
std::u32string decode_utf8(std::string_view text);
std::string encode_utf8(std::u32string_view text);
void append_utf8(std::string& out, char32_t cp);

}  // namespace dsukit
