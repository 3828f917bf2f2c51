#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace dsukit {

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace dsukit
