#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include <nlohmann/json.hpp>

#include "dsukit/error.hpp"

namespace dsukit::detail {

using json = nlohmann::json;

inline json parse_json(std::string_view text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::parse, where + ": " + e.what());
  }
}

inline json read_json_file(const std::filesystem::path& path, Errc missing = Errc::io) {
  std::ifstream in(path);
  if (!in) throw Error(missing, "cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_json(text, path.string());
}

// Calls fn(line_json, line_number) for every non-blank line.
inline void for_each_jsonl(const std::filesystem::path& path,
                           const std::function<void(const json&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    const json j = parse_json(line, where);
    try {
      fn(j, lineno);
    } catch (const json::exception& e) {
      throw Error(Errc::parse, where + ": " + e.what());
    }
  }
}

class JsonlWriter {
 public:
  explicit JsonlWriter(const std::filesystem::path& path) : out_(path, std::ios::trunc), path_(path) {
    if (!out_) throw Error(Errc::io, "cannot create " + path.string());
  }
  void write(const json& j) { out_ << j.dump() << '\n'; }
  void write_line(const std::string& line) { out_ << line << '\n'; }
  ~JsonlWriter() = default;
  void close() {
    out_.close();
    if (!out_) throw Error(Errc::io, "write failed for " + path_.string());
  }

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

template <class T>
T required(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(Errc::parse, std::string("missing field '") + key + "'");
  return j.at(key).get<T>();
}

}  // namespace dsukit::detail
