#pragma once

// Little-endian primitive encoding shared by the binary file formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dsukit/error.hpp"

namespace dsukit::detail {

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    std::memcpy(&v, bytes, sizeof(T));
    return v;
  }
}

template <class T>
void put(std::ostream& out, T v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

inline void put_floats(std::ostream& out, std::span<const float> values) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(float)));
  } else {
    for (float v : values) put(out, v);
  }
}

// Reader over an open stream that tracks the byte offset for error messages.
class Reader {
 public:
  Reader(std::istream& in, std::string what) : in_(in), what_(std::move(what)) {}

  template <class T>
  T get(const char* field) {
    T v{};
    read_bytes(&v, sizeof(T), field);
    return to_little(v);
  }

  void get_floats(std::span<float> out, const char* field) {
    read_bytes(out.data(), out.size() * sizeof(float), field);
    if constexpr (std::endian::native != std::endian::little) {
      for (float& v : out) v = to_little(v);
    }
  }

  std::string get_string(std::size_t len, const char* field) {
    std::string s(len, '\0');
    read_bytes(s.data(), len, field);
    return s;
  }

  std::uint64_t offset() const { return offset_; }

  bool at_eof() {
    return in_.peek() == std::char_traits<char>::eof();
  }

 private:
  void read_bytes(void* dst, std::size_t n, const char* field) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    const auto got = static_cast<std::uint64_t>(in_.gcount());
    if (got != n) {
      throw Error(Errc::truncation, what_ + ": truncated while reading " + field +
                                        " at byte offset " + std::to_string(offset_ + got));
    }
    offset_ += n;
  }

  std::istream& in_;
  std::string what_;
  std::uint64_t offset_ = 0;
};

}  // namespace dsukit::detail
