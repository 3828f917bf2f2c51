#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dsukit {

enum class Errc {
  format,
  truncation,
  validation,
  capacity,
  empty_input,
  parse,
  range,
  conflict,
  numeric,
  insufficient_data,
  template_field,
  budget,
  config,
  undefined_metric,
  state,
  io,
  stale_cache,
};

std::string_view to_string(Errc code);

// Process exit code for a failure of this kind: 2 config, 3 data, 4 numeric.
int exit_code(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace dsukit
