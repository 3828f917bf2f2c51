#include "dsukit/error.hpp"

namespace dsukit {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::format: return "format error";
    case Errc::truncation: return "truncation error";
    case Errc::validation: return "validation error";
    case Errc::capacity: return "capacity error";
    case Errc::empty_input: return "empty-input error";
    case Errc::parse: return "parse error";
    case Errc::range: return "range error";
    case Errc::conflict: return "conflict error";
    case Errc::numeric: return "numeric error";
    case Errc::insufficient_data: return "insufficient-data error";
    case Errc::template_field: return "template error";
    case Errc::budget: return "budget-unsatisfiable error";
    case Errc::config: return "configuration error";
    case Errc::undefined_metric: return "undefined-metric error";
    case Errc::state: return "state error";
    case Errc::io: return "i/o error";
    case Errc::stale_cache: return "stale-cache error";
  }
  return "error";
}

int exit_code(Errc code) {
  switch (code) {
    case Errc::config:
    case Errc::template_field:
    case Errc::budget:
    case Errc::stale_cache:
      return 2;
    case Errc::numeric:
      return 4;
    default:
      return 3;
  }
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

}  // namespace dsukit
