#pragma once

#include <functional>
#include <string>

namespace dsukit {

enum class LogLevel { info, warning };

// Process-wide sink; defaults to stderr. Tests can install a capturing sink.
using LogSink = std::function<void(LogLevel, const std::string&)>;
void set_log_sink(LogSink sink);
void log_message(LogLevel level, const std::string& message);
inline void log_warning(const std::string& message) { log_message(LogLevel::warning, message); }
inline void log_info(const std::string& message) { log_message(LogLevel::info, message); }

}  // namespace dsukit
