#pragma once

#include <sstream>
#include <string>

namespace rlab {

enum class LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

/// Current level, initialized once from the RLAB_LOG environment variable
/// (error|warn|info|debug); default warn.
LogLevel log_level();

void log_line(LogLevel level, const std::string& msg);

#define RLAB_LOG_AT(level, expr)                          \
  do {                                                    \
    if (static_cast<int>(level) <=                        \
        static_cast<int>(::rlab::log_level())) {          \
      std::ostringstream rlab_log_oss_;                   \
      rlab_log_oss_ << expr;                              \
      ::rlab::log_line(level, rlab_log_oss_.str());       \
    }                                                     \
  } while (0)

#define RLAB_ERROR(expr) RLAB_LOG_AT(::rlab::LogLevel::kError, expr)
#define RLAB_WARN(expr) RLAB_LOG_AT(::rlab::LogLevel::kWarn, expr)
#define RLAB_INFO(expr) RLAB_LOG_AT(::rlab::LogLevel::kInfo, expr)
#define RLAB_DEBUG(expr) RLAB_LOG_AT(::rlab::LogLevel::kDebug, expr)

}  // namespace rlab
