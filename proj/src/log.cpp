#include "rlab/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace rlab {

namespace {
LogLevel parse_level() {
  const char* env = std::getenv("RLAB_LOG");
  if (env == nullptr) return LogLevel::kWarn;
  const std::string s(env);
  if (s == "error") return LogLevel::kError;
  if (s == "warn") return LogLevel::kWarn;
  if (s == "info") return LogLevel::kInfo;
  if (s == "debug") return LogLevel::kDebug;
  return LogLevel::kWarn;
}

const char* tag(LogLevel l) {
  switch (l) {
    case LogLevel::kError: return "error";
    case LogLevel::kWarn: return "warn";
    case LogLevel::kInfo: return "info";
    case LogLevel::kDebug: return "debug";
  }
  return "?";
}

std::mutex g_mutex;
}  // namespace

LogLevel log_level() {
  static const LogLevel level = parse_level();
  return level;
}

void log_line(LogLevel level, const std::string& msg) {
  std::lock_guard<std::mutex> lock(g_mutex);
  std::cerr << "[rlab " << tag(level) << "] " << msg << "\n";
}

}  // namespace rlab
