#pragma once

#include <cstdlib>
#include <iostream>
#include <string>
#include <string_view>

namespace seedgate::log {

enum class Level { Debug = 0, Info = 1, Warn = 2, Error = 3, Off = 4 };

// SEEDGATE_LOG = debug | info | warn | error | off (default warn).
inline Level threshold() {
  static const Level level = [] {
    const char* env = std::getenv("SEEDGATE_LOG");
    const std::string_view v = env ? env : "";
    if (v == "debug") return Level::Debug;
    if (v == "info") return Level::Info;
    if (v == "error") return Level::Error;
    if (v == "off") return Level::Off;
    return Level::Warn;
  }();
  return level;
}

inline void write(Level level, std::string_view tag, const std::string& msg) {
  if (level < threshold()) return;
  std::cerr << "[seedgate " << tag << "] " << msg << '\n';
}

inline void debug(const std::string& msg) { write(Level::Debug, "debug", msg); }
inline void info(const std::string& msg) { write(Level::Info, "info", msg); }
inline void warn(const std::string& msg) { write(Level::Warn, "warn", msg); }
inline void error(const std::string& msg) { write(Level::Error, "error", msg); }

}  // namespace seedgate::log
