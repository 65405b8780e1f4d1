#pragma once

#include <iostream>
#include <mutex>
#include <string_view>

namespace iaclint::log {

enum class Level { kDebug = 0, kInfo = 1, kWarn = 2, kError = 3, kQuiet = 4 };

Level threshold();
void set_threshold(Level level);
std::mutex& sink_mutex();

template <typename... Args>
void write(Level level, std::string_view tag, const Args&... args) {
  if (level < threshold()) return;
  std::lock_guard<std::mutex> lock(sink_mutex());
  std::cerr << tag;
  (std::cerr << ... << args);
  std::cerr << '\n';
}

template <typename... Args>
void info(const Args&... args) { write(Level::kInfo, "[info] ", args...); }
template <typename... Args>
void warn(const Args&... args) { write(Level::kWarn, "[warn] ", args...); }
template <typename... Args>
void error(const Args&... args) { write(Level::kError, "[error] ", args...); }

}  // namespace iaclint::log
