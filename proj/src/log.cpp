#include "duca/log.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>

namespace duca {

namespace {
std::atomic<LogLevel> g_level{LogLevel::Info};
std::mutex g_out_mutex;

const char* level_tag(LogLevel level) {
  switch (level) {
    case LogLevel::Error: return "error";
    case LogLevel::Warn:  return "warn";
    case LogLevel::Info:  return "info";
    case LogLevel::Debug: return "debug";
  }
  return "?";
}
}  // namespace

void set_log_level(LogLevel level) { g_level.store(level); }

LogLevel log_level() { return g_level.load(); }

bool set_log_level(const std::string& name) {
  if (name == "error") { set_log_level(LogLevel::Error); return true; }
  if (name == "warn")  { set_log_level(LogLevel::Warn);  return true; }
  if (name == "info")  { set_log_level(LogLevel::Info);  return true; }
  if (name == "debug") { set_log_level(LogLevel::Debug); return true; }
  return false;
}

void log_msg(LogLevel level, const std::string& msg) {
  if (level > g_level.load()) return;
  std::lock_guard<std::mutex> lock(g_out_mutex);
  std::fprintf(stderr, "[%s] %s\n", level_tag(level), msg.c_str());
}

}  // namespace duca
