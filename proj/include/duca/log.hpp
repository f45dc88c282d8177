#pragma once

#include <string>

namespace duca {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

void set_log_level(LogLevel level);
LogLevel log_level();
bool set_log_level(const std::string& name);  // "error"|"warn"|"info"|"debug"

void log_msg(LogLevel level, const std::string& msg);

inline void log_error(const std::string& msg) { log_msg(LogLevel::Error, msg); }
inline void log_warn(const std::string& msg) { log_msg(LogLevel::Warn, msg); }
inline void log_info(const std::string& msg) { log_msg(LogLevel::Info, msg); }
inline void log_debug(const std::string& msg) { log_msg(LogLevel::Debug, msg); }

}  // namespace duca
