#pragma once

#include <cstdarg>

namespace comtrap::log {

enum class Level { Debug = 0, Info = 1, Warn = 2, Error = 3 };

/// Current level, initialized once from the COMTRAP_LOG environment
/// variable (debug|info|warn|error, default warn).
Level level();

void message(Level lvl, const char* fmt, ...);

inline void debug(const char* fmt, ...);
inline void info(const char* fmt, ...);
inline void warn(const char* fmt, ...);
inline void error(const char* fmt, ...);

void vmessage(Level lvl, const char* fmt, std::va_list args);

inline void debug(const char* fmt, ...) {
    std::va_list args;
    va_start(args, fmt);
    vmessage(Level::Debug, fmt, args);
    va_end(args);
}

inline void info(const char* fmt, ...) {
    std::va_list args;
    va_start(args, fmt);
    vmessage(Level::Info, fmt, args);
    va_end(args);
}

inline void warn(const char* fmt, ...) {
    std::va_list args;
    va_start(args, fmt);
    vmessage(Level::Warn, fmt, args);
    va_end(args);
}

inline void error(const char* fmt, ...) {
    std::va_list args;
    va_start(args, fmt);
    vmessage(Level::Error, fmt, args);
    va_end(args);
}

}  // namespace comtrap::log
