#include "comtrap/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace comtrap::log {

Level level() {
    static const Level lvl = [] {
        const char* env = std::getenv("COMTRAP_LOG");
        if (!env) return Level::Warn;
        if (std::strcmp(env, "debug") == 0) return Level::Debug;
        if (std::strcmp(env, "info") == 0) return Level::Info;
        if (std::strcmp(env, "error") == 0) return Level::Error;
        return Level::Warn;
    }();
    return lvl;
}

void vmessage(Level lvl, const char* fmt, std::va_list args) {
    if (lvl < level()) return;
    static const char* names[] = {"debug", "info", "warn", "error"};
    std::fprintf(stderr, "[comtrap:%s] ", names[static_cast<int>(lvl)]);
    std::vfprintf(stderr, fmt, args);
    std::fputc('\n', stderr);
}

void message(Level lvl, const char* fmt, ...) {
    std::va_list args;
    va_start(args, fmt);
    vmessage(lvl, fmt, args);
    va_end(args);
}

}  // namespace comtrap::log
