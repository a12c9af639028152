#include "cotlens/logging.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>

namespace cotlens {

namespace {
std::atomic<int> g_level{static_cast<int>(LogLevel::Info)};
std::mutex g_mutex;

const char* prefix(LogLevel level) {
    switch (level) {
        case LogLevel::Debug: return "debug";
        case LogLevel::Info: return "info";
        case LogLevel::Warn: return "warn";
        case LogLevel::Error: return "error";
    }
    return "?";
}
}  // namespace

void set_log_level(LogLevel level) { g_level.store(static_cast<int>(level)); }

LogLevel log_level() { return static_cast<LogLevel>(g_level.load()); }

void log_message(LogLevel level, const std::string& msg) {
    if (static_cast<int>(level) < g_level.load()) return;
    std::lock_guard lock(g_mutex);
    std::fprintf(stderr, "[cotlens %s] %s\n", prefix(level), msg.c_str());
}

}  // namespace cotlens
