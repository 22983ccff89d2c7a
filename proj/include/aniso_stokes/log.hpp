#pragma once

#include <iostream>
#include <mutex>
#include <set>
#include <string>

namespace aniso_stokes::log {

namespace detail {
inline std::mutex& mutex() {
    static std::mutex m;
    return m;
}
inline bool& quiet_flag() {
    static bool quiet = false;
    return quiet;
}
}  // namespace detail

/// Silences warnings and info messages (tests and sweeps use this).
inline void set_quiet(bool quiet) {
    std::lock_guard lock(detail::mutex());
    detail::quiet_flag() = quiet;
}

inline void warn(const std::string& msg) {
    std::lock_guard lock(detail::mutex());
    if (!detail::quiet_flag()) std::cerr << "[warn] " << msg << '\n';
}

/// Emits each distinct message at most once per process.
inline void warn_once(const std::string& msg) {
    std::lock_guard lock(detail::mutex());
    static std::set<std::string> seen;
    if (!seen.insert(msg).second) return;
    if (!detail::quiet_flag()) std::cerr << "[warn] " << msg << '\n';
}

inline void info(const std::string& msg) {
    std::lock_guard lock(detail::mutex());
    if (!detail::quiet_flag()) std::cerr << "[info] " << msg << '\n';
}

}  // namespace aniso_stokes::log
