#pragma once

#include <string>
#include <utility>
#include <vector>

namespace catcomp {

// Per-thread warning sink. Library calls append; callers drain with take_warnings().
inline std::vector<std::string>& warning_sink() {
    thread_local std::vector<std::string> sink;
    return sink;
}

inline void warn(std::string msg) { warning_sink().push_back(std::move(msg)); }

inline std::vector<std::string> take_warnings() {
    std::vector<std::string> out;
    out.swap(warning_sink());
    return out;
}

}  // namespace catcomp
