#include "bwl/log.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace bwl {

namespace {

std::mutex& sink_mutex() {
    static std::mutex m;
    return m;
}

WarningSink& sink() {
    static WarningSink s = [](std::string_view message) { std::clog << "warning: " << message << '\n'; };
    return s;
}

} // namespace

WarningSink set_warning_sink(WarningSink next) {
    std::lock_guard lock(sink_mutex());
    return std::exchange(sink(), std::move(next));
}

void warn(std::string_view message) {
    std::lock_guard lock(sink_mutex());
    if (sink()) sink()(message);
}

} // namespace bwl
