#pragma once

#include <functional>
#include <string_view>

namespace bwl {

using WarningSink = std::function<void(std::string_view)>;

/// Replaces the warning sink (default: one line on std::clog). Returns the previous sink.
WarningSink set_warning_sink(WarningSink sink);

void warn(std::string_view message);

} // namespace bwl
