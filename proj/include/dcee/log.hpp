#pragma once

#include <functional>
#include <string_view>

namespace dcee::log {

using Sink = std::function<void(std::string_view)>;

// Default sink writes to stderr and goes quiet after a handful of messages.
void warn(std::string_view message);
void set_sink(Sink sink);
void reset_sink();

} // namespace dcee::log
