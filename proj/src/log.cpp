#include "dcee/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace dcee::log {
namespace {

constexpr int kDefaultBudget = 5;

std::mutex& mtx() {
    static std::mutex m;
    return m;
}

std::atomic<int>& budget() {
    static std::atomic<int> b{kDefaultBudget};
    return b;
}

void stderr_sink(std::string_view message) {
    const int left = budget().fetch_sub(1);
    if (left > 0) {
        std::cerr << "warning: " << message << '\n';
    } else if (left == 0) {
        std::cerr << "warning: further warnings suppressed\n";
    }
}

Sink& current() {
    static Sink sink = stderr_sink;
    return sink;
}

} // namespace

void warn(std::string_view message) {
    std::lock_guard lock(mtx());
    current()(message);
}

void set_sink(Sink sink) {
    std::lock_guard lock(mtx());
    current() = std::move(sink);
}

void reset_sink() {
    std::lock_guard lock(mtx());
    budget() = kDefaultBudget;
    current() = stderr_sink;
}

} // namespace dcee::log
