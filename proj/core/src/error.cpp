#include "sspg/error.hpp"

#include <atomic>
#include <iostream>

namespace sspg {

namespace {
std::atomic<bool> g_warnings{true};
std::atomic<int> g_emitted{0};
constexpr int kMaxWarnings = 20;
}  // namespace

void warn(const std::string& message) {
  if (!g_warnings.load(std::memory_order_relaxed)) return;
  const int n = g_emitted.fetch_add(1, std::memory_order_relaxed);
  if (n < kMaxWarnings) {
    std::cerr << "sspg: warning: " << message << '\n';
  } else if (n == kMaxWarnings) {
    std::cerr << "sspg: warning: further warnings suppressed\n";
  }
}

bool set_warnings_enabled(bool enabled) { return g_warnings.exchange(enabled); }

}  // namespace sspg
