#include "detbench/memtrack.hpp"

#include <atomic>

namespace detbench::memtrack {

namespace {
std::atomic<uint64_t> g_current{0};
std::atomic<uint64_t> g_peak{0};
}  // namespace

void note_alloc(size_t bytes) {
  if (bytes == 0) return;
  const uint64_t now = g_current.fetch_add(bytes, std::memory_order_relaxed) + bytes;
  uint64_t peak = g_peak.load(std::memory_order_relaxed);
  while (now > peak &&
         !g_peak.compare_exchange_weak(peak, now, std::memory_order_relaxed)) {
  }
}

void note_free(size_t bytes) {
  if (bytes == 0) return;
  g_current.fetch_sub(bytes, std::memory_order_relaxed);
}

uint64_t current_bytes() { return g_current.load(std::memory_order_relaxed); }
uint64_t peak_bytes() { return g_peak.load(std::memory_order_relaxed); }

void reset_peak() {
  g_peak.store(g_current.load(std::memory_order_relaxed), std::memory_order_relaxed);
}

}  // namespace detbench::memtrack
