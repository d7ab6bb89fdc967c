#include "proxcomp/stats.hpp"

#include <atomic>
#include <mutex>

namespace proxcomp::stats {
namespace {
std::atomic<std::int64_t> g_multiplies{0};
std::mutex g_mutex;
std::vector<Factorization> g_factorizations;
}  // namespace

void add_multiplies(std::int64_t n) { g_multiplies.fetch_add(n, std::memory_order_relaxed); }

void record_factorization(const std::string& method, std::int64_t dim) {
  std::lock_guard<std::mutex> lock(g_mutex);
  g_factorizations.push_back({method, dim});
}

Snapshot snapshot() {
  std::lock_guard<std::mutex> lock(g_mutex);
  return {g_multiplies.load(), g_factorizations};
}

void reset() {
  std::lock_guard<std::mutex> lock(g_mutex);
  g_multiplies = 0;
  g_factorizations.clear();
}

}  // namespace proxcomp::stats
