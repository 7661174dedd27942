#include "f3a/parallel.h"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace f3a {
namespace {

int initial_workers() {
  if (const char* env = std::getenv("F3A_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::atomic<int>& workers() {
  static std::atomic<int> n{initial_workers()};
  return n;
}

// Nested loops run inline on the calling worker.
thread_local bool in_worker = false;

}  // namespace

int worker_count() { return workers().load(); }

void set_worker_count(int n) { workers().store(std::max(1, n)); }

void parallel_for(int n, const std::function<void(int)>& fn, int min_chunk) {
  const int threads = std::min(worker_count(), std::max(1, n / std::max(1, min_chunk)));
  if (threads <= 1 || in_worker) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto body = [&] {
    const bool outer = in_worker;
    in_worker = true;
    try {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    } catch (...) {
      std::lock_guard lock(error_mu);
      if (!error) error = std::current_exception();
      next.store(n);
    }
    in_worker = outer;
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads - 1);
    for (int t = 1; t < threads; ++t) pool.emplace_back(body);
    body();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace f3a
