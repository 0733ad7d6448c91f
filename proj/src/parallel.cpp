#include "nls/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace nls {

namespace {

std::atomic<int> g_threads{0};

int env_threads() {
  const char* s = std::getenv("NLS_THREADS");
  if (!s) return 1;
  int n = std::atoi(s);
  return n > 0 ? n : 1;
}

}  // namespace

int thread_count() {
  int n = g_threads.load();
  return n > 0 ? n : env_threads();
}

void set_thread_count(int n) { g_threads.store(std::max(0, n)); }

void parallel_for(int n, const std::function<void(int)>& fn) {
  int workers = std::min(thread_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace nls
