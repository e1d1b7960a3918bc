#include "steklov/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace steklov {

namespace {

int initial_threads() {
  if (const char* env = std::getenv("STEKLOV_LAB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

std::atomic<int>& threads_setting() {
  static std::atomic<int> n{initial_threads()};
  return n;
}

}  // namespace

int thread_count() { return threads_setting().load(); }

void set_thread_count(int n) { threads_setting().store(std::max(1, n)); }

int chunk_count(std::size_t n) {
  if (n == 0) return 0;
  return static_cast<int>(std::min<std::size_t>(n, static_cast<std::size_t>(thread_count())));
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t, int)>& body) {
  const int chunks = chunk_count(n);
  if (chunks == 0) return;
  auto bounds = [&](int w) { return n * static_cast<std::size_t>(w) / static_cast<std::size_t>(chunks); };
  if (chunks == 1) {
    body(0, n, 0);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(chunks) - 1);
  auto run = [&](int w) {
    try {
      body(bounds(w), bounds(w + 1), w);
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };
  for (int w = 1; w < chunks; ++w) workers.emplace_back(run, w);
  run(0);
  for (auto& t : workers) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace steklov
