#include "msgreen/parallel.hpp"

#include "msgreen/common.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace msgreen {

namespace {
std::atomic<int> g_workers{0};  // 0 = unset, fall back to default
}

int default_workers() {
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

void set_workers(int n) { g_workers.store(n > 0 ? n : 0); }

int workers() {
  int n = g_workers.load();
  return n > 0 ? n : default_workers();
}

void parallel_chunks(long n, long chunk,
                     const std::function<void(long, long, long)>& fn,
                     int nworkers) {
  if (n <= 0) return;
  require(chunk > 0, "parallel_chunks: chunk size must be positive");
  const long nchunks = (n + chunk - 1) / chunk;
  if (nworkers <= 0) nworkers = workers();
  if (nworkers > nchunks) nworkers = static_cast<int>(nchunks);

  if (nworkers <= 1) {
    for (long c = 0; c < nchunks; ++c) {
      const long b = c * chunk;
      fn(c, b, std::min(b + chunk, n));
    }
    return;
  }

  std::atomic<long> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto body = [&] {
    for (;;) {
      const long c = next.fetch_add(1);
      if (c >= nchunks) return;
      const long b = c * chunk;
      try {
        fn(c, b, std::min(b + chunk, n));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(static_cast<size_t>(nworkers) - 1);
  for (int t = 1; t < nworkers; ++t) threads.emplace_back(body);
  body();
  for (auto& th : threads) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace msgreen
