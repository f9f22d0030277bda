#pragma once

// Replica fan-out with scheduling-independent results.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace splitting {

/// Evaluates fn(i) for i in [0, count) on up to `threads` workers and
/// returns the results in index order. If any call throws, the exception of
/// the lowest failing index is rethrown.
template <class T, class Fn>
std::vector<T> map_indexed(std::size_t count, unsigned threads, Fn&& fn) {
  std::vector<T> out(count);
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::size_t err_index = count;
  std::exception_ptr err;
  const auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (i < err_index) {
          err_index = i;
          err = std::current_exception();
        }
      }
    }
  };
  if (threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  if (err) std::rethrow_exception(err);
  return out;
}

/// Pairwise summation; the split points depend only on the length.
inline double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

struct SampleSummary {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double std_err = 0.0;
};

inline SampleSummary summarize(std::span<const double> xs) {
  SampleSummary s;
  if (xs.empty()) return s;
  const double n = static_cast<double>(xs.size());
  s.mean = pairwise_sum(xs) / n;
  if (xs.size() < 2) return s;
  std::vector<double> dev(xs.size());
  std::transform(xs.begin(), xs.end(), dev.begin(), [&](double x) { return (x - s.mean) * (x - s.mean); });
  s.variance = pairwise_sum(dev) / (n - 1.0);
  s.std_err = std::sqrt(s.variance / n);
  return s;
}

}  // namespace splitting
