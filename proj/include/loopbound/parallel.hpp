#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace loopbound {

/// Worker count: LOOPBOUND_THREADS if set (>= 1), else hardware concurrency.
unsigned worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. The
/// assignment of indices to threads is dynamic; callers that reduce results
/// must write to per-index slots and combine them in index order so the
/// outcome does not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Neumaier-compensated accumulator.
class KahanSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Sums values in order with compensation.
double ordered_sum(const std::vector<double>& values);

}  // namespace loopbound
