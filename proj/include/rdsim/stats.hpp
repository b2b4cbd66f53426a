#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace rdsim {

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double v) noexcept {
    double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0, comp_ = 0;
};

struct MeanEstimate {
  double mean = 0;
  double se = 0;  // standard error of the mean
  double sd = 0;
  std::size_t count = 0;
};

[[nodiscard]] MeanEstimate mean_estimate(std::span<const double> v);

// Empirical covariance of paired samples with the standard error of the
// mean of centered products.
[[nodiscard]] MeanEstimate covariance_estimate(std::span<const double> a, std::span<const double> b);

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double slope_se = 0;
  double intercept_se = 0;
  double r2 = 0;
};

// Ordinary least squares y = intercept + slope x; needs >= 3 points.
[[nodiscard]] LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

// sqrt((B-1)/B sum (theta_i - mean)^2) over leave-one-block-out estimates.
[[nodiscard]] double jackknife_se(std::span<const double> leave_one_out);

// Worker count: RDSIM_THREADS if set and positive, otherwise the hardware
// concurrency (at least 1).
[[nodiscard]] unsigned worker_count();

// Runs fn(i) for i in [0, count) on up to `threads` workers.  fn must only
// touch per-index state.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn, unsigned threads = 0);

}  // namespace rdsim
