#include "rdsim/stats.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

namespace rdsim {

MeanEstimate mean_estimate(std::span<const double> v) {
  MeanEstimate e;
  e.count = v.size();
  if (v.empty()) return e;
  CompensatedSum s;
  for (double x : v) s.add(x);
  e.mean = s.value() / static_cast<double>(v.size());
  if (v.size() < 2) return e;
  CompensatedSum q;
  for (double x : v) q.add((x - e.mean) * (x - e.mean));
  e.sd = std::sqrt(q.value() / static_cast<double>(v.size() - 1));
  e.se = e.sd / std::sqrt(static_cast<double>(v.size()));
  return e;
}

MeanEstimate covariance_estimate(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("covariance needs paired samples");
  auto ma = mean_estimate(a), mb = mean_estimate(b);
  std::vector<double> prod(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) prod[i] = (a[i] - ma.mean) * (b[i] - mb.mean);
  auto e = mean_estimate(prod);
  e.mean *= static_cast<double>(a.size()) / static_cast<double>(a.size() - 1);
  return e;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  const std::size_t m = x.size();
  if (m != y.size() || m < 3) throw std::invalid_argument("linear fit needs at least 3 paired points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0)) throw std::invalid_argument("linear fit needs distinct abscissae");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < m; ++i) {
    double r = y[i] - f.intercept - f.slope * x[i];
    rss += r * r;
  }
  double s2 = rss / static_cast<double>(m - 2);
  f.slope_se = std::sqrt(s2 / sxx);
  f.intercept_se = std::sqrt(s2 * (1.0 / m + mx * mx / sxx));
  f.r2 = syy > 0 ? 1 - rss / syy : 1.0;
  return f;
}

double jackknife_se(std::span<const double> loo) {
  const std::size_t B = loo.size();
  if (B < 2) throw std::invalid_argument("jackknife needs at least 2 blocks");
  double m = 0;
  for (double v : loo) m += v;
  m /= B;
  double s = 0;
  for (double v : loo) s += (v - m) * (v - m);
  return std::sqrt(s * (B - 1) / B);
}

unsigned worker_count() {
  if (const char* env = std::getenv("RDSIM_THREADS")) {
    try {
      long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn, unsigned threads) {
  if (threads == 0) threads = worker_count();
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace rdsim
