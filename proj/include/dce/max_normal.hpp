#pragma once

// Mean and variance of the maximum of N iid standard normals, by adaptive
// Gauss-Kronrod quadrature of the order-statistic density N phi(x) Phi(x)^(N-1).

#include "dce/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>

namespace dce {

namespace detail {

inline double max_normal_density(double x, double n) {
  const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  // log Phi via erfc keeps Phi^(N-1) accurate far into the left tail.
  const double log_cdf = std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
  return n * phi * std::exp((n - 1.0) * log_cdf);
}

template <class F>
double integrate_max_normal(F&& f, double n) {
  // The density mass sits near sqrt(2 ln N); [-12, 12 + sqrt(2 ln N)] covers it
  // to far below 1e-12, and splitting at the mode helps the adaptive rule.
  const double mode = n > 1.0 ? std::sqrt(2.0 * std::log(n)) : 0.0;
  double total = 0.0;
  const double cuts[] = {-12.0, mode - 3.0, mode, mode + 3.0, mode + 12.0};
  for (int i = 0; i + 1 < 5; ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double x) { return f(x) * max_normal_density(x, n); }, cuts[i], cuts[i + 1], 15, 1e-14);
  }
  return total;
}

struct MaxNormalMoments {
  double mean;
  double variance;
};

inline MaxNormalMoments max_normal_moments(std::uint64_t n) {
  require(n >= 1, "max of N normals needs N >= 1");
  static std::mutex mu;
  static std::map<std::uint64_t, MaxNormalMoments> cache;
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find(n); it != cache.end()) return it->second;
  }
  const double nn = static_cast<double>(n);
  MaxNormalMoments m{};
  if (n == 1) {
    m = {0.0, 1.0};
  } else {
    m.mean = integrate_max_normal([](double x) { return x; }, nn);
    m.variance = integrate_max_normal([&](double x) { return (x - m.mean) * (x - m.mean); }, nn);
  }
  std::lock_guard lock(mu);
  cache.emplace(n, m);
  return m;
}

}  // namespace detail

/// E[max of N iid N(0,1)].
inline double expected_max_normal(std::uint64_t n) { return detail::max_normal_moments(n).mean; }

/// Var[max of N iid N(0,1)].
inline double var_max_normal(std::uint64_t n) { return detail::max_normal_moments(n).variance; }

/// Exact risk of the estimator Y_W / E[X_W] with W the argmax of N samples.
inline double max_scheme_exact_mse(std::uint64_t n, double rho) {
  const double e = expected_max_normal(n);
  return (1.0 - rho * rho + rho * rho * var_max_normal(n)) / (e * e);
}

}  // namespace dce
