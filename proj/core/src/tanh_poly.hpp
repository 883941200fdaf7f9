#pragma once

#include <cmath>
#include <vector>

namespace kinklab::detail {

/// Coefficients (ascending powers of s = tanh z) of d^order/dz^order tanh z.
inline std::vector<double> tanh_derivative_poly(int order) {
  std::vector<double> p{0.0, 1.0};
  for (int j = 0; j < order; ++j) {
    // d/dz p(s) = p'(s) (1 - s^2)
    std::vector<double> dp(p.size() > 1 ? p.size() - 1 : 1, 0.0);
    for (std::size_t i = 1; i < p.size(); ++i) dp[i - 1] = static_cast<double>(i) * p[i];
    std::vector<double> q(dp.size() + 2, 0.0);
    for (std::size_t i = 0; i < dp.size(); ++i) {
      q[i] += dp[i];
      q[i + 2] -= dp[i];
    }
    p = std::move(q);
  }
  return p;
}

inline double horner(const std::vector<double>& p, double s) {
  double r = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) r = r * s + *it;
  return r;
}

/// d^order/dz^order tanh(z).
inline double tanh_derivative(int order, double z) {
  const double s = std::tanh(z);
  if (order == 0) return s;
  static thread_local std::vector<std::vector<double>> cache;
  if (cache.size() <= static_cast<std::size_t>(order)) {
    const std::size_t old = cache.size();
    cache.resize(static_cast<std::size_t>(order) + 1);
    for (std::size_t k = old; k < cache.size(); ++k) cache[k] = tanh_derivative_poly(static_cast<int>(k));
  }
  return horner(cache[static_cast<std::size_t>(order)], s);
}

} // namespace kinklab::detail
