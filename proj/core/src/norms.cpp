#include "kinklab/norms.hpp"

#include "kinklab/errors.hpp"
#include "kinklab/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace kinklab {

double l2_norm(const LatticeSeq& a) {
  double s = 0.0;
  for (double v : a.values()) s += v * v;
  return std::sqrt(s);
}

double l2_weighted_norm(const LatticeSeq& a) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double n = static_cast<double>(a.n_min() + static_cast<long>(j));
    const double w = 1.0 + n * n;
    s += w * w * a[j] * a[j];
  }
  return std::sqrt(s);
}

namespace {
double l2_squared(const GridFunction& f) {
  double s = 0.0;
  for (double v : f.values()) s += v * v;
  return s * f.grid().dx();
}
} // namespace

double sobolev_norm(const GridFunction& f, int k) {
  if (k < 0) throw ConfigError("sobolev_norm: negative order");
  double s = 0.0;
  for (const GridFunction& d : spectral_jet(f, k)) s += l2_squared(d);
  return std::sqrt(s);
}

double weighted_sobolev_norm(const GridFunction& f, int k, int n_w) {
  if (n_w == 0) return sobolev_norm(f, k);
  GridFunction h(f.grid());
  for (std::size_t j = 0; j < f.size(); ++j)
    h[j] = f[j] * std::pow(bracket(f.grid().x(j)), n_w);
  return sobolev_norm(h, k);
}

double xk_norm(const GridFunction& f, int k) {
  if (k < 1) throw ConfigError("xk_norm: k must be >= 1");
  const GridFunction d = derivative_with_limits(f, 1, f[0], f[f.size() - 1]);
  return f.max_abs() + sobolev_norm(d, k - 1);
}

double weighted_xk_norm(const GridFunction& f, int k, int n_w, double f_plus, double f_minus,
                        double tail_tol) {
  const std::size_t n = f.size();
  if (std::abs(f[n - 1] - f_plus) > tail_tol * std::max(1.0, std::abs(f_plus)) ||
      std::abs(f[0] - f_minus) > tail_tol * std::max(1.0, std::abs(f_minus)))
    throw TailMismatch("weighted_xk_norm: field does not reach its limits inside the window");
  GridFunction hp(f.grid()), hm(f.grid());
  for (std::size_t j = 0; j < n; ++j) {
    const double x = f.grid().x(j);
    hp[j] = (f[j] - f_plus) * std::pow(bracket_plus(x), n_w);
    hm[j] = (f[j] - f_minus) * std::pow(bracket_minus(x), n_w);
  }
  return std::abs(f_plus) + xk_norm(hp, k) + std::abs(f_minus) + xk_norm(hm, k);
}

LatticeSeq sample_to_lattice(const std::function<double(double)>& f, double eps, long n_min,
                             long n_max) {
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("sample_to_lattice: eps must lie in (0,1)");
  LatticeSeq out = LatticeSeq::zeros(n_min, n_max);
  for (long n = n_min; n <= n_max; ++n)
    out[static_cast<std::size_t>(n - n_min)] = f(eps * static_cast<double>(n));
  return out;
}

LatticeSeq partial_sums(const LatticeSeq& a, double rel_tol) {
  double total = 0.0;
  for (double v : a.values()) total += v;
  if (std::abs(total) > rel_tol * l2_weighted_norm(a))
    throw SumMismatch("partial_sums: sequence does not sum to zero (sum = " +
                      std::to_string(total) + ")");
  LatticeSeq b = a;
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    acc += a[j];
    b[j] = acc;
  }
  return b;
}

double partial_sum_constant(long n_min, long n_max) {
  const std::size_t len = static_cast<std::size_t>(n_max - n_min + 1);
  std::vector<double> w(len);
  for (std::size_t j = 0; j < len; ++j) {
    const double n = static_cast<double>(n_min + static_cast<long>(j));
    w[j] = 1.0 / ((1.0 + n * n) * (1.0 + n * n));
  }
  double total = 0.0;
  for (double v : w) total += v;
  double left = 0.0, c2 = 0.0;
  for (std::size_t j = 0; j < len; ++j) {
    left += w[j];
    c2 += std::min(left, total - left);
  }
  return std::sqrt(c2);
}

} // namespace kinklab
