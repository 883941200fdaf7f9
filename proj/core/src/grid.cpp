#include "kinklab/grid.hpp"

#include "kinklab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace kinklab {

UniformGrid::UniformGrid(double x_min, double length, std::size_t n_points)
    : x_min_(x_min), length_(length), n_(n_points) {
  if (!(length > 0.0) || !std::isfinite(length) || !std::isfinite(x_min))
    throw ConfigError("UniformGrid: length must be positive and finite");
  if (n_points < 16 || !is_power_of_two(n_points))
    throw ConfigError("UniformGrid: n_points must be a power of two >= 16, got " +
                      std::to_string(n_points));
}

UniformGrid UniformGrid::centered(double dx, std::size_t n_points) {
  return UniformGrid(-static_cast<double>(n_points / 2) * dx, dx * static_cast<double>(n_points),
                     n_points);
}

double UniformGrid::wavenumber(std::size_t k) const {
  return 2.0 * std::numbers::pi * static_cast<double>(k) / length_;
}

bool UniformGrid::same_as(const UniformGrid& o) const {
  return n_ == o.n_ && std::abs(x_min_ - o.x_min_) <= 1e-12 * std::max(1.0, std::abs(x_min_)) &&
         std::abs(length_ - o.length_) <= 1e-12 * length_;
}

GridFunction::GridFunction(UniformGrid grid) : grid_(grid), values_(grid.size(), 0.0) {}

GridFunction::GridFunction(UniformGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw ConfigError("GridFunction: value count does not match grid");
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double GridFunction::mean() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s / static_cast<double>(values_.size());
}

namespace {
void require_same(const UniformGrid& a, const UniformGrid& b) {
  if (!a.same_as(b)) throw ConfigError("GridFunction: grids differ");
}
} // namespace

GridFunction& GridFunction::operator+=(const GridFunction& o) {
  require_same(grid_, o.grid_);
  for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += o.values_[j];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
  require_same(grid_, o.grid_);
  for (std::size_t j = 0; j < values_.size(); ++j) values_[j] -= o.values_[j];
  return *this;
}

GridFunction& GridFunction::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(double s, GridFunction a) { return a *= s; }

GridFunction operator*(const GridFunction& a, const GridFunction& b) {
  require_same(a.grid(), b.grid());
  GridFunction out(a.grid());
  for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] * b[j];
  return out;
}

LatticeSeq::LatticeSeq(long n_min, std::vector<double> values)
    : n_min_(n_min), values_(std::move(values)) {}

LatticeSeq LatticeSeq::zeros(long n_min, long n_max) {
  if (n_max < n_min) throw ConfigError("LatticeSeq: n_max < n_min");
  return LatticeSeq(n_min, std::vector<double>(static_cast<std::size_t>(n_max - n_min + 1), 0.0));
}

double LatticeSeq::at_site(long n) const {
  if (n < n_min_ || n > n_max()) return 0.0;
  return values_[static_cast<std::size_t>(n - n_min_)];
}

double LatticeSeq::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

namespace {
LatticeSeq combine(const LatticeSeq& a, const LatticeSeq& b, double sign) {
  if (a.size() == 0) {
    LatticeSeq r = b;
    for (double& v : r.values()) v *= sign;
    return r;
  }
  if (b.size() == 0) return a;
  const long lo = std::min(a.n_min(), b.n_min());
  const long hi = std::max(a.n_max(), b.n_max());
  LatticeSeq r = LatticeSeq::zeros(lo, hi);
  for (long n = lo; n <= hi; ++n)
    r[static_cast<std::size_t>(n - lo)] = a.at_site(n) + sign * b.at_site(n);
  return r;
}
} // namespace

LatticeSeq operator-(const LatticeSeq& a, const LatticeSeq& b) { return combine(a, b, -1.0); }
LatticeSeq operator+(const LatticeSeq& a, const LatticeSeq& b) { return combine(a, b, 1.0); }

double bracket(double x) { return std::sqrt(1.0 + x * x); }

namespace {
double sigma(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }
double sigma_prime(double x) { return x > 0.0 ? std::exp(-1.0 / x) / (x * x) : 0.0; }

double smoothstep(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double a = sigma(x), b = sigma(1.0 - x);
  return a / (a + b);
}

double smoothstep_prime(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  const double a = sigma(x), b = sigma(1.0 - x);
  const double da = sigma_prime(x), db = -sigma_prime(1.0 - x);
  return (da * b - a * db) / ((a + b) * (a + b));
}
} // namespace

double bracket_plus(double x) {
  if (x <= 0.0) return 1.0;
  if (x >= 1.0) return bracket(x);
  return 1.0 + (bracket(x) - 1.0) * smoothstep(x);
}

double bracket_plus_derivative(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return x / bracket(x);
  return x / bracket(x) * smoothstep(x) + (bracket(x) - 1.0) * smoothstep_prime(x);
}

double bracket_minus(double x) { return bracket_plus(-x); }

double weight(WeightKind kind, double x) {
  switch (kind) {
  case WeightKind::bracket: return bracket(x);
  case WeightKind::bracket_plus: return bracket_plus(x);
  case WeightKind::bracket_minus: return bracket_minus(x);
  }
  return 1.0;
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

} // namespace kinklab
