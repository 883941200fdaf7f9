#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kinklab {

/// Periodic uniform grid x_j = x_min + j*dx, j = 0..n-1, on [x_min, x_min + L).
class UniformGrid {
public:
  UniformGrid(double x_min, double length, std::size_t n_points);

  /// Grid with spacing `dx` whose nodes are integer multiples of dx and which
  /// is centred on the origin: x_min = -(n/2)*dx.
  static UniformGrid centered(double dx, std::size_t n_points);

  double x_min() const { return x_min_; }
  double length() const { return length_; }
  double x_max() const { return x_min_ + length_; }
  std::size_t size() const { return n_; }
  double dx() const { return length_ / static_cast<double>(n_); }
  double x(std::size_t j) const { return x_min_ + static_cast<double>(j) * dx(); }

  /// Angular wavenumber of real-FFT bin k (0 <= k <= n/2).
  double wavenumber(std::size_t k) const;

  bool same_as(const UniformGrid& other) const;

private:
  double x_min_;
  double length_;
  std::size_t n_;
};

/// Samples of a real function of one variable on a UniformGrid.
class GridFunction {
public:
  explicit GridFunction(UniformGrid grid);
  GridFunction(UniformGrid grid, std::vector<double> values);

  template <class F>
  static GridFunction from_function(const UniformGrid& grid, F&& f) {
    std::vector<double> v(grid.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = f(grid.x(j));
    return GridFunction(grid, std::move(v));
  }

  const UniformGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t j) const { return values_[j]; }
  double& operator[](std::size_t j) { return values_[j]; }

  double max_abs() const;
  double mean() const;

  GridFunction& operator+=(const GridFunction& o);
  GridFunction& operator-=(const GridFunction& o);
  GridFunction& operator*=(double s);

private:
  UniformGrid grid_;
  std::vector<double> values_;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(double s, GridFunction a);
/// Pointwise product.
GridFunction operator*(const GridFunction& a, const GridFunction& b);

/// Finite window of a bi-infinite sequence: entry j is the value at site n_min + j.
class LatticeSeq {
public:
  LatticeSeq() = default;
  LatticeSeq(long n_min, std::vector<double> values);
  static LatticeSeq zeros(long n_min, long n_max);

  long n_min() const { return n_min_; }
  long n_max() const { return n_min_ + static_cast<long>(values_.size()) - 1; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t j) const { return values_[j]; }
  double& operator[](std::size_t j) { return values_[j]; }
  /// Value at absolute site n; zero outside the window.
  double at_site(long n) const;

  double max_abs() const;

private:
  long n_min_ = 0;
  std::vector<double> values_;
};

LatticeSeq operator-(const LatticeSeq& a, const LatticeSeq& b);
LatticeSeq operator+(const LatticeSeq& a, const LatticeSeq& b);

enum class WeightKind { bracket, bracket_plus, bracket_minus };

/// <x> = sqrt(1 + x^2).
double bracket(double x);
/// One-sided weight: 1 for x <= 0, <x> for x >= 1, smooth monotone blend between.
double bracket_plus(double x);
double bracket_plus_derivative(double x);
/// Mirror of bracket_plus: <x>_- = <-x>_+.
double bracket_minus(double x);
double weight(WeightKind kind, double x);

bool is_power_of_two(std::size_t n);
std::size_t next_power_of_two(std::size_t n);

} // namespace kinklab
