#pragma once

#include "kinklab/grid.hpp"

#include <complex>
#include <span>
#include <vector>

namespace kinklab {

using Complex = std::complex<double>;
using Spectrum = std::vector<Complex>;

/// Real-to-half-complex transform (n/2+1 bins, unnormalized).
Spectrum fft_forward(std::span<const double> values);
/// Inverse of fft_forward including the 1/n normalization.
std::vector<double> fft_inverse(std::span<const Complex> spectrum, std::size_t n);

Spectrum fft_forward(const GridFunction& f);
GridFunction fft_inverse(const UniformGrid& grid, std::span<const Complex> spectrum);

/// Multiplier (ik)^order; the Nyquist bin is zeroed for odd orders.
Complex derivative_symbol(const UniformGrid& grid, std::size_t bin, int order);

GridFunction spectral_derivative(const GridFunction& f, int order);

/// Mean-zero antiderivative; throws ZeroModeError when |mean| > rel_tol * max|f|.
GridFunction antiderivative(const GridFunction& f, double rel_tol = 1e-10);

/// Periodic translate g(x) = f(x + s) evaluated on the same nodes.
GridFunction shift(const GridFunction& f, double s);

/// Derivatives of orders 0..max_order, all from a single forward transform.
std::vector<GridFunction> spectral_jet(const GridFunction& f, int max_order);

/// Zeroes all bins above `fraction` of the Nyquist wavenumber.
void dealias(Spectrum& spec, double fraction);

/// Trigonometric interpolant of f evaluated at an arbitrary point.
double evaluate_at(const GridFunction& f, double x);

/// True when x_min is an integer multiple of dx (up to roundoff).
bool is_node_aligned(const UniformGrid& grid);
long node_offset(const UniformGrid& grid);

/// Returns (d/dx)^order h at the points dx*(i_start + stride*k) + s, k = 0..count-1.
/// Points outside the periodic box yield 0: h is taken as compactly supported there.
/// The grid must be node aligned.
std::vector<double> sample_strided(const GridFunction& h, int order, double s, long i_start,
                                   long stride, std::size_t count);

/// Evaluates many derivative orders of a field at strided points with one transform.
class StridedSampler {
public:
  explicit StridedSampler(const GridFunction& h);
  std::vector<double> sample(int order, double s, long i_start, long stride,
                             std::size_t count) const;
  const UniformGrid& grid() const { return grid_; }

private:
  UniformGrid grid_;
  Spectrum spec_;
};

/// Derivative of a non-periodic function with the given one-sided limits: a smooth tanh
/// ramp joining the limits is subtracted, the periodic rest is differentiated spectrally
/// and the analytic ramp derivative is added back.
GridFunction derivative_with_limits(const GridFunction& f, int order, double left, double right);

} // namespace kinklab
