#include "kinklab/spectral.hpp"

#include "kinklab/errors.hpp"
#include "tanh_poly.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace kinklab {

namespace {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

class PlanCache {
public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  PlanPair get(std::size_t n) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    const int ni = static_cast<int>(n);
    std::vector<double> r(n);
    std::vector<fftw_complex> c(n / 2 + 1);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    PlanPair p;
    p.forward = fftw_plan_dft_r2c_1d(ni, r.data(), c.data(), flags);
    p.inverse = fftw_plan_dft_c2r_1d(ni, c.data(), r.data(), flags);
    if (!p.forward || !p.inverse) throw Error("FFTW plan creation failed");
    plans_.emplace(n, p);
    return p;
  }

  ~PlanCache() {
    for (auto& [n, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.inverse);
    }
  }

private:
  std::mutex mutex_;
  std::map<std::size_t, PlanPair> plans_;
};

} // namespace

Spectrum fft_forward(std::span<const double> values) {
  const std::size_t n = values.size();
  const PlanPair p = PlanCache::instance().get(n);
  std::vector<double> in(values.begin(), values.end());
  Spectrum out(n / 2 + 1);
  fftw_execute_dft_r2c(p.forward, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<double> fft_inverse(std::span<const Complex> spectrum, std::size_t n) {
  if (spectrum.size() != n / 2 + 1) throw Error("fft_inverse: spectrum size mismatch");
  const PlanPair p = PlanCache::instance().get(n);
  Spectrum in(spectrum.begin(), spectrum.end());
  std::vector<double> out(n);
  fftw_execute_dft_c2r(p.inverse, reinterpret_cast<fftw_complex*>(in.data()), out.data());
  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= scale;
  return out;
}

Spectrum fft_forward(const GridFunction& f) { return fft_forward(f.values()); }

GridFunction fft_inverse(const UniformGrid& grid, std::span<const Complex> spectrum) {
  return GridFunction(grid, fft_inverse(spectrum, grid.size()));
}

Complex derivative_symbol(const UniformGrid& grid, std::size_t bin, int order) {
  const std::size_t n = grid.size();
  if (order == 0) return 1.0;
  if (bin == n / 2 && order % 2 != 0) return 0.0;
  const double k = grid.wavenumber(bin);
  Complex m = 1.0;
  const Complex ik(0.0, k);
  for (int j = 0; j < order; ++j) m *= ik;
  return m;
}

GridFunction spectral_derivative(const GridFunction& f, int order) {
  if (order < 0) throw ConfigError("spectral_derivative: negative order");
  if (order == 0) return f;
  Spectrum s = fft_forward(f);
  for (std::size_t b = 0; b < s.size(); ++b) s[b] *= derivative_symbol(f.grid(), b, order);
  return fft_inverse(f.grid(), s);
}

std::vector<GridFunction> spectral_jet(const GridFunction& f, int max_order) {
  std::vector<GridFunction> out;
  out.reserve(static_cast<std::size_t>(max_order) + 1);
  out.push_back(f);
  if (max_order < 1) return out;
  const Spectrum s = fft_forward(f);
  Spectrum t(s.size());
  for (int d = 1; d <= max_order; ++d) {
    for (std::size_t b = 0; b < s.size(); ++b) t[b] = s[b] * derivative_symbol(f.grid(), b, d);
    out.push_back(fft_inverse(f.grid(), t));
  }
  return out;
}

GridFunction antiderivative(const GridFunction& f, double rel_tol) {
  const double scale = f.max_abs();
  if (std::abs(f.mean()) > rel_tol * scale)
    throw ZeroModeError("antiderivative: input mean " + std::to_string(f.mean()) +
                        " exceeds zero-mode tolerance");
  Spectrum s = fft_forward(f);
  const std::size_t n = f.size();
  s[0] = 0.0;
  for (std::size_t b = 1; b < s.size(); ++b) {
    if (b == n / 2) {
      s[b] = 0.0;
      continue;
    }
    s[b] /= Complex(0.0, f.grid().wavenumber(b));
  }
  return fft_inverse(f.grid(), s);
}

GridFunction shift(const GridFunction& f, double s) {
  Spectrum sp = fft_forward(f);
  const std::size_t n = f.size();
  for (std::size_t b = 0; b < sp.size(); ++b) {
    if (b == n / 2 && b != 0) {
      sp[b] = 0.0;
      continue;
    }
    sp[b] *= std::polar(1.0, f.grid().wavenumber(b) * s);
  }
  return fft_inverse(f.grid(), sp);
}

void dealias(Spectrum& spec, double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0) throw ConfigError("dealias: fraction must be in (0,1]");
  const std::size_t nyq = spec.size() - 1;
  const auto cutoff = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(nyq)));
  for (std::size_t b = cutoff + 1; b < spec.size(); ++b) spec[b] = 0.0;
}

double evaluate_at(const GridFunction& f, double x) {
  const Spectrum s = fft_forward(f);
  const std::size_t n = f.size();
  const double y = x - f.grid().x_min();
  double acc = s[0].real();
  for (std::size_t b = 1; b < n / 2; ++b)
    acc += 2.0 * (s[b] * std::polar(1.0, f.grid().wavenumber(b) * y)).real();
  acc += s[n / 2].real() * std::cos(f.grid().wavenumber(n / 2) * y);
  return acc / static_cast<double>(n);
}

bool is_node_aligned(const UniformGrid& grid) {
  const double r = grid.x_min() / grid.dx();
  return std::abs(r - std::round(r)) < 1e-9;
}

long node_offset(const UniformGrid& grid) {
  if (!is_node_aligned(grid)) throw ConfigError("grid is not node aligned");
  return std::lround(grid.x_min() / grid.dx());
}

StridedSampler::StridedSampler(const GridFunction& h) : grid_(h.grid()), spec_(fft_forward(h)) {
  if (!is_node_aligned(grid_)) throw ConfigError("StridedSampler: grid is not node aligned");
}

std::vector<double> StridedSampler::sample(int order, double s, long i_start, long stride,
                                           std::size_t count) const {
  const double dx = grid_.dx();
  const std::size_t n = grid_.size();
  const double ps = std::floor(s / dx);
  double theta = s / dx - ps;
  long p = static_cast<long>(ps);
  if (theta > 1.0 - 1e-13) {
    theta = 0.0;
    ++p;
  }
  Spectrum t(spec_.size());
  for (std::size_t b = 0; b < spec_.size(); ++b) {
    Complex m = derivative_symbol(grid_, b, order);
    if (theta != 0.0) {
      if (b == n / 2) m = 0.0;
      else m *= std::polar(1.0, grid_.wavenumber(b) * theta * dx);
    }
    t[b] = spec_[b] * m;
  }
  const std::vector<double> shifted = fft_inverse(t, n);
  const long off = node_offset(grid_);
  std::vector<double> out(count, 0.0);
  for (std::size_t k = 0; k < count; ++k) {
    const long idx = i_start + stride * static_cast<long>(k) + p - off;
    if (idx >= 0 && idx < static_cast<long>(n)) out[k] = shifted[static_cast<std::size_t>(idx)];
  }
  return out;
}

std::vector<double> sample_strided(const GridFunction& h, int order, double s, long i_start,
                                   long stride, std::size_t count) {
  return StridedSampler(h).sample(order, s, i_start, stride, count);
}

GridFunction derivative_with_limits(const GridFunction& f, int order, double left, double right) {
  const UniformGrid& g = f.grid();
  const double xc = g.x_min() + 0.5 * g.length();
  const double ell = g.length() / 37.0;
  const double jump = right - left;
  auto ramp = [&](int d, double x) {
    const double z = (x - xc) / ell;
    if (d == 0) return left + jump * 0.5 * (1.0 + std::tanh(z));
    return jump * 0.5 * detail::tanh_derivative(d, z) / std::pow(ell, d);
  };
  GridFunction rest(g);
  for (std::size_t j = 0; j < f.size(); ++j) rest[j] = f[j] - ramp(0, g.x(j));
  GridFunction out = spectral_derivative(rest, order);
  for (std::size_t j = 0; j < f.size(); ++j) out[j] += ramp(order, g.x(j));
  return out;
}

} // namespace kinklab
