#include "kinklab/dispersive.hpp"

#include "kinklab/csv.hpp"
#include "kinklab/errors.hpp"
#include "tanh_poly.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace kinklab {

double TanhReference::value(double X, double tau, int order) const {
  const double z = steepness * (X - center - speed * tau);
  if (order == 0) return offset + amplitude * std::tanh(z);
  if (amplitude == 0.0) return 0.0;
  return amplitude * std::pow(steepness, order) * detail::tanh_derivative(order, z);
}

double TanhReference::limit_plus() const {
  return offset + (steepness >= 0.0 ? amplitude : -amplitude);
}

double TanhReference::limit_minus() const {
  return offset - (steepness >= 0.0 ? amplitude : -amplitude);
}

TanhReference TanhReference::constant(double a) { return TanhReference{a, 0.0, 1.0, 0.0, 0.0}; }

TanhReference TanhReference::kink(double v, bool co_moving, double center) {
  if (!(v > 0.0)) throw ConfigError("kink: speed v must be positive");
  const double a = std::sqrt(12.0 * v);
  return TanhReference{0.0, a, a, center, co_moving ? v : 0.0};
}

double kink_profile(double v, double X, double T) {
  if (!(v > 0.0)) throw ConfigError("kink_profile: v must be positive");
  const double a = std::sqrt(12.0 * v);
  return a * std::tanh(a * (X - v * T));
}

namespace {

void check_tails(const GridFunction& w, double tol, const char* what) {
  const double a = std::abs(w[0]), b = std::abs(w[w.size() - 1]);
  if (!(a <= tol && b <= tol)) {
    std::ostringstream os;
    os << what << ": tail values " << a << ", " << b << " exceed tolerance " << tol;
    throw TailMismatch(os.str());
  }
}

std::vector<double> make_mask(const UniformGrid& grid, double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw ConfigError("dealias fraction must lie in (0,1]");
  const std::size_t bins = grid.size() / 2 + 1;
  const std::size_t nyq = bins - 1;
  const auto cutoff = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(nyq)));
  std::vector<double> m(bins, 0.0);
  for (std::size_t b = 0; b <= std::min(cutoff, nyq); ++b) m[b] = 1.0;
  return m;
}

// Imaginary part of the symbol sign*(ik)^3/24, zero at Nyquist.
std::vector<double> dispersion_symbol(const UniformGrid& grid, double sign) {
  std::vector<double> l(grid.size() / 2 + 1);
  for (std::size_t b = 0; b < l.size(); ++b)
    l[b] = sign * derivative_symbol(grid, b, 3).imag() / 24.0;
  return l;
}

// FFT of R(w) = -(1/4)(k+w)^2(k'+w') + k'''/24 + V k', masked before and after.
Spectrum mkdv_nonlinear(const TanhReference& ref, const UniformGrid& grid, const Spectrum& w_hat,
                        const std::vector<double>& mask, double tau, double* max_w) {
  Spectrum a(w_hat.size()), b(w_hat.size());
  for (std::size_t k = 0; k < w_hat.size(); ++k) {
    a[k] = mask[k] * w_hat[k];
    b[k] = a[k] * derivative_symbol(grid, k, 1);
  }
  const std::vector<double> w = fft_inverse(a, grid.size());
  const std::vector<double> wx = fft_inverse(b, grid.size());
  std::vector<double> r(grid.size());
  double mw = 0.0;
  for (std::size_t j = 0; j < r.size(); ++j) {
    const double x = grid.x(j);
    const double k0 = ref.value(x, tau, 0);
    const double k1 = ref.value(x, tau, 1);
    const double k3 = ref.value(x, tau, 3);
    const double f = k0 + w[j];
    r[j] = -0.25 * f * f * (k1 + wx[j]) + k3 / 24.0 + ref.speed * k1;
    mw = std::max(mw, std::abs(w[j]));
    if (!std::isfinite(w[j])) mw = INFINITY;
  }
  if (max_w) *max_w = mw;
  Spectrum out = fft_forward(r);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] *= mask[k];
  return out;
}

Spectrum gardner_nonlinear(const UniformGrid& grid, double f_plus, const Spectrum& g_hat,
                           const std::vector<double>& mask, double* max_g) {
  Spectrum a(g_hat.size());
  for (std::size_t k = 0; k < g_hat.size(); ++k) a[k] = mask[k] * g_hat[k];
  const std::vector<double> g = fft_inverse(a, grid.size());
  std::vector<double> p(g.size());
  double mg = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    p[j] = g[j] * g[j] * (g[j] + 3.0 * f_plus);
    mg = std::max(mg, std::abs(g[j]));
    if (!std::isfinite(g[j])) mg = INFINITY;
  }
  if (max_g) *max_g = mg;
  Spectrum out = fft_forward(p);
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] *= mask[k] * derivative_symbol(grid, k, 1) / 12.0;
  return out;
}

// One Lawson RK4 step of y' = i*l*y + N(y, t).
template <class NFun>
void lawson_rk4(Spectrum& y, const std::vector<double>& l, double t, double dt, NFun&& N) {
  const std::size_t m = y.size();
  Spectrum eh(m), e(m);
  for (std::size_t k = 0; k < m; ++k) {
    eh[k] = std::polar(1.0, l[k] * dt * 0.5);
    e[k] = eh[k] * eh[k];
  }
  const Spectrum k1 = N(y, t);
  Spectrum tmp(m);
  for (std::size_t k = 0; k < m; ++k) tmp[k] = eh[k] * (y[k] + 0.5 * dt * k1[k]);
  const Spectrum k2 = N(tmp, t + 0.5 * dt);
  for (std::size_t k = 0; k < m; ++k) tmp[k] = eh[k] * y[k] + 0.5 * dt * k2[k];
  const Spectrum k3 = N(tmp, t + 0.5 * dt);
  for (std::size_t k = 0; k < m; ++k) tmp[k] = e[k] * y[k] + dt * eh[k] * k3[k];
  const Spectrum k4 = N(tmp, t + dt);
  for (std::size_t k = 0; k < m; ++k)
    y[k] = e[k] * y[k] + dt / 6.0 * (e[k] * k1[k] + 2.0 * eh[k] * (k2[k] + k3[k]) + k4[k]);
}

template <class StepFun>
double advance(double tau, double target, double dt, StepFun&& step) {
  if (target < tau - 1e-12 * std::max(1.0, std::abs(tau)))
    throw ConfigError("advance_to: target slow time lies in the past");
  while (target - tau > 1e-13 * std::max(1.0, std::abs(target))) {
    double h = target - tau;
    if (h > dt * (1.0 + 1e-9)) h = dt;
    step(h);
    tau += h;
  }
  return target;
}

} // namespace

BackgroundField::BackgroundField(TanhReference reference, GridFunction perturbation, double tau,
                                 double tail_tol)
    : reference_(reference), perturbation_(std::move(perturbation)), tau_(tau),
      tail_tol_(tail_tol) {
  for (double v : perturbation_.values())
    if (!std::isfinite(v)) throw StepInstability("BackgroundField: non-finite perturbation");
  check_tails(perturbation_, tail_tol_ * std::max(1.0, std::abs(f_plus())), "BackgroundField");
}

BackgroundField BackgroundField::kink(const UniformGrid& grid, double v, double tau,
                                      bool co_moving) {
  const TanhReference ref = TanhReference::kink(v, co_moving);
  if (co_moving) return BackgroundField(ref, GridFunction(grid), tau);
  return from_total(grid, ref, [&](double X) { return kink_profile(v, X, tau); }, tau);
}

BackgroundField BackgroundField::constant(const UniformGrid& grid, double a, double tau) {
  return BackgroundField(TanhReference::constant(a), GridFunction(grid), tau);
}

GridFunction BackgroundField::reference_values(int order) const {
  GridFunction r(grid());
  for (std::size_t j = 0; j < r.size(); ++j) r[j] = reference_.value(grid().x(j), tau_, order);
  return r;
}

GridFunction BackgroundField::total() const { return reference_values(0) + perturbation_; }

GridFunction BackgroundField::derivative(int order) const {
  return reference_values(order) + spectral_derivative(perturbation_, order);
}

std::vector<double> BackgroundField::sample(int order, double s, long i_start, long stride,
                                            std::size_t count) const {
  std::vector<double> out(count, 0.0);
  if (perturbation_.max_abs() > 0.0)
    out = StridedSampler(perturbation_).sample(order, s, i_start, stride, count);
  const double dx = grid().dx();
  for (std::size_t k = 0; k < count; ++k) {
    const double x = dx * static_cast<double>(i_start + stride * static_cast<long>(k)) + s;
    out[k] += reference_.value(x, tau_, order);
  }
  return out;
}

double BackgroundField::evaluate(double X, int order) const {
  double v = reference_.value(X, tau_, order);
  if (X >= grid().x_min() && X < grid().x_max() && perturbation_.max_abs() > 0.0)
    v += evaluate_at(spectral_derivative(perturbation_, order), X);
  return v;
}

LocalizedField::LocalizedField(GridFunction values, double tau, double tail_tol)
    : values_(std::move(values)), tau_(tau), tail_tol_(tail_tol) {
  for (double v : values_.values())
    if (!std::isfinite(v)) throw StepInstability("LocalizedField: non-finite values");
  check_tails(values_, tail_tol_, "LocalizedField");
}

LocalizedField LocalizedField::zero(const UniformGrid& grid, double tau) {
  return LocalizedField(GridFunction(grid), tau);
}

GridFunction mkdv_rhs(const BackgroundField& f, double dealias_fraction) {
  const UniformGrid& grid = f.grid();
  const std::vector<double> mask = make_mask(grid, dealias_fraction);
  const Spectrum w_hat = fft_forward(f.perturbation());
  Spectrum n_hat = mkdv_nonlinear(f.reference(), grid, w_hat, mask, f.tau(), nullptr);
  for (std::size_t k = 0; k < n_hat.size(); ++k)
    n_hat[k] += derivative_symbol(grid, k, 3) / 24.0 * w_hat[k];
  GridFunction out = fft_inverse(grid, n_hat);
  const TanhReference& ref = f.reference();
  for (std::size_t j = 0; j < out.size(); ++j) out[j] -= ref.speed * ref.value(grid.x(j), f.tau(), 1);
  return out;
}

GridFunction gardner_rhs(const LocalizedField& g, double f_plus, double dealias_fraction) {
  const UniformGrid& grid = g.grid();
  const std::vector<double> mask = make_mask(grid, dealias_fraction);
  const Spectrum g_hat = fft_forward(g.values());
  Spectrum n_hat = gardner_nonlinear(grid, f_plus, g_hat, mask, nullptr);
  for (std::size_t k = 0; k < n_hat.size(); ++k)
    n_hat[k] -= derivative_symbol(grid, k, 3) / 24.0 * g_hat[k];
  return fft_inverse(grid, n_hat);
}

MkdvStepper::MkdvStepper(const BackgroundField& f0, SolverConfig cfg)
    : reference_(f0.reference()), grid_(f0.grid()), cfg_(cfg),
      w_hat_(fft_forward(f0.perturbation())), linear_(dispersion_symbol(grid_, 1.0)),
      mask_(make_mask(grid_, cfg.dealias_fraction)), tau_(f0.tau()) {
  if (!(cfg_.dt_slow > 0.0)) throw ConfigError("SolverConfig: dt_slow must be positive");
  blowup_bound_ = cfg_.blowup_factor *
                  std::max({f0.perturbation().max_abs(), std::abs(f0.f_plus()),
                            std::abs(f0.f_minus()), 1e-3});
}

Spectrum MkdvStepper::nonlinear(const Spectrum& w_hat, double tau) const {
  double mw = 0.0;
  Spectrum out = mkdv_nonlinear(reference_, grid_, w_hat, mask_, tau, &mw);
  if (!(mw <= blowup_bound_))
    throw StepInstability("mKdV evolution blew up near slow time " + std::to_string(tau));
  return out;
}

void MkdvStepper::step(double dt) {
  lawson_rk4(w_hat_, linear_, tau_, dt,
             [this](const Spectrum& y, double t) { return nonlinear(y, t); });
}

void MkdvStepper::advance_to(double tau) {
  double t = tau_;
  tau_ = advance(t, tau, cfg_.dt_slow, [&](double h) {
    tau_ = t;
    step(h);
    t += h;
  });
  const GridFunction w = fft_inverse(grid_, w_hat_);
  check_tails(w, cfg_.tail_tol * std::max(1.0, std::abs(reference_.limit_plus())),
              "mKdV evolution (domain too small for the horizon)");
}

BackgroundField MkdvStepper::state() const {
  return BackgroundField(reference_, fft_inverse(grid_, w_hat_), tau_, cfg_.tail_tol);
}

GardnerStepper::GardnerStepper(const LocalizedField& g0, double f_plus, SolverConfig cfg)
    : grid_(g0.grid()), f_plus_(f_plus), cfg_(cfg), g_hat_(fft_forward(g0.values())),
      linear_(dispersion_symbol(grid_, -1.0)), mask_(make_mask(grid_, cfg.dealias_fraction)),
      tau_(g0.tau()) {
  if (!(cfg_.dt_slow > 0.0)) throw ConfigError("SolverConfig: dt_slow must be positive");
  blowup_bound_ = cfg_.blowup_factor * std::max(g0.values().max_abs(), 1e-3);
}

Spectrum GardnerStepper::nonlinear(const Spectrum& g_hat) const {
  double mg = 0.0;
  Spectrum out = gardner_nonlinear(grid_, f_plus_, g_hat, mask_, &mg);
  if (!(mg <= blowup_bound_)) throw StepInstability("Gardner evolution blew up");
  return out;
}

void GardnerStepper::step(double dt) {
  lawson_rk4(g_hat_, linear_, tau_, dt,
             [this](const Spectrum& y, double) { return nonlinear(y); });
}

void GardnerStepper::advance_to(double tau) {
  if (g_hat_.empty()) return;
  double t = tau_;
  tau_ = advance(t, tau, cfg_.dt_slow, [&](double h) {
    step(h);
    t += h;
  });
  const GridFunction g = fft_inverse(grid_, g_hat_);
  check_tails(g, cfg_.tail_tol, "Gardner evolution (domain too small for the horizon)");
}

LocalizedField GardnerStepper::state() const {
  return LocalizedField(fft_inverse(grid_, g_hat_), tau_, cfg_.tail_tol);
}

std::vector<BackgroundField> evolve_mkdv(const BackgroundField& f0,
                                         const std::vector<double>& checkpoints,
                                         const SolverConfig& cfg) {
  MkdvStepper s(f0, cfg);
  std::vector<BackgroundField> out;
  out.reserve(checkpoints.size());
  for (double tau : checkpoints) {
    s.advance_to(tau);
    out.push_back(s.state());
  }
  return out;
}

std::vector<LocalizedField> evolve_gardner(const LocalizedField& g0, double f_plus,
                                           const std::vector<double>& checkpoints,
                                           const SolverConfig& cfg) {
  GardnerStepper s(g0, f_plus, cfg);
  std::vector<LocalizedField> out;
  out.reserve(checkpoints.size());
  for (double tau : checkpoints) {
    s.advance_to(tau);
    out.push_back(s.state());
  }
  return out;
}

double gardner_soliton_profile(double f_plus, double W, double zeta) {
  if (f_plus < 0.0) return -gardner_soliton_profile(-f_plus, W, zeta);
  if (!(W > 0.0) || !(W < f_plus * f_plus / 6.0))
    throw ConfigError("gardner_soliton: speed must satisfy 0 < W < f_plus^2/6");
  const double a = 24.0 * W;
  const double b = 4.0 * f_plus;
  const double r = std::sqrt(b * b - 4.0 * a);
  const double ch = std::cosh(std::sqrt(a) * zeta);
  if (!std::isfinite(ch)) return 0.0;
  return 2.0 * a / (-b - r * ch);
}

LocalizedField gardner_soliton(const UniformGrid& grid, double f_plus, double W, double center,
                               double tau) {
  return LocalizedField::from_function(
      grid, [&](double Y) { return gardner_soliton_profile(f_plus, W, Y - center - W * tau); },
      tau);
}

LocalizedField gaussian_pulse(const UniformGrid& grid, double amplitude, double width,
                              double center, double tau) {
  if (!(width > 0.0)) throw ConfigError("gaussian_pulse: width must be positive");
  return LocalizedField::from_function(
      grid,
      [&](double Y) {
        const double z = (Y - center) / width;
        return amplitude * std::exp(-z * z);
      },
      tau);
}

namespace {
template <class State, class Values>
void write_traj(const std::filesystem::path& dir, const std::string& name,
                const std::vector<State>& traj, Values&& values) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / ("manifest_" + name + ".txt"));
  manifest << "# name,tau,file\n";
  for (const State& s : traj) {
    const std::string file = "field_" + name + "_tau" + format_real(s.tau()) + ".csv";
    write_csv(dir / file, values(s));
    manifest << name << ',' << format_real(s.tau()) << ',' << file << '\n';
  }
}
} // namespace

void write_trajectory(const std::filesystem::path& dir, const std::string& name,
                      const std::vector<BackgroundField>& traj) {
  write_traj(dir, name, traj, [](const BackgroundField& f) { return f.total(); });
}

void write_trajectory(const std::filesystem::path& dir, const std::string& name,
                      const std::vector<LocalizedField>& traj) {
  write_traj(dir, name, traj, [](const LocalizedField& g) { return g.values(); });
}

} // namespace kinklab
