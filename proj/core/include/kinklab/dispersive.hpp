#pragma once

#include "kinklab/grid.hpp"
#include "kinklab/spectral.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace kinklab {

/// kappa(X, tau) = offset + amplitude * tanh(steepness * (X - center - speed * tau)).
struct TanhReference {
  double offset = 0.0;
  double amplitude = 0.0;
  double steepness = 1.0;
  double center = 0.0;
  double speed = 0.0;

  /// d^order/dX^order kappa at (X, tau).
  double value(double X, double tau, int order = 0) const;
  double limit_plus() const;
  double limit_minus() const;

  static TanhReference constant(double a);
  /// Kink of speed v; when co_moving the reference travels with the kink.
  static TanhReference kink(double v, bool co_moving = true, double center = 0.0);
};

/// sqrt(12 v) tanh(sqrt(12 v) (X - v T)).
double kink_profile(double v, double X, double T);

/// Field f = reference + periodic perturbation w with limits f_-, f_+.
class BackgroundField {
public:
  BackgroundField(TanhReference reference, GridFunction perturbation, double tau,
                  double tail_tol = 1e-8);

  /// Perturbation = f - reference sampled on the grid.
  template <class F>
  static BackgroundField from_total(const UniformGrid& grid, TanhReference reference, F&& f,
                                    double tau, double tail_tol = 1e-8) {
    GridFunction w(grid);
    for (std::size_t j = 0; j < grid.size(); ++j)
      w[j] = f(grid.x(j)) - reference.value(grid.x(j), tau);
    return BackgroundField(reference, std::move(w), tau, tail_tol);
  }

  /// Exact kink of speed v at slow time tau; the perturbation vanishes for a co-moving reference.
  static BackgroundField kink(const UniformGrid& grid, double v, double tau = 0.0,
                              bool co_moving = true);
  static BackgroundField constant(const UniformGrid& grid, double a, double tau = 0.0);

  const UniformGrid& grid() const { return perturbation_.grid(); }
  const TanhReference& reference() const { return reference_; }
  GridFunction reference_values(int order = 0) const;
  const GridFunction& perturbation() const { return perturbation_; }
  double f_plus() const { return reference_.limit_plus(); }
  double f_minus() const { return reference_.limit_minus(); }
  double tau() const { return tau_; }
  double tail_tol() const { return tail_tol_; }

  GridFunction total() const;
  /// d^order/dX^order f at the grid nodes (analytic reference + spectral perturbation).
  GridFunction derivative(int order) const;

  /// d^order f at the points dx*(i_start + stride*k) + s; the perturbation is taken as zero
  /// outside the box.
  std::vector<double> sample(int order, double s, long i_start, long stride,
                             std::size_t count) const;
  /// d^order f at an arbitrary point (trigonometric interpolation of the perturbation).
  double evaluate(double X, int order = 0) const;

private:
  TanhReference reference_;
  GridFunction perturbation_;
  double tau_;
  double tail_tol_;
};

/// Decaying field g on a periodic box.
class LocalizedField {
public:
  LocalizedField(GridFunction values, double tau, double tail_tol = 1e-8);
  template <class F>
  static LocalizedField from_function(const UniformGrid& grid, F&& g, double tau,
                                      double tail_tol = 1e-8) {
    return LocalizedField(GridFunction::from_function(grid, g), tau, tail_tol);
  }
  static LocalizedField zero(const UniformGrid& grid, double tau = 0.0);

  const UniformGrid& grid() const { return values_.grid(); }
  const GridFunction& values() const { return values_; }
  double tau() const { return tau_; }
  double tail_tol() const { return tail_tol_; }
  bool is_zero() const { return values_.max_abs() == 0.0; }

private:
  GridFunction values_;
  double tau_;
  double tail_tol_;
};

struct SolverConfig {
  double dt_slow = 1e-3;
  double dealias_fraction = 2.0 / 3.0;
  double tail_tol = 1e-8;
  /// StepInstability is raised when the state exceeds this multiple of its initial size.
  double blowup_factor = 1e3;
};

/// d f / d tau = -(1/12) d(f^3) + (1/24) d^3 f.
GridFunction mkdv_rhs(const BackgroundField& f, double dealias_fraction = 2.0 / 3.0);
/// d g / d tau = (1/12) d(g^3 + 3 f_+ g^2) - (1/24) d^3 g.
GridFunction gardner_rhs(const LocalizedField& g, double f_plus,
                         double dealias_fraction = 2.0 / 3.0);

/// Integrating-factor RK4 for the perturbation of a BackgroundField.
class MkdvStepper {
public:
  MkdvStepper(const BackgroundField& f0, SolverConfig cfg);
  /// Steps forward (clipping the last step) until tau is reached exactly.
  void advance_to(double tau);
  double tau() const { return tau_; }
  BackgroundField state() const;

private:
  Spectrum nonlinear(const Spectrum& w_hat, double tau) const;
  void step(double dt);

  TanhReference reference_;
  UniformGrid grid_;
  SolverConfig cfg_;
  Spectrum w_hat_;
  std::vector<double> linear_;  // Im of the linear symbol per bin
  std::vector<double> mask_;
  double tau_;
  double blowup_bound_;
};

class GardnerStepper {
public:
  GardnerStepper(const LocalizedField& g0, double f_plus, SolverConfig cfg);
  void advance_to(double tau);
  double tau() const { return tau_; }
  double f_plus() const { return f_plus_; }
  LocalizedField state() const;

private:
  Spectrum nonlinear(const Spectrum& g_hat) const;
  void step(double dt);

  UniformGrid grid_;
  double f_plus_;
  SolverConfig cfg_;
  Spectrum g_hat_;
  std::vector<double> linear_;
  std::vector<double> mask_;
  double tau_;
  double blowup_bound_;
};

/// States at the requested (increasing, >= initial) slow times.
std::vector<BackgroundField> evolve_mkdv(const BackgroundField& f0,
                                         const std::vector<double>& checkpoints,
                                         const SolverConfig& cfg);
std::vector<LocalizedField> evolve_gardner(const LocalizedField& g0, double f_plus,
                                           const std::vector<double>& checkpoints,
                                           const SolverConfig& cfg);

/// Solitary wave of the g equation travelling with slow speed W > 0 on background f_plus;
/// requires 0 < W < f_plus^2 / 6.
double gardner_soliton_profile(double f_plus, double W, double zeta);
LocalizedField gardner_soliton(const UniformGrid& grid, double f_plus, double W,
                               double center = 0.0, double tau = 0.0);
LocalizedField gaussian_pulse(const UniformGrid& grid, double amplitude, double width,
                              double center = 0.0, double tau = 0.0);

/// Writes field_<name>_tau<value>.csv per state plus manifest_<name>.txt listing them.
void write_trajectory(const std::filesystem::path& dir, const std::string& name,
                      const std::vector<BackgroundField>& traj);
void write_trajectory(const std::filesystem::path& dir, const std::string& name,
                      const std::vector<LocalizedField>& traj);

} // namespace kinklab
