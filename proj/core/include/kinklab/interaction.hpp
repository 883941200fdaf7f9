#pragma once

#include "kinklab/dispersive.hpp"
#include "kinklab/grid.hpp"

#include <filesystem>
#include <vector>

namespace kinklab {

/// Interaction pair on the slow grid in xi at slow time T, with psi = d_T phi.
struct PhiPsiField {
  GridFunction phi;
  GridFunction psi;
  GridFunction inv_d_psi;     // antiderivative of psi, zero mode dropped
  GridFunction dT_inv_d_psi;  // d_T of inv_d_psi, from the wave equation
  GridFunction dT_psi;        // d_T psi, from the wave equation
  double T = 0.0;

  static PhiPsiField zero(const UniformGrid& grid, double T = 0.0);
  const UniformGrid& grid() const { return phi.grid(); }
};

/// H(xi) = (f^2(xi+T) - f_+^2) g(xi-cT) + (f(xi+T) - f_+) g^2(xi-cT) on xi_grid.
/// f and g must be given at slow time eps^2 T on grids sharing the spacing of xi_grid.
GridFunction interaction_density(const BackgroundField& f, const LocalizedField& g,
                                 const UniformGrid& xi_grid, double T, double eps, double c);

/// Source of the phi wave equation: -(1/2) d_xi^2 H.
GridFunction interaction_forcing(const BackgroundField& f, const LocalizedField& g,
                                 const UniformGrid& xi_grid, double T, double eps, double c);

struct PhiSolverConfig {
  /// Upper bound on the Simpson panel width in T.
  double panel_width = 0.01;
  /// Forcing is considered switched off once sup|H| stays below cutoff_rel * peak
  /// for a span cutoff_span of T.
  double cutoff_rel = 1e-14;
  double cutoff_span = 5.0;
  /// Re-run at half the panel width and compare; QuadratureUnresolved above doubling_tol.
  bool doubling_check = false;
  double doubling_tol = 1e-6;
  /// phi or psi at the xi-window ends above edge_tol * max triggers TailMismatch.
  double edge_tol = 1e-6;
  SolverConfig slow;
};

/// Diagnostics gathered by solve_phi_psi.
struct PhiSolveInfo {
  double forcing_cutoff_T = -1.0;  // < 0 when the forcing never switched off
  std::size_t panels = 0;
  double doubling_change = 0.0;
};

/// Duhamel solution of phi_TT = phi_xixi - (1/2) H_xixi with zero data, returned at the
/// requested increasing times. f0 and g0 are initial data at slow time 0; they are
/// evolved internally to the slow times eps^2 T the forcing needs.
std::vector<PhiPsiField> solve_phi_psi(const BackgroundField& f0, const LocalizedField& g0,
                                       const UniformGrid& xi_grid,
                                       const std::vector<double>& T_checkpoints, double eps,
                                       double c, const PhiSolverConfig& cfg = {},
                                       PhiSolveInfo* info = nullptr);

/// Spacing-aligned xi grid holding the lattice window |xi| <= xi_half and the free waves
/// up to time T_end.
UniformGrid make_xi_grid(double dx, double xi_half, double T_end, double support_half);

/// max_T ||phi||_{H^k} / (max(f_norm, g_norm))^3 over the trajectory.
double phi_uniform_bound_report(const std::vector<PhiPsiField>& traj, double f_norm,
                                double g_norm, int k);
/// Same with ||psi||_{H^{k-1}}.
double psi_uniform_bound_report(const std::vector<PhiPsiField>& traj, double f_norm,
                                double g_norm, int k);

/// sup_x 1 / (<x+tau>_+^2 <x-c tau>^2).
double kernel_sup(double tau, double c);

/// CSV with columns xi,phi,psi,invdpsi.
void write_csv(const std::filesystem::path& path, const PhiPsiField& p);

} // namespace kinklab
