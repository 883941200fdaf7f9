#pragma once

#include "kinklab/dispersive.hpp"
#include "kinklab/interaction.hpp"
#include "kinklab/lattice_state.hpp"

#include <filesystem>
#include <optional>

namespace kinklab {

double wave_speed(double eps, double f_plus);

/// Slow grid of spacing eps/m (m = ceil(eps/target_dx)) centred on a node, with at least
/// min_length of extent. Lattice points eps*n then fall on every m-th node.
UniformGrid make_slow_grid(double eps, double min_length, double target_dx = 0.05);
/// m with eps = m*dx when it is an integer, otherwise 0.
long lattice_stride(double eps, const UniformGrid& grid);

/// Snapshot of the modulation fields at one lattice time t: f and g at slow time eps^3 t,
/// the interaction pair at eps t.
struct AnsatzFields {
  double eps = 0.0;
  BackgroundField f;
  std::optional<LocalizedField> g;
  std::optional<PhiPsiField> phi;
  double c = 1.0;
  double F_plus = 0.0;
  double F_minus = 0.0;

  static AnsatzFields make(double eps, BackgroundField f, std::optional<LocalizedField> g = {},
                           std::optional<PhiPsiField> phi = {});
  double f_plus() const { return f.f_plus(); }
  double f_minus() const { return f.f_minus(); }
  /// The lattice time this snapshot represents.
  double lattice_time() const;
};

struct FieldWithLimits {
  GridFunction values;
  double plus = 0.0;
  double minus = 0.0;
};

/// F = f - (e/2) f' + (e^2/8) f'' - (e^2/12) f^3 - (e^3/48) f''' + (e^3/8) f^2 f'.
FieldWithLimits F_of(const BackgroundField& f, double eps);
/// G = -g + (e/2) g' + (e^2 f+^2/4) g + (e^2/12) P - (e^2/8) g'' + (e^3/48) g'''
///     - (e^3/24) P' - (e^3 f+^2/8) g',  P = g^3 + 3 f+ g^2.
GridFunction G_of(const LocalizedField& g, double f_plus, double eps);
/// Slow-time derivative of G with d_tau g from the g equation.
GridFunction G_tau_of(const LocalizedField& g, double f_plus, double eps);
/// Phi = inv_d_psi - (e/2) psi.
GridFunction Phi_of(const PhiPsiField& phi, double eps);

/// Ansatz quantities sampled on sites n_lo..n_hi at the snapshot's lattice time.
struct AnsatzSamples {
  long n_lo = 0;
  LatticeSeq u;     // e f + e g + e^3 phi
  LatticeSeq q;     // e F + e G + e^3 Phi - e F_-
  LatticeSeq udot;  // time derivative of u
  LatticeSeq qdot;  // time derivative of q
};

AnsatzSamples sample_ansatz(const AnsatzFields& a, double t, long n_lo, long n_hi);

LatticeSeq assemble_u(const AnsatzFields& a, double t, long n_min, long n_max);
LatticeSeq assemble_q(const AnsatzFields& a, double t, long n_min, long n_max);
LatticeSeq assemble_udot(const AnsatzFields& a, double t, long n_min, long n_max);

/// u(0) from the ansatz, q(0) from partial sums of the exact ansatz velocity, corrected by
/// one constant per site so the total strain velocity matches the limits of q.
/// Throws SumMismatch when that constant exceeds eps^6.
LatticeState initial_lattice_state(const AnsatzFields& a, long n_min, long n_max,
                                   double* correction = nullptr);

/// Background ghost values implied by the field limits.
Background ansatz_background(const AnsatzFields& a);

/// `# n,u,q` CSV plus a `<stem>.meta` sidecar with eps, c, limits and grid data.
void write_initial_state(const std::filesystem::path& path, const AnsatzFields& a,
                         const LatticeState& s);

} // namespace kinklab
