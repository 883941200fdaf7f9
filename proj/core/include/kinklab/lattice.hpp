#pragma once

#include "kinklab/ansatz.hpp"
#include "kinklab/lattice_state.hpp"

#include <filesystem>
#include <functional>
#include <vector>

namespace kinklab {

/// V(x) = x^2/2 - x^4/24 and V'(x).
double potential(double x);
double potential_prime(double x);

struct LatticeRhs {
  LatticeSeq du;
  LatticeSeq dq;
};

/// du_n = q_{n+1} - q_n, dq_n = u_n - u_{n-1} - (u_n^3 - u_{n-1}^3)/6 with ghost values
/// from the state's background.
LatticeRhs lattice_rhs(const LatticeState& s);

/// Windowed energy with the background energy density removed (sites n < 0 against the
/// left state, n >= 0 against the right) and the constant boundary flux of the clamped
/// ends integrated out, so the value is conserved by the flow.
double hamiltonian(const LatticeState& s);

/// max |u - background| over the outer 5% of the window on each side.
double boundary_gauge(const LatticeState& s);

enum class Integrator { rk4, strang };

struct EvolveConfig {
  double dt = 0.05;
  Integrator integrator = Integrator::rk4;
  bool guard_boundary = true;
  double gauge_factor = 10.0;
  double blowup_factor = 1e3;
};

/// Integrates to each checkpoint (increasing, > s0.t) and calls `visit` with the state and
/// its boundary gauge. Step sizes are shortened so every checkpoint is hit exactly.
void evolve_lattice(const LatticeState& s0, const std::vector<double>& checkpoints,
                    const EvolveConfig& cfg,
                    const std::function<void(const LatticeState&, double gauge)>& visit);

std::vector<LatticeState> evolve_lattice(const LatticeState& s0, double t_end, double dt,
                                         const std::vector<double>& checkpoints,
                                         Integrator integrator = Integrator::rk4);

LatticeSeq residual_res1(const AnsatzFields& a, double t, long n_min, long n_max);
LatticeSeq residual_res2(const AnsatzFields& a, double t, long n_min, long n_max);

/// (1/2) sum Q^2 + U^2 - (1/2) a^2 U^2 with U, Q the deviation from the ansatz and
/// a = e f + e g + e^3 phi.
double energy_functional(const AnsatzFields& a, const LatticeState& s);

/// -(1/6)(3 a_n U_n^2 - 3 a_{n-1} U_{n-1}^2 + U_n^3 - U_{n-1}^3), U zero left of the window.
LatticeSeq nonlinearity_B(const AnsatzFields& a, const LatticeSeq& U, double t);

/// Everything measured at one checkpoint from a single ansatz evaluation.
struct CheckpointDiagnostics {
  double t = 0.0;
  double normU = 0.0;
  double normQ = 0.0;
  double energy = 0.0;
  double res1 = 0.0;
  double res2 = 0.0;
  double gauge = 0.0;
  /// ||u - ansatz u|| + ||udot - ansatz udot|| with udot_n = q_{n+1} - q_n.
  double approx_error = 0.0;
  bool coercive = true;
};

CheckpointDiagnostics diagnose(const AnsatzFields& a, const LatticeState& s, double gauge);

struct ErrorRecord {
  double t, normU, normQ, energy, res1, res2, gauge;
};

class ErrorSeries {
public:
  void push(const ErrorRecord& r);
  void push(const CheckpointDiagnostics& d);
  const std::vector<ErrorRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  /// `# t,normU,normQ,energy,res1,res2,gauge`
  void write_csv(const std::filesystem::path& path) const;

private:
  std::vector<ErrorRecord> records_;
};

} // namespace kinklab
