#include "kinklab/lattice.hpp"

#include "kinklab/csv.hpp"
#include "kinklab/errors.hpp"
#include "kinklab/norms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kinklab {

double potential(double x) { return 0.5 * x * x - x * x * x * x / 24.0; }
double potential_prime(double x) { return x - x * x * x / 6.0; }

namespace {

// Flow field on raw arrays; p is scratch of length n.
void flow(const double* u, const double* q, std::size_t n, double u_left, double q_right,
          double* du, double* dq, double* p) {
  for (std::size_t i = 0; i < n; ++i) p[i] = u[i] - u[i] * u[i] * u[i] / 6.0;
  for (std::size_t i = 0; i + 1 < n; ++i) du[i] = q[i + 1] - q[i];
  du[n - 1] = q_right - q[n - 1];
  dq[0] = p[0] - potential_prime(u_left);
  for (std::size_t i = 1; i < n; ++i) dq[i] = p[i] - p[i - 1];
}

class Integrator4 {
public:
  explicit Integrator4(std::size_t n)
      : n_(n), ku_(4, std::vector<double>(n)), kq_(4, std::vector<double>(n)), tu_(n), tq_(n),
        p_(n) {}

  void rk4(std::vector<double>& u, std::vector<double>& q, const Background& bg, double h) {
    const double ul = bg.u_left, qr = bg.q_right;
    flow(u.data(), q.data(), n_, ul, qr, ku_[0].data(), kq_[0].data(), p_.data());
    stage(u, q, 0, 0.5 * h);
    flow(tu_.data(), tq_.data(), n_, ul, qr, ku_[1].data(), kq_[1].data(), p_.data());
    stage(u, q, 1, 0.5 * h);
    flow(tu_.data(), tq_.data(), n_, ul, qr, ku_[2].data(), kq_[2].data(), p_.data());
    stage(u, q, 2, h);
    flow(tu_.data(), tq_.data(), n_, ul, qr, ku_[3].data(), kq_[3].data(), p_.data());
    const double w = h / 6.0;
    const double *a = ku_[0].data(), *b = ku_[1].data(), *c = ku_[2].data(), *d = ku_[3].data();
    const double *aq = kq_[0].data(), *bq = kq_[1].data(), *cq = kq_[2].data(), *dq = kq_[3].data();
    for (std::size_t i = 0; i < n_; ++i) {
      u[i] += w * (a[i] + 2.0 * (b[i] + c[i]) + d[i]);
      q[i] += w * (aq[i] + 2.0 * (bq[i] + cq[i]) + dq[i]);
    }
  }

  // Velocity Verlet on the split H = sum q^2/2 + sum V(u).
  void strang(std::vector<double>& u, std::vector<double>& q, const Background& bg, double h) {
    kick(u, q, bg, 0.5 * h);
    for (std::size_t i = 0; i + 1 < n_; ++i) u[i] += h * (q[i + 1] - q[i]);
    u[n_ - 1] += h * (bg.q_right - q[n_ - 1]);
    kick(u, q, bg, 0.5 * h);
  }

private:
  void stage(const std::vector<double>& u, const std::vector<double>& q, int k, double h) {
    const double* a = ku_[static_cast<std::size_t>(k)].data();
    const double* b = kq_[static_cast<std::size_t>(k)].data();
    for (std::size_t i = 0; i < n_; ++i) {
      tu_[i] = u[i] + h * a[i];
      tq_[i] = q[i] + h * b[i];
    }
  }

  void kick(const std::vector<double>& u, std::vector<double>& q, const Background& bg, double h) {
    for (std::size_t i = 0; i < n_; ++i) p_[i] = potential_prime(u[i]);
    q[0] += h * (p_[0] - potential_prime(bg.u_left));
    for (std::size_t i = 1; i < n_; ++i) q[i] += h * (p_[i] - p_[i - 1]);
  }

  std::size_t n_;
  std::vector<std::vector<double>> ku_, kq_;
  std::vector<double> tu_, tq_, p_;
};

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) return INFINITY;
    m = std::max(m, std::abs(x));
  }
  return m;
}

} // namespace

LatticeRhs lattice_rhs(const LatticeState& s) {
  s.validate();
  const std::size_t n = s.size();
  LatticeRhs r{LatticeSeq::zeros(s.n_min(), s.n_max()), LatticeSeq::zeros(s.n_min(), s.n_max())};
  std::vector<double> p(n);
  flow(s.u.values().data(), s.q.values().data(), n, s.background.u_left, s.background.q_right,
       r.du.values().data(), r.dq.values().data(), p.data());
  return r;
}

double hamiltonian(const LatticeState& s) {
  const Background& b = s.background;
  const double eL = 0.5 * b.q_left * b.q_left + potential(b.u_left);
  const double eR = 0.5 * b.q_right * b.q_right + potential(b.u_right);
  double h = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    const long n = s.n_min() + static_cast<long>(j);
    h += 0.5 * s.q[j] * s.q[j] + potential(s.u[j]) - (n < 0 ? eL : eR);
  }
  const double flux = potential_prime(b.u_right) * b.q_right - potential_prime(b.u_left) * b.q_left;
  return h - s.t * flux;
}

double boundary_gauge(const LatticeState& s) {
  const std::size_t n = s.size();
  const std::size_t w = std::max<std::size_t>(1, n / 20);
  double g = 0.0;
  for (std::size_t j = 0; j < w && j < n; ++j) {
    g = std::max(g, std::abs(s.u[j] - s.background.u_left));
    g = std::max(g, std::abs(s.u[n - 1 - j] - s.background.u_right));
  }
  return g;
}

void evolve_lattice(const LatticeState& s0, const std::vector<double>& checkpoints,
                    const EvolveConfig& cfg,
                    const std::function<void(const LatticeState&, double)>& visit) {
  s0.validate();
  if (!(cfg.dt > 0.0) || cfg.dt > 0.1)
    throw ConfigError("evolve_lattice: dt must lie in (0, 0.1]");
  const std::size_t n = s0.size();
  std::vector<double> u(s0.u.values().begin(), s0.u.values().end());
  std::vector<double> q(s0.q.values().begin(), s0.q.values().end());
  const double gauge0 = boundary_gauge(s0);
  const double bound =
      cfg.blowup_factor * std::max({max_abs(u), max_abs(q), std::abs(s0.background.q_right), 1e-6});
  Integrator4 integ(n);
  double t = s0.t;
  for (double tc : checkpoints) {
    if (tc < t - 1e-12) throw ConfigError("evolve_lattice: checkpoints must increase");
    const double span = tc - t;
    const auto steps = static_cast<std::size_t>(std::ceil(span / cfg.dt - 1e-9));
    const double h = steps ? span / static_cast<double>(steps) : 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
      if (cfg.integrator == Integrator::rk4) integ.rk4(u, q, s0.background, h);
      else integ.strang(u, q, s0.background, h);
      if ((k & 1023u) == 1023u && !(max_abs(u) <= bound))
        throw StepInstability("evolve_lattice: blow-up near t = " + std::to_string(t + h * k));
    }
    t = tc;
    if (!(max_abs(u) <= bound && max_abs(q) <= bound))
      throw StepInstability("evolve_lattice: blow-up before t = " + std::to_string(tc));
    LatticeState s{LatticeSeq(s0.n_min(), u), LatticeSeq(s0.n_min(), q), t, s0.background};
    const double gauge = boundary_gauge(s);
    if (cfg.guard_boundary && gauge > cfg.gauge_factor * (gauge0 + 1e-12)) {
      std::ostringstream os;
      os << "evolve_lattice: boundary gauge " << gauge << " at t = " << t
         << " exceeds the initial level " << gauge0;
      throw BoundaryContaminated(os.str());
    }
    visit(s, gauge);
  }
}

std::vector<LatticeState> evolve_lattice(const LatticeState& s0, double t_end, double dt,
                                         const std::vector<double>& checkpoints,
                                         Integrator integrator) {
  std::vector<double> cps;
  for (double t : checkpoints)
    if (t <= t_end + 1e-12) cps.push_back(t);
  if (cps.empty() || cps.back() < t_end - 1e-12) cps.push_back(t_end);
  std::vector<LatticeState> out;
  EvolveConfig cfg;
  cfg.dt = dt;
  cfg.integrator = integrator;
  evolve_lattice(s0, cps, cfg, [&](const LatticeState& s, double) { out.push_back(s); });
  return out;
}

namespace {

struct Residuals {
  LatticeSeq res1, res2;
};

Residuals residuals_from(const AnsatzSamples& a, long n_min, long n_max) {
  // a covers n_min-1 .. n_max+1
  Residuals r{LatticeSeq::zeros(n_min, n_max), LatticeSeq::zeros(n_min, n_max)};
  for (long n = n_min; n <= n_max; ++n) {
    const std::size_t i = static_cast<std::size_t>(n - a.n_lo);
    const std::size_t j = static_cast<std::size_t>(n - n_min);
    r.res1[j] = a.q[i + 1] - a.q[i] - a.udot[i];
    const double un = a.u[i], um = a.u[i - 1];
    r.res2[j] = un - um - (un * un * un - um * um * um) / 6.0 - a.qdot[i];
  }
  return r;
}

} // namespace

LatticeSeq residual_res1(const AnsatzFields& a, double t, long n_min, long n_max) {
  return residuals_from(sample_ansatz(a, t, n_min - 1, n_max + 1), n_min, n_max).res1;
}

LatticeSeq residual_res2(const AnsatzFields& a, double t, long n_min, long n_max) {
  return residuals_from(sample_ansatz(a, t, n_min - 1, n_max + 1), n_min, n_max).res2;
}

double energy_functional(const AnsatzFields& a, const LatticeState& s) {
  const AnsatzSamples an = sample_ansatz(a, s.t, s.n_min(), s.n_max());
  double e = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double U = s.u[j] - an.u[j], Q = s.q[j] - an.q[j], w = an.u[j];
    e += Q * Q + U * U - 0.5 * w * w * U * U;
  }
  return 0.5 * e;
}

LatticeSeq nonlinearity_B(const AnsatzFields& a, const LatticeSeq& U, double t) {
  const AnsatzSamples an = sample_ansatz(a, t, U.n_min() - 1, U.n_max());
  LatticeSeq B = LatticeSeq::zeros(U.n_min(), U.n_max());
  double Um = 0.0, am = an.u[0];
  for (std::size_t j = 0; j < U.size(); ++j) {
    const double Un = U[j], an_ = an.u[j + 1];
    B[j] = -(3.0 * an_ * Un * Un - 3.0 * am * Um * Um + Un * Un * Un - Um * Um * Um) / 6.0;
    Um = Un;
    am = an_;
  }
  return B;
}

CheckpointDiagnostics diagnose(const AnsatzFields& a, const LatticeState& s, double gauge) {
  const long lo = s.n_min(), hi = s.n_max();
  const AnsatzSamples an = sample_ansatz(a, s.t, lo - 1, hi + 1);
  const Residuals r = residuals_from(an, lo, hi);
  CheckpointDiagnostics d;
  d.t = s.t;
  d.gauge = gauge;
  double su = 0.0, sq = 0.0, e = 0.0, sv = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    const std::size_t i = j + 1;
    const double U = s.u[j] - an.u[i], Q = s.q[j] - an.q[i], w = an.u[i];
    su += U * U;
    sq += Q * Q;
    e += Q * Q + U * U - 0.5 * w * w * U * U;
    const double qn = (j + 1 < s.size()) ? s.q[j + 1] : s.background.q_right;
    const double dv = (qn - s.q[j]) - an.udot[i];
    sv += dv * dv;
  }
  d.normU = std::sqrt(su);
  d.normQ = std::sqrt(sq);
  d.energy = 0.5 * e;
  d.res1 = l2_norm(r.res1);
  d.res2 = l2_norm(r.res2);
  d.approx_error = d.normU + std::sqrt(sv);
  d.coercive = su + sq <= 4.0 * d.energy;
  return d;
}

void ErrorSeries::push(const ErrorRecord& r) {
  if (!records_.empty() && !(r.t > records_.back().t))
    throw ConfigError("ErrorSeries: times must increase strictly");
  records_.push_back(r);
}

void ErrorSeries::push(const CheckpointDiagnostics& d) {
  push(ErrorRecord{d.t, d.normU, d.normQ, d.energy, d.res1, d.res2, d.gauge});
}

void ErrorSeries::write_csv(const std::filesystem::path& path) const {
  std::vector<std::vector<double>> cols(7);
  for (const ErrorRecord& r : records_) {
    cols[0].push_back(r.t);
    cols[1].push_back(r.normU);
    cols[2].push_back(r.normQ);
    cols[3].push_back(r.energy);
    cols[4].push_back(r.res1);
    cols[5].push_back(r.res2);
    cols[6].push_back(r.gauge);
  }
  write_columns(path, {"t", "normU", "normQ", "energy", "res1", "res2", "gauge"}, cols);
}

} // namespace kinklab
