#include "kinklab/ansatz.hpp"

#include "kinklab/csv.hpp"
#include "kinklab/errors.hpp"
#include "kinklab/spectral.hpp"

#include <cmath>
#include <fstream>

namespace kinklab {

double wave_speed(double eps, double f_plus) { return 1.0 - eps * eps * f_plus * f_plus / 4.0; }

UniformGrid make_slow_grid(double eps, double min_length, double target_dx) {
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("make_slow_grid: eps must lie in (0,1)");
  const double m = std::max(1.0, std::ceil(eps / target_dx - 1e-9));
  const double dx = eps / m;
  const auto n = next_power_of_two(static_cast<std::size_t>(std::ceil(min_length / dx)));
  return UniformGrid::centered(dx, std::max<std::size_t>(n, 16));
}

long lattice_stride(double eps, const UniformGrid& grid) {
  const double r = eps / grid.dx();
  const double m = std::round(r);
  if (m >= 1.0 && std::abs(r - m) < 1e-9 && is_node_aligned(grid)) return static_cast<long>(m);
  return 0;
}

void LatticeState::validate() const {
  if (u.n_min() != q.n_min() || u.size() != q.size())
    throw ConfigError("LatticeState: u and q windows differ");
  for (double v : u.values())
    if (!std::isfinite(v)) throw StepInstability("LatticeState: non-finite strain");
  for (double v : q.values())
    if (!std::isfinite(v)) throw StepInstability("LatticeState: non-finite velocity");
}

AnsatzFields AnsatzFields::make(double eps, BackgroundField f, std::optional<LocalizedField> g,
                                std::optional<PhiPsiField> phi) {
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("AnsatzFields: eps must lie in (0,1)");
  const double fp = f.f_plus(), fm = f.f_minus();
  const double e2 = eps * eps;
  return AnsatzFields{eps,
                      std::move(f),
                      std::move(g),
                      std::move(phi),
                      wave_speed(eps, fp),
                      fp - e2 * fp * fp * fp / 12.0,
                      fm - e2 * fm * fm * fm / 12.0};
}

double AnsatzFields::lattice_time() const { return f.tau() / (eps * eps * eps); }

FieldWithLimits F_of(const BackgroundField& f, double eps) {
  const GridFunction f0 = f.total();
  const GridFunction f1 = f.derivative(1), f2 = f.derivative(2), f3 = f.derivative(3);
  const double e = eps, e2 = e * e, e3 = e2 * e;
  GridFunction F(f.grid());
  for (std::size_t j = 0; j < F.size(); ++j) {
    const double v = f0[j];
    F[j] = v - 0.5 * e * f1[j] + e2 / 8.0 * f2[j] - e2 / 12.0 * v * v * v - e3 / 48.0 * f3[j] +
           e3 / 8.0 * v * v * f1[j];
  }
  auto lim = [&](double a) { return a - e2 * a * a * a / 12.0; };
  return FieldWithLimits{std::move(F), lim(f.f_plus()), lim(f.f_minus())};
}

namespace {

// G from jets of g (orders 0..3).
GridFunction G_from_jet(const std::vector<GridFunction>& gj, double fp, double eps) {
  const double e = eps, e2 = e * e, e3 = e2 * e;
  GridFunction G(gj[0].grid());
  for (std::size_t j = 0; j < G.size(); ++j) {
    const double g = gj[0][j], g1 = gj[1][j], g2 = gj[2][j], g3 = gj[3][j];
    const double P = g * g * g + 3.0 * fp * g * g;
    const double P1 = (3.0 * g * g + 6.0 * fp * g) * g1;
    G[j] = -g + 0.5 * e * g1 + e2 * fp * fp / 4.0 * g + e2 / 12.0 * P - e2 / 8.0 * g2 +
           e3 / 48.0 * g3 - e3 / 24.0 * P1 - e3 * fp * fp / 8.0 * g1;
  }
  return G;
}

// Slow-time derivative of G given jets of g (0..1) and of g_tau (0..3).
GridFunction G_tau_from_jets(const std::vector<GridFunction>& gj,
                             const std::vector<GridFunction>& tj, double fp, double eps) {
  const double e = eps, e2 = e * e, e3 = e2 * e;
  GridFunction G(gj[0].grid());
  for (std::size_t j = 0; j < G.size(); ++j) {
    const double g = gj[0][j], g1 = gj[1][j];
    const double t0 = tj[0][j], t1 = tj[1][j], t2 = tj[2][j], t3 = tj[3][j];
    const double Pt = (3.0 * g * g + 6.0 * fp * g) * t0;
    const double P1t = (6.0 * g + 6.0 * fp) * g1 * t0 + (3.0 * g * g + 6.0 * fp * g) * t1;
    G[j] = -t0 + 0.5 * e * t1 + e2 * fp * fp / 4.0 * t0 + e2 / 12.0 * Pt - e2 / 8.0 * t2 +
           e3 / 48.0 * t3 - e3 / 24.0 * P1t - e3 * fp * fp / 8.0 * t1;
  }
  return G;
}

} // namespace

GridFunction G_of(const LocalizedField& g, double f_plus, double eps) {
  return G_from_jet(spectral_jet(g.values(), 3), f_plus, eps);
}

GridFunction G_tau_of(const LocalizedField& g, double f_plus, double eps) {
  const GridFunction gt = gardner_rhs(g, f_plus);
  return G_tau_from_jets(spectral_jet(g.values(), 1), spectral_jet(gt, 3), f_plus, eps);
}

GridFunction Phi_of(const PhiPsiField& phi, double eps) {
  GridFunction out = phi.inv_d_psi;
  for (std::size_t j = 0; j < out.size(); ++j) out[j] -= 0.5 * eps * phi.psi[j];
  return out;
}

namespace {

// Samples of a localized grid function (zero outside its box) at eps*n + s.
class PointSampler {
public:
  PointSampler(const GridFunction& h, double eps) : h_(h), eps_(eps), stride_(lattice_stride(eps, h.grid())) {
    if (stride_ > 0) aligned_.emplace(h);
  }
  std::vector<double> operator()(int order, double s, long n_lo, std::size_t count) const {
    if (aligned_) return aligned_->sample(order, s, stride_ * n_lo, stride_, count);
    const GridFunction d = spectral_derivative(h_, order);
    std::vector<double> out(count, 0.0);
    for (std::size_t k = 0; k < count; ++k) {
      const double x = eps_ * static_cast<double>(n_lo + static_cast<long>(k)) + s;
      if (x >= d.grid().x_min() && x < d.grid().x_max()) out[k] = evaluate_at(d, x);
    }
    return out;
  }

private:
  const GridFunction& h_;
  double eps_;
  long stride_;
  std::optional<StridedSampler> aligned_;
};

std::vector<double> background_points(const BackgroundField& f, int order, double eps, double s,
                                      long n_lo, std::size_t count) {
  const long m = lattice_stride(eps, f.grid());
  if (m > 0) return f.sample(order, s, m * n_lo, m, count);
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k)
    out[k] = f.evaluate(eps * static_cast<double>(n_lo + static_cast<long>(k)) + s, order);
  return out;
}

void check_time(const AnsatzFields& a, double t) {
  const double e = a.eps;
  const double tau = e * e * e * t;
  const double tol = 1e-9 * std::max(1.0, std::abs(tau));
  if (std::abs(a.f.tau() - tau) > tol)
    throw ConfigError("ansatz: f is not at slow time eps^3 t");
  if (a.g && std::abs(a.g->tau() - tau) > tol)
    throw ConfigError("ansatz: g is not at slow time eps^3 t");
  if (a.phi && std::abs(a.phi->T - e * t) > 1e-9 * std::max(1.0, e * t))
    throw ConfigError("ansatz: interaction field is not at T = eps t");
}

} // namespace

AnsatzSamples sample_ansatz(const AnsatzFields& a, double t, long n_lo, long n_hi) {
  if (n_hi < n_lo) throw ConfigError("sample_ansatz: empty window");
  check_time(a, t);
  const double e = a.eps, e2 = e * e, e3 = e2 * e, e4 = e2 * e2;
  const std::size_t cnt = static_cast<std::size_t>(n_hi - n_lo + 1);
  AnsatzSamples out{n_lo, LatticeSeq::zeros(n_lo, n_hi), LatticeSeq::zeros(n_lo, n_hi),
                    LatticeSeq::zeros(n_lo, n_hi), LatticeSeq::zeros(n_lo, n_hi)};

  // f part at X = e(n + t)
  const double sx = e * t;
  std::vector<std::vector<double>> fj(5);
  for (int d = 0; d <= 4; ++d) fj[static_cast<std::size_t>(d)] = background_points(a.f, d, e, sx, n_lo, cnt);
  const GridFunction ft = mkdv_rhs(a.f);
  std::vector<std::vector<double>> tj(4);
  {
    const PointSampler S(ft, e);
    for (int d = 0; d <= 3; ++d) tj[static_cast<std::size_t>(d)] = S(d, sx, n_lo, cnt);
  }
  for (std::size_t k = 0; k < cnt; ++k) {
    const double f = fj[0][k], f1 = fj[1][k], f2 = fj[2][k], f3 = fj[3][k], f4 = fj[4][k];
    const double t0 = tj[0][k], t1 = tj[1][k], t2 = tj[2][k], t3 = tj[3][k];
    const double F = f - 0.5 * e * f1 + e2 / 8.0 * f2 - e2 / 12.0 * f * f * f - e3 / 48.0 * f3 +
                     e3 / 8.0 * f * f * f1;
    const double F1 = f1 - 0.5 * e * f2 + e2 / 8.0 * f3 - e2 / 4.0 * f * f * f1 - e3 / 48.0 * f4 +
                      e3 / 8.0 * (2.0 * f * f1 * f1 + f * f * f2);
    const double Ft = t0 - 0.5 * e * t1 + e2 / 8.0 * t2 - e2 / 4.0 * f * f * t0 - e3 / 48.0 * t3 +
                      e3 / 8.0 * (2.0 * f * f1 * t0 + f * f * t1);
    out.u[k] = e * f;
    out.q[k] = e * F - e * a.F_minus;
    out.udot[k] = e2 * f1 + e4 * t0;
    out.qdot[k] = e2 * F1 + e4 * Ft;
  }

  // g part at Y = e(n - c t)
  if (a.g && !a.g->is_zero()) {
    const double fp = a.f_plus();
    const double sy = -e * a.c * t;
    const GridFunction gt = gardner_rhs(*a.g, fp);
    const std::vector<GridFunction> gj = spectral_jet(a.g->values(), 3);
    const GridFunction G = G_from_jet(gj, fp, e);
    const GridFunction Gt = G_tau_from_jets(gj, spectral_jet(gt, 3), fp, e);
    const PointSampler Sg(a.g->values(), e), Sgt(gt, e), SG(G, e), SGt(Gt, e);
    const auto g0 = Sg(0, sy, n_lo, cnt), g1 = Sg(1, sy, n_lo, cnt);
    const auto gt0 = Sgt(0, sy, n_lo, cnt);
    const auto G0 = SG(0, sy, n_lo, cnt), G1 = SG(1, sy, n_lo, cnt);
    const auto Gt0 = SGt(0, sy, n_lo, cnt);
    for (std::size_t k = 0; k < cnt; ++k) {
      out.u[k] += e * g0[k];
      out.q[k] += e * G0[k];
      out.udot[k] += -e2 * a.c * g1[k] + e4 * gt0[k];
      out.qdot[k] += -e2 * a.c * G1[k] + e4 * Gt0[k];
    }
  }

  // interaction part at xi = e n
  if (a.phi) {
    const PhiPsiField& p = *a.phi;
    const GridFunction Phi = Phi_of(p, e);
    GridFunction PhiT = p.dT_inv_d_psi;
    for (std::size_t j = 0; j < PhiT.size(); ++j) PhiT[j] -= 0.5 * e * p.dT_psi[j];
    const auto ph = PointSampler(p.phi, e)(0, 0.0, n_lo, cnt);
    const auto ps = PointSampler(p.psi, e)(0, 0.0, n_lo, cnt);
    const auto Ph = PointSampler(Phi, e)(0, 0.0, n_lo, cnt);
    const auto PhT = PointSampler(PhiT, e)(0, 0.0, n_lo, cnt);
    for (std::size_t k = 0; k < cnt; ++k) {
      out.u[k] += e3 * ph[k];
      out.q[k] += e3 * Ph[k];
      out.udot[k] += e4 * ps[k];
      out.qdot[k] += e4 * PhT[k];
    }
  }
  return out;
}

LatticeSeq assemble_u(const AnsatzFields& a, double t, long n_min, long n_max) {
  return sample_ansatz(a, t, n_min, n_max).u;
}

LatticeSeq assemble_q(const AnsatzFields& a, double t, long n_min, long n_max) {
  return sample_ansatz(a, t, n_min, n_max).q;
}

LatticeSeq assemble_udot(const AnsatzFields& a, double t, long n_min, long n_max) {
  return sample_ansatz(a, t, n_min, n_max).udot;
}

Background ansatz_background(const AnsatzFields& a) {
  const double e = a.eps;
  return Background{e * a.f_minus(), e * a.f_plus(), 0.0, e * (a.F_plus - a.F_minus)};
}

LatticeState initial_lattice_state(const AnsatzFields& a, long n_min, long n_max,
                                   double* correction) {
  const AnsatzSamples s = sample_ansatz(a, 0.0, n_min, n_max);
  const Background bg = ansatz_background(a);
  LatticeSeq udot = s.udot;
  double total = 0.0;
  for (double v : udot.values()) total += v;
  const double corr = (bg.q_right - bg.q_left - total) / static_cast<double>(udot.size());
  const double e = a.eps;
  if (std::abs(corr) > std::pow(e, 6))
    throw SumMismatch("initial_lattice_state: compatibility correction " + std::to_string(corr) +
                      " exceeds eps^6 per site");
  if (correction) *correction = corr;
  LatticeSeq q = LatticeSeq::zeros(n_min, n_max);
  double acc = bg.q_left;
  for (std::size_t j = 0; j < q.size(); ++j) {
    q[j] = acc;
    acc += udot[j] + corr;
  }
  LatticeState st{s.u, std::move(q), 0.0, bg};
  st.validate();
  return st;
}

void write_initial_state(const std::filesystem::path& path, const AnsatzFields& a,
                         const LatticeState& s) {
  std::vector<double> n(s.size()), u(s.size()), q(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) {
    n[j] = static_cast<double>(s.n_min() + static_cast<long>(j));
    u[j] = s.u[j];
    q[j] = s.q[j];
  }
  write_columns(path, {"n", "u", "q"}, {n, u, q});
  std::filesystem::path meta = path;
  meta.replace_extension(".meta");
  std::ofstream out(meta);
  const UniformGrid& g = a.f.grid();
  out << "eps=" << format_real(a.eps) << "\n"
      << "c=" << format_real(a.c) << "\n"
      << "f_plus=" << format_real(a.f_plus()) << "\n"
      << "f_minus=" << format_real(a.f_minus()) << "\n"
      << "F_plus=" << format_real(a.F_plus) << "\n"
      << "F_minus=" << format_real(a.F_minus) << "\n"
      << "slow_x_min=" << format_real(g.x_min()) << "\n"
      << "slow_length=" << format_real(g.length()) << "\n"
      << "slow_points=" << g.size() << "\n"
      << "n_min=" << s.n_min() << "\n"
      << "n_max=" << s.n_max() << "\n";
}

} // namespace kinklab
