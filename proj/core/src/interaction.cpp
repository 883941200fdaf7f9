#include "kinklab/interaction.hpp"

#include "kinklab/csv.hpp"
#include "kinklab/errors.hpp"
#include "kinklab/norms.hpp"
#include "kinklab/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace kinklab {

PhiPsiField PhiPsiField::zero(const UniformGrid& grid, double T) {
  GridFunction z(grid);
  return PhiPsiField{z, z, z, z, z, T};
}

namespace {

void require_common_spacing(const UniformGrid& a, const UniformGrid& b) {
  if (std::abs(a.dx() - b.dx()) > 1e-12 * a.dx())
    throw ConfigError("interaction: slow grids must share one spacing");
  if (!is_node_aligned(a) || !is_node_aligned(b))
    throw ConfigError("interaction: slow grids must be node aligned");
}

} // namespace

GridFunction interaction_density(const BackgroundField& f, const LocalizedField& g,
                                 const UniformGrid& xi_grid, double T, double eps, double c) {
  const double tau = eps * eps * T;
  const double ttol = 1e-9 * std::max(1.0, tau);
  if (std::abs(f.tau() - tau) > ttol || std::abs(g.tau() - tau) > ttol)
    throw ConfigError("interaction_density: fields are not at slow time eps^2 T");
  require_common_spacing(xi_grid, f.grid());
  require_common_spacing(xi_grid, g.grid());
  GridFunction H(xi_grid);
  if (g.is_zero()) return H;
  const double dx = xi_grid.dx();
  const long xi_off = node_offset(xi_grid);
  const UniformGrid& gg = g.grid();
  // xi nodes whose argument xi - cT falls inside the g box
  const long ja = static_cast<long>(std::ceil((gg.x_min() + c * T) / dx - 1e-9));
  const long jb = static_cast<long>(std::floor((gg.x_max() + c * T) / dx + 1e-9)) - 1;
  const long lo = std::max(ja, xi_off);
  const long hi = std::min(jb, xi_off + static_cast<long>(xi_grid.size()) - 1);
  const std::size_t count = hi >= lo ? static_cast<std::size_t>(hi - lo + 1) : 0;
  const double gpeak = g.values().max_abs();
  if (count == 0) throw TailMismatch("interaction_density: g support lies outside the xi window");
  if (ja < lo || jb > hi) {
    // clipped part must carry no signal
    const std::vector<double> edge =
        sample_strided(g.values(), 0, -c * T, ja, 1, static_cast<std::size_t>(jb - ja + 1));
    for (long j = ja; j <= jb; ++j)
      if ((j < lo || j > hi) && std::abs(edge[static_cast<std::size_t>(j - ja)]) > 1e-12 * gpeak)
        throw TailMismatch("interaction_density: g support leaves the xi window");
  }
  const std::vector<double> gv = sample_strided(g.values(), 0, -c * T, lo, 1, count);
  const std::vector<double> fv = f.sample(0, T, lo, 1, count);
  const double fp = f.f_plus();
  for (std::size_t k = 0; k < count; ++k) {
    const double df = fv[k] - fp;
    H[static_cast<std::size_t>(lo - xi_off) + k] = df * (fv[k] + fp) * gv[k] + df * gv[k] * gv[k];
  }
  return H;
}

GridFunction interaction_forcing(const BackgroundField& f, const LocalizedField& g,
                                 const UniformGrid& xi_grid, double T, double eps, double c) {
  GridFunction s = spectral_derivative(interaction_density(f, g, xi_grid, T, eps, c), 2);
  s *= -0.5;
  return s;
}

UniformGrid make_xi_grid(double dx, double xi_half, double T_end, double support_half) {
  const double half = std::max(xi_half, T_end + support_half) + support_half;
  const auto n = next_power_of_two(static_cast<std::size_t>(std::ceil(2.0 * half / dx)));
  return UniformGrid::centered(dx, std::max<std::size_t>(n, 16));
}

namespace {

struct RunResult {
  std::vector<PhiPsiField> fields;
  PhiSolveInfo info;
};

RunResult run_quadrature(const BackgroundField& f0, const LocalizedField& g0,
                         const UniformGrid& xg, const std::vector<double>& Ts, double eps,
                         double c, const PhiSolverConfig& cfg, double panel_width) {
  RunResult out;
  const std::size_t n = xg.size();
  const std::size_t m = n / 2 + 1;
  std::vector<double> kk(m);
  for (std::size_t b = 0; b < m; ++b) kk[b] = xg.wavenumber(b);

  if (g0.is_zero()) {
    for (double T : Ts) out.fields.push_back(PhiPsiField::zero(xg, T));
    return out;
  }
  if (std::abs(f0.tau()) > 1e-14 || std::abs(g0.tau()) > 1e-14)
    throw ConfigError("solve_phi_psi: initial fields must be at slow time 0");

  MkdvStepper fs(f0, cfg.slow);
  GardnerStepper gs(g0, f0.f_plus(), cfg.slow);
  const double e2 = eps * eps;

  auto H_hat = [&](double T) {
    fs.advance_to(e2 * T);
    gs.advance_to(e2 * T);
    const GridFunction H = interaction_density(fs.state(), gs.state(), xg, T, eps, c);
    return std::make_pair(fft_forward(H), H.max_abs());
  };

  Spectrum A(m, 0.0), B(m, 0.0);  // int cos(k tau) H dtau, int sin(k tau) H dtau
  double Tcur = 0.0;
  auto [Hcur, hmax] = H_hat(0.0);
  double peak = hmax;
  double quiet_since = -1.0;
  bool forcing_on = true;
  std::vector<Complex> z(m), rot(m);

  auto accumulate = [&](const Spectrum& Ha, const Spectrum& Hm, const Spectrum& Hb,
                        const std::vector<Complex>& za, const std::vector<Complex>& zm,
                        const std::vector<Complex>& zb, double w) {
    const double s = w / 6.0;
    for (std::size_t b = 0; b < m; ++b) {
      const Complex ca = za[b].real(), cm = zm[b].real(), cb = zb[b].real();
      const Complex sa = za[b].imag(), sm = zm[b].imag(), sb = zb[b].imag();
      A[b] += s * (ca * Ha[b] + 4.0 * cm * Hm[b] + cb * Hb[b]);
      B[b] += s * (sa * Ha[b] + 4.0 * sm * Hm[b] + sb * Hb[b]);
    }
  };

  for (double T : Ts) {
    if (T < Tcur - 1e-12) throw ConfigError("solve_phi_psi: checkpoints must increase");
    bool H_at_T = false;
    if (forcing_on && T > Tcur) {
      const auto panels = static_cast<std::size_t>(std::ceil((T - Tcur) / panel_width - 1e-9));
      const double w = (T - Tcur) / static_cast<double>(std::max<std::size_t>(panels, 1));
      for (std::size_t b = 0; b < m; ++b) {
        z[b] = std::polar(1.0, kk[b] * Tcur);
        rot[b] = std::polar(1.0, kk[b] * 0.5 * w);
      }
      std::vector<Complex> zm(m), zb(m);
      for (std::size_t p = 0; p < panels && forcing_on; ++p) {
        const double Ta = Tcur;
        const double Tb = (p + 1 == panels) ? T : Ta + w;
        const double wp = Tb - Ta;
        for (std::size_t b = 0; b < m; ++b) {
          zm[b] = z[b] * rot[b];
          zb[b] = zm[b] * rot[b];
        }
        if (p + 1 == panels) {
          for (std::size_t b = 0; b < m; ++b) zb[b] = std::polar(1.0, kk[b] * Tb);
        }
        auto [Hm, hm] = H_hat(Ta + 0.5 * wp);
        auto [Hb, hb] = H_hat(Tb);
        accumulate(Hcur, Hm, Hb, z, zm, zb, wp);
        ++out.info.panels;
        Hcur = std::move(Hb);
        z = zb;
        Tcur = Tb;
        peak = std::max({peak, hm, hb});
        if (std::max(hm, hb) < cfg.cutoff_rel * peak) {
          if (quiet_since < 0.0) quiet_since = Ta;
          if (Tb - quiet_since >= cfg.cutoff_span) {
            forcing_on = false;
            out.info.forcing_cutoff_T = Tb;
          }
        } else {
          quiet_since = -1.0;
        }
      }
      H_at_T = forcing_on || std::abs(Tcur - T) < 1e-12;
      if (!forcing_on) Tcur = std::max(Tcur, T);
    } else if (forcing_on) {
      H_at_T = true;
    } else {
      Tcur = std::max(Tcur, T);
    }

    // Duhamel integrals at T
    Spectrum ph(m), ps(m), ip(m), dip(m), dps(m);
    for (std::size_t b = 0; b < m; ++b) {
      if (b == 0 || b == n / 2) continue;
      const double k = kk[b];
      const double co = std::cos(k * T), si = std::sin(k * T);
      const Complex Hb = H_at_T ? Hcur[b] : Complex(0.0);
      ph[b] = 0.5 * k * (si * A[b] - co * B[b]);
      ps[b] = 0.5 * k * k * (co * A[b] + si * B[b]);
      ip[b] = ps[b] / Complex(0.0, k);
      dip[b] = Complex(0.0, k) * (ph[b] - 0.5 * Hb);
      dps[b] = -k * k * (ph[b] - 0.5 * Hb);
    }
    PhiPsiField fld{fft_inverse(xg, ph), fft_inverse(xg, ps), fft_inverse(xg, ip),
                    fft_inverse(xg, dip), fft_inverse(xg, dps), T};
    for (const GridFunction* q : {&fld.phi, &fld.psi}) {
      const double mx = q->max_abs();
      if (mx > 0.0 && std::max(std::abs((*q)[0]), std::abs((*q)[n - 1])) > cfg.edge_tol * mx)
        throw TailMismatch("solve_phi_psi: interaction waves reach the xi-window edge");
    }
    out.fields.push_back(std::move(fld));
  }
  return out;
}

} // namespace

std::vector<PhiPsiField> solve_phi_psi(const BackgroundField& f0, const LocalizedField& g0,
                                       const UniformGrid& xi_grid,
                                       const std::vector<double>& T_checkpoints, double eps,
                                       double c, const PhiSolverConfig& cfg,
                                       PhiSolveInfo* info) {
  if (!(cfg.panel_width > 0.0)) throw ConfigError("solve_phi_psi: panel width must be positive");
  RunResult r = run_quadrature(f0, g0, xi_grid, T_checkpoints, eps, c, cfg, cfg.panel_width);
  if (cfg.doubling_check && !g0.is_zero()) {
    const RunResult fine =
        run_quadrature(f0, g0, xi_grid, T_checkpoints, eps, c, cfg, 0.5 * cfg.panel_width);
    double worst = 0.0;
    for (std::size_t i = 0; i < r.fields.size(); ++i) {
      for (auto member : {&PhiPsiField::phi, &PhiPsiField::psi}) {
        const GridFunction& a = r.fields[i].*member;
        const GridFunction& b = fine.fields[i].*member;
        const double scale = std::max(b.max_abs(), 1e-300);
        worst = std::max(worst, (a - b).max_abs() / scale);
      }
    }
    r.info.doubling_change = worst;
    if (worst > cfg.doubling_tol)
      throw QuadratureUnresolved("solve_phi_psi: halving the panel width changed phi/psi by " +
                                 std::to_string(worst));
  }
  if (info) *info = r.info;
  return std::move(r.fields);
}

double phi_uniform_bound_report(const std::vector<PhiPsiField>& traj, double f_norm,
                                double g_norm, int k) {
  const double d = std::max(f_norm, g_norm);
  double worst = 0.0;
  for (const PhiPsiField& p : traj) worst = std::max(worst, sobolev_norm(p.phi, k));
  if (worst == 0.0) return 0.0;
  return worst / (d * d * d);
}

double psi_uniform_bound_report(const std::vector<PhiPsiField>& traj, double f_norm,
                                double g_norm, int k) {
  const double d = std::max(f_norm, g_norm);
  double worst = 0.0;
  for (const PhiPsiField& p : traj) worst = std::max(worst, sobolev_norm(p.psi, std::max(k - 1, 0)));
  if (worst == 0.0) return 0.0;
  return worst / (d * d * d);
}

double kernel_sup(double tau, double c) {
  auto kernel = [&](double x) {
    const double a = bracket_plus(x + tau);
    const double b = x - c * tau;
    return 1.0 / (a * a * (1.0 + b * b));
  };
  const double lo = -tau - 10.0, hi = c * tau + 10.0;
  const std::size_t n = 200000;
  const double h = (hi - lo) / static_cast<double>(n);
  double best = -1.0, xb = lo;
  for (std::size_t i = 0; i <= n; ++i) {
    const double x = lo + h * static_cast<double>(i);
    const double v = kernel(x);
    if (v > best) {
      best = v;
      xb = x;
    }
  }
  double a = xb - h, b = xb + h;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 100; ++it) {
    const double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    if (kernel(x1) > kernel(x2)) b = x2;
    else a = x1;
  }
  return std::max(best, kernel(0.5 * (a + b)));
}

void write_csv(const std::filesystem::path& path, const PhiPsiField& p) {
  const std::size_t n = p.phi.size();
  std::vector<double> xi(n);
  for (std::size_t j = 0; j < n; ++j) xi[j] = p.grid().x(j);
  auto col = [](const GridFunction& g) { return std::vector<double>(g.values().begin(), g.values().end()); };
  write_columns(path, {"xi", "phi", "psi", "invdpsi"}, {xi, col(p.phi), col(p.psi), col(p.inv_d_psi)});
}

} // namespace kinklab
