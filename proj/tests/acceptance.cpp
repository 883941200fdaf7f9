// Acceptance runner: one PASS/FAIL line per criterion.
#include "kinklab/ansatz.hpp"
#include "kinklab/errors.hpp"
#include "kinklab/harness.hpp"
#include "kinklab/interaction.hpp"
#include "kinklab/norms.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace kinklab;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;
constexpr double v24 = 1.0 / 24.0;

struct Outcome {
  bool pass = false;
  std::string detail;
  double limit_seconds = 0.0;  // 0: no runtime requirement
};

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(5) << v;
  return os.str();
}

double log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<std::pair<double, double>> p;
  for (std::size_t i = 0; i < x.size(); ++i) p.emplace_back(std::log(x[i]), std::log(y[i]));
  return fit_slope(p).slope;
}

std::string verdict_lines(const ExperimentReport& rep) {
  std::string s;
  for (const auto& v : rep.verdicts) s += "; " + v;
  return s;
}

ExperimentReport run_and_write(ExperimentKind kind, const fs::path& out) {
  ExperimentConfig cfg = parse_config("", kind);
  cfg.output_dir = (out / to_string(kind)).string();
  cfg.validate();
  ExperimentReport rep = run_experiment(cfg);
  write_report(rep);
  return rep;
}

const SlopeFit* fit_named(const ExperimentReport& rep, const std::string& name) {
  const auto it = rep.fits.find(name);
  return it == rep.fits.end() ? nullptr : &it->second;
}

Outcome residual_exponent(const fs::path& out) {
  const ExperimentReport rep = run_and_write(ExperimentKind::residual_scaling, out);
  const SlopeFit* f = fit_named(rep, "residual");
  Outcome o;
  o.pass = rep.pass && f;
  o.detail = "slope " + (f ? num(f->slope) : std::string("n/a")) + " in [5.2, 5.8]";
  o.limit_seconds = 600;
  return o;
}

Outcome theorem5(const ExperimentReport& rep) {
  Outcome o;
  std::size_t excluded = 0;
  for (const auto& r : rep.runs) excluded += r.excluded;
  const SlopeFit* k = fit_named(rep, "kink");
  const SlopeFit* c = fit_named(rep, "counter");
  o.pass = k && c && excluded == 0 && k->slope >= 2.2 && c->slope >= 2.2;
  o.detail = "kink slope " + (k ? num(k->slope) : std::string("n/a")) + ", counter slope " +
             (c ? num(c->slope) : std::string("n/a")) + " (>= 2.2), " + std::to_string(excluded) +
             " guard exclusions";
  o.limit_seconds = 3600;
  return o;
}

Outcome coercivity(const std::vector<const ExperimentReport*>& reps) {
  double checks = 0, violations = 0;
  std::size_t runs = 0, excluded = 0;
  for (const auto* rep : reps)
    for (const auto& r : rep->runs) {
      if (r.excluded) {
        ++excluded;
        continue;
      }
      ++runs;
      checks += r.value("coercive_checks");
      violations += r.value("coercive_violations");
    }
  Outcome o;
  o.pass = runs > 0 && checks > 0 && violations == 0 && excluded == 0;
  o.detail = num(checks - violations) + "/" + num(checks) + " checkpoints coercive over " +
             std::to_string(runs) + " production runs";
  return o;
}

// shared kink x Gaussian setup for the interaction field
struct InteractionSetup {
  double eps = 0.1, dx = 0.05;
  UniformGrid grid = UniformGrid::centered(0.05, 2048);
  BackgroundField f = BackgroundField::kink(grid, v24);
  LocalizedField g = gaussian_pulse(grid, 0.3, 2.0);
  double c = wave_speed(0.1, std::sqrt(0.5));
};

Outcome phi_bound() {
  const InteractionSetup s;
  const double fn = weighted_xk_norm(s.f.total(), 3, 2, s.f.f_plus(), s.f.f_minus(), 1e-6);
  const double gn = weighted_sobolev_norm(s.g.values(), 3, 2);
  const UniformGrid xg = make_xi_grid(s.dx, 10.0, 100.0, 20.0);
  std::vector<double> Ts;
  for (int i = 0; i <= 40; ++i) Ts.push_back(2.5 * i);
  PhiSolverConfig pc;
  pc.panel_width = 0.05;
  const auto traj = solve_phi_psi(s.f, s.g, xg, Ts, s.eps, s.c, pc);
  const std::vector<PhiPsiField> half(traj.begin(), traj.begin() + 21);
  const double r50 = phi_uniform_bound_report(half, fn, gn, 2);
  const double r100 = phi_uniform_bound_report(traj, fn, gn, 2);
  const double ratio = r100 / r50;

  std::vector<double> taus{10.0, 31.6, 100.0, 316.0, 1000.0}, ks;
  for (double t : taus) ks.push_back(kernel_sup(t, s.c));
  const double slope = log_slope(taus, ks);

  Outcome o;
  o.pass = r50 > 0 && std::isfinite(ratio) && std::abs(ratio - 1.0) <= 0.2 &&
           std::abs(slope + 2.0) <= 0.1;
  o.detail = "bound ratio T=100 vs T=50 " + num(ratio) + " (1 +- 0.2), kernel slope " +
             num(slope) + " (-2 +- 0.1)";
  return o;
}

Outcome cancellation() {
  const InteractionSetup s;
  const double T = 3.0;
  const UniformGrid xg = make_xi_grid(s.dx, 10.0, 3.2, 20.0);
  const PhiPsiField p = solve_phi_psi(s.f, s.g, xg, {T}, s.eps, s.c)[0];
  const double tau = s.eps * s.eps * T;
  const BackgroundField f = evolve_mkdv(s.f, {tau}, SolverConfig{})[0];
  const LocalizedField g = evolve_gardner(s.g, s.f.f_plus(), {tau}, SolverConfig{})[0];
  const GridFunction H = interaction_density(f, g, xg, T, s.eps, s.c);
  GridFunction r = spectral_derivative(p.phi, 1) - p.dT_inv_d_psi;
  GridFunction dh = spectral_derivative(H, 1);
  dh *= 0.5;
  r -= dh;
  Outcome o;
  o.pass = r.max_abs() < 1e-5;
  o.detail = "sup-norm " + num(r.max_abs()) + " (< 1e-5), |psi| " + num(p.psi.max_abs());
  return o;
}

// sup over interior nodes of e*(A(Y + e) - A(Y)) - rhs(Y)
double forward_defect(const GridFunction& A, const GridFunction& rhs, double eps, long m) {
  double worst = 0.0;
  const std::size_t n = A.size(), s = static_cast<std::size_t>(m);
  for (std::size_t j = n / 8; j + s < n - n / 8; ++j)
    worst = std::max(worst, std::abs(eps * (A[j + s] - A[j]) - rhs[j]));
  return worst;
}

Outcome identities() {
  const std::vector<double> eps{0.2, 0.1, 0.05};
  const double fp = std::sqrt(0.5);
  std::vector<double> rf, rg, rp;
  for (double e : eps) {
    const double e2 = e * e, e4 = e2 * e2;
    const UniformGrid g = make_slow_grid(e, 80.0, 0.025);
    const long m = lattice_stride(e, g);
    const BackgroundField f = BackgroundField::kink(g, v24);
    rf.push_back(forward_defect(F_of(f, e).values, e2 * f.derivative(1) + e4 * mkdv_rhs(f), e, m));

    const LocalizedField p = LocalizedField::from_function(
        g, [](double y) { return 0.4 * std::exp(-y * y / 4) * (1 + 0.3 * std::sin(y)); }, 0.0);
    const double c = wave_speed(e, fp);
    rg.push_back(forward_defect(G_of(p, fp, e),
                                (-e2 * c) * spectral_derivative(p.values(), 1) + e4 * gardner_rhs(p, fp),
                                e, m));

    const UniformGrid gp = make_slow_grid(e, 60.0, 0.025);
    PhiPsiField ph = PhiPsiField::zero(gp);
    ph.inv_d_psi = GridFunction::from_function(gp, [](double x) { return std::exp(-x * x / 2); });
    ph.psi = spectral_derivative(ph.inv_d_psi, 1);
    GridFunction Phi = Phi_of(ph, e);
    Phi *= e2;
    rp.push_back(forward_defect(Phi, e4 * ph.psi, e, lattice_stride(e, gp)));
  }
  const double sf = log_slope(eps, rf), sg = log_slope(eps, rg), sp = log_slope(eps, rp);
  auto ok = [](double s) { return std::abs(s - 6.0) <= 0.3; };
  Outcome o;
  o.pass = ok(sf) && ok(sg) && ok(sp);
  o.detail = "slopes F " + num(sf) + ", G " + num(sg) + ", Phi " + num(sp) + " (6 +- 0.3)";
  return o;
}

double kink_error(double dt) {
  const UniformGrid grid = UniformGrid::centered(80.0 / 1024.0, 1024);
  SolverConfig sc;
  sc.dt_slow = dt;
  const auto traj = evolve_mkdv(BackgroundField::kink(grid, v24, 0.0, false), {0.25, 0.5, 0.75, 1.0}, sc);
  double e = 0.0;
  for (const auto& f : traj) {
    const GridFunction tot = f.total();
    for (std::size_t j = 0; j < grid.size(); ++j)
      e = std::max(e, std::abs(tot[j] - kink_profile(v24, grid.x(j), f.tau())));
  }
  return e;
}

Outcome kink_transport() {
  const double e = kink_error(1e-3);
  const std::vector<double> dts{0.04, 0.02, 0.01};
  std::vector<double> errs;
  for (double dt : dts) errs.push_back(kink_error(dt));
  const double slope = log_slope(dts, errs);
  Outcome o;
  o.pass = e < 1e-6 && std::abs(slope - 4.0) <= 0.2;
  o.detail = "sup error " + num(e) + " (< 1e-6), self-convergence slope " + num(slope) + " (4 +- 0.2)";
  return o;
}

Outcome metastability(const ExperimentReport& rep) {
  Outcome o;
  o.pass = rep.pass;
  std::size_t ok = 0, total = 0;
  for (const auto& v : rep.verdicts)
    if (v.find("envelope") != std::string::npos) {
      ++total;
      ok += v.rfind("PASS", 0) == 0;
    }
  o.detail = std::to_string(ok) + "/" + std::to_string(total) + " envelope checks" + verdict_lines(rep);
  o.limit_seconds = 2700;
  return o;
}

std::function<double(double)> random_bump(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> amp(-1.0, 1.0), ctr(-3.0, 3.0), wid(0.7, 2.0), kk(0.0, 2.0);
  std::vector<std::array<double, 4>> p(3);
  for (auto& b : p) b = {amp(rng), ctr(rng), wid(rng), kk(rng)};
  return [p](double x) {
    double s = 0.0;
    for (const auto& b : p) {
      const double z = (x - b[1]) / b[2];
      s += b[0] * std::exp(-z * z) * std::cos(b[3] * x);
    }
    return s;
  };
}

std::function<double(double)> random_front(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> lim(-1.0, 1.0), st(0.3, 1.5);
  const double a = lim(rng), b = lim(rng), s = st(rng);
  auto bump = random_bump(rng);
  return [=](double x) { return a + b * std::tanh(s * x) + 0.5 * bump(x); };
}

// worst over median of a ratio sample; a bounded inequality keeps this O(1)
double spread(std::vector<double> r) {
  std::sort(r.begin(), r.end());
  return r.back() / r[r.size() / 2];
}

Outcome lemma_suite() {
  constexpr int trials = 100;
  std::mt19937_64 rng(20240601);
  const UniformGrid box(-30.0, 60.0, 1024);
  std::vector<std::string> bad;
  std::ostringstream os;

  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const auto X = random_bump(rng);
    const double h1 = sobolev_norm(GridFunction::from_function(box, X), 1);
    for (double eps : {0.2, 0.1, 0.05}) {
      const long N = static_cast<long>(std::ceil(30.0 / eps));
      worst = std::max(worst, std::sqrt(eps) * l2_norm(sample_to_lattice(X, eps, -N, N)) / h1);
    }
  }
  if (!(worst <= 1.5)) bad.push_back("sampling");
  os << "sampling max " << num(worst);

  const long lo = -50, hi = 50;
  const double C = partial_sum_constant(lo, hi);
  std::normal_distribution<double> nd;
  double ps = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> a(static_cast<std::size_t>(hi - lo + 1));
    for (auto& x : a) x = nd(rng);
    const double m = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
    for (auto& x : a) x -= m;
    const LatticeSeq s(lo, a);
    ps = std::max(ps, l2_norm(partial_sums(s)) / (C * l2_weighted_norm(s)));
  }
  if (!(ps <= 1.0 + 1e-12)) bad.push_back("partial sums");
  os << ", partial-sum max/C " << num(ps);

  for (int k : {1, 2, 3}) {
    std::vector<double> hx, xx;
    for (int t = 0; t < trials; ++t) {
      const auto f = GridFunction::from_function(box, random_front(rng));
      const auto h = GridFunction::from_function(box, random_bump(rng));
      const auto f2 = GridFunction::from_function(box, random_front(rng));
      hx.push_back(sobolev_norm(f * h, k) / (xk_norm(f, k) * sobolev_norm(h, k)));
      xx.push_back(xk_norm(f * f2, k) / (xk_norm(f, k) * xk_norm(f2, k)));
    }
    const double a = spread(hx), b = spread(xx);
    if (!(a < 10.0) || !(b < 10.0)) bad.push_back("products k=" + std::to_string(k));
    os << ", k=" << k << " product spreads " << num(a) << "/" << num(b);
  }
  Outcome o;
  o.pass = bad.empty();
  o.detail = os.str() + " over " + std::to_string(trials) + " trials each";
  o.limit_seconds = 120;
  return o;
}

Outcome initial_data(const ExperimentReport& rep) {
  const SlopeFit* f = fit_named(rep, "kink_Q0");
  Outcome o;
  o.pass = f && f->slope >= 2.3;
  o.detail = "Q(0) slope " + (f ? num(f->slope) : std::string("n/a")) + " (>= 2.3)";
  return o;
}

struct Line {
  int id;
  std::string name;
  Outcome out;
  double seconds;
};

} // namespace

int main(int argc, char** argv) {
  fs::path out = "acceptance_out";
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--out" && i + 1 < argc) out = argv[++i];
    else {
      std::cerr << "usage: kinklab_acceptance [--out DIR]\n";
      return 2;
    }
  }
  fs::create_directories(out);

  std::vector<Line> lines;
  std::optional<ExperimentReport> t5, ms;
  auto timed = [&](int id, const std::string& name, const std::function<Outcome()>& fn,
                   double extra_seconds = 0.0) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw: ") + e.what();
    }
    const double s = std::chrono::duration<double>(Clock::now() - t0).count() + extra_seconds;
    if (o.limit_seconds > 0 && s >= o.limit_seconds) {
      o.pass = false;
      o.detail += ", runtime over " + num(o.limit_seconds) + " s";
    }
    lines.push_back({id, name, o, s});
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << o.detail
              << " [" << std::fixed << std::setprecision(1) << s << " s]" << std::defaultfloat
              << std::endl;
  };

  timed(1, "residual exponent", [&] { return residual_exponent(out); });
  double t5_seconds = 0.0;
  {
    const auto t0 = Clock::now();
    try {
      t5 = run_and_write(ExperimentKind::theorem5, out);
    } catch (const std::exception& e) {
      std::cout << "theorem5 sweep threw: " << e.what() << std::endl;
    }
    t5_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  }
  timed(2, "approximation error exponent", [&] {
    if (!t5) throw Error("theorem5 sweep unavailable");
    return theorem5(*t5);
  }, t5_seconds);
  timed(4, "interaction-field uniform bound", phi_bound);
  timed(5, "order eps^4 cancellation", cancellation);
  timed(6, "discrete identities for F, G, Phi", identities);
  timed(7, "exact-kink transport", kink_transport);
  double ms_seconds = 0.0;
  {
    const auto t0 = Clock::now();
    try {
      ms = run_and_write(ExperimentKind::metastability, out);
    } catch (const std::exception& e) {
      std::cout << "metastability sweep threw: " << e.what() << std::endl;
    }
    ms_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  }
  timed(8, "meta-stability", [&] {
    if (!ms) throw Error("metastability sweep unavailable");
    return metastability(*ms);
  }, ms_seconds);
  timed(9, "lemma suite", lemma_suite);
  timed(10, "initial-data lemma", [&] {
    if (!t5) throw Error("theorem5 sweep unavailable");
    return initial_data(*t5);
  });
  timed(3, "coercivity", [&] {
    if (!t5 || !ms) throw Error("production runs unavailable");
    return coercivity({&*t5, &*ms});
  });

  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) { return a.id < b.id; });
  std::cout << "\nsummary\n";
  bool all = true;
  for (const auto& l : lines) {
    std::cout << (l.out.pass ? "PASS" : "FAIL") << " " << l.id << " " << l.name << "\n";
    all = all && l.out.pass;
  }
  std::cout << (all ? "ALL PASS" : "SOME CRITERIA FAILED") << std::endl;
  return all ? 0 : 1;
}
