#include "kinklab/harness.hpp"

#include "kinklab/errors.hpp"
#include "kinklab/norms.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <random>
#include <sstream>

namespace kinklab {

namespace {

struct Check {
  std::string name;
  std::function<std::pair<bool, std::string>()> run;
};

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

// Residual at t = 0 for a kink (and optionally a soliton) over a short list of eps.
double residual_at_zero(double eps, bool counter) {
  const UniformGrid sg = make_slow_grid(eps, 80.0);
  BackgroundField f = BackgroundField::kink(sg, 1.0 / 24.0);
  std::optional<LocalizedField> g;
  std::optional<PhiPsiField> phi;
  const long H = static_cast<long>(std::ceil(45.0 / eps));
  if (counter) {
    g = gardner_soliton(sg, f.f_plus(), 1.0 / 48.0);
    const UniformGrid xg = make_xi_grid(sg.dx(), eps * static_cast<double>(H), 0.0, 40.0);
    phi = solve_phi_psi(f, *g, xg, {0.0}, eps, wave_speed(eps, f.f_plus()))[0];
  }
  const AnsatzFields a = AnsatzFields::make(eps, std::move(f), std::move(g), std::move(phi));
  return l2_norm(residual_res1(a, 0.0, -H, H)) + l2_norm(residual_res2(a, 0.0, -H, H));
}

double q0_error(double eps) {
  const UniformGrid sg = make_slow_grid(eps, 80.0);
  const AnsatzFields a = AnsatzFields::make(eps, BackgroundField::kink(sg, 1.0 / 24.0));
  const long H = static_cast<long>(std::ceil(45.0 / eps));
  const LatticeState s = initial_lattice_state(a, -H, H);
  const LatticeSeq q = assemble_q(a, 0.0, -H, H);
  return l2_norm(s.q - q);
}

std::vector<Check> checks(const ExperimentConfig& cfg) {
  std::vector<Check> c;
  c.push_back({"bracket_plus(0) = 1, bracket_plus(3) = sqrt(10)", [] {
                 const double d = std::abs(bracket_plus(3.0) - std::sqrt(10.0));
                 return std::pair{bracket_plus(0.0) == 1.0 && d < 1e-15, num(d)};
               }});
  c.push_back({"l2 norm of (3,4) is 5", [] {
                 const double v = l2_norm(LatticeSeq(0, {3.0, 4.0}));
                 return std::pair{std::abs(v - 5.0) < 1e-15, num(v)};
               }});
  c.push_back({"exact line fit slope 3", [] {
                 const SlopeFit f = fit_slope({{0, 1}, {1, 4}, {2, 7}, {3, 10}});
                 return std::pair{std::abs(f.slope - 3.0) < 1e-12 && f.max_abs_residual < 1e-12,
                                  num(f.slope)};
               }});
  c.push_back({"two-point fit refused", [] {
                 try {
                   fit_slope({{0, 0}, {1, 1}});
                 } catch (const DegenerateFit&) {
                   return std::pair{true, std::string("DegenerateFit")};
                 }
                 return std::pair{false, std::string("accepted")};
               }});
  c.push_back({"noisy line fit slope within 0.01 of 2", [&cfg] {
                 std::mt19937_64 rng(cfg.seed);
                 std::uniform_real_distribution<double> noise(-1e-3, 1e-3);
                 std::vector<std::pair<double, double>> pts;
                 for (int i = 0; i < 5; ++i) pts.emplace_back(i, 2.0 * i + noise(rng));
                 const SlopeFit f = fit_slope(pts);
                 return std::pair{std::abs(f.slope - 2.0) < 0.01, num(f.slope)};
               }});
  c.push_back({"zero residuals refuse the log fit", [] {
                 try {
                   fit_log_log({0.2, 0.1, 0.05}, {0.0, 0.0, 0.0});
                 } catch (const FitUnstable&) {
                   return std::pair{true, std::string("FitUnstable")};
                 }
                 return std::pair{false, std::string("accepted")};
               }});
  c.push_back({"potential(1) = 11/24", [] {
                 const double v = potential(1.0);
                 return std::pair{std::abs(v - 11.0 / 24.0) < 1e-15, num(v)};
               }});
  c.push_back({"kink transport error < 1e-6 over tau in [0,1]", [] {
                 const double v = 1.0 / 24.0;
                 const UniformGrid grid = UniformGrid::centered(80.0 / 1024.0, 1024);
                 const BackgroundField f0 = BackgroundField::kink(grid, v, 0.0, false);
                 SolverConfig sc;
                 sc.dt_slow = 1e-3;
                 const BackgroundField f1 = evolve_mkdv(f0, {1.0}, sc)[0];
                 const GridFunction tot = f1.total();
                 double err = 0.0;
                 for (std::size_t j = 0; j < grid.size(); ++j)
                   err = std::max(err, std::abs(tot[j] - kink_profile(v, grid.x(j), 1.0)));
                 return std::pair{err < 1e-6, num(err)};
               }});
  c.push_back({"zero Gardner data stays zero", [] {
                 const UniformGrid grid = UniformGrid::centered(80.0 / 256.0, 256);
                 const LocalizedField g =
                     evolve_gardner(LocalizedField::zero(grid), 0.7, {0.1}, SolverConfig{})[0];
                 return std::pair{g.is_zero(), num(g.values().max_abs())};
               }});
  c.push_back({"partial-sum lemma over 100 seeded trials", [&cfg] {
                 std::mt19937_64 rng(cfg.seed + 7);
                 std::normal_distribution<double> nd;
                 const long lo = -40, hi = 40;
                 const double C = partial_sum_constant(lo, hi);
                 double worst = 0.0;
                 for (int trial = 0; trial < 100; ++trial) {
                   std::vector<double> a(static_cast<std::size_t>(hi - lo + 1));
                   double sum = 0.0;
                   for (auto& x : a) sum += (x = nd(rng));
                   for (auto& x : a) x -= sum / static_cast<double>(a.size());
                   const LatticeSeq s(lo, a);
                   const double ratio = l2_norm(partial_sums(s)) / (C * l2_weighted_norm(s));
                   worst = std::max(worst, ratio);
                 }
                 return std::pair{worst <= 1.0 + 1e-12, "max ratio " + num(worst)};
               }});
  c.push_back({"kernel decay slope -2 +- 0.1 over tau in [10,1000]", [] {
                 const double cc = wave_speed(0.1, std::sqrt(0.5));
                 const SlopeFit f =
                     fit_log_log({1000.0, 100.0, 10.0},
                                 {kernel_sup(1000.0, cc), kernel_sup(100.0, cc), kernel_sup(10.0, cc)});
                 return std::pair{std::abs(f.slope + 2.0) <= 0.1, num(f.slope)};
               }});
  for (bool counter : {false, true}) {
    c.push_back({std::string(counter ? "counter-propagating" : "kink-only") +
                     " residual slope at t = 0 in [5.2, 5.8]",
                 [counter] {
                   const std::vector<double> eps{0.2, 0.1, 0.05};
                   std::vector<double> r;
                   for (double e : eps) r.push_back(residual_at_zero(e, counter));
                   const SlopeFit f = fit_log_log(eps, r);
                   return std::pair{f.slope >= 5.2 && f.slope <= 5.8, num(f.slope)};
                 }});
  }
  c.push_back({"initial velocity error slope >= 2.3", [] {
                 const std::vector<double> eps{0.2, 0.1, 0.05};
                 std::vector<double> r;
                 for (double e : eps) r.push_back(q0_error(e));
                 const SlopeFit f = fit_log_log(eps, r);
                 return std::pair{f.slope >= 2.3, num(f.slope)};
               }});
  c.push_back({"short counter-propagating lattice run is coercive", [&cfg] {
                 ExperimentConfig k = cfg;
                 k.g_profile = GProfile::gardner_soliton;
                 k.checkpoints = 4;
                 k.write_series = false;
                 k.write_snapshots = false;
                 const double eps = 0.2;
                 const ModelSetup m = build_model(k, eps, 1.0 / (eps * eps * eps));
                 const LatticeRun run = run_lattice_case(k, m);
                 const bool ok = run.coercive_violations == 0 && std::isfinite(run.sup_error) &&
                                 run.sup_error < 0.05;
                 return std::pair{ok, "sup error " + num(run.sup_error)};
               }});
  return c;
}

} // namespace

ExperimentReport run_selftest(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentReport rep;
  rep.config = cfg;
  for (const Check& chk : checks(cfg)) {
    const auto ti = std::chrono::steady_clock::now();
    bool ok = false;
    std::string detail;
    try {
      std::tie(ok, detail) = chk.run();
    } catch (const std::exception& e) {
      detail = std::string("threw: ") + e.what();
    }
    RunRecord r;
    r.label = "selftest";
    r.note = chk.name;
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - ti).count();
    r.values = {{"pass", ok ? 1.0 : 0.0}};
    rep.runs.push_back(std::move(r));
    rep.verdicts.push_back((ok ? "PASS " : "FAIL ") + chk.name + " [" + detail + "]");
    rep.pass = rep.pass && ok;
  }
  if (!cfg.defaulted.empty())
    rep.notes.push_back("defaults applied to " + std::to_string(cfg.defaulted.size()) +
                        " configuration keys");
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

} // namespace kinklab
