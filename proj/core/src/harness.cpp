#include "kinklab/harness.hpp"

#include "kinklab/csv.hpp"
#include "kinklab/errors.hpp"
#include "kinklab/norms.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace kinklab {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects a number, got '" + v + "'");
  }
  if (used != v.size() || !std::isfinite(x))
    throw ConfigError("config: " + key + " expects a number, got '" + v + "'");
  return x;
}

long parse_int(const std::string& key, const std::string& v) {
  const double x = parse_real(key, v);
  if (x != std::floor(x)) throw ConfigError("config: " + key + " expects an integer");
  return static_cast<long>(x);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config: " + key + " expects a boolean, got '" + v + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_real(key, item));
  }
  if (out.empty()) throw ConfigError("config: " + key + " is empty");
  return out;
}

GProfile parse_profile(const std::string& v) {
  if (v == "none") return GProfile::none;
  if (v == "gardner_soliton") return GProfile::gardner_soliton;
  if (v == "gaussian") return GProfile::gaussian;
  throw ConfigError("config: unknown g_profile '" + v + "'");
}

Integrator parse_integrator(const std::string& v) {
  if (v == "rk4") return Integrator::rk4;
  if (v == "strang") return Integrator::strang;
  throw ConfigError("config: unknown integrator '" + v + "'");
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"eps_list", [](auto& c, auto& k, auto& v) { c.eps_list = parse_list(k, v); }},
      {"tau0", [](auto& c, auto& k, auto& v) { c.tau0 = parse_real(k, v); }},
      {"r", [](auto& c, auto& k, auto& v) { c.r = parse_real(k, v); }},
      {"K", [](auto& c, auto& k, auto& v) { c.K = parse_real(k, v); }},
      {"kink_v", [](auto& c, auto& k, auto& v) { c.kink_v = parse_real(k, v); }},
      {"g_profile", [](auto& c, auto&, auto& v) { c.g_profile = parse_profile(v); }},
      {"g_amplitude", [](auto& c, auto& k, auto& v) { c.g_amplitude = parse_real(k, v); }},
      {"g_width", [](auto& c, auto& k, auto& v) { c.g_width = parse_real(k, v); }},
      {"g_center", [](auto& c, auto& k, auto& v) { c.g_center = parse_real(k, v); }},
      {"soliton_speed", [](auto& c, auto& k, auto& v) { c.soliton_speed = parse_real(k, v); }},
      {"slow_dx", [](auto& c, auto& k, auto& v) { c.slow_dx = parse_real(k, v); }},
      {"slow_length", [](auto& c, auto& k, auto& v) { c.slow_length = parse_real(k, v); }},
      {"dt_slow", [](auto& c, auto& k, auto& v) { c.dt_slow = parse_real(k, v); }},
      {"lattice_dt", [](auto& c, auto& k, auto& v) { c.lattice_dt = parse_real(k, v); }},
      {"integrator", [](auto& c, auto&, auto& v) { c.integrator = parse_integrator(v); }},
      {"checkpoints",
       [](auto& c, auto& k, auto& v) { c.checkpoints = static_cast<int>(parse_int(k, v)); }},
      {"panel_width", [](auto& c, auto& k, auto& v) { c.panel_width = parse_real(k, v); }},
      {"quadrature_check",
       [](auto& c, auto& k, auto& v) { c.quadrature_check = parse_bool(k, v); }},
      {"perturbed_run", [](auto& c, auto& k, auto& v) { c.perturbed_run = parse_bool(k, v); }},
      {"output_dir", [](auto& c, auto&, auto& v) { c.output_dir = v; }},
      {"seed",
       [](auto& c, auto& k, auto& v) {
         const long s = parse_int(k, v);
         if (s < 0) throw ConfigError("config: seed must be non-negative");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"threads", [](auto& c, auto& k, auto& v) { c.threads = static_cast<int>(parse_int(k, v)); }},
      {"write_series", [](auto& c, auto& k, auto& v) { c.write_series = parse_bool(k, v); }},
      {"write_snapshots",
       [](auto& c, auto& k, auto& v) { c.write_snapshots = parse_bool(k, v); }},
  };
  return table;
}

std::string eps_tag(double eps) {
  std::ostringstream os;
  os << std::setprecision(6) << eps;
  return os.str();
}

// Runs job(i) for i < n on up to `threads` workers; the first exception is rethrown.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& job) {
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

SolverConfig solver_config(const ExperimentConfig& cfg) {
  SolverConfig sc;
  sc.dt_slow = cfg.dt_slow;
  return sc;
}

PhiSolverConfig phi_config(const ExperimentConfig& cfg) {
  PhiSolverConfig pc;
  pc.panel_width = cfg.panel_width;
  pc.doubling_check = cfg.quadrature_check;
  pc.slow = solver_config(cfg);
  return pc;
}

double field_delta(const BackgroundField& f, const std::optional<LocalizedField>& g) {
  double d = weighted_xk_norm(f.total(), 6, 2, f.f_plus(), f.f_minus(), 1e-6);
  if (g) d = std::max(d, weighted_sobolev_norm(g->values(), 6, 2));
  return d;
}

std::optional<LocalizedField> make_g(const ExperimentConfig& cfg, const UniformGrid& grid,
                                     double f_plus) {
  switch (cfg.g_profile) {
    case GProfile::none: return std::nullopt;
    case GProfile::gardner_soliton:
      return gardner_soliton(grid, f_plus, cfg.soliton_speed, cfg.g_center);
    case GProfile::gaussian:
      return gaussian_pulse(grid, cfg.g_amplitude, cfg.g_width, cfg.g_center);
  }
  return std::nullopt;
}

double cfg_f_plus(const ExperimentConfig& cfg) { return std::sqrt(12.0 * cfg.kink_v); }

// smooth seeded bump sum, unnormalised
std::function<double(double)> perturbation_shape(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(-1.0, 1.0), ctr(-4.0, 4.0), wid(1.0, 2.0);
  std::vector<std::array<double, 3>> bumps(3);
  for (auto& b : bumps) b = {amp(rng), ctr(rng), wid(rng)};
  return [bumps](double X) {
    double s = 0.0;
    for (const auto& b : bumps) {
      const double z = (X - b[1]) / b[2];
      s += b[0] * std::exp(-z * z);
    }
    return s;
  };
}

void require_points(const ExperimentReport& rep, const std::string& label,
                    std::vector<double>& eps, std::vector<double>& vals,
                    const std::string& key) {
  for (const auto& r : rep.runs)
    if (r.label == label && !r.excluded) {
      eps.push_back(r.eps);
      vals.push_back(r.value(key));
    }
}

// Fits key against eps for runs with the label and appends a verdict.
void slope_verdict(ExperimentReport& rep, const std::string& label, const std::string& key,
                   const std::string& fit_name, double lo, double hi) {
  std::vector<double> eps, vals;
  require_points(rep, label, eps, vals, key);
  std::ostringstream os;
  if (eps.size() < 3) {
    os << "FAIL " << fit_name << ": only " << eps.size()
       << " eps-points survived guards, slope not evaluated";
    rep.verdicts.push_back(os.str());
    rep.pass = false;
    return;
  }
  try {
    const SlopeFit fit = fit_log_log(eps, vals);
    rep.fits[fit_name] = fit;
    const bool ok = fit.slope >= lo && fit.slope <= hi;
    os << (ok ? "PASS " : "FAIL ") << fit_name << ": slope " << std::setprecision(4)
       << fit.slope << " (required";
    if (std::isfinite(lo)) os << " >= " << lo;
    if (std::isfinite(hi)) os << " <= " << hi;
    os << "), max residual " << fit.max_abs_residual;
    rep.pass = rep.pass && ok;
  } catch (const Error& e) {
    os << "FAIL " << fit_name << ": " << e.what();
    rep.pass = false;
  }
  rep.verdicts.push_back(os.str());
}

RunRecord record_from(const std::string& label, const LatticeRun& run, const ModelSetup& m,
                      const ExperimentConfig& cfg) {
  RunRecord r;
  r.label = label;
  r.eps = run.eps;
  r.wall_seconds = run.wall_seconds;
  r.values = {{"t_end", run.t_end},
              {"sites", static_cast<double>(run.sites)},
              {"sup_error", run.sup_error},
              {"normU0", run.normU0},
              {"normQ0", run.normQ0},
              {"gauge_max", run.gauge_max},
              {"delta", run.delta},
              {"coercive_checks", static_cast<double>(run.coercive_checks)},
              {"coercive_violations", static_cast<double>(run.coercive_violations)},
              {"hamiltonian_drift", run.hamiltonian_drift},
              {"compat_correction", run.compat_correction},
              {"phi_bound", run.phi_bound},
              {"slow_n", static_cast<double>(m.slow_grid.size())},
              {"slow_dx", m.slow_grid.dx()},
              {"xi_n", m.g0 ? static_cast<double>(m.xi_grid.size()) : 0.0},
              {"lattice_dt", cfg.lattice_step(run.eps)}};
  return r;
}

RunRecord excluded_record(const std::string& label, double eps, const std::string& why) {
  RunRecord r;
  r.label = label;
  r.eps = eps;
  r.excluded = true;
  r.note = why;
  return r;
}

void write_series_file(const ExperimentConfig& cfg, const std::string& label,
                       const LatticeRun& run) {
  if (!cfg.write_series) return;
  std::filesystem::create_directories(cfg.output_dir);
  run.series.write_csv(std::filesystem::path(cfg.output_dir) /
                       ("series_" + label + "_eps" + eps_tag(run.eps) + ".csv"));
}

// Sweep of lattice runs over eps_list with one setup per eps.
void lattice_sweep(ExperimentReport& rep, const ExperimentConfig& cfg, const std::string& label,
                   const std::function<double(double)>& horizon, double perturbation_exponent,
                   bool track_kink, std::vector<LatticeRun>* runs_out = nullptr) {
  const std::size_t n = cfg.eps_list.size();
  std::vector<RunRecord> recs(n);
  std::vector<LatticeRun> runs(n);
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    const double eps = cfg.eps_list[i];
    const double pnorm = perturbation_exponent > 0.0 ? std::pow(eps, perturbation_exponent) : 0.0;
    try {
      const ModelSetup m = build_model(cfg, eps, horizon(eps), pnorm);
      runs[i] = run_lattice_case(cfg, m, track_kink);
      recs[i] = record_from(label, runs[i], m, cfg);
      if (track_kink) recs[i].values.emplace_back("kink_distance", runs[i].kink_distance);
      write_series_file(cfg, label, runs[i]);
    } catch (const BoundaryContaminated& e) {
      recs[i] = excluded_record(label, eps, e.what());
      runs[i].eps = eps;
      runs[i].sup_error = std::nan("");
    }
  });
  for (auto& r : recs) {
    if (r.excluded) rep.notes.push_back(label + " eps=" + eps_tag(r.eps) + " excluded: " + r.note);
    rep.runs.push_back(std::move(r));
  }
  if (runs_out) *runs_out = std::move(runs);
}

void coercivity_verdict(ExperimentReport& rep, const std::string& label) {
  std::size_t checks = 0, bad = 0;
  for (const auto& r : rep.runs)
    if (r.label == label && !r.excluded) {
      checks += static_cast<std::size_t>(r.value("coercive_checks"));
      bad += static_cast<std::size_t>(r.value("coercive_violations"));
    }
  std::ostringstream os;
  const bool ok = bad == 0 && checks > 0;
  os << (ok ? "PASS " : "FAIL ") << label << " coercivity: " << (checks - bad) << "/" << checks
     << " checkpoints satisfy ||Q||^2 + ||U||^2 <= 4E";
  rep.verdicts.push_back(os.str());
  rep.pass = rep.pass && ok;
}

} // namespace

ExperimentKind parse_experiment_kind(const std::string& s) {
  if (s == "residual-scaling" || s == "residual_scaling") return ExperimentKind::residual_scaling;
  if (s == "theorem5") return ExperimentKind::theorem5;
  if (s == "metastability") return ExperimentKind::metastability;
  if (s == "coercivity") return ExperimentKind::coercivity;
  if (s == "selftest") return ExperimentKind::selftest;
  throw ConfigError("unknown experiment '" + s + "'");
}

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::residual_scaling: return "residual-scaling";
    case ExperimentKind::theorem5: return "theorem5";
    case ExperimentKind::metastability: return "metastability";
    case ExperimentKind::coercivity: return "coercivity";
    case ExperimentKind::selftest: return "selftest";
  }
  return "?";
}

std::string to_string(GProfile g) {
  switch (g) {
    case GProfile::none: return "none";
    case GProfile::gardner_soliton: return "gardner_soliton";
    case GProfile::gaussian: return "gaussian";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  if (eps_list.empty()) throw ConfigError("config: eps_list is empty");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0 && eps_list[i] < 1.0))
      throw ConfigError("config: eps values must lie in (0,1)");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
      throw ConfigError("config: eps_list must be strictly decreasing");
  }
  if (!(tau0 > 0.0)) throw ConfigError("config: tau0 must be positive");
  if (!(r > 0.0 && r < 0.5)) throw ConfigError("config: r must lie in (0, 1/2)");
  if (!(K > 0.0)) throw ConfigError("config: K must be positive");
  if (!(kink_v > 0.0)) throw ConfigError("config: kink_v must be positive");
  if (!(g_width > 0.0)) throw ConfigError("config: g_width must be positive");
  if (!(slow_dx > 0.0) || !(slow_length > 0.0)) throw ConfigError("config: bad slow grid");
  if (!(dt_slow > 0.0)) throw ConfigError("config: dt_slow must be positive");
  if (lattice_dt < 0.0 || lattice_dt > 0.1)
    throw ConfigError("config: lattice_dt must lie in [0, 0.1]");
  if (checkpoints < 1) throw ConfigError("config: checkpoints must be >= 1");
  if (!(panel_width > 0.0)) throw ConfigError("config: panel_width must be positive");
  if (threads < 1) throw ConfigError("config: threads must be >= 1");
  if (kind == ExperimentKind::metastability && g_profile != GProfile::none)
    throw ConfigError("config: metastability runs require g_profile = none");
}

double ExperimentConfig::lattice_step(double eps) const {
  return lattice_dt > 0.0 ? lattice_dt : std::min(0.05, eps);
}

double ExperimentConfig::metastable_horizon(double eps) const {
  return r / K * std::abs(std::log(eps)) / (eps * eps * eps);
}

std::string ExperimentConfig::echo() const {
  std::ostringstream os;
  os << std::setprecision(17);
  std::set<std::string> dflt(defaulted.begin(), defaulted.end());
  auto line = [&](const std::string& k, const auto& v) {
    os << k << " = " << v << (dflt.count(k) ? "    # default" : "") << "\n";
  };
  std::ostringstream el;
  el << std::setprecision(17);
  for (std::size_t i = 0; i < eps_list.size(); ++i) el << (i ? "," : "") << eps_list[i];
  line("eps_list", el.str());
  line("tau0", tau0);
  line("r", r);
  line("K", K);
  line("kink_v", kink_v);
  line("g_profile", to_string(g_profile));
  line("g_amplitude", g_amplitude);
  line("g_width", g_width);
  line("g_center", g_center);
  line("soliton_speed", soliton_speed);
  line("slow_dx", slow_dx);
  line("slow_length", slow_length);
  line("dt_slow", dt_slow);
  line("lattice_dt", lattice_dt);
  line("integrator", integrator == Integrator::rk4 ? "rk4" : "strang");
  line("checkpoints", checkpoints);
  line("panel_width", panel_width);
  line("quadrature_check", quadrature_check ? "true" : "false");
  line("perturbed_run", perturbed_run ? "true" : "false");
  line("output_dir", output_dir);
  line("seed", seed);
  line("threads", threads);
  line("write_series", write_series ? "true" : "false");
  line("write_snapshots", write_snapshots ? "true" : "false");
  return os.str();
}

ExperimentConfig parse_config(const std::string& text, ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  switch (kind) {
    case ExperimentKind::theorem5:
    case ExperimentKind::coercivity: c.g_profile = GProfile::gardner_soliton; break;
    case ExperimentKind::metastability: c.eps_list = {0.1, 0.07}; break;
    default: break;
  }
  if (kind == ExperimentKind::coercivity) c.eps_list = {0.2, 0.14, 0.1};

  std::set<std::string> seen;
  std::stringstream ss(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(ss, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    const auto& table = setters();
    const auto it = std::find_if(table.begin(), table.end(),
                                 [&](const auto& e) { return e.first == key; });
    if (it == table.end()) throw ConfigError("config: unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError("config: duplicate key '" + key + "'");
    it->second(c, key, value);
  }
  for (const auto& [k, _] : setters())
    if (!seen.count(k)) c.defaulted.push_back(k);
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentKind kind) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), kind);
}

SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points) {
  const std::size_t n = points.size();
  if (n < 3) throw DegenerateFit("fit_slope: need at least 3 points");
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : points) {
    if (!std::isfinite(x) || !std::isfinite(y)) throw FitUnstable("fit_slope: non-finite point");
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  double spread = 0.0;
  for (const auto& p : points) spread = std::max(spread, std::abs(p.first));
  if (!(sxx > 1e-24 * std::max(1.0, spread * spread)))
    throw DegenerateFit("fit_slope: abscissae coincide");
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  for (const auto& [x, y] : points)
    f.max_abs_residual = std::max(f.max_abs_residual, std::abs(y - f.slope * x - f.intercept));
  f.points = points;
  return f;
}

SlopeFit fit_log_log(const std::vector<double>& eps, const std::vector<double>& values,
                     double max_residual) {
  if (eps.size() != values.size()) throw ConfigError("fit_log_log: size mismatch");
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(values[i] > 0.0) || !(eps[i] > 0.0))
      throw FitUnstable("fit_log_log: non-positive value, logarithm undefined");
    pts.emplace_back(std::log(eps[i]), std::log(values[i]));
  }
  SlopeFit f = fit_slope(pts);
  if (f.max_abs_residual > max_residual)
    throw FitUnstable("fit_log_log: residual " + std::to_string(f.max_abs_residual) +
                      " exceeds " + std::to_string(max_residual));
  return f;
}

long window_half_width(double eps, double t_end, double c) {
  return static_cast<long>(std::ceil((1.0 + c) * t_end + 20.0 / eps));
}

ModelSetup build_model(const ExperimentConfig& cfg, double eps, double t_end,
                       double perturbation_norm) {
  if (!(t_end > 0.0)) throw ConfigError("build_model: horizon must be positive");
  const UniformGrid sg = make_slow_grid(eps, cfg.slow_length, cfg.slow_dx);
  const long H = window_half_width(eps, t_end, wave_speed(eps, cfg_f_plus(cfg)));
  std::optional<BackgroundField> f0;
  if (perturbation_norm > 0.0) {
    const auto p = perturbation_shape(cfg.seed);
    const TanhReference ref = TanhReference::kink(cfg.kink_v, true);
    const LatticeSeq pl = sample_to_lattice(p, eps, -H, H);
    // u carries eps * w(eps n)
    const double beta = perturbation_norm / (eps * l2_norm(pl));
    f0.emplace(BackgroundField::from_total(
        sg, ref, [&](double X) { return ref.value(X, 0.0) + beta * p(X); }, 0.0));
  } else {
    f0.emplace(BackgroundField::kink(sg, cfg.kink_v, 0.0, true));
  }
  ModelSetup m{eps, sg, *f0, make_g(cfg, sg, f0->f_plus()), wave_speed(eps, f0->f_plus()),
               t_end, H, sg};
  if (m.g0) m.xi_grid = make_xi_grid(sg.dx(), eps * static_cast<double>(H), eps * t_end,
                                     sg.length() / 2.0);
  return m;
}

LatticeRun run_lattice_case(const ExperimentConfig& cfg, const ModelSetup& m,
                            bool track_kink_distance) {
  const auto t0 = Clock::now();
  const double eps = m.eps, e3 = eps * eps * eps;
  const int ncp = cfg.checkpoints;
  std::vector<double> ts;
  for (int k = 1; k <= ncp; ++k) ts.push_back(m.t_end * k / ncp);

  std::vector<PhiPsiField> phis;
  LatticeRun run;
  run.eps = eps;
  run.t_end = m.t_end;
  if (m.g0) {
    std::vector<double> Ts{0.0};
    for (double t : ts) Ts.push_back(eps * t);
    phis = solve_phi_psi(m.f0, *m.g0, m.xi_grid, Ts, eps, m.c, phi_config(cfg));
    run.phi_bound = phi_uniform_bound_report(phis, xk_norm(m.f0.total(), 2),
                                             sobolev_norm(m.g0->values(), 2), 2);
  }
  auto phi_at = [&](std::size_t i) -> std::optional<PhiPsiField> {
    if (phis.empty()) return std::nullopt;
    return phis[i];
  };

  const AnsatzFields a0 = AnsatzFields::make(eps, m.f0, m.g0, phi_at(0));
  const LatticeState s0 = initial_lattice_state(a0, -m.half_width, m.half_width,
                                                &run.compat_correction);
  run.sites = static_cast<long>(s0.size());
  const double H0 = hamiltonian(s0);
  const double scale = std::max(std::abs(H0), 1e-300);

  auto kink_distance = [&](const LatticeState& s, double tau) {
    const AnsatzFields ak =
        AnsatzFields::make(eps, BackgroundField::kink(m.slow_grid, cfg.kink_v, tau, true));
    const AnsatzSamples an = sample_ansatz(ak, s.t, s.n_min(), s.n_max());
    double su = 0.0, sv = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
      const double U = s.u[j] - an.u[j];
      const double qn = j + 1 < s.size() ? s.q[j + 1] : s.background.q_right;
      const double V = (qn - s.q[j]) - an.udot[j];
      su += U * U;
      sv += V * V;
    }
    return std::sqrt(su) + std::sqrt(sv);
  };

  auto account = [&](const AnsatzFields& a, const LatticeState& s, double gauge) {
    const CheckpointDiagnostics d = diagnose(a, s, gauge);
    run.series.push(d);
    run.approx_error.push_back(d.approx_error);
    run.sup_error = std::max(run.sup_error, d.approx_error);
    run.gauge_max = std::max(run.gauge_max, gauge);
    ++run.coercive_checks;
    if (!d.coercive) ++run.coercive_violations;
    run.delta = std::max(run.delta, field_delta(a.f, a.g));
    run.hamiltonian_drift =
        std::max(run.hamiltonian_drift, std::abs(hamiltonian(s) - H0) / scale);
    if (track_kink_distance)
      run.kink_distance = std::max(run.kink_distance, kink_distance(s, a.f.tau()));
    return d;
  };

  const CheckpointDiagnostics d0 = account(a0, s0, boundary_gauge(s0));
  run.normU0 = d0.normU;
  run.normQ0 = d0.normQ;

  const SolverConfig sc = solver_config(cfg);
  MkdvStepper fs(m.f0, sc);
  std::optional<GardnerStepper> gs;
  if (m.g0) gs.emplace(*m.g0, m.f0.f_plus(), sc);

  EvolveConfig ec;
  ec.dt = cfg.lattice_step(eps);
  ec.integrator = cfg.integrator;
  std::size_t idx = 0;
  evolve_lattice(s0, ts, ec, [&](const LatticeState& s, double gauge) {
    ++idx;
    const double tau = e3 * s.t;
    fs.advance_to(tau);
    std::optional<LocalizedField> g;
    if (gs) {
      gs->advance_to(tau);
      g = gs->state();
    }
    const AnsatzFields a = AnsatzFields::make(eps, fs.state(), std::move(g), phi_at(idx));
    account(a, s, gauge);
    if (cfg.write_snapshots) {
      std::filesystem::create_directories(cfg.output_dir);
      write_csv(std::filesystem::path(cfg.output_dir) /
                    ("snapshot_eps" + eps_tag(eps) + "_t" + eps_tag(s.t) + "_u.csv"),
                s.u);
    }
  });
  run.wall_seconds = seconds_since(t0);
  return run;
}

double RunRecord::value(const std::string& key) const {
  for (const auto& [k, v] : values)
    if (k == key) return v;
  throw ConfigError("RunRecord: no value '" + key + "'");
}

ExperimentReport run_residual_scaling(const ExperimentConfig& cfg) {
  const auto t0 = Clock::now();
  ExperimentReport rep;
  rep.config = cfg;
  const std::size_t n = cfg.eps_list.size();
  if (n < 3) throw DegenerateFit("run_residual_scaling: need at least 3 eps values");
  std::vector<RunRecord> recs(n);
  const SolverConfig sc = solver_config(cfg);
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    const auto ti = Clock::now();
    const double eps = cfg.eps_list[i], e3 = eps * eps * eps;
    const double t_end = cfg.tau0 / e3;
    const ModelSetup m = build_model(cfg, eps, t_end);
    const std::vector<double> ts{0.0, t_end / 2.0, t_end};
    std::vector<PhiPsiField> phis;
    if (m.g0) {
      std::vector<double> Ts;
      for (double t : ts) Ts.push_back(eps * t);
      phis = solve_phi_psi(m.f0, *m.g0, m.xi_grid, Ts, eps, m.c, phi_config(cfg));
    }
    MkdvStepper fs(m.f0, sc);
    std::optional<GardnerStepper> gs;
    if (m.g0) gs.emplace(*m.g0, m.f0.f_plus(), sc);
    double worst = 0.0, r1max = 0.0, r2max = 0.0, delta = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
      fs.advance_to(e3 * ts[k]);
      std::optional<LocalizedField> g;
      if (gs) {
        gs->advance_to(e3 * ts[k]);
        g = gs->state();
      }
      std::optional<PhiPsiField> phi;
      if (!phis.empty()) phi = phis[k];
      const AnsatzFields a = AnsatzFields::make(eps, fs.state(), std::move(g), std::move(phi));
      const double r1 = l2_norm(residual_res1(a, ts[k], -m.half_width, m.half_width));
      const double r2 = l2_norm(residual_res2(a, ts[k], -m.half_width, m.half_width));
      worst = std::max(worst, r1 + r2);
      r1max = std::max(r1max, r1);
      r2max = std::max(r2max, r2);
      delta = std::max(delta, field_delta(a.f, a.g));
    }
    RunRecord r;
    r.label = "residual";
    r.eps = eps;
    r.values = {{"t_end", t_end},
                {"sites", static_cast<double>(2 * m.half_width + 1)},
                {"residual", worst},
                {"res1", r1max},
                {"res2", r2max},
                {"delta", delta},
                {"scaled", worst / (std::pow(eps, 5.5) * (delta + std::pow(delta, 5)))},
                {"slow_n", static_cast<double>(m.slow_grid.size())},
                {"slow_dx", m.slow_grid.dx()},
                {"xi_n", m.g0 ? static_cast<double>(m.xi_grid.size()) : 0.0}};
    r.wall_seconds = seconds_since(ti);
    recs[i] = std::move(r);
  });
  rep.runs = std::move(recs);
  slope_verdict(rep, "residual", "residual", "residual", 5.2, 5.8);
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

ExperimentReport run_theorem5(const ExperimentConfig& cfg) {
  const auto t0 = Clock::now();
  ExperimentReport rep;
  rep.config = cfg;
  const double inf = std::numeric_limits<double>::infinity();
  auto horizon = [&](double eps) { return cfg.tau0 / (eps * eps * eps); };

  ExperimentConfig kink = cfg;
  kink.g_profile = GProfile::none;
  lattice_sweep(rep, kink, "kink", horizon, 0.0, false);
  slope_verdict(rep, "kink", "sup_error", "kink", 2.2, inf);
  slope_verdict(rep, "kink", "normQ0", "kink_Q0", 2.3, inf);
  coercivity_verdict(rep, "kink");

  if (cfg.g_profile != GProfile::none) {
    lattice_sweep(rep, cfg, "counter", horizon, 0.0, false);
    slope_verdict(rep, "counter", "sup_error", "counter", 2.2, inf);
    coercivity_verdict(rep, "counter");
    bool finite = true;
    for (const auto& r : rep.runs)
      if (r.label == "counter" && !r.excluded)
        finite = finite && std::isfinite(r.value("phi_bound"));
    rep.verdicts.push_back(std::string(finite ? "PASS" : "FAIL") +
                           " counter phi uniform-bound report finite");
    rep.pass = rep.pass && finite;
  }
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

ExperimentReport run_metastability(const ExperimentConfig& cfg) {
  const auto t0 = Clock::now();
  if (cfg.g_profile != GProfile::none)
    throw ConfigError("run_metastability: g_profile must be none");
  ExperimentReport rep;
  rep.config = cfg;
  auto horizon = [&](double eps) { return cfg.metastable_horizon(eps); };
  std::vector<LatticeRun> base, pert;
  lattice_sweep(rep, cfg, "kink", horizon, 0.0, false, &base);
  if (cfg.perturbed_run) lattice_sweep(rep, cfg, "perturbed", horizon, 2.5, true, &pert);

  const double p = 2.5 - cfg.r;
  const LatticeRun& ref = base.front();
  if (!std::isfinite(ref.sup_error) || !(ref.sup_error > 0.0)) {
    rep.pass = false;
    rep.verdicts.push_back("FAIL calibration run at eps=" + eps_tag(ref.eps) + " unavailable");
    rep.wall_seconds = seconds_since(t0);
    return rep;
  }
  const double C = ref.sup_error / std::pow(ref.eps, p);
  {
    std::ostringstream os;
    os << std::setprecision(6) << "envelope C = " << C << " calibrated at eps = " << ref.eps
       << " with exponent " << p;
    rep.notes.push_back(os.str());
  }
  for (auto& rec : rep.runs) {
    if (rec.excluded) continue;
    const double env = C * std::pow(rec.eps, p);
    rec.values.emplace_back("horizon", cfg.metastable_horizon(rec.eps));
    rec.values.emplace_back("envelope", env);
    const double factor = rec.label == "perturbed" ? 2.0 : 1.0;
    const double err = rec.value("sup_error");
    const bool ok = err <= factor * env * (1.0 + 1e-12);
    std::ostringstream os;
    os << (ok ? "PASS " : "FAIL ") << rec.label << " eps=" << eps_tag(rec.eps)
       << std::setprecision(4) << ": sup error " << err << " vs " << factor
       << " x envelope " << factor * env << " (ratio " << err / env << ")";
    if (rec.label == "perturbed")
      os << ", distance to kink ansatz " << rec.value("kink_distance");
    rep.verdicts.push_back(os.str());
    rep.pass = rep.pass && ok;
  }
  for (const auto& rec : rep.runs)
    if (rec.excluded) {
      rep.verdicts.push_back("FAIL " + rec.label + " eps=" + eps_tag(rec.eps) +
                             " excluded by the boundary guard");
      rep.pass = false;
    }
  coercivity_verdict(rep, "kink");
  if (cfg.perturbed_run) coercivity_verdict(rep, "perturbed");
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

ExperimentReport run_coercivity(const ExperimentConfig& cfg) {
  const auto t0 = Clock::now();
  ExperimentReport rep;
  rep.config = cfg;
  const std::string label = cfg.g_profile == GProfile::none ? "kink" : "counter";
  lattice_sweep(rep, cfg, label, [&](double eps) { return cfg.tau0 / (eps * eps * eps); },
                0.0, false);
  coercivity_verdict(rep, label);
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  switch (cfg.kind) {
    case ExperimentKind::residual_scaling: return run_residual_scaling(cfg);
    case ExperimentKind::theorem5: return run_theorem5(cfg);
    case ExperimentKind::metastability: return run_metastability(cfg);
    case ExperimentKind::coercivity: return run_coercivity(cfg);
    case ExperimentKind::selftest: return run_selftest(cfg);
  }
  throw ConfigError("run_experiment: unknown kind");
}

void write_report(const ExperimentReport& rep) {
  const std::filesystem::path dir(rep.config.output_dir);
  std::filesystem::create_directories(dir);
  const std::string exp = to_string(rep.config.kind);

  {
    std::ofstream out(dir / "summary.csv");
    std::vector<std::string> keys;
    for (const auto& r : rep.runs)
      for (const auto& [k, _] : r.values)
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
    out << "# case,eps,excluded";
    for (const auto& k : keys) out << "," << k;
    out << "\n";
    for (const auto& r : rep.runs) {
      out << r.label << "," << format_real(r.eps) << "," << (r.excluded ? 1 : 0);
      for (const auto& k : keys) {
        const auto it = std::find_if(r.values.begin(), r.values.end(),
                                     [&](const auto& e) { return e.first == k; });
        out << "," << (it == r.values.end() ? std::string("nan") : format_real(it->second));
      }
      out << "\n";
    }
  }

  {
    std::ofstream out(dir / ("slope_" + exp + ".dat"));
    for (const auto& [name, fit] : rep.fits) {
      out << "# fit " << name << " slope " << format_real(fit.slope) << " intercept "
          << format_real(fit.intercept) << " max_abs_residual "
          << format_real(fit.max_abs_residual) << "\n# log_eps log_value\n";
      for (const auto& [x, y] : fit.points) out << format_real(x) << " " << format_real(y) << "\n";
      out << "\n\n";
    }
  }

  std::ofstream out(dir / "report.txt");
  out << "experiment: " << exp << "\n";
  out << "overall: " << (rep.pass ? "PASS" : "FAIL") << "\n";
  out << "wall time: " << std::setprecision(4) << rep.wall_seconds << " s\n\n";
  out << "verdicts:\n";
  for (const auto& v : rep.verdicts) out << "  " << v << "\n";
  out << "\nconfiguration:\n" << rep.config.echo();
  if (!rep.config.defaulted.empty()) {
    out << "defaults applied to " << rep.config.defaulted.size() << " keys:";
    for (const auto& k : rep.config.defaulted) out << " " << k;
    out << "\n";
  }
  out << "\nruns:\n";
  for (const auto& r : rep.runs) {
    out << "  [" << r.label << "] eps=" << eps_tag(r.eps);
    if (r.excluded) {
      out << " EXCLUDED: " << r.note << "\n";
      continue;
    }
    out << " wall=" << std::setprecision(4) << r.wall_seconds << "s";
    out << std::setprecision(6);
    for (const auto& [k, v] : r.values) out << " " << k << "=" << v;
    out << "\n";
  }
  double gmax = 0.0;
  for (const auto& r : rep.runs)
    for (const auto& [k, v] : r.values)
      if (k == "gauge_max") gmax = std::max(gmax, v);
  out << "\nguard-gauge maximum over all runs: " << std::setprecision(6) << gmax << "\n";
  if (!rep.notes.empty()) {
    out << "\nnotes:\n";
    for (const auto& n : rep.notes) out << "  " << n << "\n";
  }
}

} // namespace kinklab
