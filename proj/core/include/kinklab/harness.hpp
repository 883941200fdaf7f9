#pragma once

#include "kinklab/lattice.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace kinklab {

enum class ExperimentKind { residual_scaling, theorem5, metastability, coercivity, selftest };
enum class GProfile { none, gardner_soliton, gaussian };

ExperimentKind parse_experiment_kind(const std::string& s);
std::string to_string(ExperimentKind k);
std::string to_string(GProfile g);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::theorem5;
  std::vector<double> eps_list{0.2, 0.14, 0.1, 0.07, 0.05};
  double tau0 = 1.0;
  double r = 0.25;
  double K = 1.0;
  double kink_v = 1.0 / 24.0;
  GProfile g_profile = GProfile::none;
  double g_amplitude = 0.3;
  double g_width = 2.0;
  double g_center = 0.0;
  double soliton_speed = 1.0 / 48.0;
  double slow_dx = 0.05;
  double slow_length = 80.0;
  double dt_slow = 1e-3;
  double lattice_dt = 0.0;  // 0 selects min(0.05, eps)
  Integrator integrator = Integrator::rk4;
  int checkpoints = 16;
  double panel_width = 0.01;
  bool quadrature_check = false;
  bool perturbed_run = true;
  std::string output_dir = "kinklab_out";
  std::uint64_t seed = 1;
  int threads = 1;
  bool write_series = true;
  bool write_snapshots = false;
  /// Keys that were not present in the parsed text and kept their default.
  std::vector<std::string> defaulted;

  void validate() const;
  /// Lattice time step actually used for a given eps.
  double lattice_step(double eps) const;
  /// Meta-stability horizon r K^{-1} eps^{-3} |log eps|.
  double metastable_horizon(double eps) const;
  /// key=value lines reproducing this configuration.
  std::string echo() const;
};

/// Flat key=value text; '#' starts a comment. Unknown keys throw ConfigError.
ExperimentConfig parse_config(const std::string& text,
                              ExperimentKind kind = ExperimentKind::theorem5);
ExperimentConfig load_config(const std::filesystem::path& path,
                             ExperimentKind kind = ExperimentKind::theorem5);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_abs_residual = 0.0;
  std::vector<std::pair<double, double>> points;
};

/// Ordinary least squares; DegenerateFit for fewer than 3 points or coincident abscissae.
SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points);
/// Fits log(value) against log(eps); FitUnstable when a value is not positive or the
/// largest residual exceeds max_residual.
SlopeFit fit_log_log(const std::vector<double>& eps, const std::vector<double>& values,
                     double max_residual = 0.5);

/// Geometry and fields of one eps-run.
struct ModelSetup {
  double eps = 0.0;
  UniformGrid slow_grid{0.0, 1.0, 16};
  BackgroundField f0;
  std::optional<LocalizedField> g0;
  double c = 1.0;
  double t_end = 0.0;
  long half_width = 0;
  UniformGrid xi_grid{0.0, 1.0, 16};
};

/// f0 is the co-moving kink plus, when perturbation_norm > 0, a seeded smooth bump scaled
/// so the induced strain perturbation has l2 norm perturbation_norm.
ModelSetup build_model(const ExperimentConfig& cfg, double eps, double t_end,
                       double perturbation_norm = 0.0);

/// Symmetric window half-width (1 + c) t_end + 20/eps, so no signal of the modulated waves
/// reaches the clamped ends within the horizon.
long window_half_width(double eps, double t_end, double c = 1.0);

/// One lattice run compared with the ansatz at evenly spaced checkpoints.
struct LatticeRun {
  double eps = 0.0;
  double t_end = 0.0;
  long sites = 0;
  ErrorSeries series;
  std::vector<double> approx_error;  // per checkpoint, t = 0 first
  double sup_error = 0.0;
  double normQ0 = 0.0;
  double normU0 = 0.0;
  double gauge_max = 0.0;
  double delta = 0.0;
  double compat_correction = 0.0;
  std::size_t coercive_checks = 0;
  std::size_t coercive_violations = 0;
  double hamiltonian_drift = 0.0;
  /// sup distance to the unperturbed kink ansatz (perturbed runs only)
  double kink_distance = 0.0;
  double phi_bound = 0.0;
  double wall_seconds = 0.0;
};

LatticeRun run_lattice_case(const ExperimentConfig& cfg, const ModelSetup& m,
                            bool track_kink_distance = false);

struct RunRecord {
  std::string label;
  double eps = 0.0;
  bool excluded = false;
  std::string note;
  std::vector<std::pair<std::string, double>> values;
  double wall_seconds = 0.0;
  double value(const std::string& key) const;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<RunRecord> runs;
  std::map<std::string, SlopeFit> fits;
  std::vector<std::string> verdicts;
  bool pass = true;
  double wall_seconds = 0.0;
  std::vector<std::string> notes;
};

ExperimentReport run_residual_scaling(const ExperimentConfig& cfg);
ExperimentReport run_theorem5(const ExperimentConfig& cfg);
ExperimentReport run_metastability(const ExperimentConfig& cfg);
ExperimentReport run_coercivity(const ExperimentConfig& cfg);
ExperimentReport run_selftest(const ExperimentConfig& cfg);
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// summary.csv, report.txt and slope_<experiment>.dat in cfg.output_dir.
void write_report(const ExperimentReport& rep);

} // namespace kinklab
