#include "kinklab/errors.hpp"
#include "kinklab/harness.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

int main(int argc, char** argv) {
  CLI::App app{"kinklab: FPUT kink and counter-propagating wave experiments"};
  std::string experiment;
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
  app.add_option("experiment", experiment,
                 "residual-scaling | theorem5 | metastability | coercivity | selftest")
      ->required();
  app.add_option("--config", config_path, "flat key=value configuration file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads for eps sweeps")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "random seed");
  CLI11_PARSE(app, argc, argv);

  try {
    const kinklab::ExperimentKind kind = kinklab::parse_experiment_kind(experiment);
    kinklab::ExperimentConfig cfg = config_path.empty()
                                        ? kinklab::parse_config("", kind)
                                        : kinklab::load_config(config_path, kind);
    if (out_dir) cfg.output_dir = *out_dir;
    if (threads) cfg.threads = *threads;
    if (seed) cfg.seed = *seed;
    cfg.validate();
    const kinklab::ExperimentReport rep = kinklab::run_experiment(cfg);
    kinklab::write_report(rep);
    for (const auto& v : rep.verdicts) std::cout << v << "\n";
    for (const auto& n : rep.notes) std::cout << "note: " << n << "\n";
    std::cout << (rep.pass ? "PASS" : "FAIL") << " " << experiment << " (" << rep.wall_seconds
              << " s), outputs in " << cfg.output_dir << "\n";
    return rep.pass ? 0 : 1;
  } catch (const kinklab::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
