#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "nlslab/runio.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<double> eps_floor;
};

nlslab::RunConfig load(const Overrides& ov) {
  nlslab::RunConfig c = nlslab::parse_run_config(ov.config_path);
  if (!ov.out_dir.empty()) c.out_dir = ov.out_dir;
  if (ov.seed) {
    c.seed = *ov.seed;
    c.solver.seed = *ov.seed;
  }
  if (ov.threads) c.threads = *ov.threads;
  if (ov.eps_floor) {
    if (*ov.eps_floor <= 0)
      throw nlslab::ConfigError("--eps-floor must be positive");
    c.solver.eps_floor_reduced = *ov.eps_floor;
    c.solver.eps_floor_full = *ov.eps_floor;
  }
  return c;
}

void add_common(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--config", ov.config_path, "JSON run configuration")
      ->required();
  cmd->add_option("--out", ov.out_dir, "output directory (overrides config)");
  cmd->add_option("--seed", ov.seed, "RNG seed (overrides config)");
  cmd->add_option("--threads", ov.threads, "worker threads");
  cmd->add_option("--eps-floor", ov.eps_floor,
                  "override both solver resolution floors");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral shell ground-state laboratory"};
  app.require_subcommand(1);

  Overrides ov;
  std::string result_base;

  CLI::App* symbol_check = app.add_subcommand(
      "symbol-check", "verify the two-sided symbol bounds");
  CLI::App* solve =
      app.add_subcommand("solve", "ground states for each class and eps");
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "eps sweeps with rate fits per class");
  CLI::App* chain =
      app.add_subcommand("chain", "symmetry-breaking level ordering");
  CLI::App* diagnose = app.add_subcommand(
      "diagnose", "concentration and trace roughness of a saved result");
  CLI::App* trial =
      app.add_subcommand("trial", "explicit competitor upper bounds");
  CLI::App* interp_check = app.add_subcommand(
      "interp-check", "layer-cake interpolation bound over a decay corpus");

  for (CLI::App* cmd : {symbol_check, solve, sweep_cmd, chain, diagnose,
                        trial, interp_check})
    add_common(cmd, ov);
  diagnose
      ->add_option("--result", result_base,
                   "basename of a saved solve result")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const nlslab::RunConfig config = load(ov);
    if (symbol_check->parsed()) return nlslab::cmd_symbol_check(config);
    if (solve->parsed()) return nlslab::cmd_solve(config);
    if (sweep_cmd->parsed()) return nlslab::cmd_sweep(config);
    if (chain->parsed()) return nlslab::cmd_chain(config);
    if (diagnose->parsed()) return nlslab::cmd_diagnose(config, result_base);
    if (trial->parsed()) return nlslab::cmd_trial(config);
    if (interp_check->parsed()) return nlslab::cmd_interp_check(config);
  } catch (const nlslab::IntegrityError& e) {
    std::fprintf(stderr, "integrity error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
