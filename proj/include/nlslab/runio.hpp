#pragma once

#include <stdexcept>

#include "nlslab/diagnostics.hpp"

namespace nlslab {

/// Invalid or malformed configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// Persisted-artifact hash mismatch (CLI exit code 3).
struct IntegrityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One experiment description: problem, symbol, eps schedule, classes,
/// solver knobs, diagnostics toggles, and output placement.
struct RunConfig {
  ProblemParams params;
  SymbolSpec symbol = SymbolSpec::biharmonic();
  std::vector<double> eps_list;
  std::vector<SymmetryClass> classes;
  SolveConfig solver;
  // Diagnostics schedule: delta_eps = eps^{delta_exponent}.
  bool run_concentration = false;
  bool run_roughness = false;
  int roughness_t = 1;
  double delta_exponent = 0.25;
  // Interpolation-check corpus.
  int corpus_count = 100;
  double q_exp = 4.0;
  double r_exp = 3.0;
  // Admissibility check.
  double adm_s = 2.0;
  double adm_gamma = 2.0;
  double adm_ratio_threshold = 20.0;
  std::string out_dir = "out";
  std::uint64_t seed = 2026;
  int threads = 1;
};

/// Parses and validates a JSON config file; every module precondition is
/// checked before any compute starts and the first violated constraint is
/// named in the ConfigError.
RunConfig parse_run_config(const std::string& path);

/// SHA-256 of a file's bytes, lowercase hex.
std::string sha256_file(const std::string& path);

/// RFC-4180 CSV with '.' decimals and 17 significant digits.
void write_csv(const std::string& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// Persists a solve result as base.json (metadata, config echo, content
/// hashes) plus the minimizer in the field format (base_field.{json,csv}).
void save_solve_result(const SolveResult& result, const std::string& base);
/// Loads and re-verifies the content hashes; throws IntegrityError on any
/// mismatch.
SolveResult load_solve_result(const std::string& base);

/// Subcommand drivers; each returns the process exit code (0 ok,
/// 1 scientific-check failure, 2 config error, 3 integrity error) and
/// writes its report files plus a manifest into config.out_dir.
int cmd_symbol_check(const RunConfig& config);
int cmd_solve(const RunConfig& config);
int cmd_sweep(const RunConfig& config);
int cmd_chain(const RunConfig& config);
int cmd_diagnose(const RunConfig& config, const std::string& result_base);
int cmd_trial(const RunConfig& config);
int cmd_interp_check(const RunConfig& config);

}  // namespace nlslab
