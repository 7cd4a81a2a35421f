#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>

#include "nlslab/trial.hpp"

namespace nlslab {

/// Initializers for the fixed-point solver. The default multistart tries a
/// cap-localized trial, a radial trial projected into the class, and seeded
/// random shell noise; the random entry is what lets the full class leave
/// the radial symmetry stratum.
enum class InitKind { KnappTrial, RadialTrial, RandomShell, FromField };

struct SolveConfig {
  int max_iterations = 500;
  /// Convergence is declared on the Rayleigh quotient: relative change
  /// below this for 3 consecutive iterations.
  double rel_tolerance = 1e-9;
  int restarts = 3;
  std::uint64_t seed = 2026;
  /// Smallest eps the desk-scale grids resolve (shell width eps^{1/gamma}).
  double eps_floor_reduced = 1e-5;
  double eps_floor_full = 1e-4;
  double r_max = 8.0;
  /// When set, a single run from this initializer replaces the multistart.
  std::optional<InitKind> init;
  std::string init_file;  // basename for InitKind::FromField

  void validate() const;
};

struct SolveResult {
  SpectralField minimizer;  // p-normalized
  ProblemParams params;
  SymbolSpec symbol;
  SymmetryClass cls = SymmetryClass::Radial;
  double eps = 0.0;
  double rayleigh = 0.0;
  int iterations = 0;
  std::vector<double> trace;  // quotient per iteration, non-increasing
  bool converged = false;
  /// ||g u - R analyze(|u|^{p-2}u)||_2 / ||g u||_2 at the final iterate.
  double el_residual = kInf;
  /// Truncation-tail fraction of the final ||u||_p (reported, not enforced).
  double lp_tail_fraction = 0.0;
  /// Weighted l2 distance between the last two iterates (reported only;
  /// convergence is declared on the quotient).
  double last_step = 0.0;
  std::string note;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
  /// Range of R_i eps_i^{-slope} |log eps_i|^{-log_power_used}.
  double band_lo = 0.0, band_hi = 0.0;
  double log_power_used = 0.0;
};

struct SweepPoint {
  double eps = 0.0;
  double rayleigh = 0.0;
  bool converged = false;
};

struct SweepResult {
  ProblemParams params;
  SymmetryClass cls = SymmetryClass::Radial;
  std::vector<SweepPoint> points;  // eps strictly decreasing
  std::vector<SolveResult> solves;
  RateFit fit;
  bool fit_valid = false;  // needs >= 3 converged points
};

struct ChainEntry {
  SymmetryClass cls = SymmetryClass::Radial;
  int k = 0;  // block index for Gk entries
  double rayleigh = 0.0;
  double uncertainty = 0.0;
  bool converged = false;
  std::string label;
};

struct ChainGap {
  std::string lower_label, upper_label;
  double gap = 0.0;  // R(upper) - R(lower), positive when ordered
  double combined_uncertainty = 0.0;
  bool strict = false;
};

struct ChainReport {
  ProblemParams params;
  double eps = 0.0;
  std::vector<ChainEntry> entries;
  std::vector<ChainGap> gaps;
  /// "pass" (every inequality strict beyond uncertainty), "inconclusive"
  /// (ordered but within uncertainty, expected at large eps), or "invalid"
  /// (some class failed to converge).
  std::string verdict;
};

/// Spectral and physical grids plus the transform for one (class, eps)
/// problem, sized so the shell width eps^{1/gamma} is resolved spectrally
/// and the physical extent covers the minimizer's coherence scale.
struct Discretization {
  std::shared_ptr<const GridDesc> spec, phys;
  std::shared_ptr<FieldTransform> transform;
};
Discretization make_discretization(const ProblemParams& params,
                                   SymmetryClass cls, double eps,
                                   const SolveConfig& config);

/// q_eps(u) / ||u||_p^2 on the given discretization.
double rayleigh_quotient(const SpectralField& u, const SymbolSpec& symbol,
                         double eps, double p, const FieldTransform& t);

/// Linear interpolation of a spectral field onto a new grid of the same
/// symmetry class (nodes outside the old grid map to zero). Used for
/// warm starts across the eps-dependent grids.
SpectralField resample_spectral(const SpectralField& u,
                                std::shared_ptr<const GridDesc> grid);

/// Inverse-symbol fixed point u <- g^{-1} analyze(|u|^{p-2}u) with p-norm
/// renormalization and a monotonicity line search, best over restarts.
SolveResult solve_ground_state(const ProblemParams& params, double eps,
                               SymmetryClass cls, const SymbolSpec& symbol,
                               const SolveConfig& config);

/// Per-eps solves (warm-starting each from the previous minimizer), series
/// assembly, and a rate fit over the converged points.
SweepResult sweep(const ProblemParams& params, std::span<const double> eps_list,
                  SymmetryClass cls, const SymbolSpec& symbol,
                  const SolveConfig& config);

/// Least squares of log R against log eps, optionally dividing out
/// |log eps|^{log_power} first.
RateFit fit_rate(std::span<const double> eps, std::span<const double> rayleigh,
                 bool with_log_correction = false, double log_power = 0.0);

/// min and max of R_i eps_i^{-power} |log eps_i|^{-log_power}.
std::pair<double, double> compensated_band(std::span<const double> eps,
                                           std::span<const double> rayleigh,
                                           double power, double log_power);

/// Solves every class in the symmetry chain (full for d <= 3, G_2 up to
/// G_{floor(d/2)}, radial) at one eps and reports the pairwise gaps.
ChainReport verify_chain(const ProblemParams& params, double eps,
                         const SymbolSpec& symbol, const SolveConfig& config);

/// Independent projected-gradient minimizer on the same discretization;
/// slow, desk-scale cross-check oracle for the fixed-point solver.
SolveResult projected_gradient_solve(const ProblemParams& params, double eps,
                                     SymmetryClass cls,
                                     const SymbolSpec& symbol,
                                     const SolveConfig& config,
                                     int max_iterations = 4000);

}  // namespace nlslab
