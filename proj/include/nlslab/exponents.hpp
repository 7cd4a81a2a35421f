#pragma once

#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlslab/util.hpp"

namespace nlslab {

/// Symmetry classes the solver and the rate formulas speak about.
enum class SymmetryClass { Full, Gk, Radial, Axial };

std::string to_string(SymmetryClass c);
SymmetryClass symmetry_class_from_string(const std::string& s);

/// The problem tuple (d, k, p, s, gamma). Every exponent and rate formula
/// is driven by these five numbers.
struct ProblemParams {
  int d = 2;
  std::optional<int> k;  // block index, absent for radial/full-only runs
  double p = 3.0;        // Lebesgue exponent of the denominator norm
  double s = 2.0;        // growth order of the symbol away from the shell
  double gamma = 2.0;    // vanishing order of the symbol at the shell

  /// Throws std::invalid_argument naming the violated constraint.
  void validate() const;
};

enum class SymbolKind { Biharmonic, ShellPower, Tabulated };

/// A radial Fourier multiplier g_eps(r). The biharmonic kind evaluates
/// exactly to (r^2-1)^2 + eps; the shell-power kind is the piecewise
/// model eps + |r-1|^gamma near the unit shell and 1 + r^{2s} away from it,
/// with the larger of the two formulas in a narrow matching band.
struct SymbolSpec {
  SymbolKind kind = SymbolKind::Biharmonic;
  double s = 2.0;
  double gamma = 2.0;
  // Tabulated data: eps -> sorted (r, value) samples.
  std::map<double, std::vector<std::pair<double, double>>> tables;

  static SymbolSpec biharmonic();
  static SymbolSpec shell_power(double s, double gamma);
  static SymbolSpec tabulated(
      std::map<double, std::vector<std::pair<double, double>>> tables);

  std::string id() const;
};

struct ExponentSet {
  double two_star_k;        // Stein-Tomas exponent for the G_k class
  double two_star;          // endpoint Stein-Tomas exponent 2(d+1)/(d-1)
  double two_star_rad;      // radial exponent 2d/(d-1)
  double two_star_sobolev;  // 2d/(d-2s), or +inf when s >= d/2
  double alpha_k;
  double alpha_rad;
};

struct RatePrediction {
  double power;      // exponent of eps
  double log_power;  // exponent of |log eps|; 0 except radial critical case
  SymmetryClass cls;
};

struct AdmissibilityReport {
  double c_lower = 0.0;
  double C_upper = 0.0;
  std::vector<double> r_grid;
  std::vector<double> eps_list;
  bool pass = false;
  double ratio_threshold = 0.0;
  std::string failed_bound;  // "A1" or "A2" when pass == false
};

ExponentSet critical_exponents(const ProblemParams& params);

RatePrediction predicted_rate(const ProblemParams& params, SymmetryClass cls);

/// g_eps(r); strictly positive. Tabulated symbols reject out-of-range r.
double eval_symbol(const SymbolSpec& spec, double r, double eps);

/// Samples the two-sided bounds (growth of order 2s away from the shell,
/// eps + |r-1|^gamma near it), reports the tightest empirical constants and
/// passes iff one constant pair works across the whole eps list with
/// C/c <= ratio_threshold.
AdmissibilityReport check_admissibility(const SymbolSpec& spec, double s,
                                        double gamma,
                                        std::span<const double> eps_list,
                                        std::span<const double> r_grid = {},
                                        double ratio_threshold = 20.0);

/// Integral of 1/g_eps over [1/2, 3/2], relative error < 1e-8. The
/// integrand peaks at height ~1/eps on the scale eps^{1/gamma} around r=1,
/// so the mesh is graded there before going adaptive.
double inverse_symbol_integral(const SymbolSpec& spec, double eps);

/// Default 512-points-per-regime sampling grid for admissibility checks.
std::vector<double> default_admissibility_grid();

}  // namespace nlslab
