#pragma once

#include <cstdint>

#include "nlslab/minimize.hpp"

namespace nlslab {

/// Shell-window split diagnostics of a minimizer: how much L^p mass and
/// energy lives outside the concentration annulus, and the ratio bounds
/// implied by the window quotient gap M.
struct ConcentrationReport {
  double eps = 0.0;
  double delta_eps = 0.0;
  double lp_ratio = 0.0;  // ||w||_p / ||v||_p
  double q_ratio = 0.0;   // q_eps(w) / q_eps(v)
  /// (q_eps(w) / ||w||_p^2) / rayleigh, the window quotient gap.
  double m_eps_estimate = 0.0;
  double lp_bound = kInf;  // 2/(M-1) when M > 1
  double q_bound = kInf;   // 4/(M (1-1/M)^2) when M > 1
  bool lp_bound_ok = false;
  bool q_bound_ok = false;
  bool degenerate = false;  // v = 0, nothing concentrated in the window
  std::string note;
};

ConcentrationReport concentration_report(const SolveResult& result,
                                         double delta_eps);

/// Quadrature H^t norm of a sphere trace. t = 0 is the plain weighted L2
/// norm, exactly. Circle traces use Fourier multipliers (1+n^2)^{t/2};
/// Gauss-node traces use barycentric differentiation matrices and the
/// weighted Laplace-Beltrami operator for t = 2. Supported t: {0, 1, 2}.
double sphere_sobolev_norm(const SphereFunction& f, int t);

/// Per-radius H^t/L2 trace ratios through the shell window.
struct RoughnessReport {
  double eps = 0.0;
  int t = 1;
  std::vector<double> radii;   // 16 radii, |r-1| log-spaced in the window
  std::vector<double> ratios;  // >= 1 each
  double sup_ratio = 0.0;
  bool in_theorem_regime = true;  // 2 < p < the class restriction exponent
  std::string note;
};

RoughnessReport roughness_report(const SolveResult& result, int t,
                                 double delta_eps);

/// |u|(r) sampled on a radius grid; the d-dimensional radial measure is
/// applied internally with trapezoid weights.
struct RadialProfileSamples {
  int d = 2;
  std::vector<double> radius;  // increasing, >= 0
  std::vector<double> value;
};

struct LayerCakeReport {
  double c1 = 0.0;   // ||u||_r
  double c2 = 0.0;   // sup |u| (1+|x|)^{d/q}
  double lhs = 0.0;  // ||u||_q by direct quadrature
  double rhs = 0.0;  // C2 (1 + log_+(C1/C2))^{1/q}
  double ratio = 0.0;
  double direct_lq_q = 0.0;      // ||u||_q^q directly
  double layer_cake_lq_q = 0.0;  // q int t^{q-1} lambda(t) dt, level grid
  bool layer_cake_ok = false;    // the two agree within 1%
};

/// Interpolation bound check: both sides of ||u||_q <= K C2 (1+log_+)^{1/q}
/// plus a brute-force layer-cake consistency check of the q-norm.
LayerCakeReport layer_cake_bound(const RadialProfileSamples& samples,
                                 double r_exp, double q_exp);

struct DecayProfile {
  RadialProfileSamples samples;
  double r_exp = 3.0;
};

/// Seeded corpus of truncated decay profiles (indicator balls and truncated
/// power tails) whose C1/C2 spread covers [1, 1e6] for the default d = 2,
/// q = 4 setup.
std::vector<DecayProfile> decay_corpus(int d, double q_exp, int count,
                                       std::uint64_t seed);

}  // namespace nlslab
