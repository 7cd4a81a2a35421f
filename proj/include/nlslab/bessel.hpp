#pragma once

#include <string>
#include <vector>

#include "nlslab/util.hpp"

namespace nlslab {

/// Bessel function of the first kind J_nu(z), nu >= -1/2, z >= 0.
/// (z = 0 requires nu >= 0.)
double bessel_j(double nu, double z);

/// First n local maxima of J_nu on (0, inf), refined to ~1e-10.
/// For nu = -1/2 the sequence is exactly {2*pi*j}, matching the convention
/// used by the Knapp-set construction for the k in {1, d-1} branch.
std::vector<double> bessel_local_maxima(double nu, int n);

/// Surface measure of the unit sphere S^{n-1} in R^n.
double sphere_surface(int n);

/// Extension of the uniform measure on S^{n-1}: integral of e^{i t w.e}
/// over the sphere. Equals sphere_surface(n) at t = 0.
double sphere_kernel(int n, double t);

/// Spec name for the d-dimensional case.
inline double sphere_extension_kernel(int d, double xi_abs) {
  return sphere_kernel(d, xi_abs);
}

/// Surface measure of the cap band C_delta^k = {|eta| < delta} on S^{d-1}.
double cap_measure(int d, int k, double delta);

/// Extension of the indicator of C_delta^k evaluated at the block-radial
/// point r*(y, z) with |y| = y_abs, |z| = z_abs. Relative error < 1e-8.
double cap_extension(int d, int k, double delta, double r, double y_abs,
                     double z_abs);

/// Annulus-product set from the cap-extension lower bound: |y| <= y_max,
/// z_lo <= |z| <= z_hi, in the block split x = (y, z).
struct KnappSet {
  int j = 0;
  double y_max = 0.0;
  double z_lo = 0.0;
  double z_hi = 0.0;
  double measure_exact = 0.0;        // exact annulus-product volume
  double measure_lower_bound = 0.0;  // c1 * delta^{k-d} * j^{k-1}
};

struct KnappConstants {
  double c0 = 0.0;  // set count: j <= floor(c0 / (delta^2 + m))
  double c1 = 0.0;  // measure lower bound constant
  double c2 = 0.0;  // pointwise cap-extension lower bound constant
};

/// Calibrated constants per (d, k), loaded from the versioned data file
/// shipped with the repository (data/knapp_constants.json). Missing pairs
/// are calibrated on the fly.
KnappConstants knapp_constants(int d, int k);

/// Runs the calibration scan (j = 1..20 at m = 0.05, delta = 0.1) and
/// returns fresh constants for (d, k).
KnappConstants calibrate_knapp_constants(int d, int k);

/// Default free parameter of the construction: a bit below a quarter of
/// the minimal gap between consecutive maxima of J_{(k-2)/2}.
double default_c_small(int k);

/// The disjoint sets E_j witnessing the cap-extension lower bound.
/// Count = floor(c0 / (delta^2 + m)); degenerate windows throw.
std::vector<KnappSet> knapp_lower_sets(int d, int k, double m, double delta,
                                       double c_small = -1.0);

/// Volume of the ball of radius R in R^n.
double ball_volume(int n, double R);

}  // namespace nlslab
