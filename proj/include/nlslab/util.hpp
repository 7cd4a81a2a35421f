#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlslab {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Compensated (Kahan) summation; several invariants in this code base
/// require quadrature sums accurate to ~1e-12 relative on 1e5 terms.
class KahanSum {
 public:
  void add(double x) {
    double y = x - c_;
    double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

inline double kahan_total(std::span<const double> xs) {
  KahanSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

std::vector<double> linspace(double a, double b, int n);
/// n log-spaced points from a to b (both > 0).
std::vector<double> logspace(double a, double b, int n);
/// Geometric epsilon sweep from eps_hi down to eps_lo, n points.
std::vector<double> geometric_sweep(double eps_hi, double eps_lo, int n);

/// n-point Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> x, w;
};
GaussRule gauss_legendre(int n);

/// Adaptive Gauss-Kronrod (7-15) integration of f on [a,b].
/// Throws std::runtime_error if the tolerance cannot be met.
double adaptive_integrate(const std::function<double(double)>& f, double a,
                          double b, double rel_tol = 1e-10,
                          double abs_tol = 0.0, int max_depth = 40);

/// Least-squares line fit y = slope*x + intercept; returns RMS residual too.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace nlslab
