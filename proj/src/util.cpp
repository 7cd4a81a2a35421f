#include "nlslab/util.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace nlslab {

std::vector<double> linspace(double a, double b, int n) {
  require(n >= 2, "linspace: n >= 2");
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  v.back() = b;
  return v;
}

std::vector<double> logspace(double a, double b, int n) {
  require(a > 0 && b > 0, "logspace: endpoints must be positive");
  auto v = linspace(std::log(a), std::log(b), n);
  for (double& x : v) x = std::exp(x);
  v.front() = a;
  v.back() = b;
  return v;
}

std::vector<double> geometric_sweep(double eps_hi, double eps_lo, int n) {
  require(eps_hi > eps_lo && eps_lo > 0, "sweep: need eps_hi > eps_lo > 0");
  return logspace(eps_hi, eps_lo, n);
}

GaussRule gauss_legendre(int n) {
  require(n >= 1, "gauss_legendre: n >= 1");
  GaussRule rule;
  rule.x.resize(n);
  rule.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Newton on P_n from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.x[i] = -x;
    rule.x[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.w[i] = w;
    rule.w[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.x[n / 2] = 0.0;
  return rule;
}

namespace {

// Gauss-Kronrod 7-15 nodes/weights on [-1,1].
constexpr double kXgk[15] = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,                0.207784955007898,
    0.405845151377397,  0.586087235467691,  0.741531185599394,
    0.864864423359769,  0.949107912342759,  0.991455371120813};
constexpr double kWk[15] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529};
constexpr double kWg[7] = {0.129484966168870, 0.279705391489277,
                           0.381830050505119, 0.417959183673469,
                           0.381830050505119, 0.279705391489277,
                           0.129484966168870};

struct GkEstimate {
  double value;
  double error;
};

GkEstimate gk15(const std::function<double(double)>& f, double a, double b) {
  const double h = 0.5 * (b - a);
  const double c = 0.5 * (a + b);
  double fk = 0.0, fg = 0.0;
  for (int i = 0; i < 15; ++i) {
    const double fv = f(c + h * kXgk[i]);
    fk += kWk[i] * fv;
    if (i % 2 == 1) fg += kWg[i / 2] * fv;
  }
  return {h * fk, std::abs(h * (fk - fg))};
}

double integrate_rec(const std::function<double(double)>& f, double a, double b,
                     double tol, int depth, int max_depth) {
  const GkEstimate e = gk15(f, a, b);
  if (e.error <= tol || depth >= max_depth) {
    if (depth >= max_depth && e.error > tol * 16)
      throw std::runtime_error("adaptive_integrate: failed to converge");
    return e.value;
  }
  const double m = 0.5 * (a + b);
  return integrate_rec(f, a, m, tol / 2, depth + 1, max_depth) +
         integrate_rec(f, m, b, tol / 2, depth + 1, max_depth);
}

}  // namespace

double adaptive_integrate(const std::function<double(double)>& f, double a,
                          double b, double rel_tol, double abs_tol,
                          int max_depth) {
  if (a == b) return 0.0;
  const GkEstimate whole = gk15(f, a, b);
  double tol = std::max(abs_tol, rel_tol * std::abs(whole.value));
  if (tol == 0.0) tol = rel_tol;
  return integrate_rec(f, a, b, tol, 0, max_depth);
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, "fit_line: need >= 2 points");
  const int n = static_cast<int>(x.size());
  double mx = 0, my = 0;
  for (int i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  require(sxx > 0, "fit_line: degenerate abscissas");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0;
  for (int i = 0; i < n; ++i) {
    const double r = y[i] - (fit.slope * x[i] + fit.intercept);
    ss += r * r;
  }
  fit.rms_residual = std::sqrt(ss / n);
  return fit;
}

}  // namespace nlslab
