#include "nlslab/bessel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>

#include <boost/math/special_functions/bessel.hpp>

#include "json.hpp"

namespace nlslab {

using std::numbers::pi;

double bessel_j(double nu, double z) {
  require(z >= 0.0, "bessel_j: z >= 0");
  require(nu >= -0.5, "bessel_j: nu >= -1/2");
  if (nu == -0.5) {
    require(z > 0.0, "bessel_j: z > 0 required for nu = -1/2");
    return std::sqrt(2.0 / (pi * z)) * std::cos(z);
  }
  if (z == 0.0) return nu == 0.0 ? 1.0 : 0.0;
  return boost::math::cyl_bessel_j(nu, z);
}

namespace {

double bessel_j_any(double nu, double z) {
  // Derivative evaluation needs orders below -1/2 as well.
  if (z == 0.0) return nu == 0.0 ? 1.0 : 0.0;
  return boost::math::cyl_bessel_j(nu, z);
}

double bessel_j_prime(double nu, double z) {
  return 0.5 * (bessel_j_any(nu - 1.0, z) - bessel_j_any(nu + 1.0, z));
}

}  // namespace

std::vector<double> bessel_local_maxima(double nu, int n) {
  require(n >= 1, "bessel_local_maxima: n >= 1");
  std::vector<double> out;
  out.reserve(n);
  if (nu == -0.5) {
    // The k in {1, d-1} branch of the Knapp construction works with the
    // cosine factor of J_{-1/2}; its maxima sit exactly at 2*pi*j.
    for (int j = 1; j <= n; ++j) out.push_back(2.0 * pi * j);
    return out;
  }
  const double step = 0.2;
  double z = 1e-3;
  double fprev = bessel_j_prime(nu, z);
  while (static_cast<int>(out.size()) < n) {
    const double z2 = z + step;
    const double fnext = bessel_j_prime(nu, z2);
    if (fprev > 0.0 && fnext <= 0.0) {
      double a = z, b = z2;
      for (int it = 0; it < 80; ++it) {
        const double m = 0.5 * (a + b);
        (bessel_j_prime(nu, m) > 0.0 ? a : b) = m;
      }
      const double zmax = 0.5 * (a + b);
      if (bessel_j(std::max(nu, -0.5), zmax) > 0.0) out.push_back(zmax);
    }
    z = z2;
    fprev = fnext;
    require(z < 1e6, "bessel_local_maxima: scan runaway");
  }
  return out;
}

double sphere_surface(int n) {
  require(n >= 1, "sphere_surface: n >= 1");
  return 2.0 * std::pow(pi, 0.5 * n) / std::tgamma(0.5 * n);
}

double ball_volume(int n, double R) {
  require(n >= 1 && R >= 0.0, "ball_volume: n >= 1, R >= 0");
  return std::pow(pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0) * std::pow(R, n);
}

double sphere_kernel(int n, double t) {
  require(n >= 1, "sphere_kernel: n >= 1");
  require(t >= 0.0, "sphere_kernel: t >= 0");
  if (n == 1) return 2.0 * std::cos(t);
  const double nu = 0.5 * n - 1.0;
  if (t < 1e-3) {
    // Series limit around the removable singularity at t = 0.
    const double s = sphere_surface(n);
    const double t2 = t * t;
    return s * (1.0 - t2 / (2.0 * n) + t2 * t2 / (8.0 * n * (n + 2.0)) -
                t2 * t2 * t2 / (48.0 * n * (n + 2.0) * (n + 4.0)));
  }
  return std::pow(2.0 * pi, 0.5 * n) * std::pow(t, 1.0 - 0.5 * n) *
         bessel_j(nu, t);
}

double cap_measure(int d, int k, double delta) {
  require(d >= 2 && k >= 1 && k <= d - 1, "cap_measure: 1 <= k <= d-1");
  require(delta > 0.0 && delta < 1.0, "cap_measure: delta in (0,1)");
  const double wy = sphere_surface(d - k);
  const double wz = sphere_surface(k);
  auto f = [&](double rho) {
    return std::pow(rho, d - k - 1) *
           std::pow(1.0 - rho * rho, 0.5 * k - 1.0);
  };
  return wy * wz * adaptive_integrate(f, 0.0, delta, 1e-10);
}

double cap_extension(int d, int k, double delta, double r, double y_abs,
                     double z_abs) {
  require(d >= 2 && k >= 1 && k <= d - 1, "cap_extension: 1 <= k <= d-1");
  require(delta > 0.0 && delta < 0.5, "cap_extension: delta in (0,1/2)");
  require(std::abs(r - 1.0) <= 0.5, "cap_extension: |r-1| <= 1/2");
  require(y_abs >= 0.0 && z_abs >= 0.0, "cap_extension: moduli >= 0");
  auto f = [&](double rho) {
    const double c = std::sqrt(1.0 - rho * rho);
    return std::pow(rho, d - k - 1) * std::pow(c, double(k) - 2.0) *
           sphere_kernel(d - k, rho * r * y_abs) *
           sphere_kernel(k, c * r * z_abs);
  };
  return adaptive_integrate(f, 0.0, delta, 1e-9, 1e-14);
}

double default_c_small(int k) {
  require(k >= 1, "default_c_small: k >= 1");
  const double nu = 0.5 * k - 1.0;
  if (k == 1) {
    // Pure cosine branch: gap 2*pi, nearest zero at distance pi/2.
    return 0.95 * 0.5 * pi;
  }
  const auto zs = bessel_local_maxima(nu, 40);
  double min_gap = zs[1] - zs[0];
  for (size_t j = 1; j + 1 < zs.size(); ++j)
    min_gap = std::min(min_gap, zs[j + 1] - zs[j]);
  // J_nu must stay positive on [z_j - c, z_j + c], so c is capped by the
  // distance from each maximum to its nearest zero (with a margin), on top
  // of the proof's quarter-gap ceiling.
  double min_dist = kInf;
  for (double z : zs) {
    const double lo = std::max(1e-6, z - 0.6 * min_gap);
    const double hi = z + 0.6 * min_gap;
    double prev = bessel_j(nu, lo);
    for (double t = lo + 0.02; t <= hi; t += 0.02) {
      const double cur = bessel_j(nu, t);
      if (prev * cur <= 0.0 && prev != cur) {
        double a = t - 0.02, b = t;
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (a + b);
          (bessel_j(nu, a) * bessel_j(nu, mid) <= 0.0 ? b : a) = mid;
        }
        min_dist = std::min(min_dist, std::abs(z - 0.5 * (a + b)));
      }
      prev = cur;
    }
  }
  // The first window [z_1 - c, z_1 + c] must stay inside (0, inf) too.
  return std::min({0.245 * min_gap, 0.95 * min_dist, 0.9 * zs[0]});
}

std::vector<KnappSet> knapp_lower_sets(int d, int k, double m, double delta,
                                       double c_small) {
  require(d >= 2 && k >= 1 && k <= d - 1, "knapp_lower_sets: 1 <= k <= d-1");
  require(m > 0.0 && m < 0.5 && delta > 0.0 && delta < 0.5,
          "knapp_lower_sets: (m, delta) in (0, 1/2)^2");
  const double nu = 0.5 * k - 1.0;
  if (c_small <= 0.0) c_small = default_c_small(k);
  const KnappConstants kc = knapp_constants(d, k);
  const int count = static_cast<int>(kc.c0 / (delta * delta + m));
  if (count < 1) return {};
  const auto zs = bessel_local_maxima(nu, count);
  {
    double min_gap = zs[0];
    for (size_t j = 0; j + 1 < zs.size(); ++j)
      min_gap = std::min(min_gap, zs[j + 1] - zs[j]);
    require(c_small < 0.25 * min_gap,
            "knapp_lower_sets: c_small must be < quarter of the maxima gap");
  }
  const double sq = std::sqrt(1.0 - delta * delta);
  std::vector<KnappSet> sets;
  sets.reserve(count);
  for (int j = 1; j <= count; ++j) {
    KnappSet e;
    e.j = j;
    e.y_max = c_small / (delta * (1.0 + m));
    e.z_lo = (zs[j - 1] - c_small) / (sq * (1.0 - m));
    e.z_hi = (zs[j - 1] + c_small) / (1.0 + m);
    if (!(e.z_lo < e.z_hi) || e.z_lo < 0.0)
      throw std::runtime_error("knapp_lower_sets: degenerate window at j=" +
                               std::to_string(j));
    e.measure_exact = ball_volume(d - k, e.y_max) *
                      (ball_volume(k, e.z_hi) - ball_volume(k, e.z_lo));
    e.measure_lower_bound =
        kc.c1 * std::pow(delta, double(k - d)) * std::pow(double(j), k - 1);
    sets.push_back(e);
  }
  return sets;
}

namespace {

struct Window {
  double y_max, z_lo, z_hi;
  bool sound;
};

Window make_window(double z, double c, double m, double delta) {
  const double sq = std::sqrt(1.0 - delta * delta);
  Window w;
  w.y_max = c / (delta * (1.0 + m));
  w.z_lo = (z - c) / (sq * (1.0 - m));
  w.z_hi = (z + c) / (1.0 + m);
  w.sound = w.z_lo > 0.0 && w.z_lo < w.z_hi;
  return w;
}

}  // namespace

KnappConstants calibrate_knapp_constants(int d, int k) {
  require(d >= 2 && k >= 1 && k <= d - 1, "calibrate: 1 <= k <= d-1");
  const double nu = 0.5 * k - 1.0;
  const double c = default_c_small(k);
  const auto zs = bessel_local_maxima(nu, 20);

  // Calibration point of the constants table. c0 is set by the longest
  // prefix j = 1..j_max of windows that are non-degenerate and keep the
  // extension integral strictly positive over a dense sample; the proof's
  // alpha/beta choice is far more conservative and would leave the set
  // family empty at this (m, delta).
  const double m = 0.05, delta = 0.1;
  int j_max = 0;
  double c2 = kInf;
  for (int j = 1; j <= 20; ++j) {
    const Window w = make_window(zs[j - 1], c, m, delta);
    if (!w.sound) break;
    const double target =
        std::pow(delta, double(d - k)) * std::pow(double(j), 0.5 * (1 - k));
    double vmin = kInf;
    for (double r : {1.0 - m, 1.0, 1.0 + m}) {
      for (int iy = 0; iy <= 20; ++iy) {
        for (int iz = 0; iz <= 20; ++iz) {
          const double y = w.y_max * iy / 20.0;
          const double zz = w.z_lo + (w.z_hi - w.z_lo) * iz / 20.0;
          vmin = std::min(vmin, cap_extension(d, k, delta, r, y, zz));
        }
      }
    }
    if (vmin <= 0.0) break;
    j_max = j;
    c2 = std::min(c2, vmin / target);
  }
  require(j_max >= 1, "calibrate: no sound window at the calibration point");

  KnappConstants out;
  out.c0 = 0.999 * j_max * (delta * delta + m);
  out.c2 = 0.9 * c2;

  // c1 over the calibration point plus a few smaller (m, delta) pairs the
  // sweeps actually visit.
  double c1 = kInf;
  const std::pair<double, double> pts[] = {
      {m, delta}, {0.01, 0.05}, {0.02, 0.1}, {0.1, 0.15}};
  for (auto [mm, dd] : pts) {
    const int count = static_cast<int>(out.c0 / (dd * dd + mm));
    for (int j = 1; j <= count; ++j) {
      const Window w = make_window(zs[j - 1], c, mm, dd);
      require(w.sound, "calibrate: degenerate window inside the c0 range");
      const double vol = ball_volume(d - k, w.y_max) *
                         (ball_volume(k, w.z_hi) - ball_volume(k, w.z_lo));
      c1 = std::min(c1, vol / (std::pow(dd, double(k - d)) *
                               std::pow(double(j), k - 1)));
    }
  }
  out.c1 = 0.9 * c1;
  require(out.c0 > 0 && out.c1 > 0 && out.c2 > 0 && std::isfinite(out.c1),
          "calibrate: non-positive constant");
  return out;
}

namespace {
std::mutex g_const_mutex;
std::map<std::pair<int, int>, KnappConstants> g_const_cache;

void load_constants_file() {
  static bool loaded = false;
  if (loaded) return;
  loaded = true;
  std::ifstream in(std::string(NLSLAB_DATA_DIR) + "/knapp_constants.json");
  if (!in) return;
  nlohmann::json j;
  in >> j;
  for (const auto& item : j.at("constants")) {
    KnappConstants kc;
    kc.c0 = item.at("c0").get<double>();
    kc.c1 = item.at("c1").get<double>();
    kc.c2 = item.at("c2").get<double>();
    g_const_cache[{item.at("d").get<int>(), item.at("k").get<int>()}] = kc;
  }
}
}  // namespace

KnappConstants knapp_constants(int d, int k) {
  std::scoped_lock lock(g_const_mutex);
  load_constants_file();
  auto it = g_const_cache.find({d, k});
  if (it != g_const_cache.end()) return it->second;
  const KnappConstants kc = calibrate_knapp_constants(d, k);
  g_const_cache[{d, k}] = kc;
  return kc;
}

}  // namespace nlslab
