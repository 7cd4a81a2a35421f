#include "nlslab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace nlslab {

namespace {

constexpr double kPi = 3.14159265358979323846;

double sphere_surface_const(int n) {
  return 2.0 * std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n);
}

}  // namespace

// --- concentration -------------------------------------------------------

ConcentrationReport concentration_report(const SolveResult& result,
                                         double delta_eps) {
  require(delta_eps > 0 && delta_eps < 1,
          "concentration_report: delta_eps in (0,1)");
  require(result.converged, "concentration_report: result must be converged");
  const double eps = result.eps;
  const double p = result.params.p;

  ConcentrationReport rep;
  rep.eps = eps;
  rep.delta_eps = delta_eps;

  const ShellWindow win =
      ShellWindow::band(eps, delta_eps, result.params.gamma);
  auto [v, w] = shell_split(result.minimizer, win);

  const double qv = quad_form(v, result.symbol, eps);
  const double qw = quad_form(w, result.symbol, eps);
  if (!(qv > 0) && !(l2_norm(v) > 0)) {
    rep.degenerate = true;
    rep.note = "no minimizer mass inside the shell window";
    return rep;
  }

  SolveConfig cfg;
  const auto disc =
      make_discretization(result.params, result.cls, eps, cfg);
  FieldTransform t(result.minimizer.grid, disc.phys);
  const double lpv = lp_norm(v, p, t, false).value;
  const double lpw = lp_norm(w, p, t, false).value;

  rep.lp_ratio = lpv > 0 ? lpw / lpv : kInf;
  rep.q_ratio = qv > 0 ? qw / qv : kInf;
  if (lpw > 0) {
    const double m = (qw / (lpw * lpw)) / result.rayleigh;
    rep.m_eps_estimate = m;
    if (m > 1.0) {
      rep.lp_bound = 2.0 / (m - 1.0);
      const double s = 1.0 - 1.0 / m;
      rep.q_bound = 4.0 / (m * s * s);
      rep.lp_bound_ok = rep.lp_ratio <= rep.lp_bound;
      rep.q_bound_ok = rep.q_ratio <= rep.q_bound;
    } else {
      rep.note = "window quotient gap M <= 1; bounds vacuous";
    }
  } else {
    // Nothing outside the window at all: ratios are exactly zero and the
    // bounds hold trivially.
    rep.m_eps_estimate = kInf;
    rep.lp_bound_ok = rep.q_bound_ok = true;
  }
  return rep;
}

// --- sphere Sobolev norms ------------------------------------------------

namespace {

// Barycentric differentiation matrix for the (distinct, increasing) nodes;
// rows sum to zero, so constants differentiate to exactly zero.
std::vector<double> diff_matrix(const std::vector<double>& x) {
  const int n = int(x.size());
  // Scaled barycentric weights to dodge under/overflow of the products.
  const double scale = 4.0 / (x.back() - x.front());
  std::vector<double> b(n, 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (j != i) b[i] *= (x[i] - x[j]) * scale;
  for (int i = 0; i < n; ++i) b[i] = 1.0 / b[i];

  std::vector<double> D(size_t(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    double diag = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dij = (b[j] / b[i]) / (x[i] - x[j]);
      D[size_t(i) * n + j] = dij;
      diag -= dij;
    }
    D[size_t(i) * n + i] = diag;
  }
  return D;
}

std::vector<double> apply_matrix(const std::vector<double>& D,
                                 const std::vector<double>& v) {
  const int n = int(v.size());
  std::vector<double> out(n, 0.0);
  for (int i = 0; i < n; ++i) {
    KahanSum s;
    for (int j = 0; j < n; ++j) s.add(D[size_t(i) * n + j] * v[j]);
    out[i] = s.value();
  }
  return out;
}

double circle_sobolev(const SphereFunction& f, int t) {
  const int n = int(f.re.size());
  const double wtot = kahan_total(f.w);
  KahanSum norm2;
  for (int m = -n / 2; m < n - n / 2; ++m) {
    KahanSum cr, ci;
    for (int j = 0; j < n; ++j) {
      const double c = std::cos(m * f.theta[j]), s = std::sin(m * f.theta[j]);
      const double re = f.re[j], im = f.im.empty() ? 0.0 : f.im[j];
      cr.add(re * c + im * s);
      ci.add(im * c - re * s);
    }
    const double a = cr.value() / n, b = ci.value() / n;
    norm2.add(std::pow(1.0 + double(m) * m, t) * (a * a + b * b));
  }
  return std::sqrt(wtot * norm2.value());
}

double gauss_sobolev(const SphereFunction& f, int t) {
  const auto D = diff_matrix(f.theta);
  const int n = int(f.theta.size());
  // Laplace-Beltrami drift of the angular weight
  // cos^{d-k-1}(theta) sin^{k-1}(theta); the axial trace arrives with
  // k = d-1, which reduces this to (d-2) cot(theta).
  auto drift = [&](double th) {
    double c = 0.0;
    if (f.d - f.k - 1 > 0) c -= (f.d - f.k - 1) * std::tan(th);
    if (f.k - 1 > 0) c += (f.k - 1) / std::tan(th);
    return c;
  };

  auto channel = [&](const std::vector<double>& v) {
    std::vector<double> terms = v;  // |f|^2 accumulator per node
    for (double& x : terms) x *= x;
    const std::vector<double> d1 = apply_matrix(D, v);
    if (t >= 1)
      for (int i = 0; i < n; ++i) terms[i] += d1[i] * d1[i];
    if (t >= 2) {
      std::vector<double> d2 = apply_matrix(D, d1);
      for (int i = 0; i < n; ++i) {
        const double lap = d2[i] + drift(f.theta[i]) * d1[i];
        terms[i] += lap * lap;
      }
    }
    KahanSum s;
    for (int i = 0; i < n; ++i) s.add(f.w[i] * terms[i]);
    return s.value();
  };

  double total = channel(f.re);
  if (!f.im.empty()) total += channel(f.im);
  return std::sqrt(total);
}

}  // namespace

double sphere_sobolev_norm(const SphereFunction& f, int t) {
  require(t >= 0 && t <= 2, "sphere_sobolev_norm: t in {0, 1, 2}");
  require(!f.re.empty(), "sphere_sobolev_norm: empty trace");
  if (t == 0) return f.l2();
  return f.circle ? circle_sobolev(f, t) : gauss_sobolev(f, t);
}

// --- roughness -----------------------------------------------------------

RoughnessReport roughness_report(const SolveResult& result, int t,
                                 double delta_eps) {
  require(t == 1 || t == 2, "roughness_report: t in {1, 2}");
  require(delta_eps > 0 && delta_eps < 1,
          "roughness_report: delta_eps in (0,1)");
  require(result.converged, "roughness_report: result must be converged");

  RoughnessReport rep;
  rep.eps = result.eps;
  rep.t = t;

  const ShellWindow win =
      ShellWindow::band(result.eps, delta_eps, result.params.gamma);

  const auto exps = critical_exponents(result.params);
  const double p_hi = result.cls == SymmetryClass::Gk ? exps.two_star_k
                                                      : exps.two_star;
  rep.in_theorem_regime = result.params.p > 2.0 && result.params.p < p_hi;
  if (!rep.in_theorem_regime)
    rep.note = "p outside (2, class restriction exponent); reported anyway";

  const auto ts = logspace(win.lo, win.hi, 8);
  for (double s : ts) {
    rep.radii.push_back(1.0 - s);
    rep.radii.push_back(1.0 + s);
  }
  std::sort(rep.radii.begin(), rep.radii.end());

  for (double r : rep.radii) {
    const SphereFunction f = sphere_trace(result.minimizer, r);
    const double l2 = sphere_sobolev_norm(f, 0);
    const double ht = sphere_sobolev_norm(f, t);
    const double ratio = l2 > 0 ? ht / l2 : 1.0;
    rep.ratios.push_back(ratio);
    rep.sup_ratio = std::max(rep.sup_ratio, ratio);
  }
  return rep;
}

// --- layer cake ----------------------------------------------------------

LayerCakeReport layer_cake_bound(const RadialProfileSamples& samples,
                                 double r_exp, double q_exp) {
  require(r_exp > 0 && r_exp < q_exp, "layer_cake_bound: 0 < r < q");
  require(samples.d >= 1, "layer_cake_bound: d >= 1");
  const size_t n = samples.radius.size();
  require(n >= 3 && samples.value.size() == n,
          "layer_cake_bound: need matching radius/value samples");
  for (size_t i = 1; i < n; ++i)
    require(samples.radius[i] > samples.radius[i - 1] &&
                samples.radius[i - 1] >= 0,
            "layer_cake_bound: radii must be increasing and nonnegative");

  const double omega = sphere_surface_const(samples.d);
  std::vector<double> w(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    const double lo = i == 0 ? samples.radius[0] : samples.radius[i - 1];
    const double hi = i + 1 == n ? samples.radius[n - 1] : samples.radius[i + 1];
    w[i] = omega * std::pow(samples.radius[i], samples.d - 1) * 0.5 *
           (hi - lo);
  }

  LayerCakeReport rep;
  double c2 = 0.0, c2_last = 0.0, vmax = 0.0;
  KahanSum lr, lq;
  for (size_t i = 0; i < n; ++i) {
    const double v = std::abs(samples.value[i]);
    vmax = std::max(vmax, v);
    c2_last = v * std::pow(1.0 + samples.radius[i], samples.d / q_exp);
    c2 = std::max(c2, c2_last);
    lr.add(w[i] * std::pow(v, r_exp));
    lq.add(w[i] * std::pow(v, q_exp));
  }
  require(vmax > 0, "layer_cake_bound: zero function");
  // Decay-boundedness proxy: a profile whose weighted sup sits at the
  // truncation edge would have unbounded C2 before truncation.
  require(c2_last < 0.5 * c2,
          "layer_cake_bound: C2 not decay-bounded (sup at the truncation edge)");

  rep.c1 = std::pow(lr.value(), 1.0 / r_exp);
  rep.c2 = c2;
  rep.direct_lq_q = lq.value();
  rep.lhs = std::pow(rep.direct_lq_q, 1.0 / q_exp);
  const double logp = std::max(0.0, std::log(rep.c1 / rep.c2));
  rep.rhs = rep.c2 * std::pow(1.0 + logp, 1.0 / q_exp);
  rep.ratio = rep.lhs / rep.rhs;

  // Brute-force layer cake q int_0^inf t^{q-1} lambda(t) dt over a log
  // level grid; lambda is the weighted measure of {|u| >= t}.
  std::vector<double> sorted;
  sorted.reserve(n);
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return std::abs(samples.value[a]) < std::abs(samples.value[b]);
  });
  std::vector<double> vs(n), cumw(n + 1, 0.0);
  for (size_t i = 0; i < n; ++i) vs[i] = std::abs(samples.value[order[i]]);
  // cumw[j] = measure of samples with |u| >= vs[j].
  for (size_t i = n; i-- > 0;) cumw[i] = cumw[i + 1] + w[order[i]];
  auto lambda = [&](double t) {
    const size_t j = std::lower_bound(vs.begin(), vs.end(), t) - vs.begin();
    return j < n ? cumw[j] : 0.0;
  };

  const int levels = 6000;
  const auto ts = logspace(vmax * 1e-8, vmax, levels);
  KahanSum cake;
  // Exact contribution of the untouched [0, t_min] strip.
  cake.add(std::pow(ts.front(), q_exp) * lambda(0.0));
  for (int i = 0; i + 1 < levels; ++i) {
    const double f0 = std::pow(ts[i], q_exp - 1.0) * lambda(ts[i]);
    const double f1 = std::pow(ts[i + 1], q_exp - 1.0) * lambda(ts[i + 1]);
    cake.add(q_exp * 0.5 * (f0 + f1) * (ts[i + 1] - ts[i]));
  }
  rep.layer_cake_lq_q = cake.value();
  rep.layer_cake_ok =
      std::abs(rep.layer_cake_lq_q - rep.direct_lq_q) <=
      0.01 * rep.direct_lq_q;
  return rep;
}

std::vector<DecayProfile> decay_corpus(int d, double q_exp, int count,
                                       std::uint64_t seed) {
  require(d >= 1 && q_exp > 1 && count >= 1, "decay_corpus: bad parameters");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<DecayProfile> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    DecayProfile prof;
    // Small r_exp with a critically decaying tail drives C1/C2 up to the
    // 1e6 range at moderate truncation radii.
    prof.r_exp = 0.4 + (q_exp - 0.6) * unif(rng);
    const double R = std::pow(10.0, 0.3 + 2.2 * unif(rng));
    const double amp = std::pow(10.0, -2.0 + 4.0 * unif(rng));
    const bool indicator = i % 3 == 0;
    const double a = (d / q_exp) * (indicator ? 0.0 : 0.9 + 0.6 * unif(rng));

    prof.samples.d = d;
    const int n = 1600;
    for (int j = 0; j < n; ++j) {
      // Denser near zero, extends a little past the truncation radius so
      // the zero tail is part of the sample set.
      const double r = 1.10 * R * std::pow(double(j) / (n - 1), 1.6);
      prof.samples.radius.push_back(j == 0 ? 0.0 : r);
      prof.samples.value.push_back(
          r <= R ? amp * std::pow(1.0 + r, -a) : 0.0);
    }
    // Strictly increasing radii (j = 0 maps to 0, j = 1 is tiny).
    for (size_t j = 1; j < prof.samples.radius.size(); ++j)
      if (prof.samples.radius[j] <= prof.samples.radius[j - 1])
        prof.samples.radius[j] =
            prof.samples.radius[j - 1] + 1e-9 * (1.0 + R);
    out.push_back(std::move(prof));
  }
  return out;
}

}  // namespace nlslab
