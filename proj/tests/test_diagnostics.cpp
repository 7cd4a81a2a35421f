#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "nlslab/diagnostics.hpp"

using namespace nlslab;

namespace {
constexpr double kPi = 3.14159265358979323846;

ProblemParams make_params(int d, std::optional<int> k, double p, double s = 2.0,
                          double gamma = 2.0) {
  ProblemParams pp;
  pp.d = d;
  pp.k = k;
  pp.p = p;
  pp.s = s;
  pp.gamma = gamma;
  return pp;
}

SphereFunction circle_function(int n, const std::function<double(double)>& fr,
                               const std::function<double(double)>& fi) {
  SphereFunction f;
  f.d = 2;
  f.circle = true;
  f.r = 1.0;
  for (int i = 0; i < n; ++i) {
    const double th = 2.0 * kPi * i / n;
    f.theta.push_back(th);
    f.w.push_back(2.0 * kPi / n);
    f.re.push_back(fr(th));
    f.im.push_back(fi(th));
  }
  return f;
}

}  // namespace

TEST_CASE("sphere Sobolev norms on the circle") {
  SUBCASE("constant: every ratio is 1") {
    auto f = circle_function(
        64, [](double) { return 3.5; }, [](double) { return 0.0; });
    const double l2 = sphere_sobolev_norm(f, 0);
    CHECK(l2 == doctest::Approx(f.l2()).epsilon(1e-14));
    for (int t : {1, 2})
      CHECK(sphere_sobolev_norm(f, t) == doctest::Approx(l2).epsilon(1e-12));
  }
  SUBCASE("single mode e^{in theta}: multiplier (1+n^2)^{t/2}") {
    for (int n : {1, 3, 10}) {
      auto f = circle_function(
          128, [n](double th) { return std::cos(n * th); },
          [n](double th) { return std::sin(n * th); });
      const double l2 = sphere_sobolev_norm(f, 0);
      for (int t : {1, 2})
        CHECK(sphere_sobolev_norm(f, t) ==
              doctest::Approx(std::pow(1.0 + n * n, 0.5 * t) * l2)
                  .epsilon(1e-10));
    }
  }
  SUBCASE("angular bump of width delta: H1/L2 tracks 1/delta") {
    for (double delta : {0.2, 0.1, 0.05}) {
      auto f = circle_function(
          512,
          [delta](double th) {
            const double d = std::remainder(th, 2.0 * kPi);
            return std::exp(-0.5 * d * d / (delta * delta));
          },
          [](double) { return 0.0; });
      const double ratio =
          sphere_sobolev_norm(f, 1) / sphere_sobolev_norm(f, 0);
      CHECK(ratio > 0.5 / delta);
      CHECK(ratio < 2.0 / delta);
    }
  }
  SUBCASE("unsupported order rejected") {
    auto f = circle_function(
        16, [](double) { return 1.0; }, [](double) { return 0.0; });
    CHECK_THROWS_AS(sphere_sobolev_norm(f, 3), std::invalid_argument);
  }
}

TEST_CASE("sphere Sobolev norms on Gauss-node traces") {
  // Trace geometry of a d=3, k=1 block: weight cos(phi) on [0, pi/2].
  const int n = 96;
  const GaussRule gr = gauss_legendre(n);
  SphereFunction f;
  f.d = 3;
  f.k = 1;
  f.circle = false;
  // Even across the equator (f'(pi/2) = 0), like genuine block traces;
  // otherwise the tan-drift H2 integrand is singular there.
  auto fn = [](double phi) {
    return std::cos(2.0 * phi) + 0.3 * std::cos(4.0 * phi);
  };
  auto dfn = [](double phi) {
    return -2.0 * std::sin(2.0 * phi) - 1.2 * std::sin(4.0 * phi);
  };
  auto d2fn = [](double phi) {
    return -4.0 * std::cos(2.0 * phi) - 4.8 * std::cos(4.0 * phi);
  };
  for (int i = 0; i < n; ++i) {
    const double phi = 0.25 * kPi * (gr.x[i] + 1.0);
    f.theta.push_back(phi);
    f.w.push_back(0.25 * kPi * gr.w[i] * std::cos(phi));
    f.re.push_back(fn(phi));
  }

  const double l2sq = adaptive_integrate(
      [&](double p) { return fn(p) * fn(p) * std::cos(p); }, 0.0, 0.5 * kPi);
  const double h1sq =
      l2sq + adaptive_integrate(
                 [&](double p) { return dfn(p) * dfn(p) * std::cos(p); }, 0.0,
                 0.5 * kPi);
  // Laplace-Beltrami drift for this weight is -tan(phi).
  const double h2sq =
      h1sq + adaptive_integrate(
                 [&](double p) {
                   const double lap = d2fn(p) - std::tan(p) * dfn(p);
                   return lap * lap * std::cos(p);
                 },
                 0.0, 0.5 * kPi);

  CHECK(sphere_sobolev_norm(f, 0) ==
        doctest::Approx(std::sqrt(l2sq)).epsilon(1e-10));
  CHECK(sphere_sobolev_norm(f, 1) ==
        doctest::Approx(std::sqrt(h1sq)).epsilon(1e-8));
  CHECK(sphere_sobolev_norm(f, 2) ==
        doctest::Approx(std::sqrt(h2sq)).epsilon(1e-6));
}

TEST_CASE("concentration reports") {
  auto params = make_params(2, std::nullopt, 3.0);
  auto sym = SymbolSpec::biharmonic();
  SolveConfig cfg;

  SUBCASE("field supported inside the window: both ratios zero") {
    const double eps = 1e-2, delta = 0.3;
    const ShellWindow win = ShellWindow::band(eps, delta, params.gamma);
    auto grid = radial_spectral_grid(2, eps, 2.0);
    SolveResult fake;
    fake.params = params;
    fake.symbol = sym;
    fake.cls = SymmetryClass::Radial;
    fake.eps = eps;
    fake.converged = true;
    fake.rayleigh = 1.0;
    fake.minimizer = make_field(grid, [&](double r) {
      const double t = std::abs(r - 1.0);
      return (t >= 2.0 * win.lo && t <= 0.5 * win.hi) ? 1.0 : 0.0;
    });
    auto rep = concentration_report(fake, delta);
    CHECK(!rep.degenerate);
    CHECK(rep.lp_ratio == 0.0);
    CHECK(rep.q_ratio == 0.0);
    CHECK(rep.lp_bound_ok);
    CHECK(rep.q_bound_ok);
  }

  SUBCASE("real minimizers concentrate as eps shrinks") {
    const double gamma = params.gamma;
    double prev_lp = kInf, prev_q = kInf;
    for (double eps : {1e-2, 1e-3}) {
      auto r = solve_ground_state(params, eps, SymmetryClass::Radial, sym, cfg);
      REQUIRE(r.converged);
      auto rep = concentration_report(r, std::pow(eps, 1.0 / (2.0 * gamma)));
      CHECK(!rep.degenerate);
      CHECK(rep.lp_ratio < prev_lp);
      CHECK(rep.q_ratio < prev_q);
      CHECK(rep.m_eps_estimate > 1.0);
      CHECK(rep.lp_bound_ok);
      CHECK(rep.q_bound_ok);
      prev_lp = rep.lp_ratio;
      prev_q = rep.q_ratio;
    }
  }
}

TEST_CASE("roughness reports") {
  SolveConfig cfg;

  SUBCASE("radial minimizer: every ratio is 1") {
    auto params = make_params(2, std::nullopt, 3.0);
    auto r = solve_ground_state(params, 1e-2, SymmetryClass::Radial,
                                SymbolSpec::biharmonic(), cfg);
    REQUIRE(r.converged);
    auto rep = roughness_report(r, 1, 0.316);
    REQUIRE(rep.ratios.size() == 16);
    for (double ratio : rep.ratios)
      CHECK(ratio == doctest::Approx(1.0).epsilon(1e-10));
  }

  SUBCASE("smooth cap of angular width delta sets the sup ratio scale") {
    const double eps = 1e-2, gamma = 2.0;
    const double delta = std::pow(eps, 1.0 / (2.0 * gamma));
    auto params = make_params(4, 2, 2.5);
    auto grid = block_spectral_grid(4, 2, eps, gamma);
    SolveResult fake;
    fake.params = params;
    fake.symbol = SymbolSpec::shell_power(2.0, 2.0);
    fake.cls = SymmetryClass::Gk;
    fake.eps = eps;
    fake.converged = true;
    fake.rayleigh = 1.0;
    const double m = std::sqrt(eps);
    fake.minimizer = make_field_xy(grid, [&](double a, double b) {
      const double r = std::hypot(a, b);
      const double t = std::abs(r - 1.0);
      if (t > m || r == 0.0) return 0.0;
      const double phi = std::atan2(a, b);  // angle from the b block
      return std::exp(-0.5 * phi * phi / (delta * delta)) / (eps + t * t);
    });
    auto rep = roughness_report(fake, 1, delta);
    CHECK(rep.sup_ratio > 0.2 / delta);
    CHECK(rep.sup_ratio < 4.0 / delta);
    CHECK(rep.in_theorem_regime);
  }
}

TEST_CASE("layer cake bound") {
  SUBCASE("unit ball indicator") {
    RadialProfileSamples s;
    s.d = 2;
    const int n = 2000;
    for (int i = 0; i < n; ++i) {
      s.radius.push_back(2.0 * i / (n - 1.0) + (i ? 0.0 : 0.0));
      s.value.push_back(s.radius.back() <= 1.0 ? 1.0 : 0.0);
    }
    auto rep = layer_cake_bound(s, 3.0, 4.0);
    // lambda(t) = |B_1| = pi for t < 1; the cake integral is pi exactly.
    CHECK(rep.layer_cake_lq_q == doctest::Approx(kPi).epsilon(2e-3));
    CHECK(rep.layer_cake_ok);
    CHECK(rep.direct_lq_q == doctest::Approx(kPi).epsilon(2e-3));
  }

  SUBCASE("critical decay across truncation radii: one constant") {
    double lo = kInf, hi = 0.0;
    for (double R : {10.0, 100.0, 1000.0}) {
      RadialProfileSamples s;
      s.d = 2;
      const int n = 4000;
      for (int i = 0; i < n; ++i) {
        const double r = 1.1 * R * std::pow(i / (n - 1.0), 1.5);
        s.radius.push_back(r);
        s.value.push_back(r <= R ? std::pow(1.0 + r, -0.5) : 0.0);
      }
      for (size_t i = 1; i < s.radius.size(); ++i)
        if (s.radius[i] <= s.radius[i - 1])
          s.radius[i] = s.radius[i - 1] + 1e-9 * R;
      auto rep = layer_cake_bound(s, 3.0, 4.0);
      CHECK(rep.layer_cake_ok);
      CHECK(rep.c2 == doctest::Approx(1.0).epsilon(1e-6));
      lo = std::min(lo, rep.ratio);
      hi = std::max(hi, rep.ratio);
    }
    CHECK(hi / lo < 1.5);
    CHECK(hi < 10.0);
  }

  SUBCASE("scaling invariance of the ratio") {
    RadialProfileSamples s;
    s.d = 2;
    for (int i = 0; i < 1000; ++i) {
      const double r = 20.0 * i / 999.0;
      s.radius.push_back(r);
      s.value.push_back(r <= 15.0 ? std::exp(-0.3 * r) : 0.0);
    }
    auto a = layer_cake_bound(s, 3.0, 4.0);
    for (double& v : s.value) v *= 137.0;
    auto b = layer_cake_bound(s, 3.0, 4.0);
    CHECK(b.c1 == doctest::Approx(137.0 * a.c1).epsilon(1e-12));
    CHECK(b.c2 == doctest::Approx(137.0 * a.c2).epsilon(1e-12));
    CHECK(b.lhs == doctest::Approx(137.0 * a.lhs).epsilon(1e-12));
    CHECK(b.ratio == doctest::Approx(a.ratio).epsilon(1e-9));
  }

  SUBCASE("non-decaying input rejected") {
    RadialProfileSamples s;
    s.d = 2;
    for (int i = 0; i < 100; ++i) {
      s.radius.push_back(i * 0.5);
      s.value.push_back(1.0);  // no truncation, C2 sits at the edge
    }
    CHECK_THROWS_AS(layer_cake_bound(s, 3.0, 4.0), std::invalid_argument);
    CHECK_THROWS_AS(layer_cake_bound(s, 5.0, 4.0), std::invalid_argument);
  }

  SUBCASE("seeded corpus: consistency and spread") {
    auto corpus = decay_corpus(2, 4.0, 25, 7u);
    REQUIRE(corpus.size() == 25);
    double lo = kInf, hi = 0.0;
    for (const auto& prof : corpus) {
      auto rep = layer_cake_bound(prof.samples, prof.r_exp, 4.0);
      CHECK(rep.layer_cake_ok);
      CHECK(rep.ratio > 0.0);
      lo = std::min(lo, rep.c1 / rep.c2);
      hi = std::max(hi, rep.c1 / rep.c2);
    }
    CHECK(lo < 10.0);
    CHECK(hi > 1e5);
    // Determinism of the corpus for a fixed seed.
    auto again = decay_corpus(2, 4.0, 25, 7u);
    CHECK(again[3].samples.value == corpus[3].samples.value);
  }
}
