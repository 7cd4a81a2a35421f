#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "nlslab/exponents.hpp"

using namespace nlslab;

namespace {
ProblemParams params(int d, int k, double p, double s = 2.0,
                     double gamma = 2.0) {
  ProblemParams q;
  q.d = d;
  q.k = k;
  q.p = p;
  q.s = s;
  q.gamma = gamma;
  return q;
}
}  // namespace

TEST_CASE("critical exponents: worked examples") {
  auto e = critical_exponents(params(4, 2, 2.5));
  CHECK(e.two_star_k == doctest::Approx(3.0).epsilon(1e-14));

  e = critical_exponents(params(2, 1, 3.0));
  CHECK(e.two_star_k == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(e.two_star == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(e.alpha_k == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(e.alpha_rad == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(std::isinf(e.two_star_sobolev));  // s = 2 >= d/2 = 1
}

TEST_CASE("critical exponents: rejects bad parameters") {
  CHECK_THROWS_AS((void)critical_exponents(params(4, 2, 2.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)critical_exponents(params(4, 0, 2.5)),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)critical_exponents(params(4, 4, 2.5)),
                  std::invalid_argument);
  // p above the Sobolev-critical exponent 2d/(d-2s): d=5, s=1 -> 10/3.
  CHECK_THROWS_AS((void)critical_exponents(params(5, 1, 4.0, 1.0)),
                  std::invalid_argument);
}

TEST_CASE("exponent ordering chain and k <-> d-k symmetry") {
  for (int d = 2; d <= 7; ++d) {
    for (int k = 1; k <= d - 1; ++k) {
      for (double p : {2.1, 2.2, 2.25}) {
        auto e = critical_exponents(params(d, k, p));
        auto e1 = critical_exponents(params(d, 1, p));
        CHECK(2.0 < e.two_star_rad);
        CHECK(e.two_star_rad < e.two_star_k);
        CHECK(e.two_star_k <= e1.two_star_k);
        CHECK(e1.two_star_k == doctest::Approx(e.two_star).epsilon(1e-14));
        CHECK(e.two_star < e.two_star_sobolev);
        auto em = critical_exponents(params(d, d - k, p));
        CHECK(e.two_star_k == doctest::Approx(em.two_star_k).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("alpha in (0,1) iff p below the matching critical exponent") {
  for (int d = 2; d <= 5; ++d) {
    for (int k = 1; k <= d - 1; ++k) {
      auto at = [&](double p) { return critical_exponents(params(d, k, p)); };
      const double pk = at(2.1).two_star_k;
      const double prad = at(2.1).two_star_rad;
      CHECK(at(0.5 * (2 + pk)).alpha_k > 0.0);
      CHECK(at(0.5 * (2 + pk)).alpha_k < 1.0);
      CHECK(at(0.5 * (2 + prad)).alpha_rad < 1.0);
      if (pk * 1.1 < critical_exponents(params(d, k, 2.1)).two_star_sobolev)
        CHECK(at(pk * 1.1).alpha_k > 1.0);
    }
  }
}

TEST_CASE("predicted rates: worked examples") {
  auto r = predicted_rate(params(2, 1, 3.0), SymmetryClass::Radial);
  CHECK(r.power == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(r.log_power == 0.0);

  r = predicted_rate(params(2, 1, 4.0), SymmetryClass::Radial);
  CHECK(r.power == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(r.log_power == doctest::Approx(-0.5).epsilon(1e-14));

  r = predicted_rate(params(2, 1, 3.0), SymmetryClass::Full);
  CHECK(r.power == doctest::Approx(0.75).epsilon(1e-14));

  r = predicted_rate(params(4, 2, 2.5), SymmetryClass::Gk);
  CHECK(r.power == doctest::Approx(0.7).epsilon(1e-14));
  r = predicted_rate(params(4, 2, 2.5), SymmetryClass::Radial);
  CHECK(r.power == doctest::Approx(0.6).epsilon(1e-14));
}

TEST_CASE("predicted rates: alpha saturates at 1") {
  // d=3, p=3.8 radial: alpha_rad = 6*(1/2-1/3.8) > 1, so power = 1 - 1/gamma.
  auto r = predicted_rate(params(3, 1, 3.8, 2.0, 3.0), SymmetryClass::Radial);
  CHECK(r.power == doctest::Approx(1.0 - 1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("eval_symbol: biharmonic and shell-power") {
  auto bih = SymbolSpec::biharmonic();
  CHECK(eval_symbol(bih, 1.0, 0.01) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(eval_symbol(bih, 0.0, 0.01) == doctest::Approx(1.01).epsilon(1e-15));

  auto sp = SymbolSpec::shell_power(2.0, 2.0);
  CHECK(eval_symbol(sp, 1.1, 1e-4) == doctest::Approx(0.0101).epsilon(1e-12));
  // Away from the shell: 1 + r^{2s}.
  CHECK(eval_symbol(sp, 2.0, 1e-4) ==
        doctest::Approx(1.0 + 16.0).epsilon(1e-12));
  // Positivity across the domain.
  for (double r = 0.0; r <= 10.0; r += 0.01)
    for (double eps : {1e-6, 1e-3, 0.5})
      CHECK(eval_symbol(sp, r, eps) > 0.0);
}

TEST_CASE("eval_symbol: tabulated interpolation and range errors") {
  std::map<double, std::vector<std::pair<double, double>>> tab;
  tab[0.01] = {{0.5, 2.0}, {1.0, 1.0}, {1.5, 3.0}};
  auto spec = SymbolSpec::tabulated(tab);
  CHECK(eval_symbol(spec, 0.75, 0.01) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(eval_symbol(spec, 1.0, 0.01) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS((void)eval_symbol(spec, 2.0, 0.01), std::invalid_argument);
  CHECK_THROWS_AS((void)eval_symbol(spec, 0.75, 0.5), std::invalid_argument);

  tab[0.01] = {{0.5, 0.0}, {1.5, 0.0}};
  CHECK_THROWS_AS((void)SymbolSpec::tabulated(tab), std::invalid_argument);
}

TEST_CASE("check_admissibility: biharmonic passes (s=2,g=2), fails g=3") {
  const double eps_list[] = {1e-2, 1e-3, 1e-4};
  auto rep = check_admissibility(SymbolSpec::biharmonic(), 2.0, 2.0, eps_list);
  CHECK(rep.pass);
  CHECK(rep.c_lower > 0.0);
  CHECK(rep.c_lower <= rep.C_upper);

  auto bad = check_admissibility(SymbolSpec::biharmonic(), 2.0, 3.0, eps_list);
  CHECK_FALSE(bad.pass);
  CHECK(bad.failed_bound == "A2");

  CHECK_THROWS_AS((void)check_admissibility(SymbolSpec::biharmonic(), 2.0, 2.0,
                                            std::span<const double>{}),
                  std::invalid_argument);
}

TEST_CASE("inverse_symbol_integral: arctan oracle for gamma=2 shell power") {
  auto sp = SymbolSpec::shell_power(2.0, 2.0);
  for (double eps : {1.0 - 1e-12, 1e-2, 1e-4, 1e-6}) {
    const double oracle =
        2.0 / std::sqrt(eps) * std::atan(0.5 / std::sqrt(eps));
    CHECK(inverse_symbol_integral(sp, eps) ==
          doctest::Approx(oracle).epsilon(1e-8));
  }
}

TEST_CASE("inverse_symbol_integral: slope 1/gamma - 1 across symbols") {
  for (auto spec : {SymbolSpec::biharmonic(), SymbolSpec::shell_power(2, 2),
                    SymbolSpec::shell_power(2, 3)}) {
    const double gamma = spec.gamma;
    std::vector<double> lx, ly;
    for (double eps : {1e-2, 1e-3, 1e-4, 1e-5}) {
      lx.push_back(std::log(eps));
      ly.push_back(std::log(inverse_symbol_integral(spec, eps)));
    }
    const auto fit = fit_line(lx, ly);
    CHECK(fit.slope == doctest::Approx(1.0 / gamma - 1.0).epsilon(0.05));
  }
}

TEST_CASE("inverse_symbol_integral: eps^{1-1/gamma}-normalized band") {
  auto sp = SymbolSpec::shell_power(2.0, 2.0);
  double lo = kInf, hi = 0.0;
  for (double eps : logspace(1e-6, 1e-1, 11)) {
    const double v =
        inverse_symbol_integral(sp, eps) * std::pow(eps, 1.0 - 0.5);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(hi / lo < 5.0);
}
