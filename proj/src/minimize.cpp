#include "nlslab/minimize.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace nlslab {

void SolveConfig::validate() const {
  require(max_iterations >= 1, "SolveConfig: max_iterations >= 1");
  require(rel_tolerance > 0, "SolveConfig: rel_tolerance > 0");
  require(restarts >= 1, "SolveConfig: restarts >= 1");
  require(eps_floor_reduced > 0 && eps_floor_full > 0,
          "SolveConfig: eps floors > 0");
  require(r_max > 2.0, "SolveConfig: r_max > 2");
  if (init && *init == InitKind::FromField)
    require(!init_file.empty(), "SolveConfig: FromField needs init_file");
}

namespace {

constexpr double kPi = 3.14159265358979323846;

double clampd(double x, double lo, double hi) {
  return std::min(hi, std::max(lo, x));
}

// Smallest even 5-smooth integer >= n (friendly FFT sizes).
int good_fft_size(int n) {
  for (int c = std::max(2, n);; ++c) {
    if (c % 2) continue;
    int m = c;
    for (int f : {2, 3, 5})
      while (m % f == 0) m /= f;
    if (m == 1) return c;
  }
}

double eps_floor_for(SymmetryClass cls, const SolveConfig& cfg) {
  return cls == SymmetryClass::Full ? cfg.eps_floor_full
                                    : cfg.eps_floor_reduced;
}

// --- state shared by the solvers ----------------------------------------

struct Problem {
  ProblemParams params;
  SymmetryClass cls = SymmetryClass::Radial;
  double eps = 0.0;
  SymbolSpec symbol;
  Discretization disc;
  std::vector<double> g;  // symbol values at the spectral nodes

  double p() const { return params.p; }

  /// q_eps with the precomputed symbol values (the full-class grid has
  /// millions of nodes, so re-evaluating the symbol per call is costly).
  double quad(const SpectralField& u) const {
    const auto& grid = *u.grid;
    KahanSum s;
    for (size_t i = 0; i < u.re.size(); ++i) {
      double m2 = u.re[i] * u.re[i];
      if (u.has_im()) m2 += u.im[i] * u.im[i];
      s.add(grid.weight(i) * g[i] * m2);
    }
    return s.value();
  }
};

Problem make_problem(const ProblemParams& params, SymmetryClass cls,
                     double eps, const SymbolSpec& symbol,
                     const SolveConfig& cfg) {
  params.validate();
  cfg.validate();
  require(eps > 0 && eps < 1, "solve: eps in (0,1)");
  require(eps >= eps_floor_for(cls, cfg) * (1.0 - 1e-12),
          "solve: eps below the configured resolution floor");
  const auto exps = critical_exponents(params);
  require(params.p < exps.two_star_sobolev,
          "solve: p must be subcritical, p < 2d/(d-2s)");
  if (cls == SymmetryClass::Gk)
    require(params.k.has_value(), "solve: Gk class needs params.k");

  Problem P;
  P.params = params;
  P.cls = cls;
  P.eps = eps;
  P.symbol = symbol;
  P.disc = make_discretization(params, cls, eps, cfg);
  const auto& grid = *P.disc.spec;
  P.g.resize(grid.size());
  for (size_t i = 0; i < P.g.size(); ++i)
    P.g[i] = eval_symbol(symbol, grid.rho(i), eps);
  return P;
}

// --- small field algebra -------------------------------------------------

void scale_field(std::vector<double>& re, std::vector<double>& im, double a) {
  for (double& v : re) v *= a;
  for (double& v : im) v *= a;
}

template <class Field>
Field lincomb(double a, const Field& u, double b, const Field& v) {
  Field out;
  out.grid = u.grid;
  const size_t n = u.re.size();
  out.re.resize(n);
  for (size_t i = 0; i < n; ++i) out.re[i] = a * u.re[i] + b * v.re[i];
  if (u.has_im() || v.has_im()) {
    out.im.resize(n);
    for (size_t i = 0; i < n; ++i)
      out.im[i] = a * (u.has_im() ? u.im[i] : 0.0) +
                  b * (v.has_im() ? v.im[i] : 0.0);
  }
  return out;
}

// |f|^{p-2} f, pointwise.
PhysicalField nonlinearity(const PhysicalField& f, double p) {
  PhysicalField out;
  out.grid = f.grid;
  const size_t n = f.re.size();
  out.re.resize(n);
  if (f.has_im()) {
    out.im.resize(n);
    for (size_t i = 0; i < n; ++i) {
      const double m = std::hypot(f.re[i], f.im[i]);
      const double a = m > 0 ? std::pow(m, p - 2.0) : 0.0;
      out.re[i] = a * f.re[i];
      out.im[i] = a * f.im[i];
    }
  } else {
    for (size_t i = 0; i < n; ++i) {
      const double m = std::abs(f.re[i]);
      out.re[i] = m > 0 ? std::pow(m, p - 2.0) * f.re[i] : 0.0;
    }
  }
  return out;
}

double weighted_l2_sq(const SpectralField& u) {
  const auto& g = *u.grid;
  KahanSum s;
  for (size_t i = 0; i < u.re.size(); ++i) {
    double m2 = u.re[i] * u.re[i];
    if (u.has_im()) m2 += u.im[i] * u.im[i];
    s.add(g.weight(i) * m2);
  }
  return s.value();
}

struct IterState {
  SpectralField u;   // ||u||_p = 1
  PhysicalField f;   // synthesize(u)
  double rayleigh = 0.0;
  double lp_tail_fraction = 0.0;
};

// Normalizes (u, f) to unit p-norm and evaluates the quotient. Returns
// false for degenerate (zero or non-finite) fields.
bool normalize_state(const Problem& P, SpectralField u, PhysicalField f,
                     IterState& out) {
  const LpResult lp = lp_norm(f, P.p(), false);
  if (!(lp.value > 0) || !std::isfinite(lp.value)) return false;
  scale_field(u.re, u.im, 1.0 / lp.value);
  scale_field(f.re, f.im, 1.0 / lp.value);
  out.u = std::move(u);
  out.f = std::move(f);
  out.rayleigh = P.quad(out.u);
  out.lp_tail_fraction = lp.value > 0 ? lp.tail / lp.value : 0.0;
  return std::isfinite(out.rayleigh) && out.rayleigh > 0;
}

bool normalize_state(const Problem& P, SpectralField u, IterState& out) {
  PhysicalField f = P.disc.transform->synthesize(u);
  return normalize_state(P, std::move(u), std::move(f), out);
}

double el_residual_of(const Problem& P, const IterState& st) {
  PhysicalField nl = nonlinearity(st.f, P.p());
  SpectralField a = P.disc.transform->analyze(nl);
  const auto& grid = *P.disc.spec;
  KahanSum num, den;
  for (size_t i = 0; i < st.u.re.size(); ++i) {
    const double w = grid.weight(i);
    const double gre = P.g[i] * st.u.re[i];
    const double gim = st.u.has_im() ? P.g[i] * st.u.im[i] : 0.0;
    const double rre = gre - st.rayleigh * a.re[i];
    const double rim = gim - st.rayleigh * (a.has_im() ? a.im[i] : 0.0);
    num.add(w * (rre * rre + rim * rim));
    den.add(w * (gre * gre + gim * gim));
  }
  return den.value() > 0 ? std::sqrt(num.value() / den.value()) : kInf;
}

// --- initializers --------------------------------------------------------

SpectralField radial_profile_init(const Problem& P) {
  const TrialSpec spec = TrialSpec::radial_defaults(P.eps, P.params.gamma);
  return make_field(P.disc.spec, [&](double r) {
    const double t = std::abs(r - 1.0);
    return t <= spec.m ? spec.profile(t) : 0.0;
  });
}

SpectralField knapp_init(const Problem& P) {
  const TrialSpec spec = TrialSpec::knapp_defaults(P.eps, P.params.gamma);
  auto value = [&](double a, double r) {
    const double t = std::abs(r - 1.0);
    return (t <= spec.m && a < spec.delta * r) ? spec.profile(t) : 0.0;
  };
  if (P.disc.spec->ncoords() == 2)
    return make_field_xy(P.disc.spec, [&](double a, double b) {
      return value(std::abs(a), std::hypot(a, b));
    });
  // d = 3 full grid: cap about the first coordinate axis.
  SpectralField u;
  u.grid = P.disc.spec;
  u.re.resize(u.grid->size());
  double c[4];
  for (size_t i = 0; i < u.re.size(); ++i) {
    u.grid->coords(i, c);
    const double r = u.grid->rho(i);
    const double a = std::hypot(c[1], c[2]);
    u.re[i] = value(a, r);
  }
  return u;
}

SpectralField random_shell_init(const Problem& P, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  SpectralField u;
  u.grid = P.disc.spec;
  const size_t n = u.grid->size();
  u.re.assign(n, 0.0);
  const bool cplx =
      P.cls == SymmetryClass::Full || P.cls == SymmetryClass::Axial;
  if (cplx) u.im.assign(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    if (std::abs(u.grid->rho(i) - 1.0) > 0.25) continue;
    u.re[i] = unif(rng);
    if (cplx) u.im[i] = unif(rng);
  }
  return u;
}

SpectralField build_init(const Problem& P, InitKind kind, std::uint64_t seed,
                         const std::string& file) {
  SpectralField u;
  switch (kind) {
    case InitKind::KnappTrial:
      u = P.cls == SymmetryClass::Radial ? radial_profile_init(P)
                                         : knapp_init(P);
      break;
    case InitKind::RadialTrial:
      u = radial_profile_init(P);
      break;
    case InitKind::RandomShell:
      u = random_shell_init(P, seed);
      break;
    case InitKind::FromField:
      u = resample_spectral(load_field(file), P.disc.spec);
      break;
  }
  if (P.cls == SymmetryClass::Full || P.cls == SymmetryClass::Axial)
    u.ensure_im();
  return u;
}

// --- the fixed-point solver ----------------------------------------------

SolveResult run_picard(const Problem& P, SpectralField init,
                       const SolveConfig& cfg, const std::string& init_label) {
  SolveResult res;
  res.params = P.params;
  res.symbol = P.symbol;
  res.cls = P.cls;
  res.eps = P.eps;
  res.note = "init: " + init_label;

  IterState st;
  if (!normalize_state(P, std::move(init), st)) {
    res.note += "; degenerate initializer";
    return res;
  }
  res.trace.push_back(st.rayleigh);

  int consecutive = 0;
  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    // Fixed-point candidate w = g^{-1} analyze(|u|^{p-2} u).
    PhysicalField nl = nonlinearity(st.f, P.p());
    SpectralField w = P.disc.transform->analyze(nl);
    for (size_t i = 0; i < w.re.size(); ++i) {
      w.re[i] /= P.g[i];
      if (w.has_im()) w.im[i] /= P.g[i];
    }
    IterState cand;
    if (!normalize_state(P, std::move(w), cand)) {
      res.note += "; degenerate iterate";
      break;
    }

    // Monotonicity line search along the segment toward the candidate;
    // synthesize is linear, so each trial costs only a p-norm and a
    // quadratic form.
    bool accepted = false;
    IterState next;
    for (double s = 1.0; s > 1e-3; s *= 0.5) {
      SpectralField us = lincomb(1.0 - s, st.u, s, cand.u);
      PhysicalField fs = lincomb(1.0 - s, st.f, s, cand.f);
      IterState trial;
      if (!normalize_state(P, std::move(us), std::move(fs), trial)) continue;
      if (trial.rayleigh <= st.rayleigh * (1.0 + 1e-12)) {
        accepted = true;
        next = std::move(trial);
        break;
      }
    }

    res.iterations = iter;
    if (accepted) {
      const double rel =
          std::abs(next.rayleigh - st.rayleigh) / std::max(st.rayleigh, 1e-300);
      SpectralField delta = lincomb(1.0, next.u, -1.0, st.u);
      res.last_step = std::sqrt(weighted_l2_sq(delta));
      st = std::move(next);
      consecutive = rel < cfg.rel_tolerance ? consecutive + 1 : 0;
    } else {
      // The quotient cannot decrease along the fixed-point direction:
      // the iteration has stalled at quotient level, count it as flat.
      res.last_step = 0.0;
      ++consecutive;
    }
    res.trace.push_back(st.rayleigh);
    if (consecutive >= 3) {
      res.converged = true;
      break;
    }
  }

  res.minimizer = st.u;
  res.rayleigh = st.rayleigh;
  res.lp_tail_fraction = st.lp_tail_fraction;
  res.el_residual = el_residual_of(P, st);

  // The descent property is part of the result contract; verify it here
  // rather than trusting the line search logic.
  for (size_t i = 1; i < res.trace.size(); ++i)
    if (res.trace[i] > res.trace[i - 1] * (1.0 + 1e-10))
      throw std::logic_error("solver: quotient trace increased");
  return res;
}

std::vector<std::pair<InitKind, std::string>> multistart_plan(
    const SolveConfig& cfg) {
  std::vector<std::pair<InitKind, std::string>> plan;
  if (cfg.init) {
    switch (*cfg.init) {
      case InitKind::KnappTrial:
        plan.emplace_back(InitKind::KnappTrial, "knapp_trial");
        break;
      case InitKind::RadialTrial:
        plan.emplace_back(InitKind::RadialTrial, "radial_trial");
        break;
      case InitKind::RandomShell:
        plan.emplace_back(InitKind::RandomShell, "random_shell");
        break;
      case InitKind::FromField:
        plan.emplace_back(InitKind::FromField, "file");
        break;
    }
    return plan;
  }
  plan.emplace_back(InitKind::KnappTrial, "knapp_trial");
  if (cfg.restarts >= 2) plan.emplace_back(InitKind::RadialTrial, "radial_trial");
  for (int i = 2; i < cfg.restarts; ++i)
    plan.emplace_back(InitKind::RandomShell, "random_shell");
  return plan;
}

SolveResult solve_problem(const Problem& P, const SolveConfig& cfg) {
  std::optional<SolveResult> best;
  int random_idx = 0;
  for (const auto& [kind, label] : multistart_plan(cfg)) {
    const std::uint64_t seed = cfg.seed + 1000003ull * random_idx;
    if (kind == InitKind::RandomShell) ++random_idx;
    SolveResult r =
        run_picard(P, build_init(P, kind, seed, cfg.init_file), cfg, label);
    auto better = [](const SolveResult& a, const SolveResult& b) {
      if (a.converged != b.converged) return a.converged;
      const bool av = a.rayleigh > 0, bv = b.rayleigh > 0;
      if (av != bv) return av;
      return a.rayleigh < b.rayleigh;
    };
    if (!best || better(r, *best)) best = std::move(r);
  }
  if (!best->converged)
    best->note += "; not converged within max_iterations";
  return *best;
}

SolveResult solve_from_field(const Problem& P, const SpectralField& warm,
                             const SolveConfig& cfg) {
  SolveResult r = run_picard(P, resample_spectral(warm, P.disc.spec), cfg,
                             "warm_start");
  if (r.converged) return r;
  // Fall back to the full multistart when the warm start stalls.
  return solve_problem(P, cfg);
}

}  // namespace

// --- discretization ------------------------------------------------------

Discretization make_discretization(const ProblemParams& params,
                                   SymmetryClass cls, double eps,
                                   const SolveConfig& config) {
  const int d = params.d;
  const double gamma = params.gamma;
  // The minimizer's physical coherence scale is the inverse shell width.
  const double coherence = std::pow(eps, -1.0 / gamma);
  // Grading target for the graded builders; large eps just reuses the
  // finest grid they accept (over-resolving is harmless).
  const double eps_grade = std::min(eps, 0.05);
  Discretization disc;
  switch (cls) {
    case SymmetryClass::Radial: {
      disc.spec = radial_spectral_grid(d, eps_grade, gamma, config.r_max);
      disc.phys =
          radial_phys_grid(d, clampd(3.0 * coherence, 60.0, 1200.0), 5.0);
      break;
    }
    case SymmetryClass::Gk: {
      require(params.k.has_value(), "make_discretization: Gk needs k");
      disc.spec = block_spectral_grid(d, *params.k, eps_grade, gamma, config.r_max);
      // Cap-localized minimizers spread like 1/delta transversally and
      // like the coherence scale longitudinally.
      const double delta = std::pow(eps, 1.0 / (2.0 * gamma));
      disc.phys = block_phys_grid(d, *params.k,
                                  clampd(8.0 / delta, 60.0, 400.0),
                                  clampd(3.0 * coherence, 60.0, 1200.0), 3.0);
      break;
    }
    case SymmetryClass::Axial: {
      disc.spec = axial_spectral_grid(d, eps_grade, gamma, config.r_max);
      disc.phys =
          axial_phys_grid(d, clampd(3.0 * coherence, 60.0, 900.0), 3.0);
      break;
    }
    case SymmetryClass::Full: {
      require(d == 2 || d == 3, "make_discretization: full class needs d in {2,3}");
      const double step = 0.6;
      const double box_target = std::max(40.0, 4.0 * kPi * coherence);
      int n = good_fft_size(int(std::ceil(box_target / step)));
      n = std::min(n, d == 2 ? 2304 : 160);
      const double box = n * step;
      disc.spec = full_spectral_grid(d, n, box);
      disc.phys = full_phys_grid(d, n, box);
      break;
    }
  }
  disc.transform = std::make_shared<FieldTransform>(disc.spec, disc.phys);
  return disc;
}

double rayleigh_quotient(const SpectralField& u, const SymbolSpec& symbol,
                         double eps, double p, const FieldTransform& t) {
  const double lp = lp_norm(u, p, t, false).value;
  require(lp > 0, "rayleigh_quotient: zero field");
  return quad_form(u, symbol, eps) / (lp * lp);
}

SpectralField resample_spectral(const SpectralField& u,
                                std::shared_ptr<const GridDesc> grid) {
  const GridDesc& src = *u.grid;
  require(grid->sym == src.sym && grid->d == src.d && grid->k == src.k,
          "resample_spectral: symmetry class mismatch");

  // Per-axis linear interpolation stencil: index of the left neighbor and
  // the right-neighbor weight; values outside the source axis map to zero.
  auto stencil = [](const std::vector<double>& ax, double x, int& i0,
                    double& t) {
    if (x < ax.front() || x > ax.back()) {
      i0 = -1;
      return;
    }
    auto it = std::upper_bound(ax.begin(), ax.end(), x);
    if (it == ax.begin()) ++it;
    if (it == ax.end()) --it;
    i0 = int(it - ax.begin()) - 1;
    const double x0 = ax[i0], x1 = ax[i0 + 1];
    t = x1 > x0 ? (x - x0) / (x1 - x0) : 0.0;
  };

  SpectralField out;
  out.grid = grid;
  const size_t n = grid->size();
  out.re.assign(n, 0.0);
  if (u.has_im()) out.im.assign(n, 0.0);

  std::vector<double> src_ax1, src_ax2;
  if (src.sym == SymmetryClass::Full) {
    src_ax1.resize(src.N);
    for (int i = 0; i < src.N; ++i)
      src_ax1[i] = (double(i) - src.N / 2) * src.step;
  } else {
    src_ax1 = src.axis1.x;
    src_ax2 = src.axis2.x;
  }

  const int nc = grid->ncoords();
  double c[4];
  std::vector<size_t> stride(nc);
  if (src.sym == SymmetryClass::Full) {
    stride[nc - 1] = 1;
    for (int a = nc - 2; a >= 0; --a) stride[a] = stride[a + 1] * src.N;
  }
  for (size_t idx = 0; idx < n; ++idx) {
    grid->coords(idx, c);
    // Multilinear combination over the 2^nc source cell corners.
    int i0[4];
    double t[4];
    bool inside = true;
    for (int a = 0; a < nc && inside; ++a) {
      const auto& ax = (src.sym == SymmetryClass::Full || a == 0) ? src_ax1
                                                                  : src_ax2;
      stencil(ax, c[a], i0[a], t[a]);
      inside = i0[a] >= 0;
    }
    if (!inside) continue;
    double vr = 0.0, vi = 0.0;
    for (int corner = 0; corner < (1 << nc); ++corner) {
      double w = 1.0;
      size_t sidx = 0;
      for (int a = 0; a < nc; ++a) {
        const int hi = (corner >> a) & 1;
        w *= hi ? t[a] : 1.0 - t[a];
        const size_t ia = size_t(i0[a] + hi);
        if (src.sym == SymmetryClass::Full)
          sidx += ia * stride[a];
        else
          sidx = a == 0 ? ia * (nc == 2 ? src.axis2.x.size() : 1)
                        : sidx + ia;
      }
      vr += w * u.re[sidx];
      if (u.has_im()) vi += w * u.im[sidx];
    }
    out.re[idx] = vr;
    if (u.has_im()) out.im[idx] = vi;
  }
  return out;
}

// --- public solvers ------------------------------------------------------

SolveResult solve_ground_state(const ProblemParams& params, double eps,
                               SymmetryClass cls, const SymbolSpec& symbol,
                               const SolveConfig& config) {
  return solve_problem(make_problem(params, cls, eps, symbol, config), config);
}

SweepResult sweep(const ProblemParams& params, std::span<const double> eps_list,
                  SymmetryClass cls, const SymbolSpec& symbol,
                  const SolveConfig& config) {
  require(!eps_list.empty(), "sweep: empty eps list");
  std::vector<double> eps(eps_list.begin(), eps_list.end());
  std::sort(eps.begin(), eps.end(), std::greater<>());
  for (size_t i = 1; i < eps.size(); ++i)
    require(eps[i] < eps[i - 1], "sweep: eps values must be distinct");

  SweepResult out;
  out.params = params;
  out.cls = cls;
  for (size_t i = 0; i < eps.size(); ++i) {
    Problem P = make_problem(params, cls, eps[i], symbol, config);
    SolveResult r = i == 0 || !out.solves.back().converged
                        ? solve_problem(P, config)
                        : solve_from_field(P, out.solves.back().minimizer,
                                           config);
    out.points.push_back({eps[i], r.rayleigh, r.converged});
    out.solves.push_back(std::move(r));
  }

  std::vector<double> fe, fr;
  for (const auto& pt : out.points)
    if (pt.converged) {
      fe.push_back(pt.eps);
      fr.push_back(pt.rayleigh);
    }
  if (fe.size() >= 3) {
    const RatePrediction pred = predicted_rate(params, cls);
    out.fit = fit_rate(fe, fr, pred.log_power != 0.0, pred.log_power);
    out.fit_valid = true;
  }
  return out;
}

RateFit fit_rate(std::span<const double> eps, std::span<const double> rayleigh,
                 bool with_log_correction, double log_power) {
  require(eps.size() == rayleigh.size(), "fit_rate: size mismatch");
  require(eps.size() >= 3, "fit_rate: needs at least 3 converged points");
  std::vector<double> x, y;
  for (size_t i = 0; i < eps.size(); ++i) {
    require(eps[i] > 0 && eps[i] < 1 && rayleigh[i] > 0,
            "fit_rate: eps in (0,1) and positive quotients required");
    x.push_back(std::log(eps[i]));
    double yi = std::log(rayleigh[i]);
    if (with_log_correction)
      yi -= log_power * std::log(std::abs(std::log(eps[i])));
    y.push_back(yi);
  }
  const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  require(*mx - *mn > 1e-9, "fit_rate: degenerate abscissas");
  for (size_t i = 0; i < x.size(); ++i)
    for (size_t j = i + 1; j < x.size(); ++j)
      require(std::abs(x[i] - x[j]) > 1e-12, "fit_rate: duplicate abscissas");

  const LineFit lf = fit_line(x, y);
  RateFit out;
  out.slope = lf.slope;
  out.intercept = lf.intercept;
  out.rms_residual = lf.rms_residual;
  out.log_power_used = with_log_correction ? log_power : 0.0;
  auto [lo, hi] = compensated_band(eps, rayleigh, out.slope, out.log_power_used);
  out.band_lo = lo;
  out.band_hi = hi;
  return out;
}

std::pair<double, double> compensated_band(std::span<const double> eps,
                                           std::span<const double> rayleigh,
                                           double power, double log_power) {
  require(!eps.empty() && eps.size() == rayleigh.size(),
          "compensated_band: size mismatch");
  double lo = kInf, hi = -kInf;
  for (size_t i = 0; i < eps.size(); ++i) {
    const double c = rayleigh[i] * std::pow(eps[i], -power) *
                     std::pow(std::abs(std::log(eps[i])), -log_power);
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  return {lo, hi};
}

ChainReport verify_chain(const ProblemParams& params, double eps,
                         const SymbolSpec& symbol, const SolveConfig& config) {
  ChainReport rep;
  rep.params = params;
  rep.eps = eps;

  struct Task {
    SymmetryClass cls;
    int k;
    std::string label;
  };
  std::vector<Task> tasks;
  if (params.d <= 3) tasks.push_back({SymmetryClass::Full, 0, "full"});
  for (int k = 2; k <= params.d / 2; ++k)
    tasks.push_back({SymmetryClass::Gk, k, "G" + std::to_string(k)});
  tasks.push_back({SymmetryClass::Radial, 0, "radial"});

  // The ordering is only meaningful below the Stein-Tomas exponent of
  // every block class in the chain, so enforce that up front.
  for (const auto& t : tasks)
    if (t.cls == SymmetryClass::Gk) {
      ProblemParams pp = params;
      pp.k = t.k;
      require(params.p < critical_exponents(pp).two_star_k,
              "verify_chain: p must be below 2_*^k for every chain class");
    }

  bool all_converged = true;
  for (const auto& t : tasks) {
    ProblemParams pp = params;
    if (t.cls == SymmetryClass::Gk)
      pp.k = t.k;
    else
      pp.k.reset();
    SolveResult r = solve_ground_state(pp, eps, t.cls, symbol, config);
    ChainEntry e;
    e.cls = t.cls;
    e.k = t.k;
    e.rayleigh = r.rayleigh;
    e.converged = r.converged;
    e.label = t.label;
    // Resolution allowance: 1% of the value (grid-level systematic)
    // plus the recent trace fluctuation.
    double fluct = 0.0;
    if (r.trace.size() >= 4)
      fluct = std::abs(r.trace.back() - r.trace[r.trace.size() - 4]);
    e.uncertainty = 0.01 * std::abs(r.rayleigh) + fluct;
    all_converged = all_converged && r.converged;
    rep.entries.push_back(std::move(e));
  }

  bool all_strict = true;
  for (size_t i = 0; i + 1 < rep.entries.size(); ++i) {
    const auto& lo = rep.entries[i];
    const auto& hi = rep.entries[i + 1];
    ChainGap g;
    g.lower_label = lo.label;
    g.upper_label = hi.label;
    g.gap = hi.rayleigh - lo.rayleigh;
    g.combined_uncertainty = lo.uncertainty + hi.uncertainty;
    g.strict = g.gap > g.combined_uncertainty;
    all_strict = all_strict && g.strict;
    rep.gaps.push_back(std::move(g));
  }
  rep.verdict = !all_converged ? "invalid"
               : all_strict    ? "pass"
                               : "inconclusive";
  return rep;
}

SolveResult projected_gradient_solve(const ProblemParams& params, double eps,
                                     SymmetryClass cls,
                                     const SymbolSpec& symbol,
                                     const SolveConfig& config,
                                     int max_iterations) {
  Problem P = make_problem(params, cls, eps, symbol, config);
  SolveResult res;
  res.params = params;
  res.symbol = symbol;
  res.cls = cls;
  res.eps = eps;
  res.note = "projected_gradient";

  IterState st;
  SpectralField init = cls == SymmetryClass::Radial ? radial_profile_init(P)
                                                    : knapp_init(P);
  if (cls == SymmetryClass::Full || cls == SymmetryClass::Axial)
    init.ensure_im();
  if (!normalize_state(P, std::move(init), st)) {
    res.note += "; degenerate initializer";
    return res;
  }
  res.trace.push_back(st.rayleigh);

  double step = 0.1;
  int consecutive = 0;
  for (int iter = 1; iter <= max_iterations; ++iter) {
    // Gradient of the quotient in the g-weighted inner product
    // <u,v> = sum W g u v (analyze is the exact adjoint of synthesize, so
    // no mass matrices appear): grad = 2 (u - R g^{-1} analyze(|u|^{p-2}u))
    // at ||u||_p = 1. The plain l2 gradient is useless here because the
    // symbol spans several orders of magnitude across the grid.
    PhysicalField nl = nonlinearity(st.f, P.p());
    SpectralField a = P.disc.transform->analyze(nl);
    SpectralField grad;
    grad.grid = st.u.grid;
    grad.re.resize(st.u.re.size());
    if (st.u.has_im() || a.has_im()) grad.im.resize(st.u.re.size());
    for (size_t i = 0; i < grad.re.size(); ++i) {
      grad.re[i] = 2.0 * (st.u.re[i] - st.rayleigh * a.re[i] / P.g[i]);
      if (!grad.im.empty())
        grad.im[i] =
            2.0 * ((st.u.has_im() ? st.u.im[i] : 0.0) -
                   st.rayleigh * (a.has_im() ? a.im[i] : 0.0) / P.g[i]);
    }
    PhysicalField grad_phys = P.disc.transform->synthesize(grad);

    bool accepted = false;
    IterState next;
    for (double s = step * 2.0; s > 1e-14; s *= 0.5) {
      SpectralField us = lincomb(1.0, st.u, -s, grad);
      PhysicalField fs = lincomb(1.0, st.f, -s, grad_phys);
      IterState trial;
      if (!normalize_state(P, std::move(us), std::move(fs), trial)) continue;
      if (trial.rayleigh <= st.rayleigh * (1.0 + 1e-14)) {
        accepted = true;
        next = std::move(trial);
        step = s;
        break;
      }
    }
    res.iterations = iter;
    if (!accepted) {
      ++consecutive;
    } else {
      const double rel =
          std::abs(next.rayleigh - st.rayleigh) / std::max(st.rayleigh, 1e-300);
      st = std::move(next);
      consecutive = rel < config.rel_tolerance ? consecutive + 1 : 0;
    }
    res.trace.push_back(st.rayleigh);
    if (consecutive >= 3) {
      res.converged = true;
      break;
    }
  }

  res.minimizer = st.u;
  res.rayleigh = st.rayleigh;
  res.lp_tail_fraction = st.lp_tail_fraction;
  res.el_residual = el_residual_of(P, st);
  return res;
}

}  // namespace nlslab
