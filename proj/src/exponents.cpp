#include "nlslab/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nlslab {

ExponentSet critical_exponents_unchecked(const ProblemParams& params);

std::string to_string(SymmetryClass c) {
  switch (c) {
    case SymmetryClass::Full:
      return "full";
    case SymmetryClass::Gk:
      return "Gk";
    case SymmetryClass::Radial:
      return "radial";
    case SymmetryClass::Axial:
      return "axial";
  }
  return "?";
}

SymmetryClass symmetry_class_from_string(const std::string& s) {
  if (s == "full") return SymmetryClass::Full;
  if (s == "Gk" || s == "gk" || s == "block") return SymmetryClass::Gk;
  if (s == "radial") return SymmetryClass::Radial;
  if (s == "axial") return SymmetryClass::Axial;
  throw std::invalid_argument("unknown symmetry class: " + s);
}

void ProblemParams::validate() const {
  require(d >= 2, "d >= 2");
  require(p > 2.0, "p > 2");
  require(s > double(d) / (d + 1), "s > d/(d+1)");
  require(gamma > 1.0, "gamma > 1");
  if (k) require(*k >= 1 && *k <= d - 1, "k in 1..d-1");
  const ExponentSet e = critical_exponents_unchecked(*this);
  require(p < e.two_star_sobolev, "p < 2_s^* (Sobolev subcriticality)");
}

SymbolSpec SymbolSpec::biharmonic() {
  SymbolSpec sp;
  sp.kind = SymbolKind::Biharmonic;
  sp.s = 2.0;
  sp.gamma = 2.0;
  return sp;
}

SymbolSpec SymbolSpec::shell_power(double s, double gamma) {
  SymbolSpec sp;
  sp.kind = SymbolKind::ShellPower;
  sp.s = s;
  sp.gamma = gamma;
  return sp;
}

SymbolSpec SymbolSpec::tabulated(
    std::map<double, std::vector<std::pair<double, double>>> tables) {
  SymbolSpec sp;
  sp.kind = SymbolKind::Tabulated;
  sp.tables = std::move(tables);
  for (auto& [eps, tab] : sp.tables) {
    require(!tab.empty(), "tabulated symbol: empty table");
    std::sort(tab.begin(), tab.end());
    for (auto& [r, v] : tab)
      require(v > 0.0, "tabulated symbol: non-positive value");
  }
  return sp;
}

std::string SymbolSpec::id() const {
  std::ostringstream os;
  switch (kind) {
    case SymbolKind::Biharmonic:
      os << "biharmonic";
      break;
    case SymbolKind::ShellPower:
      os << "shell-power(s=" << s << ",gamma=" << gamma << ")";
      break;
    case SymbolKind::Tabulated:
      os << "tabulated(" << tables.size() << " eps slices)";
      break;
  }
  return os.str();
}

namespace {
ExponentSet exponents_impl(int d, int k, double p, double s) {
  ExponentSet e{};
  const int kk = std::min(k, d - k);
  e.two_star_k = 2.0 * (d + kk) / (d - 2.0 + kk);
  e.two_star = 2.0 * (d + 1) / (d - 1.0);
  e.two_star_rad = 2.0 * d / (d - 1.0);
  e.two_star_sobolev = (s < 0.5 * d) ? 2.0 * d / (d - 2.0 * s) : kInf;
  e.alpha_k = (0.5 - 1.0 / p) / (0.5 - 1.0 / e.two_star_k);
  e.alpha_rad = 2.0 * d * (0.5 - 1.0 / p);
  return e;
}
}  // namespace

// Used by ProblemParams::validate before full checks are possible.
ExponentSet critical_exponents_unchecked(const ProblemParams& params) {
  return exponents_impl(params.d, params.k.value_or(1), params.p, params.s);
}

ExponentSet critical_exponents(const ProblemParams& params) {
  require(params.p > 2.0, "p > 2");
  if (params.k)
    require(*params.k >= 1 && *params.k <= params.d - 1, "k in 1..d-1");
  params.validate();
  return exponents_impl(params.d, params.k.value_or(1), params.p, params.s);
}

RatePrediction predicted_rate(const ProblemParams& params, SymmetryClass cls) {
  params.validate();
  if (cls == SymmetryClass::Gk)
    require(params.k.has_value(), "Gk rate requires k");
  ProblemParams q = params;
  if (!q.k) q.k = 1;
  const ExponentSet e = critical_exponents(q);

  double alpha;
  switch (cls) {
    case SymmetryClass::Full:
    case SymmetryClass::Axial: {
      ProblemParams q1 = q;
      q1.k = 1;
      alpha = critical_exponents(q1).alpha_k;
      break;
    }
    case SymmetryClass::Gk:
      alpha = e.alpha_k;
      break;
    case SymmetryClass::Radial:
      alpha = e.alpha_rad;
      break;
    default:
      throw std::invalid_argument("unsupported class");
  }

  RatePrediction r;
  r.cls = cls;
  r.power = 1.0 - std::min(1.0, alpha) / params.gamma;
  r.log_power = 0.0;
  if (cls == SymmetryClass::Radial &&
      std::abs(params.p - e.two_star_rad) < 1e-12)
    r.log_power = (1.0 - params.d) / double(params.d);
  return r;
}

double eval_symbol(const SymbolSpec& spec, double r, double eps) {
  require(r >= 0.0, "eval_symbol: r >= 0");
  require(eps > 0.0 && eps < 1.0, "eval_symbol: eps in (0,1)");
  switch (spec.kind) {
    case SymbolKind::Biharmonic: {
      const double q = r * r - 1.0;
      return q * q + eps;
    }
    case SymbolKind::ShellPower: {
      const double t = std::abs(r - 1.0);
      const double inner = eps + std::pow(t, spec.gamma);
      const double outer = 1.0 + std::pow(r, 2.0 * spec.s);
      // Matching band just outside the half-shell; the max keeps both
      // two-sided bounds valid with explicit constants.
      if (t <= 0.5) return inner;
      if (t <= 0.55) return std::max(inner, outer);
      return outer;
    }
    case SymbolKind::Tabulated: {
      auto it = spec.tables.find(eps);
      if (it == spec.tables.end()) {
        // Accept eps within 1e-12 relative of a tabulated slice.
        for (auto jt = spec.tables.begin(); jt != spec.tables.end(); ++jt)
          if (std::abs(jt->first - eps) <= 1e-12 * std::max(1.0, eps)) {
            it = jt;
            break;
          }
      }
      require(it != spec.tables.end(), "tabulated symbol: eps not tabulated");
      const auto& tab = it->second;
      require(r >= tab.front().first && r <= tab.back().first,
              "tabulated symbol: r outside tabulated range");
      auto hi = std::lower_bound(tab.begin(), tab.end(),
                                 std::make_pair(r, -kInf));
      if (hi == tab.begin()) return hi->second;
      auto lo = std::prev(hi);
      if (hi == tab.end()) return lo->second;
      const double w = (r - lo->first) / (hi->first - lo->first);
      const double v = (1 - w) * lo->second + w * hi->second;
      require(v > 0.0, "tabulated symbol: non-positive value");
      return v;
    }
  }
  throw std::logic_error("unreachable");
}

std::vector<double> default_admissibility_grid() {
  std::vector<double> grid;
  // Shell regime |r-1| <= 1/2, both sides, log-spaced in the distance.
  for (double t : logspace(1e-4, 0.5, 512)) {
    grid.push_back(1.0 - t);
    grid.push_back(1.0 + t);
  }
  // Outer regime |r-1| >= 1/2 out to r = 100.
  for (double t : logspace(0.5, 99.0, 512)) {
    grid.push_back(1.0 + t);
    if (1.0 - t >= 0.0) grid.push_back(1.0 - t);
  }
  grid.push_back(0.0);
  std::sort(grid.begin(), grid.end());
  return grid;
}

AdmissibilityReport check_admissibility(const SymbolSpec& spec, double s,
                                        double gamma,
                                        std::span<const double> eps_list,
                                        std::span<const double> r_grid,
                                        double ratio_threshold) {
  require(!eps_list.empty(), "check_admissibility: empty eps list");
  for (double e : eps_list)
    require(e > 0 && e < 1, "check_admissibility: eps in (0,1)");

  std::vector<double> grid(r_grid.begin(), r_grid.end());
  if (grid.empty()) grid = default_admissibility_grid();
  require(!grid.empty(), "check_admissibility: empty r grid");
  bool has_inner = false, has_outer = false;
  for (double r : grid) {
    if (std::abs(r - 1.0) <= 0.5) has_inner = true;
    if (std::abs(r - 1.0) >= 0.5) has_outer = true;
  }
  require(has_inner && has_outer,
          "check_admissibility: grid must cover both regimes");

  AdmissibilityReport rep;
  rep.r_grid = grid;
  rep.eps_list.assign(eps_list.begin(), eps_list.end());
  rep.ratio_threshold = ratio_threshold;

  double c1 = kInf, C1 = 0.0;  // outer bound constants
  double c2 = kInf, C2 = 0.0;  // shell bound constants
  for (double eps : eps_list) {
    for (double r : grid) {
      const double g = eval_symbol(spec, r, eps);
      require(std::isfinite(g) && g > 0.0,
              "check_admissibility: symbol must be positive and finite");
      const double t = std::abs(r - 1.0);
      if (t >= 0.5) {
        const double ratio = g / (1.0 + std::pow(r, 2.0 * s));
        c1 = std::min(c1, ratio);
        C1 = std::max(C1, ratio);
      }
      if (t <= 0.5) {
        const double ratio = g / (eps + std::pow(t, gamma));
        c2 = std::min(c2, ratio);
        C2 = std::max(C2, ratio);
      }
    }
  }
  rep.c_lower = std::min(c1, c2);
  rep.C_upper = std::max(C1, C2);
  const bool ok1 = C1 / c1 <= ratio_threshold;
  const bool ok2 = C2 / c2 <= ratio_threshold;
  rep.pass = ok1 && ok2 && rep.c_lower > 0.0 && std::isfinite(rep.C_upper);
  if (!rep.pass) rep.failed_bound = !ok2 ? "A2" : "A1";
  return rep;
}

double inverse_symbol_integral(const SymbolSpec& spec, double eps) {
  require(eps > 0.0 && eps < 1.0, "inverse_symbol_integral: eps in (0,1)");
  double gamma = 2.0;
  if (spec.kind == SymbolKind::ShellPower) gamma = spec.gamma;
  const double m = std::min(0.49, std::pow(eps, 1.0 / gamma));
  // Graded panel edges clustered at scale eps^{1/gamma} around r=1.
  std::vector<double> edges{0.5, 1.0, 1.5};
  for (double t = m; t < 0.5; t *= 4.0) {
    edges.push_back(1.0 - t);
    edges.push_back(1.0 + t);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  auto f = [&](double r) { return 1.0 / eval_symbol(spec, r, eps); };
  KahanSum total;
  for (size_t i = 0; i + 1 < edges.size(); ++i)
    total.add(adaptive_integrate(f, edges[i], edges[i + 1], 1e-9));
  return total.value();
}

}  // namespace nlslab
