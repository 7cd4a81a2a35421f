#include "nlslab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>

#include <fftw3.h>

#include "json.hpp"
#include "nlslab/bessel.hpp"

namespace nlslab {

using std::numbers::pi;

// --- GridDesc ------------------------------------------------------------

size_t GridDesc::size() const {
  switch (sym) {
    case SymmetryClass::Radial:
      return axis1.x.size();
    case SymmetryClass::Gk:
    case SymmetryClass::Axial:
      return axis1.x.size() * axis2.x.size();
    case SymmetryClass::Full: {
      size_t s = 1;
      for (int c = 0; c < d; ++c) s *= N;
      return s;
    }
  }
  return 0;
}

int GridDesc::ncoords() const {
  switch (sym) {
    case SymmetryClass::Radial:
      return 1;
    case SymmetryClass::Gk:
    case SymmetryClass::Axial:
      return 2;
    case SymmetryClass::Full:
      return d;
  }
  return 0;
}

double GridDesc::weight(size_t idx) const {
  switch (sym) {
    case SymmetryClass::Radial:
      return axis1.w[idx];
    case SymmetryClass::Gk:
    case SymmetryClass::Axial: {
      const size_t n2 = axis2.x.size();
      return axis1.w[idx / n2] * axis2.w[idx % n2];
    }
    case SymmetryClass::Full: {
      double w = 1.0;
      for (int c = 0; c < d; ++c) w *= step;
      return w;
    }
  }
  return 0.0;
}

void GridDesc::coords(size_t idx, double* out) const {
  switch (sym) {
    case SymmetryClass::Radial:
      out[0] = axis1.x[idx];
      return;
    case SymmetryClass::Gk:
    case SymmetryClass::Axial: {
      const size_t n2 = axis2.x.size();
      out[0] = axis1.x[idx / n2];
      out[1] = axis2.x[idx % n2];
      return;
    }
    case SymmetryClass::Full: {
      for (int c = d - 1; c >= 0; --c) {
        out[c] = (double(idx % N) - N / 2) * step;
        idx /= N;
      }
      return;
    }
  }
}

double GridDesc::rho(size_t idx) const {
  double c[4];
  coords(idx, c);
  const int nc = ncoords();
  double s = 0.0;
  for (int i = 0; i < nc; ++i) s += c[i] * c[i];
  return std::sqrt(s);
}

void SpectralField::ensure_im() {
  if (im.empty()) im.assign(re.size(), 0.0);
}
void PhysicalField::ensure_im() {
  if (im.empty()) im.assign(re.size(), 0.0);
}

// --- grid construction ---------------------------------------------------

namespace {

// Nodes of 4-point Gauss panels over consecutive edge intervals; weights
// are plain dx weights at this stage.
Axis gauss_panels(const std::vector<double>& edges) {
  static const GaussRule g4 = gauss_legendre(4);
  Axis ax;
  for (size_t p = 0; p + 1 < edges.size(); ++p) {
    const double a = edges[p], b = edges[p + 1];
    if (!(b > a)) continue;
    const double h = 0.5 * (b - a), c = 0.5 * (a + b);
    for (int i = 0; i < 4; ++i) {
      ax.x.push_back(c + h * g4.x[i]);
      ax.w.push_back(h * g4.w[i]);
    }
  }
  return ax;
}

// Folds the n-dimensional radial measure (surface constant and power) in.
void apply_measure(Axis& ax, int n) {
  const double surf = sphere_surface(n);
  for (size_t i = 0; i < ax.x.size(); ++i)
    ax.w[i] *= surf * std::pow(std::abs(ax.x[i]), n - 1);
}

// Geometric ladder of distances-to-1 from t_min up to t_max, ascending,
// three panels per decade.
std::vector<double> cluster_scales(double t_min, double t_max) {
  std::vector<double> t{t_min};
  const double ratio = std::pow(10.0, 1.0 / 3.0);
  while (t.back() * ratio < t_max) t.push_back(t.back() * ratio);
  t.push_back(t_max);
  return t;
}

std::vector<double> radial_edges(double eps_target, double gamma,
                                 double r_max) {
  const double t_min = std::pow(eps_target, 1.0 / gamma) / 16.0;
  require(t_min < 0.4, "radial grid: eps_target too large to grade");
  std::vector<double> edges{0.0, 0.125, 0.25, 0.375};
  const auto ts = cluster_scales(t_min, 0.5);
  for (auto it = ts.rbegin(); it != ts.rend(); ++it)
    edges.push_back(1.0 - *it);
  edges.push_back(1.0);
  for (double t : ts) edges.push_back(1.0 + t);
  for (double r = 1.75; r < r_max + 1e-9; r += 0.25) edges.push_back(r);
  if (edges.back() < r_max) edges.push_back(r_max);
  return edges;
}

// One direction of the block tensor grid: coarse head, a fine band across
// the region where the unit circle a^2 + b^2 = 1 can fall, a geometric
// cluster toward 1, and a widening tail.
std::vector<double> block_axis_edges(double eps_target, double gamma,
                                     double r_max) {
  const double t_min = std::pow(eps_target, 1.0 / gamma) / 16.0;
  require(t_min < 0.03, "block grid: eps_target too large to grade");
  std::vector<double> edges{0.0, 0.1, 0.2, 0.3};
  for (double x = 0.33; x < 0.96 - 1e-12; x += 0.03) edges.push_back(x);
  const auto ts = cluster_scales(t_min, 0.04);
  for (auto it = ts.rbegin(); it != ts.rend(); ++it)
    edges.push_back(1.0 - *it);
  edges.push_back(1.0);
  for (double t : ts) edges.push_back(1.0 + t);
  for (double x = 1.07; x < 1.17; x += 0.03) edges.push_back(x);
  double w = 0.05;
  double x = edges.back();
  while (x < r_max) {
    x = std::min(r_max, x + w);
    edges.push_back(x);
    w *= 1.5;
  }
  return edges;
}

std::shared_ptr<GridDesc> base_grid(SymmetryClass sym, int d, int k) {
  auto g = std::make_shared<GridDesc>();
  g->sym = sym;
  g->d = d;
  g->k = k;
  return g;
}

// Uniform Gauss panels: same node density as a midpoint rule at the given
// points-per-unit, but high-order, which the 1e-6 Plancherel contract
// needs (midpoint has an O(h^2) boundary defect at x = 0).
Axis uniform_panel_axis(double lo, double hi, double pts_per_unit) {
  const int n = std::max(1, int(std::ceil((hi - lo) * pts_per_unit / 4.0)));
  std::vector<double> edges(n + 1);
  for (int i = 0; i <= n; ++i) edges[i] = lo + (hi - lo) * i / n;
  return gauss_panels(edges);
}

}  // namespace

std::shared_ptr<const GridDesc> radial_spectral_grid(int d, double eps_target,
                                                     double gamma,
                                                     double r_max) {
  require(d >= 2 && eps_target > 0 && gamma > 1, "radial grid: bad params");
  auto g = base_grid(SymmetryClass::Radial, d, 0);
  g->axis1 = gauss_panels(radial_edges(eps_target, gamma, r_max));
  apply_measure(g->axis1, d);
  return g;
}

std::shared_ptr<const GridDesc> block_spectral_grid(int d, int k,
                                                    double eps_target,
                                                    double gamma,
                                                    double r_max) {
  require(d >= 2 && k >= 1 && k <= d - 1, "block grid: 1 <= k <= d-1");
  auto g = base_grid(SymmetryClass::Gk, d, k);
  const auto edges = block_axis_edges(eps_target, gamma, r_max);
  g->axis1 = gauss_panels(edges);
  g->axis2 = g->axis1;
  apply_measure(g->axis1, d - k);
  apply_measure(g->axis2, k);
  return g;
}

std::shared_ptr<const GridDesc> axial_spectral_grid(int d, double eps_target,
                                                    double gamma,
                                                    double r_max) {
  require(d >= 2, "axial grid: d >= 2");
  auto g = base_grid(SymmetryClass::Axial, d, d - 1);
  const auto edges = block_axis_edges(eps_target, gamma, r_max);
  g->axis1 = gauss_panels(edges);
  apply_measure(g->axis1, d - 1);
  // xi_d axis spans both signs; no evenness is imposed.
  std::vector<double> sym_edges;
  for (auto it = edges.rbegin(); it != edges.rend(); ++it)
    sym_edges.push_back(-*it);
  sym_edges.insert(sym_edges.end(), edges.begin() + 1, edges.end());
  g->axis2 = gauss_panels(sym_edges);
  return g;
}

std::shared_ptr<const GridDesc> full_spectral_grid(int d, int N, double box) {
  require(d == 2 || d == 3, "full grid: d in {2, 3}");
  require(N >= 8 && N % 2 == 0 && box > 0, "full grid: even N >= 8");
  auto g = base_grid(SymmetryClass::Full, d, 0);
  g->N = N;
  g->step = 2.0 * pi / box;
  return g;
}

std::shared_ptr<const GridDesc> radial_phys_grid(int d, double x_max,
                                                 double pts_per_unit) {
  auto g = base_grid(SymmetryClass::Radial, d, 0);
  g->axis1 = uniform_panel_axis(0.0, x_max, pts_per_unit);
  apply_measure(g->axis1, d);
  return g;
}

std::shared_ptr<const GridDesc> block_phys_grid(int d, int k, double x_max,
                                                double pts_per_unit) {
  return block_phys_grid(d, k, x_max, x_max, pts_per_unit);
}

std::shared_ptr<const GridDesc> block_phys_grid(int d, int k, double x1_max,
                                                double x2_max,
                                                double pts_per_unit) {
  require(k >= 1 && k <= d - 1, "block phys grid: 1 <= k <= d-1");
  auto g = base_grid(SymmetryClass::Gk, d, k);
  g->axis1 = uniform_panel_axis(0.0, x1_max, pts_per_unit);
  g->axis2 = x2_max == x1_max ? g->axis1
                              : uniform_panel_axis(0.0, x2_max, pts_per_unit);
  apply_measure(g->axis1, d - k);
  apply_measure(g->axis2, k);
  return g;
}

std::shared_ptr<const GridDesc> axial_phys_grid(int d, double x_max,
                                                double pts_per_unit) {
  auto g = base_grid(SymmetryClass::Axial, d, d - 1);
  g->axis1 = uniform_panel_axis(0.0, x_max, pts_per_unit);
  apply_measure(g->axis1, d - 1);
  g->axis2 = uniform_panel_axis(-x_max, x_max, pts_per_unit);
  return g;
}

std::shared_ptr<const GridDesc> full_phys_grid(int d, int N, double box) {
  auto g = base_grid(SymmetryClass::Full, d, 0);
  require(d == 2 || d == 3, "full grid: d in {2, 3}");
  g->N = N;
  g->step = box / N;
  return g;
}

Axis gauss_panel_axis(std::span<const double> edges, int measure_dim) {
  Axis ax = gauss_panels(std::vector<double>(edges.begin(), edges.end()));
  if (measure_dim > 0) apply_measure(ax, measure_dim);
  return ax;
}

SpectralField make_field(std::shared_ptr<const GridDesc> grid,
                         const std::function<double(double)>& profile) {
  SpectralField u;
  u.grid = std::move(grid);
  const size_t n = u.grid->size();
  u.re.resize(n);
  for (size_t i = 0; i < n; ++i) u.re[i] = profile(u.grid->rho(i));
  return u;
}

SpectralField make_field_xy(std::shared_ptr<const GridDesc> grid,
                            const std::function<double(double, double)>& f) {
  require(grid->ncoords() == 2, "make_field_xy: needs a 2-coordinate grid");
  SpectralField u;
  u.grid = std::move(grid);
  const size_t n = u.grid->size();
  u.re.resize(n);
  double c[2];
  for (size_t i = 0; i < n; ++i) {
    u.grid->coords(i, c);
    u.re[i] = f(c[0], c[1]);
  }
  return u;
}

// --- transforms ----------------------------------------------------------

namespace {

std::mutex g_fftw_mutex;  // fftw plan creation is not thread-safe

// C (m x n) += A (m x p) * B (p x n), row-major.
void gemm(const double* A, const double* B, double* C, int m, int p, int n) {
  for (int i = 0; i < m; ++i) {
    const double* a = A + size_t(i) * p;
    double* c = C + size_t(i) * n;
    for (int kk = 0; kk < p; ++kk) {
      const double av = a[kk];
      if (av == 0.0) continue;
      const double* b = B + size_t(kk) * n;
      for (int j = 0; j < n; ++j) c[j] += av * b[j];
    }
  }
}

// C (m x n) += A (p x m) ^T * B (p x n).
void gemm_tA(const double* A, const double* B, double* C, int m, int p,
             int n) {
  for (int kk = 0; kk < p; ++kk) {
    const double* a = A + size_t(kk) * m;
    const double* b = B + size_t(kk) * n;
    for (int i = 0; i < m; ++i) {
      const double av = a[i];
      if (av == 0.0) continue;
      double* c = C + size_t(i) * n;
      for (int j = 0; j < n; ++j) c[j] += av * b[j];
    }
  }
}

// C (m x n) += A (m x p) * B (n x p) ^T.
void gemm_tB(const double* A, const double* B, double* C, int m, int p,
             int n) {
  for (int i = 0; i < m; ++i) {
    const double* a = A + size_t(i) * p;
    double* c = C + size_t(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* b = B + size_t(j) * p;
      double s = 0.0;
      for (int kk = 0; kk < p; ++kk) s += a[kk] * b[kk];
      c[j] += s;
    }
  }
}

// Symmetric synthesis kernel of the n-dimensional radial transform,
// normalized so the weighted-sum transform matches the unitary Fourier
// convention: (2 pi)^{-n/2} Sk_n(x xi) / omega_{n-1}.
double radial_kernel(int n, double x, double xi) {
  return std::pow(2.0 * pi, -0.5 * n) * sphere_kernel(n, std::abs(x * xi)) /
         sphere_surface(n);
}

std::vector<double> build_kernel(int n, const Axis& phys, const Axis& spec) {
  std::vector<double> K(phys.x.size() * spec.x.size());
  for (size_t i = 0; i < phys.x.size(); ++i)
    for (size_t j = 0; j < spec.x.size(); ++j)
      K[i * spec.x.size() + j] = radial_kernel(n, phys.x[i], spec.x[j]);
  return K;
}

}  // namespace

struct FieldTransform::FftState {
  fftw_plan fwd = nullptr, bwd = nullptr;
  fftw_complex* buf = nullptr;
  size_t n = 0;
  mutable std::mutex run;

  ~FftState() {
    std::scoped_lock lock(g_fftw_mutex);
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
    if (buf) fftw_free(buf);
  }
};

FieldTransform::FieldTransform(std::shared_ptr<const GridDesc> spec,
                               std::shared_ptr<const GridDesc> phys)
    : spec_(std::move(spec)), phys_(std::move(phys)) {
  require(spec_ && phys_, "FieldTransform: null grids");
  require(spec_->sym == phys_->sym && spec_->d == phys_->d &&
              spec_->k == phys_->k,
          "FieldTransform: spectral/physical grids must match in class");
  const int d = spec_->d, k = spec_->k;
  switch (spec_->sym) {
    case SymmetryClass::Radial:
      k1_ = build_kernel(d, phys_->axis1, spec_->axis1);
      break;
    case SymmetryClass::Gk:
      k1_ = build_kernel(d - k, phys_->axis1, spec_->axis1);
      k2_ = build_kernel(k, phys_->axis2, spec_->axis2);
      break;
    case SymmetryClass::Axial: {
      k1_ = build_kernel(d - 1, phys_->axis1, spec_->axis1);
      const size_t np = phys_->axis2.x.size(), ns = spec_->axis2.x.size();
      k2_.resize(np * ns);
      k2_sin_.resize(np * ns);
      const double scale = 1.0 / std::sqrt(2.0 * pi);
      for (size_t i = 0; i < np; ++i)
        for (size_t j = 0; j < ns; ++j) {
          const double ph = phys_->axis2.x[i] * spec_->axis2.x[j];
          k2_[i * ns + j] = scale * std::cos(ph);
          k2_sin_[i * ns + j] = scale * std::sin(ph);
        }
      break;
    }
    case SymmetryClass::Full: {
      require(spec_->N == phys_->N, "FieldTransform: full grid N mismatch");
      require(std::abs(spec_->step * phys_->step * spec_->N - 2.0 * pi) < 1e-9,
              "FieldTransform: full grids must satisfy h_x h_xi N = 2 pi");
      fft_ = std::make_unique<FftState>();
      fft_->n = spec_->size();
      std::scoped_lock lock(g_fftw_mutex);
      fft_->buf = fftw_alloc_complex(fft_->n);
      const int N = spec_->N;
      if (d == 2) {
        fft_->bwd = fftw_plan_dft_2d(N, N, fft_->buf, fft_->buf,
                                     FFTW_BACKWARD, FFTW_ESTIMATE);
        fft_->fwd = fftw_plan_dft_2d(N, N, fft_->buf, fft_->buf,
                                     FFTW_FORWARD, FFTW_ESTIMATE);
      } else {
        fft_->bwd = fftw_plan_dft_3d(N, N, N, fft_->buf, fft_->buf,
                                     FFTW_BACKWARD, FFTW_ESTIMATE);
        fft_->fwd = fftw_plan_dft_3d(N, N, N, fft_->buf, fft_->buf,
                                     FFTW_FORWARD, FFTW_ESTIMATE);
      }
      break;
    }
  }
}

FieldTransform::~FieldTransform() = default;

namespace {

// fftshift index map: grid index i (coordinate (i - N/2) h) -> DFT index.
inline size_t shifted(size_t idx, int N, int d) {
  size_t out = 0;
  for (int c = 0; c < d; ++c) {
    const size_t comp = idx % N;
    size_t mult = 1;
    for (int cc = 0; cc < c; ++cc) mult *= N;
    out += ((comp + N / 2) % N) * mult;
    idx /= N;
  }
  return out;
}

}  // namespace

PhysicalField FieldTransform::synthesize(const SpectralField& u) const {
  require(u.grid == spec_, "synthesize: field not on this spectral grid");
  PhysicalField f;
  f.grid = phys_;
  const auto& sg = *spec_;
  const auto& pg = *phys_;

  if (sg.sym == SymmetryClass::Full) {
    const int N = sg.N, d = sg.d;
    const size_t n = fft_->n;
    const double scale = std::pow(2.0 * pi, -0.5 * d) * std::pow(sg.step, d);
    std::scoped_lock lock(fft_->run);
    for (size_t i = 0; i < n; ++i) {
      const size_t s = shifted(i, N, d);
      fft_->buf[s][0] = u.re[i];
      fft_->buf[s][1] = u.has_im() ? u.im[i] : 0.0;
    }
    fftw_execute(fft_->bwd);
    f.re.resize(n);
    f.im.resize(n);
    for (size_t i = 0; i < n; ++i) {
      const size_t s = shifted(i, N, d);
      f.re[i] = scale * fft_->buf[s][0];
      f.im[i] = scale * fft_->buf[s][1];
    }
    return f;
  }

  if (sg.sym == SymmetryClass::Radial) {
    const int ns = sg.axis1.n(), np = pg.axis1.n();
    f.re.assign(np, 0.0);
    std::vector<double> a(ns);
    for (int j = 0; j < ns; ++j) a[j] = sg.axis1.w[j] * u.re[j];
    gemm(k1_.data(), a.data(), f.re.data(), np, ns, 1);
    if (u.has_im()) {
      f.im.assign(np, 0.0);
      for (int j = 0; j < ns; ++j) a[j] = sg.axis1.w[j] * u.im[j];
      gemm(k1_.data(), a.data(), f.im.data(), np, ns, 1);
    }
    return f;
  }

  // 2D reductions: K1 * (W1 U W2) * K2^T, done as two dense products.
  const int n1s = sg.axis1.n(), n2s = sg.axis2.n();
  const int n1p = pg.axis1.n(), n2p = pg.axis2.n();
  auto weighted = [&](const std::vector<double>& v) {
    std::vector<double> a(size_t(n1s) * n2s);
    for (int i = 0; i < n1s; ++i)
      for (int j = 0; j < n2s; ++j)
        a[size_t(i) * n2s + j] =
            sg.axis1.w[i] * sg.axis2.w[j] * v[size_t(i) * n2s + j];
    return a;
  };
  const auto ar = weighted(u.re);
  std::vector<double> br(size_t(n1p) * n2s, 0.0);
  gemm(k1_.data(), ar.data(), br.data(), n1p, n1s, n2s);
  std::vector<double> bi;
  if (u.has_im()) {
    const auto ai = weighted(u.im);
    bi.assign(size_t(n1p) * n2s, 0.0);
    gemm(k1_.data(), ai.data(), bi.data(), n1p, n1s, n2s);
  }

  f.re.assign(size_t(n1p) * n2p, 0.0);
  if (sg.sym == SymmetryClass::Gk) {
    gemm_tB(br.data(), k2_.data(), f.re.data(), n1p, n2s, n2p);
    if (!bi.empty()) {
      f.im.assign(size_t(n1p) * n2p, 0.0);
      gemm_tB(bi.data(), k2_.data(), f.im.data(), n1p, n2s, n2p);
    }
    return f;
  }
  // Axial: kernel e^{+i b z} = cos + i sin.
  f.im.assign(size_t(n1p) * n2p, 0.0);
  if (bi.empty()) bi.assign(size_t(n1p) * n2s, 0.0);
  gemm_tB(br.data(), k2_.data(), f.re.data(), n1p, n2s, n2p);
  std::vector<double> tmp(size_t(n1p) * n2p, 0.0);
  gemm_tB(bi.data(), k2_sin_.data(), tmp.data(), n1p, n2s, n2p);
  for (size_t i = 0; i < f.re.size(); ++i) f.re[i] -= tmp[i];
  gemm_tB(br.data(), k2_sin_.data(), f.im.data(), n1p, n2s, n2p);
  std::fill(tmp.begin(), tmp.end(), 0.0);
  gemm_tB(bi.data(), k2_.data(), tmp.data(), n1p, n2s, n2p);
  for (size_t i = 0; i < f.im.size(); ++i) f.im[i] += tmp[i];
  return f;
}

SpectralField FieldTransform::analyze(const PhysicalField& f) const {
  require(f.grid == phys_, "analyze: field not on this physical grid");
  SpectralField u;
  u.grid = spec_;
  const auto& sg = *spec_;
  const auto& pg = *phys_;

  if (sg.sym == SymmetryClass::Full) {
    const int N = sg.N, d = sg.d;
    const size_t n = fft_->n;
    const double scale = std::pow(2.0 * pi, -0.5 * d) * std::pow(pg.step, d);
    std::scoped_lock lock(fft_->run);
    for (size_t i = 0; i < n; ++i) {
      const size_t s = shifted(i, N, d);
      fft_->buf[s][0] = f.re[i];
      fft_->buf[s][1] = f.has_im() ? f.im[i] : 0.0;
    }
    fftw_execute(fft_->fwd);
    u.re.resize(n);
    u.im.resize(n);
    for (size_t i = 0; i < n; ++i) {
      const size_t s = shifted(i, N, d);
      u.re[i] = scale * fft_->buf[s][0];
      u.im[i] = scale * fft_->buf[s][1];
    }
    return u;
  }

  if (sg.sym == SymmetryClass::Radial) {
    const int ns = sg.axis1.n(), np = pg.axis1.n();
    u.re.assign(ns, 0.0);
    std::vector<double> a(np);
    for (int j = 0; j < np; ++j) a[j] = pg.axis1.w[j] * f.re[j];
    gemm_tA(k1_.data(), a.data(), u.re.data(), ns, np, 1);
    if (f.has_im()) {
      u.im.assign(ns, 0.0);
      for (int j = 0; j < np; ++j) a[j] = pg.axis1.w[j] * f.im[j];
      gemm_tA(k1_.data(), a.data(), u.im.data(), ns, np, 1);
    }
    return u;
  }

  const int n1s = sg.axis1.n(), n2s = sg.axis2.n();
  const int n1p = pg.axis1.n(), n2p = pg.axis2.n();
  auto weighted = [&](const std::vector<double>& v) {
    std::vector<double> a(size_t(n1p) * n2p);
    for (int i = 0; i < n1p; ++i)
      for (int j = 0; j < n2p; ++j)
        a[size_t(i) * n2p + j] =
            pg.axis1.w[i] * pg.axis2.w[j] * v[size_t(i) * n2p + j];
    return a;
  };
  const auto ar = weighted(f.re);
  std::vector<double> br(size_t(n1s) * n2p, 0.0);
  gemm_tA(k1_.data(), ar.data(), br.data(), n1s, n1p, n2p);
  std::vector<double> bi;
  if (f.has_im()) {
    const auto ai = weighted(f.im);
    bi.assign(size_t(n1s) * n2p, 0.0);
    gemm_tA(k1_.data(), ai.data(), bi.data(), n1s, n1p, n2p);
  }

  u.re.assign(size_t(n1s) * n2s, 0.0);
  if (sg.sym == SymmetryClass::Gk) {
    gemm(br.data(), k2_.data(), u.re.data(), n1s, n2p, n2s);
    if (!bi.empty()) {
      u.im.assign(size_t(n1s) * n2s, 0.0);
      gemm(bi.data(), k2_.data(), u.im.data(), n1s, n2p, n2s);
    }
    return u;
  }
  // Axial adjoint: kernel conj(e^{i b z}) = cos - i sin.
  u.im.assign(size_t(n1s) * n2s, 0.0);
  if (bi.empty()) bi.assign(size_t(n1s) * n2p, 0.0);
  gemm(br.data(), k2_.data(), u.re.data(), n1s, n2p, n2s);
  std::vector<double> tmp(size_t(n1s) * n2s, 0.0);
  gemm(bi.data(), k2_sin_.data(), tmp.data(), n1s, n2p, n2s);
  for (size_t i = 0; i < u.re.size(); ++i) u.re[i] += tmp[i];
  gemm(bi.data(), k2_.data(), u.im.data(), n1s, n2p, n2s);
  std::fill(tmp.begin(), tmp.end(), 0.0);
  gemm(br.data(), k2_sin_.data(), tmp.data(), n1s, n2p, n2s);
  for (size_t i = 0; i < u.im.size(); ++i) u.im[i] -= tmp[i];
  return u;
}

// --- measurements --------------------------------------------------------

double quad_form(const SpectralField& u, const SymbolSpec& spec, double eps) {
  KahanSum s;
  const auto& g = *u.grid;
  for (size_t i = 0; i < u.size(); ++i) {
    double m2 = u.re[i] * u.re[i];
    if (u.has_im()) m2 += u.im[i] * u.im[i];
    if (m2 == 0.0) continue;
    s.add(g.weight(i) * eval_symbol(spec, g.rho(i), eps) * m2);
  }
  return s.value();
}

namespace {
template <class F>
double weighted_l2(const F& f) {
  KahanSum s;
  for (size_t i = 0; i < f.size(); ++i) {
    double m2 = f.re[i] * f.re[i];
    if (f.has_im()) m2 += f.im[i] * f.im[i];
    s.add(f.grid->weight(i) * m2);
  }
  return std::sqrt(s.value());
}
}  // namespace

double l2_norm(const SpectralField& u) { return weighted_l2(u); }
double l2_norm(const PhysicalField& f) { return weighted_l2(f); }

LpResult lp_norm(const PhysicalField& f, double p, bool enforce_tail) {
  require(p >= 2.0, "lp_norm: p >= 2");
  const auto& g = *f.grid;
  KahanSum s;
  for (size_t i = 0; i < f.size(); ++i) {
    double m2 = f.re[i] * f.re[i];
    if (f.has_im()) m2 += f.im[i] * f.im[i];
    s.add(g.weight(i) * std::pow(m2, 0.5 * p));
  }
  LpResult out;
  const double main_p = s.value();
  out.value = std::pow(main_p, 1.0 / p);

  if (g.sym == SymmetryClass::Full) return out;  // periodic surrogate

  // Truncation tail per coordinate direction by dyadic band-mass
  // extrapolation: the masses of [X/8,X/4], [X/4,X/2], [X/2,X] decay
  // geometrically for any power-law or faster envelope (in particular the
  // analytic |u| <~ (1+|x|)^{(1-d)/2} shell decay), and the continuation
  // of that geometric series bounds what lies beyond X.
  const int nc = g.ncoords();
  double c[4];
  double tail_p = 0.0;
  for (int axis = 0; axis < nc; ++axis) {
    const double ax_max =
        axis == 0 ? g.axis1.x.back() : g.axis2.x.back();
    double band[3] = {0.0, 0.0, 0.0};  // [X/2,X], [X/4,X/2], [X/8,X/4]
    for (size_t i = 0; i < f.size(); ++i) {
      g.coords(i, c);
      const double x = std::abs(c[axis]);
      if (x < ax_max / 8.0) continue;
      double m2 = f.re[i] * f.re[i];
      if (f.has_im()) m2 += f.im[i] * f.im[i];
      const double mass = g.weight(i) * std::pow(m2, 0.5 * p);
      if (x >= ax_max / 2.0)
        band[0] += mass;
      else if (x >= ax_max / 4.0)
        band[1] += mass;
      else
        band[2] += mass;
    }
    if (band[0] <= 1e-7 * main_p) {
      tail_p += band[0];  // outermost band already negligible
      continue;
    }
    const double q = band[2] > 0.0 ? std::sqrt(band[0] / band[2])
                                   : (band[1] > 0.0 ? band[0] / band[1] : 1.0);
    if (q >= 0.95) {
      tail_p = kInf;
      break;
    }
    tail_p += band[0] * q / (1.0 - q);
  }
  out.tail = std::pow(main_p + tail_p, 1.0 / p) - out.value;
  if (enforce_tail && !(out.tail <= 0.05 * out.value))
    throw std::runtime_error(
        "lp_norm: tail estimate exceeds 5% of the quadrature value; "
        "physical truncation too small");
  return out;
}

LpResult lp_norm(const SpectralField& u, double p, const FieldTransform& t,
                 bool enforce_tail) {
  return lp_norm(t.synthesize(u), p, enforce_tail);
}

// --- shell windows -------------------------------------------------------

ShellWindow ShellWindow::band(double eps, double delta, double gamma) {
  require(eps > 0 && eps < 1 && delta > 0 && delta < 1 && gamma > 1,
          "ShellWindow: eps, delta in (0,1), gamma > 1");
  ShellWindow w;
  w.eps = eps;
  w.delta = delta;
  w.gamma = gamma;
  const double scale = std::pow(eps, 1.0 / gamma);
  w.lo = delta * scale;
  w.hi = scale / delta;
  require(w.lo < w.hi && w.lo > 0, "ShellWindow: empty interval");
  return w;
}

ShellWindow ShellWindow::coarse() {
  ShellWindow w;
  w.lo = 0.0;
  w.hi = 0.5;
  return w;
}

bool ShellWindow::contains(double modulus) const {
  const double t = std::abs(modulus - 1.0);
  return t >= lo && t <= hi;
}

std::pair<SpectralField, SpectralField> shell_split(const SpectralField& u,
                                                    const ShellWindow& win) {
  SpectralField v = u, w = u;
  for (size_t i = 0; i < u.size(); ++i) {
    const bool in = win.contains(u.grid->rho(i));
    (in ? w : v).re[i] = 0.0;
    if (u.has_im()) (in ? w : v).im[i] = 0.0;
  }
  return {v, w};
}

// --- sphere traces -------------------------------------------------------

namespace {

// Linear interpolation on an axis, clamped at the ends (fields on these
// grids are even in each block modulus, so the derivative vanishes at 0).
double interp1(const Axis& ax, const std::vector<double>& v, size_t stride,
               size_t offset, double x) {
  const auto& xs = ax.x;
  if (x <= xs.front()) return v[offset];
  if (x >= xs.back()) return v[offset + (xs.size() - 1) * stride];
  const size_t hi =
      std::upper_bound(xs.begin(), xs.end(), x) - xs.begin();
  const size_t lo = hi - 1;
  const double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
  return (1 - t) * v[offset + lo * stride] + t * v[offset + hi * stride];
}

double bilinear(const GridDesc& g, const std::vector<double>& v, double a,
                double b) {
  const auto& xs = g.axis1.x;
  require(a <= xs.back() + 1e-12 && b <= g.axis2.x.back() + 1e-12 &&
              b >= std::min(g.axis2.x.front(), 0.0) - 1e-12,
          "sphere_trace: radius outside the grid range");
  const size_t n2 = g.axis2.x.size();
  // Interpolate in b along the two bracketing a-rows, then in a.
  double aa = std::clamp(a, xs.front(), xs.back());
  const size_t hi = std::min(
      xs.size() - 1,
      size_t(std::upper_bound(xs.begin(), xs.end(), aa) - xs.begin()));
  const size_t lo = hi == 0 ? 0 : hi - 1;
  const double va = interp1(g.axis2, v, 1, lo * n2, b);
  const double vb = interp1(g.axis2, v, 1, hi * n2, b);
  if (hi == lo) return va;
  double t = (aa - xs[lo]) / (xs[hi] - xs[lo]);
  if (a <= xs.front()) t = 0.0;
  return (1 - t) * va + t * vb;
}

// Catmull-Rom in one dimension.
double cubic(double fm1, double f0, double f1, double f2, double t) {
  return f0 + 0.5 * t * (f1 - fm1 +
                         t * (2 * fm1 - 5 * f0 + 4 * f1 - f2 +
                              t * (3 * (f0 - f1) + f2 - fm1)));
}

double full_interp(const GridDesc& g, const std::vector<double>& v, double x,
                   double y) {
  const int N = g.N;
  const double gi = x / g.step + N / 2;
  const double gj = y / g.step + N / 2;
  const int i0 = int(std::floor(gi)), j0 = int(std::floor(gj));
  require(i0 >= 1 && i0 + 2 < N && j0 >= 1 && j0 + 2 < N,
          "sphere_trace: radius outside the grid range");
  const double ti = gi - i0, tj = gj - j0;
  double col[4];
  for (int a = -1; a <= 2; ++a) {
    const double* row = v.data() + size_t(i0 + a) * N;
    col[a + 1] =
        cubic(row[j0 - 1], row[j0], row[j0 + 1], row[j0 + 2], tj);
  }
  return cubic(col[0], col[1], col[2], col[3], ti);
}

}  // namespace

double SphereFunction::l2() const {
  KahanSum s;
  for (size_t i = 0; i < re.size(); ++i) {
    double m2 = re[i] * re[i];
    if (!im.empty()) m2 += im[i] * im[i];
    s.add(w[i] * m2);
  }
  return std::sqrt(s.value());
}

SphereFunction sphere_trace(const SpectralField& u, double r) {
  require(r > 0, "sphere_trace: r > 0");
  const auto& g = *u.grid;
  SphereFunction f;
  f.d = g.d;
  f.k = g.k;
  f.r = r;

  if (g.sym == SymmetryClass::Radial) {
    require(r >= g.axis1.x.front() && r <= g.axis1.x.back(),
            "sphere_trace: radius outside the grid range");
    const double val = interp1(g.axis1, u.re, 1, 0, r);
    const double vi = u.has_im() ? interp1(g.axis1, u.im, 1, 0, r) : 0.0;
    const int n = 64;
    f.circle = true;
    f.theta = linspace(0.0, 2 * pi * (n - 1.0) / n, n);
    f.w.assign(n, sphere_surface(g.d) / n);
    f.re.assign(n, val);
    if (u.has_im()) f.im.assign(n, vi);
    return f;
  }

  if (g.sym == SymmetryClass::Full) {
    require(g.d == 2, "sphere_trace: full-grid traces support d = 2");
    const int n = 512;
    f.circle = true;
    f.theta.resize(n);
    f.w.assign(n, 2 * pi / n);
    f.re.resize(n);
    f.im.resize(n);
    for (int i = 0; i < n; ++i) {
      const double th = 2 * pi * i / n;
      f.theta[i] = th;
      const double x = r * std::cos(th), y = r * std::sin(th);
      f.re[i] = full_interp(g, u.re, x, y);
      f.im[i] = u.has_im() ? full_interp(g, u.im, x, y) : 0.0;
    }
    if (!u.has_im()) f.im.clear();
    return f;
  }

  const int n = 128;
  const GaussRule gr = gauss_legendre(n);
  f.theta.resize(n);
  f.w.resize(n);
  f.re.resize(n);
  if (u.has_im()) f.im.resize(n);
  if (g.sym == SymmetryClass::Gk) {
    const int dk = g.d - g.k, k = g.k;
    const double c0 = sphere_surface(dk) * sphere_surface(k);
    for (int i = 0; i < n; ++i) {
      const double phi = 0.25 * pi * (gr.x[i] + 1.0);
      f.theta[i] = phi;
      f.w[i] = 0.25 * pi * gr.w[i] * c0 * std::pow(std::cos(phi), dk - 1) *
               std::pow(std::sin(phi), k - 1);
      const double a = r * std::cos(phi), b = r * std::sin(phi);
      f.re[i] = bilinear(g, u.re, a, b);
      if (u.has_im()) f.im[i] = bilinear(g, u.im, a, b);
    }
    return f;
  }
  // Axial: polar angle from the +xi_d axis.
  const double c0 = g.d >= 3 ? sphere_surface(g.d - 1) : 1.0;
  for (int i = 0; i < n; ++i) {
    const double th = 0.5 * pi * (gr.x[i] + 1.0);
    f.theta[i] = th;
    f.w[i] = 0.5 * pi * gr.w[i] * c0 * std::pow(std::sin(th), g.d - 2);
    const double a = r * std::sin(th), b = r * std::cos(th);
    f.re[i] = bilinear(g, u.re, a, b);
    if (u.has_im()) f.im[i] = bilinear(g, u.im, a, b);
  }
  return f;
}

// --- persistence ---------------------------------------------------------

namespace {
nlohmann::json axis_json(const Axis& ax) {
  return {{"x", ax.x}, {"w", ax.w}};
}
Axis axis_from_json(const nlohmann::json& j) {
  Axis ax;
  ax.x = j.at("x").get<std::vector<double>>();
  ax.w = j.at("w").get<std::vector<double>>();
  require(ax.x.size() == ax.w.size(), "field load: axis size mismatch");
  for (size_t i = 0; i < ax.x.size(); ++i) {
    require(std::isfinite(ax.x[i]) && ax.w[i] > 0 && std::isfinite(ax.w[i]),
            "field load: invalid axis data");
    if (i) require(ax.x[i] > ax.x[i - 1], "field load: axis not increasing");
  }
  return ax;
}
}  // namespace

void save_field(const SpectralField& u, const std::string& base,
                const std::string& extra_meta_json) {
  nlohmann::json j;
  j["symmetry"] = to_string(u.grid->sym);
  j["d"] = u.grid->d;
  j["k"] = u.grid->k;
  j["complex"] = u.has_im();
  j["values"] = base.substr(base.find_last_of('/') + 1) + ".csv";
  if (u.grid->sym == SymmetryClass::Full) {
    j["N"] = u.grid->N;
    j["step"] = u.grid->step;
  } else {
    j["axis1"] = axis_json(u.grid->axis1);
    if (u.grid->ncoords() == 2) j["axis2"] = axis_json(u.grid->axis2);
  }
  j["extra"] = nlohmann::json::parse(extra_meta_json);
  std::ofstream meta(base + ".json");
  require(bool(meta), "save_field: cannot open " + base + ".json");
  meta << j.dump(2) << "\n";

  std::FILE* csv = std::fopen((base + ".csv").c_str(), "w");
  require(csv != nullptr, "save_field: cannot open " + base + ".csv");
  const int nc = u.grid->ncoords();
  for (int c = 0; c < nc; ++c) std::fprintf(csv, "x%d,", c + 1);
  std::fprintf(csv, "re,im\r\n");
  double xy[4];
  for (size_t i = 0; i < u.size(); ++i) {
    u.grid->coords(i, xy);
    for (int c = 0; c < nc; ++c) std::fprintf(csv, "%.17g,", xy[c]);
    std::fprintf(csv, "%.17g,%.17g\r\n", u.re[i],
                 u.has_im() ? u.im[i] : 0.0);
  }
  std::fclose(csv);
}

SpectralField load_field(const std::string& base,
                         std::string* extra_meta_json) {
  std::ifstream meta(base + ".json");
  require(bool(meta), "load_field: cannot open " + base + ".json");
  nlohmann::json j;
  meta >> j;
  auto g = std::make_shared<GridDesc>();
  g->sym = symmetry_class_from_string(j.at("symmetry").get<std::string>());
  g->d = j.at("d").get<int>();
  g->k = j.at("k").get<int>();
  if (g->sym == SymmetryClass::Full) {
    g->N = j.at("N").get<int>();
    g->step = j.at("step").get<double>();
    require(g->N >= 8 && g->step > 0, "load_field: invalid full grid");
  } else {
    g->axis1 = axis_from_json(j.at("axis1"));
    if (g->ncoords() == 2) g->axis2 = axis_from_json(j.at("axis2"));
  }
  if (extra_meta_json) *extra_meta_json = j.at("extra").dump();

  SpectralField u;
  u.grid = g;
  const bool cplx = j.at("complex").get<bool>();
  std::ifstream csv(base + ".csv");
  require(bool(csv), "load_field: cannot open " + base + ".csv");
  std::string line;
  std::getline(csv, line);  // header
  const size_t n = g->size();
  u.re.reserve(n);
  if (cplx) u.im.reserve(n);
  while (std::getline(csv, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    require(row.size() == size_t(g->ncoords()) + 2,
            "load_field: malformed csv row");
    u.re.push_back(row[row.size() - 2]);
    if (cplx) u.im.push_back(row.back());
  }
  require(u.re.size() == n, "load_field: value count mismatch");
  for (double v : u.re)
    require(std::isfinite(v), "load_field: non-finite value");
  for (double v : u.im)
    require(std::isfinite(v), "load_field: non-finite value");
  return u;
}

}  // namespace nlslab
