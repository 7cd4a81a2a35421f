#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "nlslab/exponents.hpp"
#include "nlslab/util.hpp"

namespace nlslab {

/// One quadrature axis with the full measure factor (surface constant and
/// coordinate power) folded into the weights, so every inner product is a
/// plain weighted sum.
struct Axis {
  std::vector<double> x;
  std::vector<double> w;
  int n() const { return static_cast<int>(x.size()); }
};

/// Grid descriptor shared by spectral and physical sides.
///
/// Layouts: radial - axis1 only, values indexed by i; block_radial/axial -
/// tensor of axis1 x axis2, row-major i*n2+j; full - uniform cube of N^d
/// nodes with coordinate (idx_c - N/2)*step per dimension, weight step^d.
struct GridDesc {
  SymmetryClass sym = SymmetryClass::Radial;
  int d = 2;
  int k = 0;  // block index; d-1 for axial
  Axis axis1, axis2;
  int N = 0;
  double step = 0.0;

  size_t size() const;
  double weight(size_t idx) const;
  /// Modulus |xi| (or |x|) of the node.
  double rho(size_t idx) const;
  /// Coordinates of the node (1, 2, or d entries).
  void coords(size_t idx, double* out) const;
  int ncoords() const;
};

/// Complex samples on a grid; im empty means identically zero imaginary
/// part (the common case for the reduced symmetries).
struct SpectralField {
  std::shared_ptr<const GridDesc> grid;
  std::vector<double> re, im;

  size_t size() const { return re.size(); }
  bool has_im() const { return !im.empty(); }
  void ensure_im();
};

struct PhysicalField {
  std::shared_ptr<const GridDesc> grid;
  std::vector<double> re, im;

  size_t size() const { return re.size(); }
  bool has_im() const { return !im.empty(); }
  void ensure_im();
};

// --- grid builders -------------------------------------------------------

/// Graded radial spectral grid: two-sided geometric clustering toward r=1
/// down to scale eps_target^{1/gamma}/16 (12 nodes per decade), a coarse
/// head [0, 1/2] and tail out to r_max. Gauss panels of 4.
std::shared_ptr<const GridDesc> radial_spectral_grid(int d, double eps_target,
                                                     double gamma,
                                                     double r_max = 8.0);

/// Tensor grid in (|eta|, |zeta|): each direction carries a fine band over
/// [0.3, 1.15] (where the unit circle a^2+b^2=1 lives) plus a geometric
/// cluster toward 1 and a coarse tail.
std::shared_ptr<const GridDesc> block_spectral_grid(int d, int k,
                                                    double eps_target,
                                                    double gamma,
                                                    double r_max = 8.0);

/// Axial grid (|xi'|, xi_d) with xi_d spanning both signs, no evenness.
std::shared_ptr<const GridDesc> axial_spectral_grid(int d, double eps_target,
                                                    double gamma,
                                                    double r_max = 8.0);

/// Uniform Fourier cube for the full class, d in {2,3}; step = 2*pi/box.
std::shared_ptr<const GridDesc> full_spectral_grid(int d, int N, double box);

/// Uniform Gauss-panel physical grids (pts_per_unit ~ 5 resolves the unit
/// Fourier-shell oscillation comfortably).
std::shared_ptr<const GridDesc> radial_phys_grid(int d, double x_max,
                                                 double pts_per_unit = 5.0);
std::shared_ptr<const GridDesc> block_phys_grid(int d, int k, double x_max,
                                                double pts_per_unit = 5.0);
/// Anisotropic variant: separate extents for the |y| and |z| directions
/// (trial functions spread very differently along the two blocks).
std::shared_ptr<const GridDesc> block_phys_grid(int d, int k, double x1_max,
                                                double x2_max,
                                                double pts_per_unit);
std::shared_ptr<const GridDesc> axial_phys_grid(int d, double x_max,
                                                double pts_per_unit = 5.0);
/// Physical side of a full grid (same cube, step = box/N).
std::shared_ptr<const GridDesc> full_phys_grid(int d, int N, double box);

/// Nodes and weights of 4-point Gauss panels over consecutive edges; if
/// measure_dim = n > 0, the n-dimensional radial measure (surface constant
/// times x^{n-1}) is folded into the weights.
Axis gauss_panel_axis(std::span<const double> edges, int measure_dim = 0);

/// Samples a profile of the modulus onto the grid (real-valued field).
SpectralField make_field(std::shared_ptr<const GridDesc> grid,
                         const std::function<double(double)>& profile);
/// Samples a function of the node coordinates.
SpectralField make_field_xy(std::shared_ptr<const GridDesc> grid,
                            const std::function<double(double, double)>& f);

// --- transforms ----------------------------------------------------------

/// Synthesis (Fourier inversion) and its exact discrete adjoint between a
/// spectral grid and a physical grid of the same symmetry class. Reduced
/// classes use dense symmetric Bessel-kernel quadrature matrices; the full
/// class uses FFTs with unitary scaling. analyze is the adjoint of
/// synthesize with respect to the two weighted inner products, exactly (to
/// rounding), which the minimizer's descent guarantee relies on.
class FieldTransform {
 public:
  FieldTransform(std::shared_ptr<const GridDesc> spec,
                 std::shared_ptr<const GridDesc> phys);
  ~FieldTransform();
  FieldTransform(const FieldTransform&) = delete;
  FieldTransform& operator=(const FieldTransform&) = delete;

  PhysicalField synthesize(const SpectralField& u) const;
  SpectralField analyze(const PhysicalField& f) const;

  const std::shared_ptr<const GridDesc>& spec_grid() const { return spec_; }
  const std::shared_ptr<const GridDesc>& phys_grid() const { return phys_; }

 private:
  std::shared_ptr<const GridDesc> spec_, phys_;
  // Dense per-axis kernels, K[i_phys * n_spec + j_spec].
  std::vector<double> k1_, k2_;      // real kernels (cosine part for axial)
  std::vector<double> k2_sin_;       // sine part of the axial xi_d kernel
  struct FftState;
  std::unique_ptr<FftState> fft_;
};

// --- measurements --------------------------------------------------------

/// q_eps(u) = sum W_i g_eps(rho_i) |u_i|^2.
double quad_form(const SpectralField& u, const SymbolSpec& spec, double eps);

/// Weighted l2 norms (Plancherel pairs under FieldTransform).
double l2_norm(const SpectralField& u);
double l2_norm(const PhysicalField& f);

struct LpResult {
  double value = 0.0;  // quadrature part
  double tail = 0.0;   // envelope-based bound on the truncated remainder
  double total() const { return value + tail; }
};

/// ||f||_p from the physical samples plus a truncation-tail estimate:
/// the |f|^p masses of the three outermost dyadic bands per coordinate
/// direction are extrapolated geometrically, which integrates any fitted
/// power-law envelope (the analytic one is (1+|x|)^{(1-d)/2}) exactly.
/// enforce_tail throws when the tail bound exceeds 5% of the main term.
LpResult lp_norm(const PhysicalField& f, double p, bool enforce_tail = true);
/// Convenience: synthesize then measure.
LpResult lp_norm(const SpectralField& u, double p, const FieldTransform& t,
                 bool enforce_tail = true);

/// Fourier shell band ||xi|-1| in [lo, hi].
struct ShellWindow {
  double eps = 0.0, delta = 0.0, gamma = 2.0;
  double lo = 0.0, hi = 0.5;

  /// I_{eps,delta} = [delta eps^{1/gamma}, eps^{1/gamma}/delta].
  static ShellWindow band(double eps, double delta, double gamma);
  /// The coarse half-shell split (w carries ||xi|-1| > 1/2).
  static ShellWindow coarse();
  bool contains(double modulus) const;
};

/// Exact nodewise split u = v + w, v supported on the window.
std::pair<SpectralField, SpectralField> shell_split(const SpectralField& u,
                                                    const ShellWindow& win);

/// Trace of a spectral field on the sphere of radius r.
struct SphereFunction {
  int d = 2, k = 1;
  double r = 1.0;
  bool circle = false;         // equispaced on [0, 2*pi) (full d=2)
  std::vector<double> theta;   // angle nodes
  std::vector<double> w;       // weights incl. the angular measure factor
  std::vector<double> re, im;

  double l2() const;
};

SphereFunction sphere_trace(const SpectralField& u, double r);

// --- persistence ---------------------------------------------------------

/// Writes base + ".json" (grid metadata and extras) and base + ".csv"
/// (coordinates, re, im; 17 significant digits).
void save_field(const SpectralField& u, const std::string& base,
                const std::string& extra_meta_json = "{}");
/// Loads and revalidates grid invariants; returns the extra metadata too.
SpectralField load_field(const std::string& base,
                         std::string* extra_meta_json = nullptr);

}  // namespace nlslab
