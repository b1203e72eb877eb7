#pragma once

// 1-currents in filament and grid representation: pairing with test fields,
// the convolution K * xi with its spatial derivatives, push-forward, and the
// computable dictionary metric. The filament representation carries the
// dynamics; the grid representation exists for verification cross-checks.

#include <cstdint>
#include <memory>
#include <vector>

#include "filaments/fields.hpp"
#include "filaments/geometry.hpp"
#include "filaments/kernels.hpp"

namespace filaments {

// xi = sum_j alpha_j int delta_{gamma_j(sigma)} gamma_j'(sigma) dsigma
struct FilamentCurrent {
  CurveFamily family;
  int dim() const { return family.dim(); }
};

// Flattened quadrature data of a filament current: positions and
// weight*quadrature*tangent vectors, with per-curve offsets so reductions
// can use a fixed-shape tree over curves.
struct SourceCloud {
  int dim = 0;
  int total = 0;
  std::vector<double> pos;           // total x dim
  std::vector<double> wtan;          // total x dim
  std::vector<int> curve_offset;     // size n_curves + 1
};

SourceCloud build_sources(const CurveFamily& family);

// (K * xi)(x); fixed-shape pairwise-tree reduction over sample blocks and
// curves, so the result is independent of the thread count.
void convolve_velocity(const Kernel& k, const SourceCloud& s, const double* x, double* v);
// Velocity and its spatial Jacobian G = D(K * xi)(x).
void convolve_velocity_jacobian(const Kernel& k, const SourceCloud& s, const double* x,
                                double* v, double* G);

struct ConvolveResult {
  std::vector<double> velocity;  // d
  std::vector<double> jacobian;  // d x d
  std::vector<double> hessian;   // d x d x d
};

// Full (K*xi, D(K*xi), D2(K*xi)) at one point.
ConvolveResult convolve(const Kernel& k, const FilamentCurrent& xi, const double* x);

// Batch drivers, parallel over targets (each target is one task).
void velocity_batch(const Kernel& k, const SourceCloud& s, const double* targets, int n,
                    double* out, int threads);
void velocity_jacobian_batch(const Kernel& k, const SourceCloud& s, const double* targets,
                             int n, double* out_v, double* out_G, int threads);

double pair(const FilamentCurrent& xi, const VectorField& theta);

// Upper bound sum_j |alpha_j| arclength(gamma_j) for the mass norm |xi|_M.
double mass_norm_upper(const FilamentCurrent& xi);

// d_D(xi, xi') = max_k |(xi - xi')(theta_k)|; a certified lower bound for
// the bounded-Lipschitz distance ||xi - xi'||.
double dict_metric(const FilamentCurrent& a, const FilamentCurrent& b,
                   const TestFieldDictionary& dict,
                   std::vector<double>* per_field = nullptr);

// Advects every sample; tangents are re-derived from the advected samples.
template <typename MapFn>
FilamentCurrent pushforward_filament(const FilamentCurrent& xi, MapFn&& phi) {
  FilamentCurrent out = xi;
  double y[3];
  for (Curve& c : out.family.curves)
    for (int m = 0; m < c.samples; ++m) {
      phi(c.point(m), y);
      for (int k = 0; k < c.dim; ++k) c.point(m)[k] = y[k];
    }
  return out;
}

// |(phi_# xi)(theta) - xi(Dphi(.)^T theta(phi(.)))|; the defect is the
// tangent-reconstruction plus quadrature error of the two routes.
double pushforward_dual_check(const FilamentCurrent& xi, const VectorField& theta,
                              const std::function<void(const double*, double*)>& phi,
                              const std::function<void(const double*, double*)>& dphi);

// ---------------------------------------------------------------------------
// Grid currents (verification-only representation)

struct GridCurrent {
  int dim = 0;
  double lo[3] = {0, 0, 0};
  double hi[3] = {0, 0, 0};
  int res[3] = {0, 0, 0};       // nodes per axis, >= 2
  std::vector<double> values;   // node-major, vector of size dim per node

  int node_count() const;
  void node_coord(const int* idx, double* x) const;
  double* value_at(const int* idx);
  const double* value_at(const int* idx) const;
};

GridCurrent make_grid(int dim, const double* lo, const double* hi, const int* res);

// Multilinear interpolation; points outside the box read as zero. Returns
// false when x falls outside.
bool grid_interpolate(const GridCurrent& g, const double* x, double* out);

// xi(theta) = int <theta, xi> dx by tensor-product trapezoid quadrature.
double pair(const GridCurrent& g, const VectorField& theta);

class Diffeomorphism {
 public:
  virtual ~Diffeomorphism() = default;
  virtual int dim() const = 0;
  virtual void forward(const double* x, double* y) const = 0;
  virtual void inverse(const double* y, double* x) const = 0;
  virtual void jacobian(const double* x, double* J) const = 0;  // D phi at x
};

// Rotation about the origin (d=2) or the z axis (d=3) by a fixed angle.
std::unique_ptr<Diffeomorphism> make_rotation(int dim, double angle);
// y = A x + b with A invertible.
std::unique_ptr<Diffeomorphism> make_affine(int dim, const double* A, const double* b);

struct GridPushforwardResult {
  GridCurrent current;
  double out_of_box_fraction = 0.0;
};

// (phi_# xi)(x) = Dphi(phi^{-1}(x)) xi(phi^{-1}(x)) |det Dphi^{-1}(x)|,
// evaluated node-wise with multilinear interpolation of xi.
GridPushforwardResult pushforward_grid(const GridCurrent& xi, const Diffeomorphism& phi);

// ---------------------------------------------------------------------------

// Time-indexed family of filament currents on a uniform grid.
struct CurrentPath {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<FilamentCurrent> states;

  int steps() const { return static_cast<int>(states.size()) - 1; }
  double time(int i) const { return t0 + dt * i; }
  double t_final() const { return time(steps()); }
};

void validate_path(const CurrentPath& path);

}  // namespace filaments
