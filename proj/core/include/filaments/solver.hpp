#pragma once

// The two equivalent dynamics plus verification instruments:
//  - simulate_filaments: direct RK4 integration of the coupled N-filament
//    system (the production path),
//  - picard_solve: fixed-point iteration of the flow equation
//    xi_t = phi_#^{t, K*xi} xi_0 on contraction windows (the verification
//    path),
//  - weak_residual: the time-integrated weak form of the current-valued PDE,
//  - conserved_quantity_check: (Dphi_t)^{-1}(x) xi_t(phi_t(x)) constant in t
//    for grid currents under a known flow.
//
// Both solvers reorder the input curves into a canonical content order
// internally and restore the input order on output; together with
// fixed-shape reductions this makes them exactly permutation-equivariant and
// bit-stable across thread counts.

#include <functional>
#include <memory>
#include <vector>

#include "filaments/currents.hpp"
#include "filaments/flow.hpp"

namespace filaments {

struct SimulateOptions {
  double t_final = 0.0;
  double dt = 0.0;
  int threads = 1;
  bool track_jacobians = false;
};

struct SimulateResult {
  CurrentPath path;
  FlowTrace trace;                // one row per step when Jacobians are tracked
  std::vector<double> mass_upper; // mass-norm upper bound per path node
  std::vector<double> mass_sup;   // running sup, aligned with trace rows
};

SimulateResult simulate_filaments(const CurveFamily& family, const Kernel& k,
                                  const SimulateOptions& opt);

// B(xi_t)(x) = (K * xi_t)(x) from a discrete CurrentPath, with the current
// interpolated linearly in time between grid nodes (pairings are linear in
// the current, so the interpolated field is the field of the interpolated
// current).
class CurrentPathField : public TimeField {
 public:
  CurrentPathField(const Kernel& k, const CurrentPath& path);
  int dim() const override { return dim_; }
  void value(double t, const double* x, double* v) const override;
  void jacobian(double t, const double* x, double* J) const override;

 private:
  void locate(double t, int& node, double& lambda) const;
  const Kernel& kernel_;
  int dim_;
  double t0_, dt_;
  std::vector<SourceCloud> sources_;
};

struct PicardConfig {
  double t_final = 0.0;
  double dt = 0.0;
  double window = 0.0;  // 0: a-priori guess ln(2) / (C_B (R+1)), R = 2 mass_norm_upper(xi0)
  int max_iter = 50;
  double tol = 1e-10;   // dictionary-metric increment threshold
  int threads = 1;
};

struct PicardWindow {
  double t_start = 0.0, t_end = 0.0;
  int iterations = 0;
  int halvings = 0;
  std::vector<double> increments;   // sup_t d_D(xi^{k+1}, xi^k) per iteration
  std::vector<double> contraction;  // successive increment ratios
};

struct PicardResult {
  CurrentPath path;
  std::vector<PicardWindow> windows;
};

PicardResult picard_solve(const FilamentCurrent& xi0, const Kernel& k,
                          const TestFieldDictionary& dict, const PicardConfig& cfg);

// R(theta, t) = xi_t(theta) - xi_0(theta)
//   - int_0^t xi_s(Dtheta . B(xi_s)) ds - int_0^t xi_s(DB(xi_s)^T theta) ds,
// with trapezoid time quadrature on the path grid.
struct ResidualReport {
  std::vector<double> times;
  std::vector<std::vector<double>> residual;  // [field][node]
  std::vector<double> per_field_max;
  double max_abs = 0.0;
};

ResidualReport weak_residual(const CurrentPath& path, const Kernel& k,
                             const TestFieldDictionary& dict, int threads = 1);

// sup point distance between two paths on the same grid (the equivalence
// metric between picard_solve and simulate_filaments).
double path_sup_distance(const CurrentPath& a, const CurrentPath& b);

struct ConservedOptions {
  std::vector<double> probes;  // flattened probe points
  double t_final = 0.0;
  double dt = 0.0;
  int stride = 1;
  int threads = 1;
};

struct ConservedReport {
  std::vector<double> times;
  std::vector<double> deviation;
  double max_deviation = 0.0;
  int singular = 0;
  double out_of_box_max = 0.0;
};

// phi_at(t) must return the diffeomorphism of the same flow that b
// generates; probes are advected with tracked Jacobians by RK4 on b.
ConservedReport conserved_quantity_check(
    const GridCurrent& xi0, const TimeField& b,
    const std::function<std::unique_ptr<Diffeomorphism>(double)>& phi_at,
    const ConservedOptions& opt);

// Discrete analogue of the mass-growth estimate: checks for every node
// mass(t) <= slack * mass(0) * exp(c_b t (sup_{s<=t} mass(s) + 1)).
bool mass_growth_ok(const std::vector<double>& mass_upper, double dt, double c_b,
                    double slack = 1.01);

}  // namespace filaments
