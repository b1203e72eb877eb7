#pragma once

// Smooth matrix-valued interaction kernels K : R^d -> R^{d x d} of class
// UC_b^3, with analytic first and second derivatives and certified sup-norm
// bounds. The bounds are closed-form upper bounds on operator norms, derived
// per kernel; they feed the Gronwall-type flow estimates.

#include <map>
#include <memory>
#include <string>

namespace filaments {

struct KernelBounds {
  double k_inf = 0;    // sup_x |K(x)|
  double dk_inf = 0;   // sup_x |DK(x)|
  double d2k_inf = 0;  // sup_x |D2K(x)|
  double d3k_inf = 0;  // sup_x |D3K(x)| (analytic bound, not exposed per point)
};

struct KernelSpec {
  std::string kind;  // zero | mollified_biot_savart | gaussian_rotor
  std::map<std::string, double> params;
};

class Kernel {
 public:
  virtual ~Kernel() = default;

  int dim() const { return dim_; }
  const KernelSpec& spec() const { return spec_; }
  const KernelBounds& bounds() const { return bounds_; }
  bool divergence_free() const { return divergence_free_; }
  // Half-width of the box where the sup-norm audits sample; covers the
  // region where the bounds attain their maxima.
  double audit_halfwidth() const { return audit_halfwidth_; }

  // One constant serving assumptions (B1)-(B3):
  // max(|K|+|DK|, |DK|+|D2K|, |D2K|+|D3K|).
  double c_b() const;

  // v = K(x) w
  virtual void apply(const double* x, const double* w, double* v) const = 0;
  // G_{im} = sum_l dK_{il}/dx_m (x) w_l
  virtual void apply_jacobian(const double* x, const double* w, double* G) const = 0;
  // H_{imn} = sum_l d2K_{il}/dx_m dx_n (x) w_l  (row-major i*d*d + m*d + n)
  virtual void apply_hessian(const double* x, const double* w, double* H) const = 0;

  // Full tensors, assembled column-by-column from the contractions.
  void matrix(const double* x, double* K) const;            // d x d
  void jacobian_tensor(const double* x, double* DK) const;  // [i][l][m]
  void hessian_tensor(const double* x, double* D2K) const;  // [i][l][m][n]

 protected:
  Kernel(int dim, KernelSpec spec) : dim_(dim), spec_(std::move(spec)) {}
  int dim_;
  KernelSpec spec_;
  KernelBounds bounds_;
  bool divergence_free_ = false;
  double audit_halfwidth_ = 4.0;
};

// |(K*xi)(x)| <= ||xi|| * (|K|_inf + |DK|_inf); returns the second factor.
double bl_operator_bound(const Kernel& k);

// Throws ValidationError for unknown kinds, non-positive parameters, or a
// kind/dimension mismatch.
std::unique_ptr<Kernel> make_kernel(const KernelSpec& spec, int dim);

// K(x) w = (x cross w) / (|x|^2 + delta^2)^{3/2}; d = 3 only. Divergence
// free, odd, UC_b^3 for delta > 0.
std::unique_ptr<Kernel> make_mollified_biot_savart(double delta);

// K(x) = exp(-|x|^2 / (2 l^2)) J with J the antisymmetric rotation
// generator (about z when d = 3). Columns are not divergence free; the
// constructor audits this and flags the kernel accordingly.
std::unique_ptr<Kernel> make_gaussian_rotor(double ell, int dim);

std::unique_ptr<Kernel> make_zero_kernel(int dim);

}  // namespace filaments
