#include "filaments/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "filaments/errors.hpp"
#include "filaments/rng.hpp"
#include "filaments/smallmat.hpp"

namespace filaments {

double Kernel::c_b() const {
  return std::max({bounds_.k_inf + bounds_.dk_inf, bounds_.dk_inf + bounds_.d2k_inf,
                   bounds_.d2k_inf + bounds_.d3k_inf});
}

void Kernel::matrix(const double* x, double* K) const {
  const int d = dim_;
  double e[3] = {0, 0, 0}, col[3];
  for (int l = 0; l < d; ++l) {
    e[l] = 1.0;
    apply(x, e, col);
    e[l] = 0.0;
    for (int i = 0; i < d; ++i) K[i * d + l] = col[i];
  }
}

void Kernel::jacobian_tensor(const double* x, double* DK) const {
  const int d = dim_;
  double e[3] = {0, 0, 0}, G[9];
  for (int l = 0; l < d; ++l) {
    e[l] = 1.0;
    apply_jacobian(x, e, G);
    e[l] = 0.0;
    for (int i = 0; i < d; ++i)
      for (int m = 0; m < d; ++m) DK[(i * d + l) * d + m] = G[i * d + m];
  }
}

void Kernel::hessian_tensor(const double* x, double* D2K) const {
  const int d = dim_;
  double e[3] = {0, 0, 0}, H[27];
  for (int l = 0; l < d; ++l) {
    e[l] = 1.0;
    apply_hessian(x, e, H);
    e[l] = 0.0;
    for (int i = 0; i < d; ++i)
      for (int m = 0; m < d; ++m)
        for (int n = 0; n < d; ++n)
          D2K[((i * d + l) * d + m) * d + n] = H[(i * d + m) * d + n];
  }
}

double bl_operator_bound(const Kernel& k) {
  return k.bounds().k_inf + k.bounds().dk_inf;
}

namespace {

class ZeroKernel final : public Kernel {
 public:
  explicit ZeroKernel(int dim) : Kernel(dim, KernelSpec{"zero", {}}) {
    divergence_free_ = true;
    audit_halfwidth_ = 1.0;
  }
  void apply(const double*, const double*, double* v) const override {
    for (int i = 0; i < dim_; ++i) v[i] = 0.0;
  }
  void apply_jacobian(const double*, const double*, double* G) const override {
    std::memset(G, 0, sizeof(double) * dim_ * dim_);
  }
  void apply_hessian(const double*, const double*, double* H) const override {
    std::memset(H, 0, sizeof(double) * dim_ * dim_ * dim_);
  }
};

class MollifiedBiotSavart final : public Kernel {
 public:
  explicit MollifiedBiotSavart(double delta)
      : Kernel(3, KernelSpec{"mollified_biot_savart", {{"delta", delta}}}), d2_(delta * delta) {
    divergence_free_ = true;  // columns are s(x) (x cross e_j); analytic zero divergence
    audit_halfwidth_ = 4.0 * delta;
    // Maxima of r^p (r^2 + d^2)^{-q/2} in closed form; each bound is a sum of
    // separately maximized terms, so it is a valid upper bound.
    const double d1 = delta;
    bounds_.k_inf = (2.0 / (3.0 * std::sqrt(3.0))) / (d1 * d1);
    bounds_.dk_inf = (2.0 * std::pow(0.6, 2.5) + 1.0) / (d1 * d1 * d1);
    bounds_.d2k_inf = (9.0 * 0.5 * std::pow(0.8, 2.5) +
                       15.0 * std::pow(0.75, 1.5) * std::pow(4.0 / 7.0, 3.5)) /
                      (d1 * d1 * d1 * d1);
    bounds_.d3k_inf = (9.0 + 90.0 * 0.4 * std::pow(5.0 / 7.0, 3.5) +
                       105.0 * 0.64 * std::pow(5.0 / 9.0, 4.5)) /
                      (d1 * d1 * d1 * d1 * d1);
  }

  void apply(const double* x, const double* w, double* v) const override {
    const double u = x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + d2_;
    const double s = 1.0 / (u * std::sqrt(u));
    v[0] = s * (x[1] * w[2] - x[2] * w[1]);
    v[1] = s * (x[2] * w[0] - x[0] * w[2]);
    v[2] = s * (x[0] * w[1] - x[1] * w[0]);
  }

  void apply_jacobian(const double* x, const double* w, double* G) const override {
    const double u = x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + d2_;
    const double su = std::sqrt(u);
    const double s = 1.0 / (u * su);
    const double s5 = s / u;
    double c[3];
    cross3(x, w, c);
    // G = (x cross w) grad(s)^T - s [w]_x, grad(s) = -3 x s5
    for (int i = 0; i < 3; ++i)
      for (int m = 0; m < 3; ++m) G[i * 3 + m] = c[i] * (-3.0 * x[m] * s5);
    G[0 * 3 + 1] += s * w[2];
    G[0 * 3 + 2] -= s * w[1];
    G[1 * 3 + 0] -= s * w[2];
    G[1 * 3 + 2] += s * w[0];
    G[2 * 3 + 0] += s * w[1];
    G[2 * 3 + 1] -= s * w[0];
  }

  void apply_hessian(const double* x, const double* w, double* H) const override {
    const double u = x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + d2_;
    const double su = std::sqrt(u);
    const double s5 = 1.0 / (u * u * su);
    const double s7 = s5 / u;
    double c[3], em_w[3][3];
    cross3(x, w, c);
    for (int m = 0; m < 3; ++m) {
      double e[3] = {0, 0, 0};
      e[m] = 1.0;
      cross3(e, w, em_w[m]);
    }
    for (int i = 0; i < 3; ++i)
      for (int m = 0; m < 3; ++m)
        for (int n = 0; n < 3; ++n) {
          const double d2s = (m == n ? -3.0 * s5 : 0.0) + 15.0 * x[m] * x[n] * s7;
          const double ds_m = -3.0 * x[m] * s5;
          const double ds_n = -3.0 * x[n] * s5;
          H[(i * 3 + m) * 3 + n] = d2s * c[i] + ds_m * em_w[n][i] + ds_n * em_w[m][i];
        }
  }

 private:
  double d2_;
};

class GaussianRotor final : public Kernel {
 public:
  GaussianRotor(double ell, int dim)
      : Kernel(dim, KernelSpec{"gaussian_rotor", {{"ell", ell}}}), inv_l2_(1.0 / (ell * ell)) {
    audit_halfwidth_ = 4.0 * ell;
    bounds_.k_inf = 1.0;
    bounds_.dk_inf = std::exp(-0.5) / ell;
    bounds_.d2k_inf = 1.0 / (ell * ell);
    const double u = std::sqrt(3.0);
    bounds_.d3k_inf =
        std::exp(-0.5 * u) * (std::pow(u, 1.5) + 3.0 * std::sqrt(u)) / (ell * ell * ell);
    divergence_free_ = audit_divergence();
  }

  void apply(const double* x, const double* w, double* v) const override {
    const double g = gauss(x);
    v[0] = -g * w[1];
    v[1] = g * w[0];
    if (dim_ == 3) v[2] = 0.0;
  }

  void apply_jacobian(const double* x, const double* w, double* G) const override {
    const double g = gauss(x);
    double jw[3] = {-w[1], w[0], 0.0};
    for (int i = 0; i < dim_; ++i)
      for (int m = 0; m < dim_; ++m) G[i * dim_ + m] = jw[i] * (-x[m] * inv_l2_ * g);
  }

  void apply_hessian(const double* x, const double* w, double* H) const override {
    const double g = gauss(x);
    double jw[3] = {-w[1], w[0], 0.0};
    for (int i = 0; i < dim_; ++i)
      for (int m = 0; m < dim_; ++m)
        for (int n = 0; n < dim_; ++n) {
          const double d2g =
              g * (x[m] * x[n] * inv_l2_ * inv_l2_ - (m == n ? inv_l2_ : 0.0));
          H[(i * dim_ + m) * dim_ + n] = jw[i] * d2g;
        }
  }

 private:
  double gauss(const double* x) const {
    double r2 = 0.0;
    for (int i = 0; i < dim_; ++i) r2 += x[i] * x[i];
    return std::exp(-0.5 * r2 * inv_l2_);
  }

  bool audit_divergence() const {
    KroneckerSequence seq(dim_);
    double x[3], G[9], e[3];
    const double hw = audit_halfwidth_;
    for (int k = 0; k < 64; ++k) {
      seq.point(k, x);
      for (int i = 0; i < dim_; ++i) x[i] = (2.0 * x[i] - 1.0) * hw;
      for (int j = 0; j < dim_; ++j) {
        for (int i = 0; i < dim_; ++i) e[i] = 0.0;
        e[j] = 1.0;
        apply_jacobian(x, e, G);
        double div = 0.0;
        for (int i = 0; i < dim_; ++i) div += G[i * dim_ + i];
        if (std::abs(div) > 1e-10) return false;
      }
    }
    return true;
  }

  double inv_l2_;
};

}  // namespace

std::unique_ptr<Kernel> make_zero_kernel(int dim) {
  if (dim < 1 || dim > 3) throw ValidationError("kernel: dim must be 1..3");
  return std::make_unique<ZeroKernel>(dim);
}

std::unique_ptr<Kernel> make_mollified_biot_savart(double delta) {
  if (!(delta > 0.0))
    throw ValidationError("kernel: mollified_biot_savart requires delta > 0");
  return std::make_unique<MollifiedBiotSavart>(delta);
}

std::unique_ptr<Kernel> make_gaussian_rotor(double ell, int dim) {
  if (!(ell > 0.0)) throw ValidationError("kernel: gaussian_rotor requires ell > 0");
  if (dim != 2 && dim != 3)
    throw ValidationError("kernel: gaussian_rotor requires dim 2 or 3");
  return std::make_unique<GaussianRotor>(ell, dim);
}

std::unique_ptr<Kernel> make_kernel(const KernelSpec& spec, int dim) {
  auto param = [&](const char* name) {
    auto it = spec.params.find(name);
    if (it == spec.params.end())
      throw ValidationError(std::string("kernel: missing parameter '") + name + "'");
    return it->second;
  };
  if (spec.kind == "zero") return make_zero_kernel(dim);
  if (spec.kind == "mollified_biot_savart") {
    if (dim != 3) throw ValidationError("kernel: mollified_biot_savart requires dim 3");
    return make_mollified_biot_savart(param("delta"));
  }
  if (spec.kind == "gaussian_rotor") return make_gaussian_rotor(param("ell"), dim);
  throw ValidationError("kernel: unknown kind '" + spec.kind + "'");
}

}  // namespace filaments
