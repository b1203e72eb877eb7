#include "filaments/currents.hpp"

#include <cmath>
#include <cstring>

#include "filaments/errors.hpp"
#include "filaments/parallel.hpp"
#include "filaments/smallmat.hpp"

namespace filaments {

SourceCloud build_sources(const CurveFamily& family) {
  SourceCloud s;
  s.dim = family.dim();
  s.curve_offset.push_back(0);
  int total = 0;
  for (const Curve& c : family.curves) total += c.samples;
  s.total = total;
  s.pos.resize(total * s.dim);
  s.wtan.resize(total * s.dim);
  int at = 0;
  std::vector<double> tan;
  for (int j = 0; j < family.size(); ++j) {
    const Curve& c = family.curves[j];
    const double alpha = family.weights[j];
    tan.resize(c.samples * c.dim);
    tangents(c, tan.data());
    for (int m = 0; m < c.samples; ++m) {
      const double w = alpha * quad_weight(c, m);
      for (int k = 0; k < c.dim; ++k) {
        s.pos[(at + m) * s.dim + k] = c.pts[m * c.dim + k];
        s.wtan[(at + m) * s.dim + k] = w * tan[m * c.dim + k];
      }
    }
    at += c.samples;
    s.curve_offset.push_back(at);
  }
  return s;
}

namespace {

constexpr int kBlock = 64;

// Sum of K(x - y_s) wtan_s over samples [lo, hi) of one curve, reduced with
// a fixed-shape pairwise tree over kBlock-sized blocks.
void sum_curve_range(const Kernel& k, const SourceCloud& s, int lo, int hi, const double* x,
                     double* acc) {
  const int d = s.dim;
  if (hi - lo <= kBlock) {
    double diff[3], v[3];
    for (int i = 0; i < d; ++i) acc[i] = 0.0;
    for (int m = lo; m < hi; ++m) {
      for (int i = 0; i < d; ++i) diff[i] = x[i] - s.pos[m * d + i];
      k.apply(diff, s.wtan.data() + m * d, v);
      for (int i = 0; i < d; ++i) acc[i] += v[i];
    }
    return;
  }
  const int nblk = (hi - lo + kBlock - 1) / kBlock;
  const int mid = lo + (nblk / 2) * kBlock;
  double right[3];
  sum_curve_range(k, s, lo, mid, x, acc);
  sum_curve_range(k, s, mid, hi, x, right);
  for (int i = 0; i < d; ++i) acc[i] += right[i];
}

void sum_curves(const Kernel& k, const SourceCloud& s, int clo, int chi, const double* x,
                double* acc) {
  const int d = s.dim;
  if (chi - clo == 1) {
    sum_curve_range(k, s, s.curve_offset[clo], s.curve_offset[clo + 1], x, acc);
    return;
  }
  const int mid = clo + (chi - clo) / 2;
  double right[3];
  sum_curves(k, s, clo, mid, x, acc);
  sum_curves(k, s, mid, chi, x, right);
  for (int i = 0; i < d; ++i) acc[i] += right[i];
}

void sum_curve_range_jac(const Kernel& k, const SourceCloud& s, int lo, int hi,
                         const double* x, double* acc_v, double* acc_G) {
  const int d = s.dim;
  if (hi - lo <= kBlock) {
    double diff[3], v[3], G[9];
    for (int i = 0; i < d; ++i) acc_v[i] = 0.0;
    for (int i = 0; i < d * d; ++i) acc_G[i] = 0.0;
    for (int m = lo; m < hi; ++m) {
      for (int i = 0; i < d; ++i) diff[i] = x[i] - s.pos[m * d + i];
      k.apply(diff, s.wtan.data() + m * d, v);
      k.apply_jacobian(diff, s.wtan.data() + m * d, G);
      for (int i = 0; i < d; ++i) acc_v[i] += v[i];
      for (int i = 0; i < d * d; ++i) acc_G[i] += G[i];
    }
    return;
  }
  const int nblk = (hi - lo + kBlock - 1) / kBlock;
  const int mid = lo + (nblk / 2) * kBlock;
  double rv[3], rG[9];
  sum_curve_range_jac(k, s, lo, mid, x, acc_v, acc_G);
  sum_curve_range_jac(k, s, mid, hi, x, rv, rG);
  for (int i = 0; i < d; ++i) acc_v[i] += rv[i];
  for (int i = 0; i < d * d; ++i) acc_G[i] += rG[i];
}

void sum_curves_jac(const Kernel& k, const SourceCloud& s, int clo, int chi, const double* x,
                    double* acc_v, double* acc_G) {
  const int d = s.dim;
  if (chi - clo == 1) {
    sum_curve_range_jac(k, s, s.curve_offset[clo], s.curve_offset[clo + 1], x, acc_v, acc_G);
    return;
  }
  const int mid = clo + (chi - clo) / 2;
  double rv[3], rG[9];
  sum_curves_jac(k, s, clo, mid, x, acc_v, acc_G);
  sum_curves_jac(k, s, mid, chi, x, rv, rG);
  for (int i = 0; i < d; ++i) acc_v[i] += rv[i];
  for (int i = 0; i < d * d; ++i) acc_G[i] += rG[i];
}

}  // namespace

void convolve_velocity(const Kernel& k, const SourceCloud& s, const double* x, double* v) {
  const int ncurves = static_cast<int>(s.curve_offset.size()) - 1;
  if (ncurves == 0 || s.total == 0) {
    for (int i = 0; i < s.dim; ++i) v[i] = 0.0;
    return;
  }
  sum_curves(k, s, 0, ncurves, x, v);
}

void convolve_velocity_jacobian(const Kernel& k, const SourceCloud& s, const double* x,
                                double* v, double* G) {
  const int ncurves = static_cast<int>(s.curve_offset.size()) - 1;
  if (ncurves == 0 || s.total == 0) {
    for (int i = 0; i < s.dim; ++i) v[i] = 0.0;
    for (int i = 0; i < s.dim * s.dim; ++i) G[i] = 0.0;
    return;
  }
  sum_curves_jac(k, s, 0, ncurves, x, v, G);
}

ConvolveResult convolve(const Kernel& k, const FilamentCurrent& xi, const double* x) {
  if (k.dim() != xi.dim()) throw ValidationError("convolve: kernel/current dim mismatch");
  const int d = k.dim();
  ConvolveResult r;
  r.velocity.assign(d, 0.0);
  r.jacobian.assign(d * d, 0.0);
  r.hessian.assign(d * d * d, 0.0);
  const SourceCloud s = build_sources(xi.family);
  convolve_velocity_jacobian(k, s, x, r.velocity.data(), r.jacobian.data());
  double diff[3], H[27];
  for (int m = 0; m < s.total; ++m) {
    for (int i = 0; i < d; ++i) diff[i] = x[i] - s.pos[m * d + i];
    k.apply_hessian(diff, s.wtan.data() + m * d, H);
    for (int i = 0; i < d * d * d; ++i) r.hessian[i] += H[i];
  }
  return r;
}

void velocity_batch(const Kernel& k, const SourceCloud& s, const double* targets, int n,
                    double* out, int threads) {
  const int d = s.dim;
  parallel_for(n, threads,
               [&](int i) { convolve_velocity(k, s, targets + i * d, out + i * d); });
}

void velocity_jacobian_batch(const Kernel& k, const SourceCloud& s, const double* targets,
                             int n, double* out_v, double* out_G, int threads) {
  const int d = s.dim;
  parallel_for(n, threads, [&](int i) {
    convolve_velocity_jacobian(k, s, targets + i * d, out_v + i * d, out_G + i * d * d);
  });
}

double pair(const FilamentCurrent& xi, const VectorField& theta) {
  double s = 0.0;
  for (int j = 0; j < xi.family.size(); ++j)
    s += xi.family.weights[j] * pair(xi.family.curves[j], theta);
  return s;
}

double mass_norm_upper(const FilamentCurrent& xi) {
  double s = 0.0;
  for (int j = 0; j < xi.family.size(); ++j)
    s += std::abs(xi.family.weights[j]) * arclength(xi.family.curves[j]);
  return s;
}

double dict_metric(const FilamentCurrent& a, const FilamentCurrent& b,
                   const TestFieldDictionary& dict, std::vector<double>* per_field) {
  if (per_field) per_field->assign(dict.count, 0.0);
  double best = 0.0;
  for (int k = 0; k < dict.count; ++k) {
    const double v = std::abs(pair(a, dict.fields[k]) - pair(b, dict.fields[k]));
    if (per_field) (*per_field)[k] = v;
    if (v > best) best = v;
  }
  return best;
}

double pushforward_dual_check(const FilamentCurrent& xi, const VectorField& theta,
                              const std::function<void(const double*, double*)>& phi,
                              const std::function<void(const double*, double*)>& dphi) {
  const int d = xi.dim();
  const FilamentCurrent advected =
      pushforward_filament(xi, [&](const double* x, double* y) { phi(x, y); });
  const double lhs = pair(advected, theta);
  LambdaField pulled(d, [&](const double* x, double* v) {
    double y[3], J[9], ty[3];
    phi(x, y);
    dphi(x, J);
    theta.value(y, ty);
    matvec_t(J, ty, v, d);
  });
  const double rhs = pair(xi, pulled);
  return std::abs(lhs - rhs);
}

// ---------------------------------------------------------------------------

int GridCurrent::node_count() const {
  int n = 1;
  for (int i = 0; i < dim; ++i) n *= res[i];
  return n;
}

void GridCurrent::node_coord(const int* idx, double* x) const {
  for (int i = 0; i < dim; ++i)
    x[i] = lo[i] + (hi[i] - lo[i]) * idx[i] / (res[i] - 1);
}

namespace {
int flat_index(const GridCurrent& g, const int* idx) {
  int f = 0;
  for (int i = 0; i < g.dim; ++i) f = f * g.res[i] + idx[i];
  return f;
}
}  // namespace

double* GridCurrent::value_at(const int* idx) {
  return values.data() + flat_index(*this, idx) * dim;
}
const double* GridCurrent::value_at(const int* idx) const {
  return values.data() + flat_index(*this, idx) * dim;
}

GridCurrent make_grid(int dim, const double* lo, const double* hi, const int* res) {
  if (dim < 1 || dim > 3) throw ValidationError("grid: dim must be 1..3");
  GridCurrent g;
  g.dim = dim;
  for (int i = 0; i < dim; ++i) {
    if (res[i] < 2) throw ValidationError("grid: resolution must be >= 2 per axis");
    if (!(hi[i] > lo[i])) throw ValidationError("grid: empty box");
    g.lo[i] = lo[i];
    g.hi[i] = hi[i];
    g.res[i] = res[i];
  }
  g.values.assign(static_cast<std::size_t>(g.node_count()) * dim, 0.0);
  return g;
}

bool grid_interpolate(const GridCurrent& g, const double* x, double* out) {
  const int d = g.dim;
  int base[3];
  double frac[3];
  for (int i = 0; i < d; ++i) {
    const double h = (g.hi[i] - g.lo[i]) / (g.res[i] - 1);
    const double u = (x[i] - g.lo[i]) / h;
    if (u < 0.0 || u > g.res[i] - 1) {
      for (int k = 0; k < d; ++k) out[k] = 0.0;
      return false;
    }
    int b = static_cast<int>(std::floor(u));
    if (b > g.res[i] - 2) b = g.res[i] - 2;
    base[i] = b;
    frac[i] = u - b;
  }
  for (int k = 0; k < d; ++k) out[k] = 0.0;
  const int corners = 1 << d;
  int idx[3];
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    for (int i = 0; i < d; ++i) {
      const int bit = (c >> i) & 1;
      idx[i] = base[i] + bit;
      w *= bit ? frac[i] : (1.0 - frac[i]);
    }
    const double* v = g.value_at(idx);
    for (int k = 0; k < d; ++k) out[k] += w * v[k];
  }
  return true;
}

double pair(const GridCurrent& g, const VectorField& theta) {
  const int d = g.dim;
  double cellvol = 1.0;
  for (int i = 0; i < d; ++i) cellvol *= (g.hi[i] - g.lo[i]) / (g.res[i] - 1);
  const int n = g.node_count();
  double s = 0.0;
  int idx[3];
  double x[3], tv[3];
  for (int f = 0; f < n; ++f) {
    int rem = f;
    for (int i = d - 1; i >= 0; --i) {
      idx[i] = rem % g.res[i];
      rem /= g.res[i];
    }
    double w = cellvol;
    for (int i = 0; i < d; ++i)
      if (idx[i] == 0 || idx[i] == g.res[i] - 1) w *= 0.5;
    g.node_coord(idx, x);
    theta.value(x, tv);
    s += w * dot(tv, g.values.data() + f * d, d);
  }
  return s;
}

namespace {

class Rotation final : public Diffeomorphism {
 public:
  Rotation(int dim, double angle) : dim_(dim), c_(std::cos(angle)), s_(std::sin(angle)) {}
  int dim() const override { return dim_; }
  void forward(const double* x, double* y) const override {
    const double x0 = x[0], x1 = x[1];
    y[0] = c_ * x0 - s_ * x1;
    y[1] = s_ * x0 + c_ * x1;
    if (dim_ == 3) y[2] = x[2];
  }
  void inverse(const double* y, double* x) const override {
    const double y0 = y[0], y1 = y[1];
    x[0] = c_ * y0 + s_ * y1;
    x[1] = -s_ * y0 + c_ * y1;
    if (dim_ == 3) x[2] = y[2];
  }
  void jacobian(const double*, double* J) const override {
    mat_identity(J, dim_);
    J[0] = c_;
    J[1] = -s_;
    J[dim_] = s_;
    J[dim_ + 1] = c_;
  }

 private:
  int dim_;
  double c_, s_;
};

class Affine final : public Diffeomorphism {
 public:
  Affine(int dim, const double* A, const double* b) : dim_(dim) {
    std::memcpy(A_, A, sizeof(double) * dim * dim);
    std::memcpy(b_, b, sizeof(double) * dim);
    const double dA = invert(A_, Ainv_, dim);
    if (dA == 0.0 || !std::isfinite(dA)) throw ValidationError("affine map: singular matrix");
  }
  int dim() const override { return dim_; }
  void forward(const double* x, double* y) const override {
    matvec(A_, x, y, dim_);
    for (int i = 0; i < dim_; ++i) y[i] += b_[i];
  }
  void inverse(const double* y, double* x) const override {
    double t[3];
    for (int i = 0; i < dim_; ++i) t[i] = y[i] - b_[i];
    matvec(Ainv_, t, x, dim_);
  }
  void jacobian(const double*, double* J) const override {
    std::memcpy(J, A_, sizeof(double) * dim_ * dim_);
  }

 private:
  int dim_;
  double A_[9], Ainv_[9], b_[3];
};

}  // namespace

std::unique_ptr<Diffeomorphism> make_rotation(int dim, double angle) {
  if (dim != 2 && dim != 3) throw ValidationError("rotation: dim must be 2 or 3");
  return std::make_unique<Rotation>(dim, angle);
}

std::unique_ptr<Diffeomorphism> make_affine(int dim, const double* A, const double* b) {
  if (dim < 1 || dim > 3) throw ValidationError("affine: dim must be 1..3");
  return std::make_unique<Affine>(dim, A, b);
}

GridPushforwardResult pushforward_grid(const GridCurrent& xi, const Diffeomorphism& phi) {
  if (phi.dim() != xi.dim) throw ValidationError("pushforward_grid: dim mismatch");
  const int d = xi.dim;
  GridPushforwardResult result;
  result.current = xi;
  const int n = xi.node_count();
  int outside = 0;
  int idx[3];
  double x[3], y[3], J[9], v0[3], val[3];
  for (int f = 0; f < n; ++f) {
    int rem = f;
    for (int i = d - 1; i >= 0; --i) {
      idx[i] = rem % xi.res[i];
      rem /= xi.res[i];
    }
    result.current.node_coord(idx, x);
    phi.inverse(x, y);
    const bool inside = grid_interpolate(xi, y, v0);
    if (!inside) ++outside;
    phi.jacobian(y, J);
    matvec(J, v0, val, d);
    const double dJ = std::abs(det(J, d));
    for (int k = 0; k < d; ++k) result.current.values[f * d + k] = val[k] / dJ;
  }
  result.out_of_box_fraction = static_cast<double>(outside) / n;
  return result;
}

void validate_path(const CurrentPath& path) {
  if (path.states.size() < 1) throw ValidationError("path: empty");
  if (path.states.size() > 1 && !(path.dt > 0.0))
    throw ValidationError("path: dt must be positive");
  const int n = path.states.front().family.size();
  const int d = path.states.front().dim();
  for (const FilamentCurrent& s : path.states) {
    if (s.family.size() != n || s.dim() != d)
      throw ValidationError("path: states must share N and d");
    for (int j = 0; j < n; ++j)
      if (s.family.curves[j].samples != path.states.front().family.curves[j].samples)
        throw ValidationError("path: states must share M");
  }
}

}  // namespace filaments
