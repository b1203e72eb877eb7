#include "filaments/fields.hpp"

#include <cmath>

#include "filaments/errors.hpp"
#include "filaments/rng.hpp"
#include "filaments/smallmat.hpp"

namespace filaments {

void VectorField::jacobian(const double* x, double* J) const {
  // 4th-order central differences; analytic overrides are preferred wherever
  // tolerances are tight.
  const int d = dim();
  const double h = 1e-5;
  double xp[3], v1[3], v2[3], v3[3], v4[3];
  for (int j = 0; j < d; ++j) {
    for (int k = 0; k < d; ++k) xp[k] = x[k];
    xp[j] = x[j] + 2 * h;
    value(xp, v1);
    xp[j] = x[j] + h;
    value(xp, v2);
    xp[j] = x[j] - h;
    value(xp, v3);
    xp[j] = x[j] - 2 * h;
    value(xp, v4);
    for (int i = 0; i < d; ++i)
      J[i * d + j] = (-v1[i] + 8.0 * v2[i] - 8.0 * v3[i] + v4[i]) / (12.0 * h);
  }
}

TestField::TestField(int dim, std::vector<double> a, std::vector<double> b,
                     std::vector<double> omega)
    : dim_(dim), a_(std::move(a)), b_(std::move(b)), omega_(std::move(omega)) {
  if (a_.size() != b_.size() || a_.size() != omega_.size() || a_.size() % dim_ != 0)
    throw ValidationError("test field: coefficient arrays must be features x dim");
  features_ = static_cast<int>(a_.size()) / dim_;
}

void TestField::value(const double* x, double* v) const {
  for (int k = 0; k < dim_; ++k) v[k] = 0.0;
  for (int m = 0; m < features_; ++m) {
    const double* w = omega_.data() + m * dim_;
    const double p = dot(w, x, dim_);
    const double cp = std::cos(p), sp = std::sin(p);
    for (int k = 0; k < dim_; ++k)
      v[k] += a_[m * dim_ + k] * cp + b_[m * dim_ + k] * sp;
  }
}

void TestField::jacobian(const double* x, double* J) const {
  for (int i = 0; i < dim_ * dim_; ++i) J[i] = 0.0;
  for (int m = 0; m < features_; ++m) {
    const double* w = omega_.data() + m * dim_;
    const double p = dot(w, x, dim_);
    const double cp = std::cos(p), sp = std::sin(p);
    for (int i = 0; i < dim_; ++i) {
      const double ci = -a_[m * dim_ + i] * sp + b_[m * dim_ + i] * cp;
      for (int j = 0; j < dim_; ++j) J[i * dim_ + j] += ci * w[j];
    }
  }
}

double TestField::certified_bound() const {
  double s = 0.0;
  for (int m = 0; m < features_; ++m) {
    const double na = norm2(a_.data() + m * dim_, dim_);
    const double nb = norm2(b_.data() + m * dim_, dim_);
    const double nw = norm2(omega_.data() + m * dim_, dim_);
    s += (na + nb) * (1.0 + nw);
  }
  return s;
}

void TestField::scale_coefficients(double factor) {
  for (double& v : a_) v *= factor;
  for (double& v : b_) v *= factor;
}

TestFieldDictionary make_dictionary(int dim, int count, int features,
                                    double freq_scale, double diameter,
                                    std::uint64_t seed) {
  if (dim < 1 || dim > 3) throw ValidationError("dictionary: dim must be 1..3");
  if (count < 1 || features < 1) throw ValidationError("dictionary: count and features >= 1");
  if (freq_scale <= 0 || diameter <= 0)
    throw ValidationError("dictionary: freq_scale and diameter must be positive");

  TestFieldDictionary dict;
  dict.dim = dim;
  dict.count = count;
  dict.features = features;
  dict.freq_scale = freq_scale;
  dict.diameter = diameter;
  dict.seed = seed;
  const double omega_sigma = 2.0 * M_PI * freq_scale / diameter;

  Rng rng(seed);
  for (int k = 0; k < count; ++k) {
    std::vector<double> a(features * dim), b(features * dim), w(features * dim);
    for (int i = 0; i < features * dim; ++i) a[i] = rng.normal();
    for (int i = 0; i < features * dim; ++i) b[i] = rng.normal();
    for (int i = 0; i < features * dim; ++i) w[i] = omega_sigma * rng.normal();
    TestField f(dim, std::move(a), std::move(b), std::move(w));
    // Normalize so the certified bound is strictly <= 1 even after rounding.
    f.scale_coefficients((1.0 - 1e-12) / f.certified_bound());
    dict.fields.push_back(std::move(f));
  }
  return dict;
}

}  // namespace filaments
