#pragma once

// Bounded vector fields on R^d used as test functions for currents, plus the
// seeded random-Fourier-feature dictionary that serves as a computable
// surrogate for the dual ball { theta : ||theta||_inf + Lip(theta) <= 1 }.

#include <cstdint>
#include <functional>
#include <vector>

namespace filaments {

class VectorField {
 public:
  virtual ~VectorField() = default;
  virtual int dim() const = 0;
  virtual void value(const double* x, double* v) const = 0;
  // J_{ij} = d theta_i / d x_j, row-major. Default: 4th-order differences.
  virtual void jacobian(const double* x, double* J) const;
};

class LambdaField : public VectorField {
 public:
  using ValueFn = std::function<void(const double*, double*)>;
  using JacFn = std::function<void(const double*, double*)>;

  LambdaField(int dim, ValueFn value) : dim_(dim), value_(std::move(value)) {}
  LambdaField(int dim, ValueFn value, JacFn jac)
      : dim_(dim), value_(std::move(value)), jac_(std::move(jac)) {}

  int dim() const override { return dim_; }
  void value(const double* x, double* v) const override { value_(x, v); }
  void jacobian(const double* x, double* J) const override {
    if (jac_) jac_(x, J);
    else VectorField::jacobian(x, J);
  }

 private:
  int dim_;
  ValueFn value_;
  JacFn jac_;
};

// theta(x) = sum_m a_m cos<w_m, x> + b_m sin<w_m, x>, with the certified
// normalization sum_m (|a_m| + |b_m|) (1 + |w_m|) <= 1, which dominates
// ||theta||_inf + Lip(theta).
class TestField : public VectorField {
 public:
  TestField(int dim, std::vector<double> a, std::vector<double> b,
            std::vector<double> omega);

  int dim() const override { return dim_; }
  int features() const { return features_; }
  void value(const double* x, double* v) const override;
  void jacobian(const double* x, double* J) const override;
  // sum_m (|a_m| + |b_m|)(1 + |w_m|); kept <= 1 by construction.
  double certified_bound() const;
  void scale_coefficients(double factor);

 private:
  int dim_;
  int features_;
  std::vector<double> a_, b_, omega_;  // features x dim each
};

struct TestFieldDictionary {
  int dim = 0;
  int count = 0;          // L
  int features = 0;       // Fourier features per field
  double freq_scale = 0;  // frequency scale relative to domain diameter
  double diameter = 0;    // reference domain diameter
  std::uint64_t seed = 0;
  std::vector<TestField> fields;
};

// Reproducible from the arguments alone: same inputs give a bit-identical
// dictionary. Frequencies are N(0, s^2) with s = 2*pi*freq_scale/diameter.
TestFieldDictionary make_dictionary(int dim, int count, int features,
                                    double freq_scale, double diameter,
                                    std::uint64_t seed);

}  // namespace filaments
