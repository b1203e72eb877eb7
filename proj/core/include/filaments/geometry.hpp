#pragma once

// Discretized parametrized curves sigma in [0,1] -> R^d on a uniform
// sigma-grid, with tangent reconstruction and quadrature along the curve.
// Closed curves use the spectral (trigonometric) differentiation matrix and
// the periodic trapezoid rule; open curves use 4th-order finite differences
// and the plain trapezoid rule.

#include <vector>

#include "filaments/fields.hpp"

namespace filaments {

struct Curve {
  int dim = 0;
  int samples = 0;  // M >= 8
  bool closed = true;
  std::vector<double> pts;  // samples x dim, row-major; closed curves do not
                            // duplicate the endpoint

  const double* point(int m) const { return pts.data() + m * dim; }
  double* point(int m) { return pts.data() + m * dim; }
};

// Throws ValidationError on M < 8, size mismatch, or non-finite coordinates.
void validate_curve(const Curve& c);

struct CurveFamily {
  std::vector<Curve> curves;
  std::vector<double> weights;  // the alpha_j

  int size() const { return static_cast<int>(curves.size()); }
  int dim() const { return curves.empty() ? 0 : curves.front().dim; }
  double total_abs_weight() const;
};

void validate_family(const CurveFamily& f);

// d gamma / d sigma at every sample. Closed: exact for trigonometric
// polynomials of degree < M/2. Open: 4th order, exact on quartics.
void tangents(const Curve& c, double* out);
std::vector<double> tangents(const Curve& c);

// Quadrature weight of sample m for integrals over sigma in [0,1].
double quad_weight(const Curve& c, int m);

// xi(theta) = int_0^1 <theta(gamma(sigma)), gamma'(sigma)> dsigma.
double pair(const Curve& c, const VectorField& theta);

// int_0^1 |gamma'(sigma)| dsigma.
double arclength(const Curve& c);

// Convenience builders used throughout the tests and the studies.
Curve make_segment(const double* a, const double* b, int dim, int samples);
Curve make_circle(const double* center, double radius, int samples);  // d=2
// d=3 circle with unit normal n (frame built deterministically from n).
Curve make_circle3(const double* center, double radius, const double* normal,
                   int samples, double phase = 0.0);

}  // namespace filaments
