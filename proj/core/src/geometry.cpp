#include "filaments/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "filaments/errors.hpp"
#include "filaments/smallmat.hpp"

namespace filaments {

void validate_curve(const Curve& c) {
  if (c.dim < 1 || c.dim > 3) throw ValidationError("curve: dim must be 1..3");
  if (c.samples < 8) throw ValidationError("curve: needs at least 8 samples");
  if (static_cast<int>(c.pts.size()) != c.samples * c.dim)
    throw ValidationError("curve: points size mismatch");
  for (double v : c.pts)
    if (!std::isfinite(v)) throw ValidationError("curve: non-finite coordinate");
}

double CurveFamily::total_abs_weight() const {
  double s = 0.0;
  for (double w : weights) s += std::abs(w);
  return s;
}

void validate_family(const CurveFamily& f) {
  if (f.curves.empty()) throw ValidationError("family: needs at least one curve");
  if (f.curves.size() != f.weights.size())
    throw ValidationError("family: curves and weights length mismatch");
  const int d = f.curves.front().dim;
  for (const Curve& c : f.curves) {
    validate_curve(c);
    if (c.dim != d) throw ValidationError("family: mixed dimensions");
  }
  for (double w : f.weights)
    if (!std::isfinite(w)) throw ValidationError("family: non-finite weight");
}

namespace {

// Row of the periodic trigonometric differentiation matrix on [0,1):
// t_j = sum_{m=1}^{M-1} w[m] * gamma_{(j+m) mod M}. Exact for trig
// polynomials of degree < M/2 (even M) resp. <= (M-1)/2 (odd M).
void spectral_weights(int M, std::vector<double>& w) {
  w.assign(M, 0.0);
  const bool even = (M % 2 == 0);
  for (int m = 1; m < M; ++m) {
    const double sgn = (m % 2 == 0) ? 1.0 : -1.0;
    // D_{j,j+m} = f(-m) with f(p) = pi (-1)^p cot(pi p / M) (even M),
    // f(p) = pi (-1)^p / sin(pi p / M) (odd M); f is odd in p.
    const double arg = M_PI * static_cast<double>(m) / M;
    double f;
    if (even) f = M_PI * sgn / std::tan(arg);
    else f = M_PI * sgn / std::sin(arg);
    w[m] = -f;
  }
}

// Both stencils are applied to differences gamma_k - gamma_j: the weights
// sum to zero, so this is the same operator, but constant curves map to an
// exact zero and the result is translation-stable.
void tangents_closed(const Curve& c, double* out) {
  const int M = c.samples, d = c.dim;
  std::vector<double> w;
  spectral_weights(M, w);
  for (int j = 0; j < M; ++j) {
    for (int k = 0; k < d; ++k) {
      const double base = c.pts[j * d + k];
      double s = 0.0;
      for (int m = 1; m < M; ++m) {
        const int idx = j + m >= M ? j + m - M : j + m;
        s += w[m] * (c.pts[idx * d + k] - base);
      }
      out[j * d + k] = s;
    }
  }
}

void tangents_open(const Curve& c, double* out) {
  const int M = c.samples, d = c.dim;
  const double inv12h = static_cast<double>(M - 1) / 12.0;  // 1/(12h), h = 1/(M-1)
  for (int k = 0; k < d; ++k) {
    auto p = [&](int m, int j) { return c.pts[m * d + k] - c.pts[j * d + k]; };
    out[0 * d + k] =
        (48.0 * p(1, 0) - 36.0 * p(2, 0) + 16.0 * p(3, 0) - 3.0 * p(4, 0)) * inv12h;
    out[1 * d + k] =
        (-3.0 * p(0, 1) + 18.0 * p(2, 1) - 6.0 * p(3, 1) + p(4, 1)) * inv12h;
    for (int j = 2; j < M - 2; ++j)
      out[j * d + k] =
          (p(j - 2, j) - 8.0 * p(j - 1, j) + 8.0 * p(j + 1, j) - p(j + 2, j)) * inv12h;
    out[(M - 2) * d + k] = (3.0 * p(M - 1, M - 2) - 18.0 * p(M - 3, M - 2) +
                            6.0 * p(M - 4, M - 2) - p(M - 5, M - 2)) *
                           inv12h;
    out[(M - 1) * d + k] = (-48.0 * p(M - 2, M - 1) + 36.0 * p(M - 3, M - 1) -
                            16.0 * p(M - 4, M - 1) + 3.0 * p(M - 5, M - 1)) *
                           inv12h;
  }
}

}  // namespace

void tangents(const Curve& c, double* out) {
  if (c.closed) tangents_closed(c, out);
  else tangents_open(c, out);
  const int n = c.samples * c.dim;
  for (int i = 0; i < n; ++i)
    if (!std::isfinite(out[i]))
      throw NumericError("tangent: non-finite result at sample " + std::to_string(i / c.dim));
}

std::vector<double> tangents(const Curve& c) {
  std::vector<double> out(c.samples * c.dim);
  tangents(c, out.data());
  return out;
}

double quad_weight(const Curve& c, int m) {
  if (c.closed) return 1.0 / c.samples;
  const double h = 1.0 / (c.samples - 1);
  return (m == 0 || m == c.samples - 1) ? 0.5 * h : h;
}

double pair(const Curve& c, const VectorField& theta) {
  const int M = c.samples, d = c.dim;
  std::vector<double> tan(M * d);
  tangents(c, tan.data());
  double v[3];
  double s = 0.0;
  for (int m = 0; m < M; ++m) {
    theta.value(c.point(m), v);
    s += quad_weight(c, m) * dot(v, tan.data() + m * d, d);
  }
  return s;
}

double arclength(const Curve& c) {
  const int M = c.samples, d = c.dim;
  std::vector<double> tan(M * d);
  tangents(c, tan.data());
  double s = 0.0;
  for (int m = 0; m < M; ++m) s += quad_weight(c, m) * norm2(tan.data() + m * d, d);
  return s;
}

Curve make_segment(const double* a, const double* b, int dim, int samples) {
  Curve c;
  c.dim = dim;
  c.samples = samples;
  c.closed = false;
  c.pts.resize(samples * dim);
  for (int m = 0; m < samples; ++m) {
    const double s = static_cast<double>(m) / (samples - 1);
    for (int k = 0; k < dim; ++k) c.pts[m * dim + k] = a[k] + s * (b[k] - a[k]);
  }
  return c;
}

Curve make_circle(const double* center, double radius, int samples) {
  Curve c;
  c.dim = 2;
  c.samples = samples;
  c.closed = true;
  c.pts.resize(samples * 2);
  for (int m = 0; m < samples; ++m) {
    const double a = 2.0 * M_PI * m / samples;
    c.pts[m * 2 + 0] = center[0] + radius * std::cos(a);
    c.pts[m * 2 + 1] = center[1] + radius * std::sin(a);
  }
  return c;
}

Curve make_circle3(const double* center, double radius, const double* normal,
                   int samples, double phase) {
  double n[3] = {normal[0], normal[1], normal[2]};
  const double nn = norm2(n, 3);
  for (double& v : n) v /= nn;
  // Deterministic frame: pick the axis least aligned with n.
  double ref[3] = {0, 0, 0};
  int least = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(n[i]) < std::abs(n[least])) least = i;
  ref[least] = 1.0;
  double u[3], v[3];
  cross3(n, ref, u);
  const double un = norm2(u, 3);
  for (double& x : u) x /= un;
  cross3(n, u, v);

  Curve c;
  c.dim = 3;
  c.samples = samples;
  c.closed = true;
  c.pts.resize(samples * 3);
  for (int m = 0; m < samples; ++m) {
    const double a = 2.0 * M_PI * (static_cast<double>(m) / samples + phase);
    const double ca = radius * std::cos(a), sa = radius * std::sin(a);
    for (int k = 0; k < 3; ++k) c.pts[m * 3 + k] = center[k] + ca * u[k] + sa * v[k];
  }
  return c;
}

}  // namespace filaments
