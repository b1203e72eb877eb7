#pragma once

// Dense helpers for d x d matrices with d <= 3, stored row-major in plain
// double arrays. Everything here is allocation-free and branch-predictable;
// these run inside the O(N^2 M^2) interaction loops.

#include <cmath>
#include <cstring>

namespace filaments {

inline double dot(const double* a, const double* b, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const double* a, int d) { return std::sqrt(dot(a, a, d)); }

inline void cross3(const double* a, const double* b, double* c) {
  c[0] = a[1] * b[2] - a[2] * b[1];
  c[1] = a[2] * b[0] - a[0] * b[2];
  c[2] = a[0] * b[1] - a[1] * b[0];
}

// y = A x
inline void matvec(const double* A, const double* x, double* y, int d) {
  for (int i = 0; i < d; ++i) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += A[i * d + j] * x[j];
    y[i] = s;
  }
}

// y = A^T x
inline void matvec_t(const double* A, const double* x, double* y, int d) {
  for (int j = 0; j < d; ++j) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += A[i * d + j] * x[i];
    y[j] = s;
  }
}

// C = A B
inline void matmul(const double* A, const double* B, double* C, int d) {
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) s += A[i * d + k] * B[k * d + j];
      C[i * d + j] = s;
    }
}

inline void mat_identity(double* A, int d) {
  std::memset(A, 0, sizeof(double) * d * d);
  for (int i = 0; i < d; ++i) A[i * d + i] = 1.0;
}

inline double det(const double* A, int d) {
  if (d == 1) return A[0];
  if (d == 2) return A[0] * A[3] - A[1] * A[2];
  return A[0] * (A[4] * A[8] - A[5] * A[7]) - A[1] * (A[3] * A[8] - A[5] * A[6]) +
         A[2] * (A[3] * A[7] - A[4] * A[6]);
}

// B = A^{-1} via adjugate; returns det(A).
inline double invert(const double* A, double* B, int d) {
  const double dA = det(A, d);
  if (d == 1) {
    B[0] = 1.0 / A[0];
    return dA;
  }
  if (d == 2) {
    const double inv = 1.0 / dA;
    B[0] = A[3] * inv;
    B[1] = -A[1] * inv;
    B[2] = -A[2] * inv;
    B[3] = A[0] * inv;
    return dA;
  }
  const double inv = 1.0 / dA;
  B[0] = (A[4] * A[8] - A[5] * A[7]) * inv;
  B[1] = (A[2] * A[7] - A[1] * A[8]) * inv;
  B[2] = (A[1] * A[5] - A[2] * A[4]) * inv;
  B[3] = (A[5] * A[6] - A[3] * A[8]) * inv;
  B[4] = (A[0] * A[8] - A[2] * A[6]) * inv;
  B[5] = (A[2] * A[3] - A[0] * A[5]) * inv;
  B[6] = (A[3] * A[7] - A[4] * A[6]) * inv;
  B[7] = (A[1] * A[6] - A[0] * A[7]) * inv;
  B[8] = (A[0] * A[4] - A[1] * A[3]) * inv;
  return dA;
}

// Largest eigenvalue of a symmetric d x d matrix by cyclic Jacobi rotations.
// Deterministic: fixed sweep order, fixed iteration count.
inline double sym_eig_max(const double* S, int d) {
  if (d == 1) return S[0];
  double A[9];
  std::memcpy(A, S, sizeof(double) * d * d);
  for (int sweep = 0; sweep < 16; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < d; ++p)
      for (int q = p + 1; q < d; ++q) off += A[p * d + q] * A[p * d + q];
    if (off < 1e-300) break;
    for (int p = 0; p < d; ++p)
      for (int q = p + 1; q < d; ++q) {
        const double apq = A[p * d + q];
        if (apq == 0.0) continue;
        const double theta = (A[q * d + q] - A[p * d + p]) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < d; ++k) {
          const double akp = A[k * d + p], akq = A[k * d + q];
          A[k * d + p] = c * akp - s * akq;
          A[k * d + q] = s * akp + c * akq;
        }
        for (int k = 0; k < d; ++k) {
          const double apk = A[p * d + k], aqk = A[q * d + k];
          A[p * d + k] = c * apk - s * aqk;
          A[q * d + k] = s * apk + c * aqk;
        }
      }
  }
  double m = A[0];
  for (int i = 1; i < d; ++i) m = std::max(m, A[i * d + i]);
  return m;
}

// Spectral norm (largest singular value): sqrt(lambda_max(A^T A)).
inline double op_norm(const double* A, int d) {
  double S[9];
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) s += A[k * d + i] * A[k * d + j];
      S[i * d + j] = s;
    }
  const double lam = sym_eig_max(S, d);
  return lam > 0.0 ? std::sqrt(lam) : 0.0;
}

}  // namespace filaments
