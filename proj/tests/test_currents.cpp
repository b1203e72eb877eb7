#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include <algorithm>

#include "filaments/currents.hpp"
#include "filaments/io.hpp"
#include "filaments/errors.hpp"
#include "filaments/rng.hpp"
#include "filaments/smallmat.hpp"
#include "test_support.hpp"

using namespace filaments;
using namespace testsupport;

namespace {

// Test-only kernel K(x) = Id; a closed loop pairs it with an exact
// derivative, so the convolution must vanish.
class ConstantIdentityKernel final : public Kernel {
 public:
  explicit ConstantIdentityKernel(int dim) : Kernel(dim, KernelSpec{"const_id", {}}) {
    bounds_.k_inf = 1.0;
  }
  void apply(const double*, const double* w, double* v) const override {
    for (int i = 0; i < dim_; ++i) v[i] = w[i];
  }
  void apply_jacobian(const double*, const double*, double* G) const override {
    for (int i = 0; i < dim_ * dim_; ++i) G[i] = 0.0;
  }
  void apply_hessian(const double*, const double*, double* H) const override {
    for (int i = 0; i < dim_ * dim_ * dim_; ++i) H[i] = 0.0;
  }
};

FilamentCurrent unit_segment_current(double weight = 1.0) {
  const double a[3] = {0, 0, 0}, b[3] = {1, 0, 0};
  return single_curve_current(make_segment(a, b, 3, 16), weight);
}

FilamentCurrent random_family_current(Rng& rng, int n, int dim) {
  FilamentCurrent xi;
  for (int j = 0; j < n; ++j) {
    double c[3] = {rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    const double r = rng.uniform(0.5, 1.2);
    if (dim == 2) {
      xi.family.curves.push_back(make_circle(c, r, 24));
    } else {
      double nrm[3] = {rng.normal(), rng.normal(), rng.normal()};
      xi.family.curves.push_back(make_circle3(c, r, nrm, 24));
    }
    xi.family.weights.push_back(rng.uniform(-1.0, 1.0));
  }
  return xi;
}

}  // namespace

TEST_CASE("pair of a filament current") {
  SUBCASE("zero weights pair to zero for every field") {
    FilamentCurrent xi = unit_segment_current(0.0);
    const auto dict = make_dictionary(3, 8, 4, 2.0, 4.0, 99);
    for (const TestField& f : dict.fields) CHECK(pair(xi, f) == 0.0);
  }
  SUBCASE("unit segment against a constant field") {
    FilamentCurrent xi = unit_segment_current();
    const double e[3] = {0.25, -0.5, 1.5};
    const LambdaField theta(3, [&](const double*, double* v) {
      v[0] = e[0];
      v[1] = e[1];
      v[2] = e[2];
    });
    CHECK(pair(xi, theta) == doctest::Approx(e[0]).epsilon(1e-14));
  }
  SUBCASE("two half-weight copies pair exactly like one unit copy") {
    FilamentCurrent one = unit_segment_current(1.0);
    FilamentCurrent two = unit_segment_current(0.5);
    two.family.curves.push_back(two.family.curves.front());
    two.family.weights.push_back(0.5);
    const LambdaField theta(3, [](const double* x, double* v) {
      v[0] = std::sin(x[0] + 1.0);
      v[1] = x[2];
      v[2] = std::cos(x[1]);
    });
    CHECK(pair(one, theta) == pair(two, theta));
  }
}

TEST_CASE("convolve basics") {
  SUBCASE("zero kernel gives zero velocity, jacobian, hessian") {
    Rng rng(3);
    const FilamentCurrent xi = random_family_current(rng, 3, 3);
    const auto k = make_zero_kernel(3);
    const double x[3] = {0.1, 0.2, 0.3};
    const ConvolveResult r = convolve(*k, xi, x);
    for (double v : r.velocity) CHECK(v == 0.0);
    for (double v : r.jacobian) CHECK(v == 0.0);
    for (double v : r.hessian) CHECK(v == 0.0);
  }
  SUBCASE("constant identity kernel on a closed loop cancels") {
    const double c[3] = {0.4, -0.1, 0.2}, n[3] = {0.3, 1.0, -0.5};
    const FilamentCurrent xi = single_curve_current(make_circle3(c, 1.1, n, 32));
    const ConstantIdentityKernel k(3);
    const double x[3] = {1.0, 2.0, 3.0};
    const ConvolveResult r = convolve(k, xi, x);
    for (double v : r.velocity) CHECK(std::abs(v) <= 1e-13);
  }
}

TEST_CASE("ring velocity at the origin matches a high-resolution oracle") {
  // Unit circle in the z=0 plane, clockwise parametrization so the induced
  // velocity points along +z for this kernel orientation.
  const double delta = 0.5;
  const int M = 64;
  Curve ring;
  ring.dim = 3;
  ring.samples = M;
  ring.closed = true;
  ring.pts.resize(M * 3);
  for (int m = 0; m < M; ++m) {
    const double s = 2.0 * M_PI * m / M;
    ring.pts[m * 3 + 0] = std::sin(s);
    ring.pts[m * 3 + 1] = std::cos(s);
    ring.pts[m * 3 + 2] = 0.0;
  }
  const FilamentCurrent xi = single_curve_current(std::move(ring));
  const auto k = make_mollified_biot_savart(delta);
  const double origin[3] = {0, 0, 0};
  const ConvolveResult r = convolve(*k, xi, origin);

  // Independent oracle: analytic parametrization and tangents at 4096 nodes.
  const int R = 4096;
  double vz = 0.0;
  for (int m = 0; m < R; ++m) {
    const double s = 2.0 * M_PI * m / R;
    const double g[3] = {std::sin(s), std::cos(s), 0.0};
    const double t[3] = {2.0 * M_PI * std::cos(s), -2.0 * M_PI * std::sin(s), 0.0};
    const double u = g[0] * g[0] + g[1] * g[1] + delta * delta;
    const double sc = 1.0 / (u * std::sqrt(u));
    // (-g) cross t, z component
    vz += sc * ((-g[0]) * t[1] - (-g[1]) * t[0]);
  }
  vz /= R;

  CHECK(r.velocity[2] > 0.0);
  CHECK(std::abs(r.velocity[0]) <= 1e-12);
  CHECK(std::abs(r.velocity[1]) <= 1e-12);
  CHECK(std::abs(r.velocity[2] - vz) <= 1e-8);
}

TEST_CASE("convolve is linear in the current") {
  Rng rng(17);
  const FilamentCurrent a = random_family_current(rng, 2, 3);
  const FilamentCurrent b = random_family_current(rng, 3, 3);
  FilamentCurrent ab;
  ab.family = a.family;
  for (int j = 0; j < b.family.size(); ++j) {
    ab.family.curves.push_back(b.family.curves[j]);
    ab.family.weights.push_back(b.family.weights[j]);
  }
  const auto k = make_mollified_biot_savart(0.6);
  const double x[3] = {0.2, 0.1, -0.4};
  const ConvolveResult ra = convolve(*k, a, x);
  const ConvolveResult rb = convolve(*k, b, x);
  const ConvolveResult rab = convolve(*k, ab, x);
  for (int i = 0; i < 3; ++i)
    CHECK(rab.velocity[i] == doctest::Approx(ra.velocity[i] + rb.velocity[i]).epsilon(1e-12));
}

TEST_CASE("mass norm upper bound") {
  CHECK(mass_norm_upper(unit_segment_current()) == doctest::Approx(1.0).epsilon(1e-13));
  const double c[2] = {3.0, 1.0};
  const double alpha = -0.7, r = 1.4;
  FilamentCurrent circ = single_curve_current(make_circle(c, r, 64), alpha);
  CHECK(std::abs(mass_norm_upper(circ) - std::abs(alpha) * 2.0 * M_PI * r) <= 1e-10);
  FilamentCurrent empty;
  CHECK(mass_norm_upper(empty) == 0.0);
}

TEST_CASE("convolution bound |K*xi| <= mass_norm_upper * |K|_inf") {
  Rng rng(23);
  const auto k = make_mollified_biot_savart(0.5);
  for (int trial = 0; trial < 10; ++trial) {
    const FilamentCurrent xi = random_family_current(rng, 3, 3);
    const double cap = mass_norm_upper(xi) * k->bounds().k_inf;
    for (int p = 0; p < 10; ++p) {
      double x[3] = {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
      const ConvolveResult r = convolve(*k, xi, x);
      CHECK(norm2(r.velocity.data(), 3) <= cap * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("dictionary fields are certified and reproducible") {
  const auto dict = make_dictionary(3, 16, 8, 2.0, 4.0, 2024);
  Rng rng(5);
  for (const TestField& f : dict.fields) {
    CHECK(f.certified_bound() <= 1.0);
    for (int p = 0; p < 20; ++p) {
      double x[3] = {rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
      double v[3], J[9];
      f.value(x, v);
      CHECK(norm2(v, 3) <= 1.0);
      f.jacobian(x, J);
      CHECK(op_norm(J, 3) <= 1.0);
      // analytic jacobian against the finite-difference default
      double Jfd[9];
      f.VectorField::jacobian(x, Jfd);
      for (int i = 0; i < 9; ++i) CHECK(std::abs(J[i] - Jfd[i]) <= 1e-7);
    }
  }
  const auto dict2 = make_dictionary(3, 16, 8, 2.0, 4.0, 2024);
  const FilamentCurrent probe = unit_segment_current();
  for (int k = 0; k < dict.count; ++k)
    CHECK(pair(probe, dict.fields[k]) == pair(probe, dict2.fields[k]));
}

TEST_CASE("dict_metric is a pseudometric with the expected bounds") {
  const auto dict = make_dictionary(3, 32, 8, 2.0, 4.0, 7);
  Rng rng(29);
  const FilamentCurrent a = random_family_current(rng, 2, 3);
  const FilamentCurrent b = random_family_current(rng, 2, 3);
  const FilamentCurrent c = random_family_current(rng, 2, 3);

  SUBCASE("identity, symmetry, triangle inequality") {
    CHECK(dict_metric(a, a, dict) == 0.0);
    CHECK(dict_metric(a, b, dict) == dict_metric(b, a, dict));
    CHECK(dict_metric(a, c, dict) <=
          dict_metric(a, b, dict) + dict_metric(b, c, dict) + 1e-15);
  }

  SUBCASE("translation displacement bound d_D <= |v| mass") {
    for (int trial = 0; trial < 5; ++trial) {
      double v[3] = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      const double vn = norm2(v, 3);
      FilamentCurrent moved = pushforward_filament(a, [&](const double* x, double* y) {
        for (int i = 0; i < 3; ++i) y[i] = x[i] + v[i];
      });
      CHECK(dict_metric(a, moved, dict) <= vn * mass_norm_upper(a) * (1.0 + 1e-10) + 1e-14);
    }
  }

  SUBCASE("segment against the empty current") {
    const FilamentCurrent seg = unit_segment_current();
    FilamentCurrent empty;
    std::vector<double> per_field;
    const double d = dict_metric(seg, empty, dict, &per_field);
    CHECK(d <= 1.0);  // |xi(theta)| <= |theta|_inf * length <= 1
    double expected = 0.0;
    for (int k = 0; k < dict.count; ++k)
      expected = std::max(expected, std::abs(pair(seg, dict.fields[k])));
    CHECK(d == expected);
    CHECK(per_field.size() == static_cast<std::size_t>(dict.count));
  }

  SUBCASE("dictionary distance never exceeds the mass-norm upper bound of the difference") {
    // xi - xi' as a signed family: union with negated weights.
    FilamentCurrent diff = a;
    for (int j = 0; j < b.family.size(); ++j) {
      diff.family.curves.push_back(b.family.curves[j]);
      diff.family.weights.push_back(-b.family.weights[j]);
    }
    CHECK(dict_metric(a, b, dict) <= mass_norm_upper(diff) * (1.0 + 1e-12));
  }
}

TEST_CASE("filament push-forward") {
  Rng rng(31);
  const FilamentCurrent xi = random_family_current(rng, 3, 3);
  const auto dict = make_dictionary(3, 8, 6, 2.0, 4.0, 3);

  SUBCASE("identity leaves the current unchanged") {
    const FilamentCurrent id = pushforward_filament(xi, [](const double* x, double* y) {
      for (int i = 0; i < 3; ++i) y[i] = x[i];
    });
    for (int k = 0; k < dict.count; ++k)
      CHECK(pair(id, dict.fields[k]) == pair(xi, dict.fields[k]));
  }

  SUBCASE("translation matches the shifted test field at the sample level") {
    const double v[3] = {0.3, -0.8, 0.15};
    const FilamentCurrent moved = pushforward_filament(xi, [&](const double* x, double* y) {
      for (int i = 0; i < 3; ++i) y[i] = x[i] + v[i];
    });
    const TestField& theta = dict.fields[0];
    const LambdaField shifted(3, [&](const double* x, double* out) {
      double xs[3] = {x[0] + v[0], x[1] + v[1], x[2] + v[2]};
      theta.value(xs, out);
    });
    CHECK(pair(moved, theta) == doctest::Approx(pair(xi, shifted)).epsilon(1e-12));
  }

  SUBCASE("linear map matches the pulled-back field to quadrature tolerance") {
    const double A[9] = {1.2, 0.3, 0.0, -0.2, 0.9, 0.1, 0.0, 0.4, 1.1};
    const FilamentCurrent mapped = pushforward_filament(xi, [&](const double* x, double* y) {
      matvec(A, x, y, 3);
    });
    const TestField& theta = dict.fields[1];
    const LambdaField pulled(3, [&](const double* x, double* out) {
      double Ax[3], t[3];
      matvec(A, x, Ax, 3);
      theta.value(Ax, t);
      matvec_t(A, t, out, 3);
    });
    CHECK(pair(mapped, theta) == doctest::Approx(pair(xi, pulled)).epsilon(1e-8));
  }

  SUBCASE("functoriality (psi o phi)_# = psi_# phi_# exactly at samples") {
    auto phi = [](const double* x, double* y) {
      y[0] = x[0] + 0.1 * std::sin(x[1]);
      y[1] = x[1] * 1.1;
      y[2] = x[2] - 0.2 * x[0];
    };
    auto psi = [](const double* x, double* y) {
      y[0] = 0.9 * x[0];
      y[1] = x[1] + 0.3 * std::cos(x[2]);
      y[2] = x[2];
    };
    const FilamentCurrent two_step = pushforward_filament(pushforward_filament(xi, phi), psi);
    const FilamentCurrent composed = pushforward_filament(xi, [&](const double* x, double* y) {
      double mid[3];
      phi(x, mid);
      psi(mid, y);
    });
    for (int j = 0; j < xi.family.size(); ++j)
      for (std::size_t i = 0; i < two_step.family.curves[j].pts.size(); ++i)
        CHECK(two_step.family.curves[j].pts[i] == composed.family.curves[j].pts[i]);
  }
}

TEST_CASE("push-forward dual check") {
  const double c0[2] = {0.1, -0.3};
  const LambdaField theta(2, [](const double* x, double* v) {
    const double p = 7.0 * x[0] - 4.0 * x[1];
    v[0] = 0.5 * std::cos(p);
    v[1] = 0.3 * std::sin(p);
  });

  SUBCASE("identity and translation maps give zero defect") {
    const FilamentCurrent xi = single_curve_current(make_circle(c0, 1.0, 32));
    auto id_map = [](const double* x, double* y) {
      y[0] = x[0];
      y[1] = x[1];
    };
    auto id_jac = [](const double*, double* J) { mat_identity(J, 2); };
    CHECK(pushforward_dual_check(xi, theta, id_map, id_jac) == 0.0);

    auto tr_map = [](const double* x, double* y) {
      y[0] = x[0] + 0.4;
      y[1] = x[1] - 0.2;
    };
    CHECK(pushforward_dual_check(xi, theta, tr_map, id_jac) <= 1e-12);
  }

  SUBCASE("linear flow maps commute with the discrete tangent operator") {
    // For phi = exp(A) the re-derived tangents ARE Dphi gamma' at the sample
    // level (the differentiation matrix is linear), so the defect sits at
    // rounding level for every M.
    const std::vector<double> A = {0.4, 0.5, -0.3, -0.2};
    const std::vector<double> E = matrix_exp(A, 1.0, 2);
    const FilamentCurrent xi = single_curve_current(make_circle(c0, 1.0, 64));
    auto lin_map = [&](const double* x, double* y) { matvec(E.data(), x, y, 2); };
    auto lin_jac = [&](const double*, double* J) {
      for (int i = 0; i < 4; ++i) J[i] = E[i];
    };
    CHECK(pushforward_dual_check(xi, theta, lin_map, lin_jac) <= 1e-12);
  }

  SUBCASE("nonlinear smooth map: defect decays at order >= 3 under M doubling") {
    auto phi = [](const double* x, double* y) {
      y[0] = x[0] + 0.25 * std::sin(2.0 * x[1]);
      y[1] = x[1] + 0.25 * std::cos(2.0 * x[0]);
    };
    auto dphi = [](const double* x, double* J) {
      J[0] = 1.0;
      J[1] = 0.5 * std::cos(2.0 * x[1]);
      J[2] = -0.5 * std::sin(2.0 * x[0]);
      J[3] = 1.0;
    };
    const double d16 = pushforward_dual_check(
        single_curve_current(make_circle(c0, 1.0, 16)), theta, phi, dphi);
    const double d32 = pushforward_dual_check(
        single_curve_current(make_circle(c0, 1.0, 32)), theta, phi, dphi);
    CHECK(d16 > 1e-11);  // above the rounding floor, so the ratio is meaningful
    CHECK(d32 <= d16 / 8.0);
  }
}

TEST_CASE("grid currents") {
  const double lo[2] = {-2, -2}, hi[2] = {2, 2};
  const int res[2] = {48, 48};
  GridCurrent g = make_grid(2, lo, hi, res);
  // Gaussian bump carried by a constant vector.
  int idx[2];
  double x[2];
  for (idx[0] = 0; idx[0] < res[0]; ++idx[0])
    for (idx[1] = 0; idx[1] < res[1]; ++idx[1]) {
      g.node_coord(idx, x);
      const double bump = std::exp(-(x[0] * x[0] + x[1] * x[1]) / 0.5);
      g.value_at(idx)[0] = 0.3 * bump;
      g.value_at(idx)[1] = -0.7 * bump;
    }

  SUBCASE("identity push-forward is exact at the nodes") {
    const double A[4] = {1, 0, 0, 1}, b[2] = {0, 0};
    const auto id = make_affine(2, A, b);
    const GridPushforwardResult r = pushforward_grid(g, *id);
    for (std::size_t i = 0; i < g.values.size(); ++i)
      CHECK(r.current.values[i] == doctest::Approx(g.values[i]).epsilon(1e-14));
  }

  SUBCASE("linear map specializes to A xi(A^{-1}x)/|det A|") {
    const double A[4] = {1.1, 0.2, -0.1, 0.9}, b[2] = {0, 0};
    const auto aff = make_affine(2, A, b);
    const GridPushforwardResult r = pushforward_grid(g, *aff);
    double Ainv[4];
    const double dA = invert(A, Ainv, 2);
    int id2[2];
    double y[2], v0[2], expect[2];
    for (id2[0] = 4; id2[0] < res[0] - 4; id2[0] += 7)
      for (id2[1] = 4; id2[1] < res[1] - 4; id2[1] += 7) {
        g.node_coord(id2, x);
        matvec(Ainv, x, y, 2);
        if (!grid_interpolate(g, y, v0)) continue;
        matvec(A, v0, expect, 2);
        for (int i = 0; i < 2; ++i) expect[i] /= std::abs(dA);
        const double* got = r.current.value_at(id2);
        CHECK(got[0] == doctest::Approx(expect[0]).epsilon(1e-12));
        CHECK(got[1] == doctest::Approx(expect[1]).epsilon(1e-12));
      }
  }

  SUBCASE("duality for a rotation: pair(phi_# xi, theta) = pair(xi, phi_# theta)") {
    const auto rot = make_rotation(2, 0.5);
    const GridPushforwardResult r = pushforward_grid(g, *rot);
    const LambdaField theta(2, [](const double* p, double* v) {
      v[0] = std::sin(p[0]);
      v[1] = std::cos(p[1]) * 0.5;
    });
    const LambdaField pulled(2, [&](const double* p, double* v) {
      double y[2], t[2], J[4];
      rot->forward(p, y);
      rot->jacobian(p, J);
      theta.value(y, t);
      matvec_t(J, t, v, 2);
    });
    const double lhs = pair(r.current, theta);
    const double rhs = pair(g, pulled);
    CHECK(std::abs(lhs - rhs) <= 2e-3);  // interpolation + quadrature error at 48^2
    CHECK(r.out_of_box_fraction <= 0.5);
  }
}

TEST_CASE("current path validation") {
  CurrentPath path;
  CHECK_THROWS_AS(validate_path(path), ValidationError);
  path.states.push_back(unit_segment_current());
  CHECK_NOTHROW(validate_path(path));
  path.states.push_back(unit_segment_current());
  path.dt = 0.0;
  CHECK_THROWS_AS(validate_path(path), ValidationError);
  path.dt = 0.1;
  CHECK_NOTHROW(validate_path(path));
}

TEST_CASE("per-field dictionary values serialize as field_index,value rows") {
  const auto dict = make_dictionary(3, 4, 4, 2.0, 4.0, 19);
  const FilamentCurrent seg = unit_segment_current();
  FilamentCurrent empty;
  std::vector<double> per_field;
  dict_metric(seg, empty, dict, &per_field);
  const std::string csv = filaments::dict_values_csv(per_field);
  CHECK(csv.rfind("field_index,value\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}
