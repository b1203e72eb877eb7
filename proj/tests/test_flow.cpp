#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "filaments/errors.hpp"
#include "filaments/flow.hpp"
#include "filaments/rng.hpp"
#include "filaments/smallmat.hpp"
#include "test_support.hpp"

using namespace filaments;
using namespace testsupport;

namespace {

LambdaTimeField constant_field(const double* c) {
  const double c0 = c[0], c1 = c[1], c2 = c[2];
  return LambdaTimeField(
      3,
      [c0, c1, c2](double, const double*, double* v) {
        v[0] = c0;
        v[1] = c1;
        v[2] = c2;
      },
      [](double, const double*, double* J) {
        for (int i = 0; i < 9; ++i) J[i] = 0.0;
      });
}

LambdaTimeField linear_field(const std::vector<double>& A, int d) {
  return LambdaTimeField(
      d,
      [A, d](double, const double* x, double* v) { matvec(A.data(), x, v, d); },
      [A, d](double, const double*, double* J) {
        for (int i = 0; i < d * d; ++i) J[i] = A[i];
      });
}

std::vector<double> random_points(Rng& rng, int n, int d) {
  std::vector<double> p(n * d);
  for (double& v : p) v = rng.uniform(-1.5, 1.5);
  return p;
}

}  // namespace

TEST_CASE("constant field advects rigidly with identity jacobian") {
  Rng rng(2);
  const double c[3] = {0.3, -0.2, 0.9};
  const auto field = constant_field(c);
  const std::vector<double> p0 = random_points(rng, 5, 3);
  FlowState st = make_flow_state(p0, 3, true);
  st = advect(st, field, 0.01, 100);
  for (int i = 0; i < 5; ++i)
    for (int k = 0; k < 3; ++k)
      CHECK(st.pts[i * 3 + k] == doctest::Approx(p0[i * 3 + k] + 1.0 * c[k]).epsilon(1e-13));
  for (int i = 0; i < 5; ++i) {
    for (int r = 0; r < 3; ++r)
      for (int cc = 0; cc < 3; ++cc)
        CHECK(st.jac[i * 9 + r * 3 + cc] == (r == cc ? 1.0 : 0.0));
  }
}

TEST_CASE("linear field matches the matrix exponential series oracle") {
  const std::vector<double> A = {0.2, 0.8, -0.4, -0.5, 0.1, 0.3, 0.2, -0.3, -0.1};
  const auto field = linear_field(A, 3);
  const std::vector<double> E = matrix_exp(A, 1.0, 3);
  Rng rng(4);
  const std::vector<double> p0 = random_points(rng, 4, 3);
  FlowState st = make_flow_state(p0, 3, true);
  st = advect(st, field, 1e-3, 1000);
  for (int i = 0; i < 4; ++i) {
    double expect[3];
    matvec(E.data(), p0.data() + i * 3, expect, 3);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(st.pts[i * 3 + k] - expect[k]) <= 1e-10);
    for (int k = 0; k < 9; ++k) CHECK(std::abs(st.jac[i * 9 + k] - E[k]) <= 1e-10);
  }
}

TEST_CASE("RK4 order is 4 on a smooth nonlinear field") {
  const LambdaTimeField field(
      2,
      [](double t, const double* x, double* v) {
        v[0] = std::sin(x[1]) + 0.3 * std::cos(t);
        v[1] = std::cos(x[0]) - 0.2 * x[1];
      },
      [](double, const double* x, double* J) {
        J[0] = 0.0;
        J[1] = std::cos(x[1]);
        J[2] = -std::sin(x[0]);
        J[3] = -0.2;
      });
  const std::vector<double> p0 = {0.4, -0.3};
  auto run = [&](double dt) {
    FlowState st = make_flow_state(p0, 2, false);
    const int steps = static_cast<int>(std::llround(1.0 / dt));
    return advect(st, field, dt, steps);
  };
  const FlowState fine = run(1.0 / 1024.0);
  auto err = [&](double dt) {
    const FlowState s = run(dt);
    double e = 0.0;
    for (int k = 0; k < 2; ++k) e = std::max(e, std::abs(s.pts[k] - fine.pts[k]));
    return e;
  };
  const double e1 = err(1.0 / 16.0);
  const double e2 = err(1.0 / 32.0);
  const double order = std::log2(e1 / e2);
  CHECK(order >= 3.8);
  CHECK(order <= 4.2);
}

TEST_CASE("advecting forward then backward recovers the start to O(dt^4)") {
  const LambdaTimeField fwd(
      2,
      [](double, const double* x, double* v) {
        v[0] = std::sin(x[1]);
        v[1] = std::cos(x[0]);
      },
      [](double, const double* x, double* J) {
        J[0] = 0.0;
        J[1] = std::cos(x[1]);
        J[2] = -std::sin(x[0]);
        J[3] = 0.0;
      });
  // time-reversed field: integrating y' = -b(T - t, y)
  const double T = 1.0;
  const LambdaTimeField bwd(
      2,
      [T](double t, const double* x, double* v) {
        v[0] = -std::sin(x[1]);
        v[1] = -std::cos(x[0]);
        (void)t;
      },
      [](double, const double* x, double* J) {
        J[0] = 0.0;
        J[1] = -std::cos(x[1]);
        J[2] = std::sin(x[0]);
        J[3] = 0.0;
      });
  Rng rng(8);
  const std::vector<double> p0 = random_points(rng, 6, 2);
  const double dt = 1e-2;
  const int steps = 100;
  FlowState st = make_flow_state(p0, 2, false);
  st = advect(st, fwd, dt, steps);
  st.time = 0.0;
  st = advect(st, bwd, dt, steps);
  for (std::size_t i = 0; i < p0.size(); ++i) CHECK(std::abs(st.pts[i] - p0[i]) <= 1e-7);
}

TEST_CASE("divergence-free flow keeps det Dphi at one") {
  // rotation field about the origin
  const LambdaTimeField rot(
      2,
      [](double, const double* x, double* v) {
        v[0] = -x[1];
        v[1] = x[0];
      },
      [](double, const double*, double* J) {
        J[0] = 0.0;
        J[1] = -1.0;
        J[2] = 1.0;
        J[3] = 0.0;
      });
  Rng rng(12);
  FlowState st = make_flow_state(random_points(rng, 8, 2), 2, true);
  FlowTrace trace;
  st = advect(st, rot, 1e-2, 200, 1, &trace);
  for (const FlowTraceRow& row : trace.rows) {
    CHECK(row.det_min >= 1.0 - 1e-6);
    CHECK(row.det_max <= 1.0 + 1e-6);
  }
}

TEST_CASE("determinism across runs and thread counts") {
  const std::vector<double> A = {0.1, 0.7, -0.6, -0.2};
  const auto field = linear_field(A, 2);
  Rng rng(19);
  const std::vector<double> p0 = random_points(rng, 37, 2);
  auto run = [&](int threads) {
    FlowState st = make_flow_state(p0, 2, true);
    return advect(st, field, 1e-2, 50, threads);
  };
  const FlowState a = run(1);
  const FlowState b = run(1);
  const FlowState c = run(4);
  CHECK(a.pts == b.pts);
  CHECK(a.jac == b.jac);
  CHECK(a.pts == c.pts);
  CHECK(a.jac == c.jac);
}

TEST_CASE("non-finite states abort with a located diagnostic") {
  const LambdaTimeField bad(
      1, [](double, const double* x, double* v) { v[0] = std::exp(x[0] * x[0]); },
      [](double, const double*, double* J) { J[0] = 0.0; });
  FlowState st = make_flow_state({3.0}, 1, false);
  CHECK_THROWS_AS(advect(st, bad, 0.5, 50), NumericError);
}

TEST_CASE("flow bounds check") {
  SUBCASE("zero field saturates the bound with equality") {
    const double c[3] = {0, 0, 0};
    const auto field = constant_field(c);
    FlowState st = make_flow_state({0.1, 0.2, 0.3}, 3, true);
    FlowTrace trace;
    st = advect(st, field, 0.1, 10, 1, &trace);
    // C_B = 0: envelope is exp(0) = 1 and |Dphi| = 1 exactly.
    const FlowBoundsReport rep =
        flow_bounds_check(trace, 0.0, std::vector<double>(trace.rows.size(), 0.0));
    CHECK(rep.all_ok);
    for (const FlowTraceRow& row : trace.rows) CHECK(row.max_dphi == 1.0);
  }
  SUBCASE("normal positive-spectrum linear field saturates the Gronwall envelope") {
    // b = a x with a > 0: |Dphi(t)| = e^{at}; with c_b = a and mass_sup = 0
    // the envelope is e^{at}, so the observed ratio is 1 up to RK4 error.
    const double a = 0.8;
    const std::vector<double> A = {a, 0.0, 0.0, a};
    const auto field = linear_field(A, 2);
    FlowState st = make_flow_state({0.5, -0.3}, 2, true);
    FlowTrace trace;
    st = advect(st, field, 1e-2, 100, 1, &trace);
    const FlowBoundsReport rep =
        flow_bounds_check(trace, a, std::vector<double>(trace.rows.size(), 0.0), 1.01);
    CHECK(rep.all_ok);
    CHECK(rep.max_log_ratio >= -0.011);  // saturation: within the slack of zero
    CHECK(rep.max_log_ratio <= 0.0);
  }
  SUBCASE("a field steeper than its claimed c_b is flagged") {
    const std::vector<double> A = {1.0, 0.0, 0.0, 1.0};
    const auto field = linear_field(A, 2);
    FlowState st = make_flow_state({0.5, -0.3}, 2, true);
    FlowTrace trace;
    st = advect(st, field, 1e-2, 100, 1, &trace);
    const FlowBoundsReport rep =
        flow_bounds_check(trace, 0.5, std::vector<double>(trace.rows.size(), 0.0), 1.01);
    CHECK_FALSE(rep.all_ok);
    CHECK(rep.max_log_ratio > 0.0);
  }
}
