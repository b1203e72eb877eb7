#include "filaments/flow.hpp"

#include <cmath>
#include <string>

#include "filaments/errors.hpp"
#include "filaments/parallel.hpp"
#include "filaments/smallmat.hpp"

namespace filaments {

FlowState make_flow_state(const std::vector<double>& points, int dim, bool track_jacobians,
                          double time) {
  if (dim < 1 || dim > 3) throw ValidationError("flow: dim must be 1..3");
  if (points.size() % dim != 0) throw ValidationError("flow: points size mismatch");
  FlowState s;
  s.dim = dim;
  s.n = static_cast<int>(points.size()) / dim;
  s.time = time;
  s.pts = points;
  if (track_jacobians) {
    s.jac.assign(static_cast<std::size_t>(s.n) * dim * dim, 0.0);
    for (int i = 0; i < s.n; ++i) mat_identity(s.jac.data() + i * dim * dim, dim);
  }
  return s;
}

FlowState advect(const FlowState& initial, const TimeField& b, double dt, int steps,
                 int threads, FlowTrace* trace, const std::function<void(int, const FlowState&)>& on_node) {
  if (!(dt > 0.0)) throw ValidationError("advect: dt must be positive");
  if (b.dim() != initial.dim) throw ValidationError("advect: field/state dim mismatch");

  FlowState state = initial;
  const int d = state.dim, n = state.n, dd = d * d;
  const bool track = state.has_jacobians();
  const double t0 = state.time;

  for (int step = 0; step < steps; ++step) {
    const double t = t0 + step * dt;
    parallel_for(n, threads, [&](int i) {
      double* x = state.pts.data() + i * d;
      double k1[3], k2[3], k3[3], k4[3], xs[3];
      double jk1[9], jk2[9], jk3[9], jk4[9], js[9], G[9];
      double* J = track ? state.jac.data() + i * dd : nullptr;

      b.value(t, x, k1);
      if (track) {
        b.jacobian(t, x, G);
        matmul(G, J, jk1, d);
      }
      for (int k = 0; k < d; ++k) xs[k] = x[k] + 0.5 * dt * k1[k];
      b.value(t + 0.5 * dt, xs, k2);
      if (track) {
        for (int k = 0; k < dd; ++k) js[k] = J[k] + 0.5 * dt * jk1[k];
        b.jacobian(t + 0.5 * dt, xs, G);
        matmul(G, js, jk2, d);
      }
      for (int k = 0; k < d; ++k) xs[k] = x[k] + 0.5 * dt * k2[k];
      b.value(t + 0.5 * dt, xs, k3);
      if (track) {
        for (int k = 0; k < dd; ++k) js[k] = J[k] + 0.5 * dt * jk2[k];
        b.jacobian(t + 0.5 * dt, xs, G);
        matmul(G, js, jk3, d);
      }
      for (int k = 0; k < d; ++k) xs[k] = x[k] + dt * k3[k];
      b.value(t + dt, xs, k4);
      if (track) {
        for (int k = 0; k < dd; ++k) js[k] = J[k] + dt * jk3[k];
        b.jacobian(t + dt, xs, G);
        matmul(G, js, jk4, d);
      }
      for (int k = 0; k < d; ++k)
        x[k] += dt / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
      if (track)
        for (int k = 0; k < dd; ++k)
          J[k] += dt / 6.0 * (jk1[k] + 2.0 * jk2[k] + 2.0 * jk3[k] + jk4[k]);
    });
    state.time = t0 + (step + 1) * dt;

    for (int i = 0; i < n * d; ++i)
      if (!std::isfinite(state.pts[i]))
        throw NumericError("advect: non-finite state at step " + std::to_string(step) +
                           " point " + std::to_string(i / d));

    if (trace && track) {
      FlowTraceRow row;
      row.step = step + 1;
      row.time = state.time;
      row.max_dphi = 0.0;
      row.det_min = 1e300;
      row.det_max = -1e300;
      for (int i = 0; i < n; ++i) {
        const double* J = state.jac.data() + i * dd;
        row.max_dphi = std::max(row.max_dphi, op_norm(J, d));
        const double dJ = det(J, d);
        row.det_min = std::min(row.det_min, dJ);
        row.det_max = std::max(row.det_max, dJ);
      }
      trace->rows.push_back(row);
    }
    if (on_node) on_node(step + 1, state);
  }
  return state;
}

FlowBoundsReport flow_bounds_check(const FlowTrace& trace, double c_b,
                                   const std::vector<double>& mass_sup, double slack) {
  if (mass_sup.size() != trace.rows.size())
    throw ValidationError("flow_bounds_check: mass_sup size must match trace rows");
  FlowBoundsReport rep;
  rep.max_log_ratio = -1e300;
  for (std::size_t r = 0; r < trace.rows.size(); ++r) {
    const FlowTraceRow& row = trace.rows[r];
    const double log_env = std::log(slack) + c_b * row.time * (mass_sup[r] + 1.0);
    const double log_ratio = std::log(std::max(row.max_dphi, 1e-300)) - log_env;
    const bool ok = log_ratio <= 0.0;
    rep.row_ok.push_back(ok);
    rep.all_ok = rep.all_ok && ok;
    rep.max_log_ratio = std::max(rep.max_log_ratio, log_ratio);
    rep.det_min = std::min(rep.det_min, row.det_min);
    rep.det_max = std::max(rep.det_max, row.det_max);
  }
  return rep;
}

}  // namespace filaments
