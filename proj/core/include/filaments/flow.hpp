#pragma once

// Classical RK4 time integration of point clouds under a time-dependent
// velocity field, with optional Jacobian transport along trajectories via the
// variational equation d(Dphi)/dt = Db(t, phi) Dphi, Dphi(0) = Id. The same
// RK4 stages advance points and Jacobians, so both are 4th order.

#include <functional>
#include <vector>

namespace filaments {

struct FlowState {
  int dim = 0;
  int n = 0;
  double time = 0.0;
  std::vector<double> pts;  // n x dim
  std::vector<double> jac;  // n x dim x dim when tracked, else empty

  bool has_jacobians() const { return !jac.empty(); }
};

FlowState make_flow_state(const std::vector<double>& points, int dim, bool track_jacobians,
                          double time = 0.0);

// b(t, x) with spatial Jacobian; implementations must be safe for concurrent
// evaluation.
class TimeField {
 public:
  virtual ~TimeField() = default;
  virtual int dim() const = 0;
  virtual void value(double t, const double* x, double* v) const = 0;
  virtual void jacobian(double t, const double* x, double* J) const = 0;
};

class LambdaTimeField : public TimeField {
 public:
  using ValueFn = std::function<void(double, const double*, double*)>;
  LambdaTimeField(int dim, ValueFn value, ValueFn jacobian)
      : dim_(dim), value_(std::move(value)), jac_(std::move(jacobian)) {}
  int dim() const override { return dim_; }
  void value(double t, const double* x, double* v) const override { value_(t, x, v); }
  void jacobian(double t, const double* x, double* J) const override { jac_(t, x, J); }

 private:
  int dim_;
  ValueFn value_, jac_;
};

struct FlowTraceRow {
  int step = 0;
  double time = 0.0;
  double max_dphi = 0.0;       // max over points of |Dphi| (spectral norm)
  double bound_rhs_log = 0.0;  // log of the Gronwall envelope, filled by the caller
  double det_min = 0.0;
  double det_max = 0.0;
};

struct FlowTrace {
  std::vector<FlowTraceRow> rows;
};

// Advances `steps` RK4 steps of size dt. on_node, when set, is called after
// every step with the current state (used to record path nodes). Throws
// NumericError with the (step, point) location if the state turns
// non-finite. Deterministic for any thread count: points are independent
// tasks and the trace reduction runs serially in index order.
FlowState advect(const FlowState& initial, const TimeField& b, double dt, int steps,
                 int threads = 1, FlowTrace* trace = nullptr,
                 const std::function<void(int, const FlowState&)>& on_node = nullptr);

struct FlowBoundsReport {
  bool all_ok = true;
  double max_log_ratio = 0.0;            // max over rows of log(|Dphi|) - log envelope
  double det_min = 1.0, det_max = 1.0;
  std::vector<bool> row_ok;
};

// Checks |Dphi(t)| <= slack * exp(c_b * t * (mass_sup(t) + 1)) row by row,
// in log space so the envelope never overflows. mass_sup must hold the
// running sup over s <= t of the mass-norm upper bound driving the flow.
FlowBoundsReport flow_bounds_check(const FlowTrace& trace, double c_b,
                                   const std::vector<double>& mass_sup, double slack = 1.01);

}  // namespace filaments
