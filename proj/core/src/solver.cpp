#include "filaments/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <string>

#include "filaments/errors.hpp"
#include "filaments/parallel.hpp"
#include "filaments/smallmat.hpp"

namespace filaments {

namespace {

int checked_steps(double t_final, double dt, const char* who) {
  if (!(dt > 0.0)) throw ValidationError(std::string(who) + ": dt must be positive");
  if (!(t_final >= dt)) throw ValidationError(std::string(who) + ": t_final must be >= dt");
  const double raw = t_final / dt;
  const int steps = static_cast<int>(std::llround(raw));
  if (steps < 1 || std::abs(raw - steps) > 1e-9 * std::max(1.0, raw))
    throw ValidationError(std::string(who) + ": t_final must be an integer multiple of dt");
  return steps;
}

// Content order: the integrator must not depend on how the caller happened to
// order identical data (exchangeability tests compare permuted runs bitwise).
std::vector<int> canonical_order(const CurveFamily& f) {
  std::vector<int> idx(f.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    const Curve& ca = f.curves[a];
    const Curve& cb = f.curves[b];
    if (ca.samples != cb.samples) return ca.samples < cb.samples;
    if (ca.closed != cb.closed) return ca.closed < cb.closed;
    if (f.weights[a] != f.weights[b]) return f.weights[a] < f.weights[b];
    return std::lexicographical_compare(ca.pts.begin(), ca.pts.end(), cb.pts.begin(),
                                        cb.pts.end());
  });
  return idx;
}

CurveFamily reorder(const CurveFamily& f, const std::vector<int>& idx) {
  CurveFamily g;
  g.curves.reserve(f.size());
  g.weights.reserve(f.size());
  for (int i : idx) {
    g.curves.push_back(f.curves[i]);
    g.weights.push_back(f.weights[i]);
  }
  return g;
}

// Layout of a flattened family state: curve j occupies samples
// [offset[j], offset[j+1]).
struct FamilyLayout {
  int dim = 0;
  int total = 0;
  std::vector<int> offset;
  std::vector<int> samples;
  std::vector<bool> closed;
  std::vector<double> weights;

  explicit FamilyLayout(const CurveFamily& f) {
    dim = f.dim();
    offset.push_back(0);
    for (const Curve& c : f.curves) {
      samples.push_back(c.samples);
      closed.push_back(c.closed);
      offset.push_back(offset.back() + c.samples);
    }
    weights = f.weights;
    total = offset.back();
  }

  void flatten(const CurveFamily& f, std::vector<double>& x) const {
    x.resize(static_cast<std::size_t>(total) * dim);
    for (std::size_t j = 0; j < samples.size(); ++j)
      std::memcpy(x.data() + static_cast<std::size_t>(offset[j]) * dim,
                  f.curves[j].pts.data(), f.curves[j].pts.size() * sizeof(double));
  }

  CurveFamily unflatten(const double* x) const {
    CurveFamily f;
    for (std::size_t j = 0; j < samples.size(); ++j) {
      Curve c;
      c.dim = dim;
      c.samples = samples[j];
      c.closed = closed[j];
      c.pts.assign(x + static_cast<std::size_t>(offset[j]) * dim,
                   x + static_cast<std::size_t>(offset[j] + samples[j]) * dim);
      f.curves.push_back(std::move(c));
    }
    f.weights = weights;
    return f;
  }

  // Sources (positions + alpha * quadrature * tangent) of a flattened state.
  void sources_from_flat(const double* x, SourceCloud& s, std::vector<double>& tan_buf) const {
    s.dim = dim;
    s.total = total;
    s.pos.assign(x, x + static_cast<std::size_t>(total) * dim);
    s.wtan.resize(static_cast<std::size_t>(total) * dim);
    s.curve_offset.assign(offset.begin(), offset.end());
    for (std::size_t j = 0; j < samples.size(); ++j) {
      Curve view;
      view.dim = dim;
      view.samples = samples[j];
      view.closed = closed[j];
      view.pts.assign(x + static_cast<std::size_t>(offset[j]) * dim,
                      x + static_cast<std::size_t>(offset[j] + samples[j]) * dim);
      tan_buf.resize(view.pts.size());
      tangents(view, tan_buf.data());
      for (int m = 0; m < samples[j]; ++m) {
        const double w = weights[j] * quad_weight(view, m);
        for (int k = 0; k < dim; ++k)
          s.wtan[(offset[j] + m) * static_cast<std::size_t>(dim) + k] =
              w * tan_buf[m * dim + k];
      }
    }
  }
};

double family_mass_upper(const CurveFamily& f) {
  double s = 0.0;
  for (int j = 0; j < f.size(); ++j) s += std::abs(f.weights[j]) * arclength(f.curves[j]);
  return s;
}

}  // namespace

SimulateResult simulate_filaments(const CurveFamily& family, const Kernel& k,
                                  const SimulateOptions& opt) {
  validate_family(family);
  if (k.dim() != family.dim())
    throw ValidationError("simulate: kernel/family dim mismatch");
  const int steps = checked_steps(opt.t_final, opt.dt, "simulate");
  const double dt = opt.dt;

  const std::vector<int> order = canonical_order(family);
  std::vector<int> inverse(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) inverse[order[i]] = static_cast<int>(i);
  const CurveFamily canon = reorder(family, order);
  const FamilyLayout layout(canon);
  const int d = layout.dim, P = layout.total, dd = d * d;
  const bool track = opt.track_jacobians;

  std::vector<double> X;
  layout.flatten(canon, X);
  std::vector<double> J;
  if (track) {
    J.assign(static_cast<std::size_t>(P) * dd, 0.0);
    for (int i = 0; i < P; ++i) mat_identity(J.data() + i * dd, d);
  }

  SimulateResult result;
  result.path.t0 = 0.0;
  result.path.dt = dt;
  auto emit_state = [&](const double* flat) {
    const CurveFamily canon_state = layout.unflatten(flat);
    CurveFamily out;
    out.curves.resize(family.size());
    out.weights = family.weights;
    for (int i = 0; i < family.size(); ++i) out.curves[i] = canon_state.curves[inverse[i]];
    result.path.states.push_back(FilamentCurrent{std::move(out)});
  };
  emit_state(X.data());
  result.mass_upper.push_back(family_mass_upper(canon));
  double mass_running = result.mass_upper.back();

  SourceCloud src;
  std::vector<double> tan_buf;
  std::vector<double> k1(P * d), k2(P * d), k3(P * d), k4(P * d), Xs(P * d);
  std::vector<double> jk1, jk2, jk3, jk4, Js, Gbuf;
  if (track) {
    jk1.resize(P * dd);
    jk2.resize(P * dd);
    jk3.resize(P * dd);
    jk4.resize(P * dd);
    Js.resize(P * dd);
    Gbuf.resize(P * dd);
  }

  // One RK4 stage: velocities (and DB J when tracking) of the stage state.
  auto stage = [&](const std::vector<double>& Xstage, const std::vector<double>& Jstage,
                   std::vector<double>& kx, std::vector<double>& kj) {
    layout.sources_from_flat(Xstage.data(), src, tan_buf);
    if (!track) {
      velocity_batch(k, src, Xstage.data(), P, kx.data(), opt.threads);
    } else {
      velocity_jacobian_batch(k, src, Xstage.data(), P, kx.data(), Gbuf.data(), opt.threads);
      parallel_for(P, opt.threads, [&](int i) {
        matmul(Gbuf.data() + i * dd, Jstage.data() + i * dd, kj.data() + i * dd, d);
      });
    }
  };

  for (int step = 0; step < steps; ++step) {
    stage(X, J, k1, jk1);
    for (int i = 0; i < P * d; ++i) Xs[i] = X[i] + 0.5 * dt * k1[i];
    if (track)
      for (std::size_t i = 0; i < Js.size(); ++i) Js[i] = J[i] + 0.5 * dt * jk1[i];
    stage(Xs, Js, k2, jk2);
    for (int i = 0; i < P * d; ++i) Xs[i] = X[i] + 0.5 * dt * k2[i];
    if (track)
      for (std::size_t i = 0; i < Js.size(); ++i) Js[i] = J[i] + 0.5 * dt * jk2[i];
    stage(Xs, Js, k3, jk3);
    for (int i = 0; i < P * d; ++i) Xs[i] = X[i] + dt * k3[i];
    if (track)
      for (std::size_t i = 0; i < Js.size(); ++i) Js[i] = J[i] + dt * jk3[i];
    stage(Xs, Js, k4, jk4);
    for (int i = 0; i < P * d; ++i)
      X[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (track)
      for (std::size_t i = 0; i < J.size(); ++i)
        J[i] += dt / 6.0 * (jk1[i] + 2.0 * jk2[i] + 2.0 * jk3[i] + jk4[i]);

    for (int i = 0; i < P * d; ++i)
      if (!std::isfinite(X[i])) {
        const int sample = i / d;
        int curve = 0;
        while (layout.offset[curve + 1] <= sample) ++curve;
        throw NumericError("simulate: non-finite state at t=" +
                           std::to_string((step + 1) * dt) + " filament=" +
                           std::to_string(order[curve]) + " sample=" +
                           std::to_string(sample - layout.offset[curve]));
      }

    emit_state(X.data());
    result.mass_upper.push_back(family_mass_upper(layout.unflatten(X.data())));
    mass_running = std::max(mass_running, result.mass_upper.back());
    result.mass_sup.push_back(mass_running);

    if (track) {
      FlowTraceRow row;
      row.step = step + 1;
      row.time = (step + 1) * dt;
      row.max_dphi = 0.0;
      row.det_min = 1e300;
      row.det_max = -1e300;
      for (int i = 0; i < P; ++i) {
        row.max_dphi = std::max(row.max_dphi, op_norm(J.data() + i * dd, d));
        const double dj = det(J.data() + i * dd, d);
        row.det_min = std::min(row.det_min, dj);
        row.det_max = std::max(row.det_max, dj);
      }
      row.bound_rhs_log = k.c_b() * row.time * (mass_running + 1.0);
      result.trace.rows.push_back(row);
    }
  }
  return result;
}

// ---------------------------------------------------------------------------

CurrentPathField::CurrentPathField(const Kernel& k, const CurrentPath& path)
    : kernel_(k), dim_(path.states.front().dim()), t0_(path.t0), dt_(path.dt) {
  sources_.reserve(path.states.size());
  for (const FilamentCurrent& s : path.states) sources_.push_back(build_sources(s.family));
}

void CurrentPathField::locate(double t, int& node, double& lambda) const {
  const int last = static_cast<int>(sources_.size()) - 1;
  if (last == 0) {
    node = 0;
    lambda = 0.0;
    return;
  }
  double u = (t - t0_) / dt_;
  if (u < 0.0) u = 0.0;
  if (u > last) u = last;
  node = static_cast<int>(u);
  if (node > last - 1) node = last - 1;
  lambda = u - node;
  if (lambda < 1e-9) lambda = 0.0;
  if (lambda > 1.0 - 1e-9) {
    ++node;
    lambda = 0.0;
  }
}

void CurrentPathField::value(double t, const double* x, double* v) const {
  int node;
  double lambda;
  locate(t, node, lambda);
  convolve_velocity(kernel_, sources_[node], x, v);
  if (lambda > 0.0) {
    double v1[3];
    convolve_velocity(kernel_, sources_[node + 1], x, v1);
    for (int i = 0; i < dim_; ++i) v[i] = (1.0 - lambda) * v[i] + lambda * v1[i];
  }
}

void CurrentPathField::jacobian(double t, const double* x, double* J) const {
  int node;
  double lambda;
  locate(t, node, lambda);
  double v[3];
  convolve_velocity_jacobian(kernel_, sources_[node], x, v, J);
  if (lambda > 0.0) {
    double J1[9];
    convolve_velocity_jacobian(kernel_, sources_[node + 1], x, v, J1);
    for (int i = 0; i < dim_ * dim_; ++i) J[i] = (1.0 - lambda) * J[i] + lambda * J1[i];
  }
}

// ---------------------------------------------------------------------------

PicardResult picard_solve(const FilamentCurrent& xi0, const Kernel& k,
                          const TestFieldDictionary& dict, const PicardConfig& cfg) {
  validate_family(xi0.family);
  if (k.dim() != xi0.dim()) throw ValidationError("picard: kernel/current dim mismatch");
  if (!(cfg.tol > 0.0)) throw ValidationError("picard: tol must be positive");
  if (cfg.max_iter < 1) throw ValidationError("picard: max_iter must be >= 1");
  const int steps = checked_steps(cfg.t_final, cfg.dt, "picard");
  const double dt = cfg.dt;

  const std::vector<int> order = canonical_order(xi0.family);
  std::vector<int> inverse(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) inverse[order[i]] = static_cast<int>(i);
  const CurveFamily canon = reorder(xi0.family, order);
  const FamilyLayout layout(canon);
  const int d = layout.dim, P = layout.total;

  // Initial window: explicit if configured, otherwise the a-priori guess
  // exp(C_B (R+1) T_R) <= 2 with R = 2 |xi_0|_M-upper.
  int window_steps;
  if (cfg.window > 0.0) {
    window_steps = static_cast<int>(std::llround(cfg.window / dt));
    if (window_steps < 1 || std::abs(cfg.window / dt - window_steps) > 1e-9)
      throw ValidationError("picard: window must be a positive multiple of dt");
  } else {
    const double R = 2.0 * family_mass_upper(canon);
    const double cb = k.c_b();
    const double t_r = cb > 0.0 ? std::log(2.0) / (cb * (R + 1.0)) : cfg.t_final;
    window_steps = std::max(1, static_cast<int>(t_r / dt));
  }
  window_steps = std::min(window_steps, steps);

  PicardResult result;
  result.path.t0 = 0.0;
  result.path.dt = dt;

  std::vector<FilamentCurrent> global;  // canonical order
  global.push_back(FilamentCurrent{canon});

  int start = 0;
  while (start < steps) {
    int W = std::min(window_steps, steps - start);
    const FilamentCurrent xi_start = global.back();
    PicardWindow win;
    win.t_start = start * dt;
    bool converged = false;

    while (!converged) {
      std::vector<FilamentCurrent> prev(W + 1, xi_start);
      win.increments.clear();
      win.contraction.clear();
      win.iterations = 0;
      for (int it = 0; it < cfg.max_iter && !converged; ++it) {
        CurrentPath seg;
        seg.t0 = win.t_start;
        seg.dt = dt;
        seg.states = prev;
        const CurrentPathField field(k, seg);

        std::vector<double> x0;
        layout.flatten(xi_start.family, x0);
        std::vector<FilamentCurrent> cur(W + 1, xi_start);
        FlowState st = make_flow_state(x0, d, false, win.t_start);
        advect(st, field, dt, W, cfg.threads, nullptr, [&](int node, const FlowState& s) {
          cur[node] = FilamentCurrent{layout.unflatten(s.pts.data())};
        });

        double inc = 0.0;
        for (int n = 1; n <= W; ++n)
          inc = std::max(inc, dict_metric(cur[n], prev[n], dict));
        win.increments.push_back(inc);
        if (win.increments.size() >= 2) {
          const double prev_inc = win.increments[win.increments.size() - 2];
          win.contraction.push_back(prev_inc > 0.0 ? inc / prev_inc : 0.0);
        }
        win.iterations = it + 1;
        prev = std::move(cur);
        converged = inc < cfg.tol;
      }
      if (converged) {
        for (int n = 1; n <= W; ++n) global.push_back(std::move(prev[n]));
      } else {
        ++win.halvings;
        W /= 2;
        if (W < 1)
          throw ContractionError("picard: window underflow below dt at t=" +
                                 std::to_string(win.t_start));
      }
    }
    win.t_end = (start + W) * dt;
    result.windows.push_back(std::move(win));
    start += W;
  }

  // Restore the caller's curve order.
  for (FilamentCurrent& s : global) {
    CurveFamily out;
    out.curves.resize(xi0.family.size());
    out.weights = xi0.family.weights;
    for (int i = 0; i < xi0.family.size(); ++i) out.curves[i] = s.family.curves[inverse[i]];
    s.family = std::move(out);
  }
  result.path.states = std::move(global);
  return result;
}

// ---------------------------------------------------------------------------

ResidualReport weak_residual(const CurrentPath& path, const Kernel& k,
                             const TestFieldDictionary& dict, int threads) {
  validate_path(path);
  const int d = path.states.front().dim();
  if (k.dim() != d) throw ValidationError("weak_residual: kernel/path dim mismatch");
  const int S = path.steps();
  const int L = dict.count;

  // Per node: sources, B and DB at every sample of the node's current.
  std::vector<SourceCloud> sources(S + 1);
  std::vector<std::vector<double>> Bv(S + 1), DB(S + 1);
  for (int s = 0; s <= S; ++s) {
    sources[s] = build_sources(path.states[s].family);
    const int P = sources[s].total;
    Bv[s].resize(static_cast<std::size_t>(P) * d);
    DB[s].resize(static_cast<std::size_t>(P) * d * d);
    velocity_jacobian_batch(k, sources[s], sources[s].pos.data(), P, Bv[s].data(),
                            DB[s].data(), threads);
  }

  ResidualReport report;
  report.times.resize(S + 1);
  for (int s = 0; s <= S; ++s) report.times[s] = path.time(s);
  report.residual.assign(L, std::vector<double>(S + 1, 0.0));
  report.per_field_max.assign(L, 0.0);

  parallel_for(L, threads, [&](int kf) {
    const TestField& theta = dict.fields[kf];
    std::vector<double> pairing(S + 1), generator(S + 1);
    double tv[3], Jt[9], w1[3], w2[3];
    for (int s = 0; s <= S; ++s) {
      const SourceCloud& src = sources[s];
      double p = 0.0, g = 0.0;
      for (int m = 0; m < src.total; ++m) {
        const double* x = src.pos.data() + m * d;
        const double* wt = src.wtan.data() + m * d;
        theta.value(x, tv);
        theta.jacobian(x, Jt);
        p += dot(tv, wt, d);
        matvec(Jt, Bv[s].data() + m * d, w1, d);          // Dtheta . B
        matvec_t(DB[s].data() + m * d * d, tv, w2, d);    // DB^T theta
        for (int i = 0; i < d; ++i) w1[i] += w2[i];
        g += dot(w1, wt, d);
      }
      pairing[s] = p;
      generator[s] = g;
    }
    double integral = 0.0;
    report.residual[kf][0] = 0.0;
    for (int s = 1; s <= S; ++s) {
      integral += 0.5 * path.dt * (generator[s - 1] + generator[s]);
      report.residual[kf][s] = pairing[s] - pairing[0] - integral;
    }
    double fmax = 0.0;
    for (int s = 0; s <= S; ++s) fmax = std::max(fmax, std::abs(report.residual[kf][s]));
    report.per_field_max[kf] = fmax;
  });

  for (int kf = 0; kf < L; ++kf) report.max_abs = std::max(report.max_abs, report.per_field_max[kf]);
  return report;
}

double path_sup_distance(const CurrentPath& a, const CurrentPath& b) {
  if (a.states.size() != b.states.size())
    throw ValidationError("path_sup_distance: node count mismatch");
  double sup = 0.0;
  for (std::size_t s = 0; s < a.states.size(); ++s) {
    const CurveFamily& fa = a.states[s].family;
    const CurveFamily& fb = b.states[s].family;
    if (fa.size() != fb.size()) throw ValidationError("path_sup_distance: family mismatch");
    for (int j = 0; j < fa.size(); ++j) {
      const Curve& ca = fa.curves[j];
      const Curve& cb = fb.curves[j];
      const int d = ca.dim;
      for (int m = 0; m < ca.samples; ++m) {
        double dist2 = 0.0;
        for (int kk = 0; kk < d; ++kk) {
          const double diff = ca.pts[m * d + kk] - cb.pts[m * d + kk];
          dist2 += diff * diff;
        }
        sup = std::max(sup, std::sqrt(dist2));
      }
    }
  }
  return sup;
}

ConservedReport conserved_quantity_check(
    const GridCurrent& xi0, const TimeField& b,
    const std::function<std::unique_ptr<Diffeomorphism>(double)>& phi_at,
    const ConservedOptions& opt) {
  const int d = xi0.dim;
  if (b.dim() != d) throw ValidationError("conserved: field/grid dim mismatch");
  const int steps = checked_steps(opt.t_final, opt.dt, "conserved");
  const int nprobe = static_cast<int>(opt.probes.size()) / d;

  ConservedReport report;
  std::vector<double> baseline(static_cast<std::size_t>(nprobe) * d);
  for (int i = 0; i < nprobe; ++i)
    grid_interpolate(xi0, opt.probes.data() + i * d, baseline.data() + i * d);
  report.times.push_back(0.0);
  report.deviation.push_back(0.0);

  FlowState st = make_flow_state(opt.probes, d, true, 0.0);
  for (int step = 0; step < steps; ++step) {
    st = advect(st, b, opt.dt, 1, opt.threads);
    if ((step + 1) % opt.stride != 0 && step + 1 != steps) continue;
    const double t = st.time;
    const auto phi = phi_at(t);
    const GridPushforwardResult pf = pushforward_grid(xi0, *phi);
    report.out_of_box_max = std::max(report.out_of_box_max, pf.out_of_box_fraction);
    double dev = 0.0;
    for (int i = 0; i < nprobe; ++i) {
      const double* J = st.jac.data() + i * d * d;
      double Jinv[9], w[3], u[3];
      const double dj = invert(J, Jinv, d);
      if (std::abs(dj) < 1e-12) {
        ++report.singular;
        continue;
      }
      grid_interpolate(pf.current, st.pts.data() + i * d, w);
      matvec(Jinv, w, u, d);
      for (int kk = 0; kk < d; ++kk)
        dev = std::max(dev, std::abs(u[kk] - baseline[i * d + kk]));
    }
    report.times.push_back(t);
    report.deviation.push_back(dev);
    report.max_deviation = std::max(report.max_deviation, dev);
  }
  return report;
}

bool mass_growth_ok(const std::vector<double>& mass_upper, double dt, double c_b,
                    double slack) {
  if (mass_upper.empty()) return true;
  const double m0 = mass_upper.front();
  double running = m0;
  for (std::size_t s = 1; s < mass_upper.size(); ++s) {
    running = std::max(running, mass_upper[s]);
    const double log_env = std::log(slack) + std::log(std::max(m0, 1e-300)) +
                           c_b * (dt * s) * (running + 1.0);
    if (std::log(std::max(mass_upper[s], 1e-300)) > log_env) return false;
  }
  return true;
}

}  // namespace filaments
