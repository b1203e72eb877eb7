#include "filaments/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "filaments/errors.hpp"
#include "filaments/parallel.hpp"
#include "filaments/smallmat.hpp"

namespace filaments {

int RandomCurveLaw::uniform_count() const {
  switch (kind) {
    case Kind::FixedCircle:
      return 0;
    case Kind::RandomCircle:
      // center (dim), radius (1), phase (1), orientation (2, d=3 only)
      return dim + 2 + (dim == 3 ? 2 : 0);
    case Kind::RandomFourierLoop:
      // center (dim) + two uniforms per gaussian coefficient (a and b)
      return dim + 4 * fourier_order * dim;
  }
  return 0;
}

Curve curve_from_uniforms(const RandomCurveLaw& law, int samples, const double* u) {
  double center[3];
  const int d = law.dim;
  int at = 0;
  if (law.kind == RandomCurveLaw::Kind::FixedCircle) {
    for (int i = 0; i < d; ++i) center[i] = 0.5 * (law.center_lo[i] + law.center_hi[i]);
    if (d == 2) return make_circle(center, law.radius_min, samples);
    const double n[3] = {0, 0, 1};
    return make_circle3(center, law.radius_min, n, samples);
  }
  for (int i = 0; i < d; ++i)
    center[i] = law.center_lo[i] + (law.center_hi[i] - law.center_lo[i]) * u[at++];

  if (law.kind == RandomCurveLaw::Kind::RandomCircle) {
    const double radius = law.radius_min + (law.radius_max - law.radius_min) * u[at++];
    const double phase = u[at++];
    if (d == 2) {
      Curve c = make_circle(center, radius, samples);
      for (int m = 0; m < samples; ++m) {
        const double a = 2.0 * M_PI * (static_cast<double>(m) / samples + phase);
        c.pts[m * 2 + 0] = center[0] + radius * std::cos(a);
        c.pts[m * 2 + 1] = center[1] + radius * std::sin(a);
      }
      return c;
    }
    // Uniform direction on the sphere from two uniforms.
    const double z = 2.0 * u[at++] - 1.0;
    const double phi = 2.0 * M_PI * u[at++];
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double n[3] = {rho * std::cos(phi), rho * std::sin(phi), z};
    return make_circle3(center, radius, n, samples, phase);
  }

  // Random Fourier loop: gamma(s) = center + sum_m m^{-decay} amp
  //   (a_m cos(2 pi m s) + b_m sin(2 pi m s)), a, b standard normal vectors.
  const int order = law.fourier_order;
  std::vector<double> a(order * d), b(order * d);
  for (int m = 0; m < order; ++m)
    for (int k = 0; k < d; ++k) {
      a[m * d + k] = normal_from_uniforms(u[at], u[at + 1]);
      at += 2;
      b[m * d + k] = normal_from_uniforms(u[at], u[at + 1]);
      at += 2;
    }
  Curve c;
  c.dim = d;
  c.samples = samples;
  c.closed = true;
  c.pts.resize(samples * d);
  for (int s = 0; s < samples; ++s) {
    const double sigma = static_cast<double>(s) / samples;
    for (int k = 0; k < d; ++k) {
      double v = center[k];
      for (int m = 0; m < order; ++m) {
        const double scale = law.amplitude * std::pow(m + 1.0, -law.fourier_decay);
        const double arg = 2.0 * M_PI * (m + 1.0) * sigma;
        v += scale * (a[m * d + k] * std::cos(arg) + b[m * d + k] * std::sin(arg));
      }
      c.pts[s * d + k] = v;
    }
  }
  // Enforce the arclength cap by shrinking about the center; keeps the
  // uniform draw count fixed (no rejection) and the sample C^1.
  const double len = arclength(c);
  if (len > law.arclength_cap) {
    const double f = law.arclength_cap / len;
    for (int s = 0; s < samples; ++s)
      for (int k = 0; k < d; ++k)
        c.pts[s * d + k] = center[k] + f * (c.pts[s * d + k] - center[k]);
  }
  return c;
}

CurveFamily sample_family(const RandomCurveLaw& law, int n, int samples, WeightMode mode,
                          Rng& rng) {
  if (n < 1) throw ValidationError("sample_family: n must be >= 1");
  CurveFamily f;
  std::vector<double> u(std::max(1, law.uniform_count()));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < law.uniform_count(); ++i) u[i] = rng.uniform01();
    f.curves.push_back(curve_from_uniforms(law, samples, u.data()));
    f.weights.push_back(mode == WeightMode::EqualOneOverN ? 1.0 / n : 1.0);
  }
  return f;
}

CurveFamily sample_family_quasi(const RandomCurveLaw& law, int n, int samples,
                                WeightMode mode) {
  if (n < 1) throw ValidationError("sample_family_quasi: n must be >= 1");
  const int p = std::max(1, law.uniform_count());
  if (p > 16)
    throw ValidationError("sample_family_quasi: law has too many parameters for the "
                          "Kronecker sequence; use i.i.d. sampling");
  KroneckerSequence seq(p);
  CurveFamily f;
  std::vector<double> u(p);
  for (int j = 0; j < n; ++j) {
    seq.point(static_cast<std::uint64_t>(j), u.data());
    f.curves.push_back(curve_from_uniforms(law, samples, u.data()));
    f.weights.push_back(mode == WeightMode::EqualOneOverN ? 1.0 / n : 1.0);
  }
  return f;
}

// ---------------------------------------------------------------------------

std::pair<double, double> loglog_slope(const std::vector<int>& x,
                                       const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  if (n < 2) return {0.0, 0.0};
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double lx = std::log(static_cast<double>(x[i]));
    const double ly = std::log(std::max(y[i], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;
  double rss = 0;
  for (int i = 0; i < n; ++i) {
    const double lx = std::log(static_cast<double>(x[i]));
    const double ly = std::log(std::max(y[i], 1e-300));
    const double r = ly - (intercept + slope * lx);
    rss += r * r;
  }
  return {slope, std::sqrt(rss / n)};
}

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double se_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / (static_cast<double>(v.size()) - 1.0) /
                   static_cast<double>(v.size()));
}

// Dictionary pair values of every path node: [node][field].
std::vector<std::vector<double>> path_pairings(const CurrentPath& path,
                                               const TestFieldDictionary& dict,
                                               int threads) {
  const int S = path.steps();
  std::vector<std::vector<double>> out(S + 1, std::vector<double>(dict.count, 0.0));
  parallel_for((S + 1) * dict.count, threads, [&](int task) {
    const int s = task / dict.count;
    const int k = task % dict.count;
    out[s][k] = pair(path.states[s], dict.fields[k]);
  });
  return out;
}

double sup_dict_distance(const CurrentPath& a, const std::vector<std::vector<double>>& ref,
                         const TestFieldDictionary& dict) {
  double sup = 0.0;
  for (std::size_t s = 0; s < a.states.size(); ++s)
    for (int k = 0; k < dict.count; ++k)
      sup = std::max(sup, std::abs(pair(a.states[s], dict.fields[k]) - ref[s][k]));
  return sup;
}

}  // namespace

MeanfieldReport meanfield_study(const RandomCurveLaw& law, const Kernel& k,
                                const TestFieldDictionary& dict, const StudyConfig& cfg,
                                const MeanfieldConfig& mf) {
  if (mf.ns.empty()) throw ValidationError("meanfield: ns must not be empty");
  for (std::size_t i = 1; i < mf.ns.size(); ++i)
    if (mf.ns[i] <= mf.ns[i - 1]) throw ValidationError("meanfield: ns must be increasing");
  const int max_n = mf.ns.back();
  if (mf.n_ref < max_n) throw ValidationError("meanfield: n_ref must be >= max(ns)");

  // Reference run standing in for the mean-field limit.
  const CurveFamily ref_family =
      sample_family_quasi(law, mf.n_ref, cfg.samples_m, WeightMode::EqualOneOverN);
  SimulateOptions sim;
  sim.t_final = cfg.t_final;
  sim.dt = cfg.dt;
  sim.threads = cfg.threads;
  const SimulateResult ref = simulate_filaments(ref_family, k, sim);
  const auto ref_pairs = path_pairings(ref.path, dict, cfg.threads);
  const CurrentPathField ref_field(k, ref.path);

  MeanfieldReport report;
  report.ns = mf.ns;
  const int nn = static_cast<int>(mf.ns.size());
  report.e1_trials.assign(nn, std::vector<double>(mf.trials, 0.0));
  report.e2_trials.assign(nn, std::vector<double>(mf.trials, 0.0));

  if (mf.ref_check) {
    const CurveFamily half =
        sample_family_quasi(law, mf.n_ref / 2, cfg.samples_m, WeightMode::EqualOneOverN);
    const SimulateResult ref_half = simulate_filaments(half, k, sim);
    report.ref_error = sup_dict_distance(ref_half.path, ref_pairs, dict);
  }

  const int steps = static_cast<int>(std::llround(cfg.t_final / cfg.dt));
  parallel_for(mf.trials, cfg.threads, [&](int trial) {
    Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(trial));
    const CurveFamily master =
        sample_family(law, max_n, cfg.samples_m, WeightMode::Unit, rng);

    // Mean-field filaments driven by the reference field; shared by all N
    // through the nested-prefix (common random numbers) design.
    const int tagged = std::min(mf.tagged, max_n);
    std::vector<CurrentPath> mean_field(tagged);
    for (int i = 0; i < tagged; ++i) {
      std::vector<double> x0 = master.curves[i].pts;
      CurrentPath mp;
      mp.t0 = 0.0;
      mp.dt = cfg.dt;
      CurveFamily single;
      single.curves.push_back(master.curves[i]);
      single.weights.push_back(1.0);
      mp.states.assign(steps + 1, FilamentCurrent{single});
      FlowState st = make_flow_state(x0, law.dim, false, 0.0);
      advect(st, ref_field, cfg.dt, steps, 1, nullptr, [&](int node, const FlowState& s) {
        mp.states[node].family.curves[0].pts = s.pts;
      });
      mean_field[i] = std::move(mp);
    }

    for (int ni = 0; ni < nn; ++ni) {
      const int n = mf.ns[ni];
      CurveFamily fam;
      fam.curves.assign(master.curves.begin(), master.curves.begin() + n);
      fam.weights.assign(n, 1.0 / n);
      SimulateOptions tsim = sim;
      tsim.threads = 1;  // trials are the parallel axis
      const SimulateResult run = simulate_filaments(fam, k, tsim);

      report.e2_trials[ni][trial] = sup_dict_distance(run.path, ref_pairs, dict);

      double e1 = 0.0;
      const int tcount = std::min(tagged, n);
      for (int s = 0; s <= steps; ++s)
        for (int i = 0; i < tcount; ++i) {
          const Curve& ca = run.path.states[s].family.curves[i];
          const Curve& cb = mean_field[i].states[s].family.curves[0];
          for (int m = 0; m < ca.samples; ++m) {
            double d2 = 0.0;
            for (int kk = 0; kk < ca.dim; ++kk) {
              const double diff = ca.pts[m * ca.dim + kk] - cb.pts[m * ca.dim + kk];
              d2 += diff * diff;
            }
            e1 = std::max(e1, std::sqrt(d2));
          }
        }
      report.e1_trials[ni][trial] = e1;
    }
  });

  report.e1_mean.resize(nn);
  report.e1_se.resize(nn);
  report.e2_mean.resize(nn);
  report.e2_se.resize(nn);
  for (int ni = 0; ni < nn; ++ni) {
    report.e1_mean[ni] = mean_of(report.e1_trials[ni]);
    report.e1_se[ni] = se_of(report.e1_trials[ni]);
    report.e2_mean[ni] = mean_of(report.e2_trials[ni]);
    report.e2_se[ni] = se_of(report.e2_trials[ni]);
  }
  const auto fit = loglog_slope(report.ns, report.e2_mean);
  report.slope = fit.first;
  report.slope_residual = fit.second;
  double min_e2 = report.e2_mean[0];
  for (double v : report.e2_mean) min_e2 = std::min(min_e2, v);
  report.ref_error_ratio = min_e2 > 0 ? report.ref_error / min_e2 : 0.0;
  for (int ni = 0; ni + 1 < nn; ++ni) {
    const double allowance =
        2.0 * std::sqrt(report.e1_se[ni] * report.e1_se[ni] +
                        report.e1_se[ni + 1] * report.e1_se[ni + 1]);
    if (report.e1_mean[ni + 1] > report.e1_mean[ni] + allowance)
      report.e1_monotone_2se = false;
  }
  return report;
}

// ---------------------------------------------------------------------------

ContdepReport contdep_study(const CurveFamily& base, const Kernel& k,
                            const TestFieldDictionary& dict, const StudyConfig& cfg,
                            const ContdepConfig& cd) {
  validate_family(base);
  if (cd.scales.empty()) throw ValidationError("contdep: scales must not be empty");
  const int d = base.dim();
  double dir[3] = {cd.direction[0], cd.direction[1], cd.direction[2]};
  const double dn = norm2(dir, d);
  if (!(dn > 0)) throw ValidationError("contdep: zero perturbation direction");
  for (int i = 0; i < d; ++i) dir[i] /= dn;

  SimulateOptions sim;
  sim.t_final = cfg.t_final;
  sim.dt = cfg.dt;
  sim.threads = cfg.threads;
  const SimulateResult base_run = simulate_filaments(base, k, sim);
  const auto base_pairs = path_pairings(base_run.path, dict, cfg.threads);

  ContdepReport report;
  report.scales = cd.scales;
  const int S = base_run.path.steps();
  for (double scale : cd.scales) {
    CurveFamily pert = base;
    for (Curve& c : pert.curves)
      for (int m = 0; m < c.samples; ++m)
        for (int kk = 0; kk < d; ++kk) c.pts[m * d + kk] += scale * dir[kk];
    const SimulateResult run = simulate_filaments(pert, k, sim);
    std::vector<double> per_field;
    const double d0 =
        dict_metric(run.path.states[0], base_run.path.states[0], dict, &per_field);
    if (report.per_field_initial.empty()) report.per_field_initial = per_field;
    double sup = 0.0;
    for (int s = 0; s <= S; ++s)
      for (int kk = 0; kk < dict.count; ++kk)
        sup = std::max(sup, std::abs(pair(run.path.states[s], dict.fields[kk]) -
                                     base_pairs[s][kk]));
    report.initial_distance.push_back(d0);
    report.sup_distance.push_back(sup);
    const bool skip = d0 < 1e-12;
    report.skipped.push_back(skip);
    report.ratio.push_back(skip ? 0.0 : sup / d0);
  }
  double rmin = 1e300, rmax = 0.0;
  for (std::size_t i = 0; i < report.ratio.size(); ++i) {
    if (report.skipped[i]) continue;
    rmin = std::min(rmin, report.ratio[i]);
    rmax = std::max(rmax, report.ratio[i]);
  }
  report.max_ratio = rmax;
  report.ratio_spread = (rmin > 0 && rmin < 1e300) ? rmax / rmin : 0.0;
  return report;
}

// ---------------------------------------------------------------------------

namespace {

// Per-trial, per-time pairing statistics of one family state.
struct ChaosStats {
  double u_tuple = 0.0;   // mean over disjoint r-tuples (tagged estimator)
  double u_off = 0.0;     // mean over ordered pairs i != j (r = 2)
  double u_diag = 0.0;    // mean_i X_i Y_i
  double prod_n = 0.0;    // prod of empirical means = xi^N(theta_1) xi^N(theta_2)
  double abs_xy = 0.0;    // mean |X_{2k} Y_{2k+1}| over disjoint pairs
  double x_sq = 0.0;      // mean X_i^2
};

ChaosStats chaos_stats(const FilamentCurrent& state, const TestFieldDictionary& dict,
                       const std::vector<int>& theta_idx, int r) {
  const CurveFamily& fam = state.family;
  const int n = fam.size();
  std::vector<std::vector<double>> vals(theta_idx.size(), std::vector<double>(n));
  for (std::size_t t = 0; t < theta_idx.size(); ++t)
    for (int i = 0; i < n; ++i)
      vals[t][i] = pair(fam.curves[i], dict.fields[theta_idx[t]]);

  ChaosStats st;
  const int tuples = n / r;
  double acc = 0.0;
  for (int k = 0; k < tuples; ++k) {
    double p = 1.0;
    for (int t = 0; t < r; ++t) p *= vals[t][k * r + t];
    acc += p;
  }
  st.u_tuple = tuples > 0 ? acc / tuples : 0.0;

  const std::vector<double>& X = vals[0];
  const std::vector<double>& Y = vals.size() > 1 ? vals[1] : vals[0];
  double sx = 0, sy = 0, sdiag = 0, sxsq = 0;
  for (int i = 0; i < n; ++i) {
    sx += X[i];
    sy += Y[i];
    sdiag += X[i] * Y[i];
    sxsq += X[i] * X[i];
  }
  st.prod_n = (sx / n) * (sy / n);
  st.u_diag = sdiag / n;
  st.u_off = n > 1 ? (sx * sy - sdiag) / (static_cast<double>(n) * (n - 1)) : 0.0;
  st.x_sq = sxsq / n;
  double sabs = 0.0;
  const int pairs = n / 2;
  for (int k = 0; k < pairs; ++k) sabs += std::abs(X[2 * k] * Y[2 * k + 1]);
  st.abs_xy = pairs > 0 ? sabs / pairs : 0.0;
  return st;
}

}  // namespace

ChaosReport chaos_study(const RandomCurveLaw& law, const Kernel& k,
                        const TestFieldDictionary& dict, const StudyConfig& cfg,
                        const ChaosConfig& ch) {
  if (ch.ns.empty()) throw ValidationError("chaos: ns must not be empty");
  if (ch.r < 1) throw ValidationError("chaos: r must be >= 1");
  if (ch.trials < 30) throw ValidationError("chaos: trials must be >= 30");
  if (ch.theta1 >= dict.count || ch.theta2 >= dict.count)
    throw ValidationError("chaos: test field index out of range");
  const int max_n = ch.ns.back();

  std::vector<int> theta_idx;
  for (int t = 0; t < ch.r; ++t)
    theta_idx.push_back(t % 2 == 0 ? ch.theta1 : ch.theta2);

  SimulateOptions sim;
  sim.t_final = cfg.t_final;
  sim.dt = cfg.dt;
  sim.threads = cfg.threads;
  const CurveFamily ref_family =
      sample_family_quasi(law, ch.n_ref, cfg.samples_m, WeightMode::EqualOneOverN);
  const SimulateResult ref = simulate_filaments(ref_family, k, sim);
  double ref_prod_t = 1.0, ref_prod_0 = 1.0;
  for (int idx : theta_idx) {
    ref_prod_t *= pair(ref.path.states.back(), dict.fields[idx]);
    ref_prod_0 *= pair(ref.path.states.front(), dict.fields[idx]);
  }

  ChaosReport report;
  report.ns = ch.ns;
  report.r = ch.r;
  report.ref_product_t = ref_prod_t;
  report.ref_product_0 = ref_prod_0;
  const int nn = static_cast<int>(ch.ns.size());

  // stats[ni][trial] at t = 0 and t = T
  std::vector<std::vector<ChaosStats>> st0(nn, std::vector<ChaosStats>(ch.trials));
  std::vector<std::vector<ChaosStats>> stT(nn, std::vector<ChaosStats>(ch.trials));

  parallel_for(ch.trials, cfg.threads, [&](int trial) {
    Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(trial));
    const CurveFamily master =
        sample_family(law, max_n, cfg.samples_m, WeightMode::Unit, rng);
    for (int ni = 0; ni < nn; ++ni) {
      const int n = ch.ns[ni];
      CurveFamily fam;
      fam.curves.assign(master.curves.begin(), master.curves.begin() + n);
      fam.weights.assign(n, 1.0 / n);  // the chaos theorem requires alpha_j = 1/N
      SimulateOptions tsim = sim;
      tsim.threads = 1;
      const SimulateResult run = simulate_filaments(fam, k, tsim);
      st0[ni][trial] = chaos_stats(run.path.states.front(), dict, theta_idx, ch.r);
      stT[ni][trial] = chaos_stats(run.path.states.back(), dict, theta_idx, ch.r);
    }
  });

  report.gap_trials.assign(nn, std::vector<double>(ch.trials, 0.0));
  for (int ni = 0; ni < nn; ++ni) {
    const int n = ch.ns[ni];
    std::vector<double> raw(ch.trials), cv(ch.trials), d2(ch.trials), bound(ch.trials);
    std::vector<double> direct(ch.trials), ident(ch.trials), tc(ch.trials), tf(ch.trials);
    for (int t = 0; t < ch.trials; ++t) {
      const ChaosStats& a = stT[ni][t];
      const ChaosStats& z = st0[ni][t];
      const double u_t = ch.r == 2 ? a.u_off : a.u_tuple;
      const double u_0 = ch.r == 2 ? z.u_off : z.u_tuple;
      raw[t] = u_t;
      cv[t] = u_t - u_0;
      direct[t] = a.u_tuple - a.prod_n;
      ident[t] = (a.u_off - a.u_diag) / n;
      d2[t] = direct[t] - ident[t];
      bound[t] = (a.abs_xy + a.x_sq) / n;
      tc[t] = a.prod_n;
      tf[t] = u_t - a.prod_n;
      report.gap_trials[ni][t] = cv[t];
    }
    report.gap_raw.push_back(std::abs(mean_of(raw) - ref_prod_t));
    report.gap_raw_se.push_back(se_of(raw));
    report.gap.push_back(std::abs(mean_of(cv) - (ref_prod_t - ref_prod_0)));
    report.gap_se.push_back(se_of(cv));
    report.term_currents.push_back(std::abs(mean_of(tc) - ref_prod_t));
    report.term_filaments.push_back(std::abs(mean_of(tf)));
    report.exch_direct.push_back(mean_of(direct));
    report.exch_identity.push_back(mean_of(ident));
    report.exch_diff.push_back(mean_of(d2));
    report.exch_diff_se.push_back(se_of(d2));
    report.exch_bound.push_back(mean_of(bound));
    report.exch_match_2se.push_back(std::abs(mean_of(d2)) <= 2.0 * se_of(d2) + 1e-15);
  }
  report.strictly_decreasing = true;
  for (int ni = 0; ni + 1 < nn; ++ni)
    if (!(report.gap[ni + 1] < report.gap[ni])) report.strictly_decreasing = false;
  return report;
}

}  // namespace filaments
