#pragma once

// The three theorem-level studies: mean-field convergence, continuous
// dependence on initial data, and propagation of chaos. All randomness is
// seeded; independent (trial) runs use counter-split RNG streams and are
// aggregated by a deterministic ordered fold, so every study re-run with the
// same config and seed reproduces its report bit for bit.

#include <cstdint>
#include <vector>

#include "filaments/currents.hpp"
#include "filaments/rng.hpp"
#include "filaments/solver.hpp"

namespace filaments {

struct RandomCurveLaw {
  enum class Kind { FixedCircle, RandomCircle, RandomFourierLoop };
  Kind kind = Kind::RandomCircle;
  int dim = 2;
  double center_lo[3] = {0, 0, 0};
  double center_hi[3] = {0, 0, 0};
  double radius_min = 1.0;
  double radius_max = 1.0;
  int fourier_order = 8;
  double fourier_decay = 3.0;   // coefficient decay m^{-decay}; >= 3 keeps C^1 margins
  double amplitude = 0.25;
  double arclength_cap = 16.0;  // samples above the cap are rescaled onto it

  // Fixed number of uniforms one curve consumes; quasi-random sampling needs
  // the draw count to be data-independent.
  int uniform_count() const;
};

enum class WeightMode { EqualOneOverN, Unit };

Curve curve_from_uniforms(const RandomCurveLaw& law, int samples, const double* u);

// N i.i.d. samples from the law; bit-reproducible from the rng state.
CurveFamily sample_family(const RandomCurveLaw& law, int n, int samples, WeightMode mode,
                          Rng& rng);

// N quasi-random (Kronecker sequence) samples; stands in for the law's mean
// with error ~ 1/N instead of 1/sqrt(N). Used for the reference families.
CurveFamily sample_family_quasi(const RandomCurveLaw& law, int n, int samples,
                                WeightMode mode);

struct StudyConfig {
  int samples_m = 16;
  double t_final = 0.5;
  double dt = 0.02;
  int threads = 1;
  std::uint64_t seed = 12345;
};

// ---------------------------------------------------------------------------

struct MeanfieldConfig {
  std::vector<int> ns;
  int n_ref = 1024;
  int trials = 30;
  int tagged = 2;       // filaments compared against their mean-field limit
  bool ref_check = true;
};

struct MeanfieldReport {
  std::vector<int> ns;
  std::vector<std::vector<double>> e1_trials;  // [ni][trial]
  std::vector<std::vector<double>> e2_trials;
  std::vector<double> e1_mean, e1_se, e2_mean, e2_se;
  double slope = 0.0;           // log-log slope of e2 vs N
  double slope_residual = 0.0;  // rms residual of the fit
  double ref_error = 0.0;       // sup_t d_D(xi^ref, xi^{ref/2})
  double ref_error_ratio = 0.0; // ref_error / min_N e2
  bool e1_monotone_2se = true;
};

MeanfieldReport meanfield_study(const RandomCurveLaw& law, const Kernel& k,
                                const TestFieldDictionary& dict, const StudyConfig& cfg,
                                const MeanfieldConfig& mf);

// ---------------------------------------------------------------------------

struct ContdepConfig {
  std::vector<double> scales;       // translation sizes
  double direction[3] = {1, 0, 0};  // unit perturbation direction
};

struct ContdepReport {
  std::vector<double> scales;
  std::vector<double> initial_distance;  // d_D(xi0^n, xi0)
  std::vector<double> sup_distance;      // sup_t d_D(xi_t^n, xi_t)
  std::vector<double> ratio;             // sup / initial (0 when skipped)
  std::vector<bool> skipped;             // initial distance below guard
  double max_ratio = 0.0;
  double ratio_spread = 0.0;  // max ratio / min ratio over non-skipped scales
  std::vector<double> per_field_initial;  // per-field d_D values, first scale
};

ContdepReport contdep_study(const CurveFamily& base, const Kernel& k,
                            const TestFieldDictionary& dict, const StudyConfig& cfg,
                            const ContdepConfig& cd);

// ---------------------------------------------------------------------------

struct ChaosConfig {
  std::vector<int> ns;
  int trials = 100;
  int r = 2;       // tensor order; the decomposition is reported for r = 2
  int n_ref = 512;
  int theta1 = 0;  // dictionary indices of the test fields
  int theta2 = 1;
};

struct ChaosReport {
  std::vector<int> ns;
  int r = 2;
  double ref_product_t = 0.0;  // prod_i xi^ref_T(theta_i)
  double ref_product_0 = 0.0;
  // Factorization gap |E[(gamma^1 x ... x gamma^r)(theta)] - prod xi(theta_i)|
  // at the final time. "gap" subtracts the t=0 estimator as a control variate
  // (its expectation is zero for i.i.d. initial data); "gap_raw" does not.
  std::vector<double> gap, gap_se, gap_raw, gap_raw_se;
  // Proof decomposition at the final time (r = 2).
  std::vector<double> term_currents, term_filaments;
  // Exchangeability 1/N term: direct tagged-pair measurement vs the explicit
  // (1/N)(E[g1(t1) g2(t2)] - E[g1(t1) g1(t2)]) identity, paired per trial.
  std::vector<double> exch_direct, exch_identity, exch_diff, exch_diff_se;
  std::vector<double> exch_bound;  // (1/N)(E|g1(t1) g2(t2)| + E[g1(t1)^2])
  std::vector<bool> exch_match_2se;
  bool strictly_decreasing = false;
  std::vector<std::vector<double>> gap_trials;  // [ni][trial], cv estimator
};

ChaosReport chaos_study(const RandomCurveLaw& law, const Kernel& k,
                        const TestFieldDictionary& dict, const StudyConfig& cfg,
                        const ChaosConfig& ch);

// Least-squares slope of log(y) against log(x); returns {slope, rms residual}.
std::pair<double, double> loglog_slope(const std::vector<int>& x,
                                       const std::vector<double>& y);

}  // namespace filaments
