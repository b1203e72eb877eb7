#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "filaments/errors.hpp"
#include "filaments/experiments.hpp"
#include "test_support.hpp"

using namespace filaments;
using namespace testsupport;

namespace {

RandomCurveLaw circle_law_2d() {
  RandomCurveLaw law;
  law.kind = RandomCurveLaw::Kind::RandomCircle;
  law.dim = 2;
  law.center_lo[0] = law.center_lo[1] = -0.4;
  law.center_hi[0] = law.center_hi[1] = 0.4;
  law.radius_min = 0.6;
  law.radius_max = 1.0;
  return law;
}

RandomCurveLaw fixed_circle_law() {
  RandomCurveLaw law;
  law.kind = RandomCurveLaw::Kind::FixedCircle;
  law.dim = 2;
  law.center_lo[0] = law.center_lo[1] = 0.0;
  law.center_hi[0] = law.center_hi[1] = 0.0;
  law.radius_min = 0.8;
  return law;
}

RandomCurveLaw fourier_law() {
  RandomCurveLaw law;
  law.kind = RandomCurveLaw::Kind::RandomFourierLoop;
  law.dim = 2;
  law.center_lo[0] = law.center_lo[1] = -0.3;
  law.center_hi[0] = law.center_hi[1] = 0.3;
  law.fourier_order = 8;
  law.fourier_decay = 3.0;
  law.amplitude = 0.6;
  law.arclength_cap = 5.0;
  return law;
}

}  // namespace

TEST_CASE("sampling is reproducible and respects the arclength cap") {
  const RandomCurveLaw law = fourier_law();
  Rng a(123), b(123);
  const CurveFamily fa = sample_family(law, 8, 16, WeightMode::EqualOneOverN, a);
  const CurveFamily fb = sample_family(law, 8, 16, WeightMode::EqualOneOverN, b);
  for (int j = 0; j < 8; ++j) CHECK(fa.curves[j].pts == fb.curves[j].pts);
  CHECK(fa.weights == fb.weights);

  Rng c(77);
  const CurveFamily big = sample_family(law, 1000, 16, WeightMode::Unit, c);
  int capped = 0;
  for (const Curve& cv : big.curves) {
    const double len = arclength(cv);
    CHECK(len <= law.arclength_cap * (1.0 + 1e-12));
    if (len > 0.999 * law.arclength_cap) ++capped;
  }
  // The cap must actually engage for this amplitude, otherwise it is untested.
  CHECK(capped >= 1);
}

TEST_CASE("degenerate law produces identical curves") {
  Rng rng(9);
  const CurveFamily f = sample_family(fixed_circle_law(), 5, 16, WeightMode::EqualOneOverN, rng);
  for (int j = 1; j < 5; ++j) CHECK(f.curves[j].pts == f.curves[0].pts);
  CHECK(f.weights[0] == doctest::Approx(0.2));
}

TEST_CASE("quasi-random families are deterministic and spread") {
  const RandomCurveLaw law = circle_law_2d();
  const CurveFamily a = sample_family_quasi(law, 32, 16, WeightMode::EqualOneOverN);
  const CurveFamily b = sample_family_quasi(law, 32, 16, WeightMode::EqualOneOverN);
  for (int j = 0; j < 32; ++j) CHECK(a.curves[j].pts == b.curves[j].pts);
  // distinct samples (the sequence does not collapse)
  CHECK(a.curves[0].pts != a.curves[1].pts);
}

TEST_CASE("meanfield study on a degenerate law collapses") {
  StudyConfig cfg;
  cfg.samples_m = 16;
  cfg.t_final = 0.1;
  cfg.dt = 5e-4;
  cfg.threads = 2;
  cfg.seed = 321;
  MeanfieldConfig mf;
  mf.ns = {2, 4};
  mf.n_ref = 4;
  mf.trials = 2;
  mf.tagged = 2;
  mf.ref_check = false;
  const auto dict = make_dictionary(2, 16, 6, 2.0, 4.0, 55);

  SUBCASE("zero kernel freezes everything exactly") {
    const auto k = make_zero_kernel(2);
    const MeanfieldReport rep = meanfield_study(fixed_circle_law(), *k, dict, cfg, mf);
    for (double v : rep.e1_mean) CHECK(v == 0.0);
    for (double v : rep.e2_mean) CHECK(v == 0.0);
  }

  SUBCASE("identical-copy collapse under an active kernel") {
    const auto k = make_gaussian_rotor(1.0, 2);
    const MeanfieldReport rep = meanfield_study(fixed_circle_law(), *k, dict, cfg, mf);
    for (double v : rep.e1_mean) CHECK(v <= 1e-8);
    for (double v : rep.e2_mean) CHECK(v <= 1e-8);
  }
}

TEST_CASE("meanfield study is reproducible from its seed") {
  StudyConfig cfg;
  cfg.samples_m = 12;
  cfg.t_final = 0.1;
  cfg.dt = 0.01;
  cfg.threads = 2;
  cfg.seed = 2024;
  MeanfieldConfig mf;
  mf.ns = {4, 8};
  mf.n_ref = 16;
  mf.trials = 3;
  mf.ref_check = true;
  const auto dict = make_dictionary(2, 8, 6, 2.0, 4.0, 55);
  const auto k = make_gaussian_rotor(0.8, 2);
  const MeanfieldReport a = meanfield_study(circle_law_2d(), *k, dict, cfg, mf);
  const MeanfieldReport b = meanfield_study(circle_law_2d(), *k, dict, cfg, mf);
  CHECK(a.e1_mean == b.e1_mean);
  CHECK(a.e2_mean == b.e2_mean);
  CHECK(a.slope == b.slope);
  CHECK(a.ref_error == b.ref_error);
  CHECK(a.e2_mean[0] > 0.0);
}

TEST_CASE("contdep study") {
  StudyConfig cfg;
  cfg.samples_m = 16;
  cfg.t_final = 0.1;
  cfg.dt = 0.01;
  cfg.threads = 2;
  const auto dict = make_dictionary(2, 16, 6, 2.0, 4.0, 31);
  Rng rng(3);
  const CurveFamily base = sample_family(circle_law_2d(), 3, 16, WeightMode::EqualOneOverN, rng);

  SUBCASE("zero kernel gives ratio exactly one") {
    const auto k = make_zero_kernel(2);
    ContdepConfig cd;
    cd.scales = {0.1, 0.01};
    const ContdepReport rep = contdep_study(base, *k, dict, cfg, cd);
    for (std::size_t i = 0; i < rep.scales.size(); ++i) {
      CHECK_FALSE(rep.skipped[i]);
      CHECK(rep.ratio[i] == 1.0);
    }
  }

  SUBCASE("zero perturbation is skipped by the guard") {
    const auto k = make_gaussian_rotor(0.8, 2);
    ContdepConfig cd;
    cd.scales = {0.0, 0.1};
    const ContdepReport rep = contdep_study(base, *k, dict, cfg, cd);
    CHECK(rep.skipped[0]);
    CHECK(rep.sup_distance[0] == 0.0);
    CHECK_FALSE(rep.skipped[1]);
  }

  SUBCASE("translation ratios stay bounded across scales") {
    const auto k = make_gaussian_rotor(0.8, 2);
    ContdepConfig cd;
    cd.scales = {1e-1, 1e-2, 1e-3};
    const ContdepReport rep = contdep_study(base, *k, dict, cfg, cd);
    CHECK(rep.max_ratio > 0.0);
    CHECK(rep.ratio_spread <= 3.0);
  }
}

TEST_CASE("chaos study") {
  StudyConfig cfg;
  cfg.samples_m = 12;
  cfg.t_final = 0.1;
  cfg.dt = 0.01;
  cfg.threads = 2;
  cfg.seed = 888;
  const auto dict = make_dictionary(2, 8, 6, 2.0, 4.0, 41);

  SUBCASE("degenerate law gives a vanishing gap") {
    const auto k = make_gaussian_rotor(1.0, 2);
    ChaosConfig ch;
    ch.ns = {2, 4, 8};
    ch.trials = 30;
    ch.n_ref = 8;
    const ChaosReport rep = chaos_study(fixed_circle_law(), *k, dict, cfg, ch);
    for (double g : rep.gap) CHECK(g <= 1e-10);
    for (double g : rep.gap_raw) CHECK(g <= 1e-10);
  }

  SUBCASE("r = 1 reduces to the mean-field pairing error") {
    const auto k = make_gaussian_rotor(0.8, 2);
    ChaosConfig ch;
    ch.ns = {4, 8};
    ch.trials = 30;
    ch.n_ref = 32;
    ch.r = 1;
    ch.theta1 = 2;
    const ChaosReport rep = chaos_study(circle_law_2d(), *k, dict, cfg, ch);
    // Independent re-computation of |E[xi^N(theta)] - xi^ref(theta)|.
    SimulateOptions sim;
    sim.t_final = cfg.t_final;
    sim.dt = cfg.dt;
    sim.threads = cfg.threads;
    const CurveFamily ref =
        sample_family_quasi(circle_law_2d(), ch.n_ref, cfg.samples_m, WeightMode::EqualOneOverN);
    const double ref_pair =
        pair(simulate_filaments(ref, *k, sim).path.states.back(), dict.fields[2]);
    for (std::size_t ni = 0; ni < rep.ns.size(); ++ni) {
      double acc = 0.0;
      for (int t = 0; t < ch.trials; ++t) {
        Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(t));
        CurveFamily master =
            sample_family(circle_law_2d(), 8, cfg.samples_m, WeightMode::Unit, rng);
        CurveFamily fam;
        fam.curves.assign(master.curves.begin(), master.curves.begin() + rep.ns[ni]);
        fam.weights.assign(rep.ns[ni], 1.0 / rep.ns[ni]);
        SimulateOptions one = sim;
        one.threads = 1;
        acc += pair(simulate_filaments(fam, *k, one).path.states.back(), dict.fields[2]);
      }
      CHECK(rep.gap_raw[ni] ==
            doctest::Approx(std::abs(acc / ch.trials - ref_pair)).epsilon(1e-10));
    }
  }

  SUBCASE("reports are reproducible from the seed") {
    const auto k = make_gaussian_rotor(0.8, 2);
    ChaosConfig ch;
    ch.ns = {4, 8};
    ch.trials = 30;
    ch.n_ref = 16;
    const ChaosReport a = chaos_study(circle_law_2d(), *k, dict, cfg, ch);
    const ChaosReport b = chaos_study(circle_law_2d(), *k, dict, cfg, ch);
    CHECK(a.gap == b.gap);
    CHECK(a.exch_diff == b.exch_diff);
  }
}

TEST_CASE("pairings along a run stay inside the mass-growth envelope") {
  // |gamma_t(theta)| <= arclength(gamma_t) ||theta||_inf with ||theta|| <= 1,
  // and the arclength itself obeys the Gronwall envelope.
  const auto k = make_gaussian_rotor(0.8, 2);
  const auto dict = make_dictionary(2, 8, 6, 2.0, 4.0, 61);
  Rng rng(14);
  const CurveFamily fam = sample_family(circle_law_2d(), 4, 16, WeightMode::EqualOneOverN, rng);
  SimulateOptions sim;
  sim.t_final = 0.2;
  sim.dt = 0.01;
  const SimulateResult run = simulate_filaments(fam, *k, sim);
  CHECK(mass_growth_ok(run.mass_upper, sim.dt, k->c_b()));
  for (std::size_t s = 0; s < run.path.states.size(); ++s)
    for (int j = 0; j < fam.size(); ++j) {
      const Curve& c = run.path.states[s].family.curves[j];
      const double len = arclength(c);
      for (int kf = 0; kf < dict.count; ++kf)
        CHECK(std::abs(pair(c, dict.fields[kf])) <= len * (1.0 + 1e-12));
    }
}

TEST_CASE("study validation") {
  StudyConfig cfg;
  const auto dict = make_dictionary(2, 4, 4, 2.0, 4.0, 1);
  const auto k = make_zero_kernel(2);
  MeanfieldConfig mf;
  mf.ns = {8, 4};
  CHECK_THROWS_AS(meanfield_study(circle_law_2d(), *k, dict, cfg, mf), ValidationError);
  ChaosConfig ch;
  ch.ns = {4};
  ch.trials = 10;  // below the minimum
  CHECK_THROWS_AS(chaos_study(circle_law_2d(), *k, dict, cfg, ch), ValidationError);
}
