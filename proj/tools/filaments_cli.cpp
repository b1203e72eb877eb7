// Command-line entry point. Subcommands:
//   simulate    direct N-filament integration, snapshots + optional trace
//   picard      fixed-point solution of the flow equation, optional
//               equivalence check against the direct integration
//   verify-pde  weak-form residual of a simulated path, optional dt/2 study
//   meanfield   mean-field convergence study
//   contdep     continuous-dependence study
//   chaos       propagation-of-chaos study
//   check-kernel  kernel derivative/bound/divergence audit
//
// Configuration is a flat key = value file (# comments); unknown keys are
// rejected. Every run writes manifest.json (resolved config + build id);
// `--replay manifest.json` re-runs from it. Exit codes: 0 ok, 1 validation
// error, 2 numeric failure, 3 non-contraction abort.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "filaments/errors.hpp"
#include "filaments/experiments.hpp"
#include "filaments/io.hpp"
#include "filaments/parallel.hpp"
#include "filaments/smallmat.hpp"

#ifndef FILAMENTS_BUILD_ID
#define FILAMENTS_BUILD_ID "unknown"
#endif

namespace filaments::cli {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Config

// Every recognized key with its default ("" = required when used).
const std::map<std::string, std::string>& key_defaults() {
  static const std::map<std::string, std::string> keys = {
      {"dim", "3"},
      {"kernel", ""},
      {"delta", "0.5"},
      {"ell", "1.0"},
      {"family", "law"},
      {"family_file", ""},
      {"n_filaments", "1"},
      {"samples", "64"},
      {"weight_mode", "equal"},
      {"law", "random_circle"},
      {"law_center_lo", "-0.4,-0.4,-0.4"},
      {"law_center_hi", "0.4,0.4,0.4"},
      {"law_radius_min", "0.8"},
      {"law_radius_max", "1.2"},
      {"law_amplitude", "0.25"},
      {"law_order", "8"},
      {"law_decay", "3"},
      {"law_arclength_cap", "16"},
      {"t_final", ""},
      {"dt", ""},
      {"window", "0"},
      {"tol", "1e-10"},
      {"max_iter", "50"},
      {"picard_check_equivalence", "0"},
      {"dict_fields", "64"},
      {"dict_features", "8"},
      {"dict_freq_scale", "2"},
      {"dict_diameter", "4"},
      {"dict_seed", "0"},
      {"ns", ""},
      {"trials", "30"},
      {"n_ref", "1024"},
      {"ref_check", "1"},
      {"r", "2"},
      {"tagged", "2"},
      {"perturb_scales", "0.1,0.01,0.001"},
      {"perturb_direction", "1,0,0"},
      {"chaos_theta1", "0"},
      {"chaos_theta2", "1"},
      {"points", "10000"},
      {"seed", "12345"},
      {"threads", "0"},
      {"out", "out"},
      {"snapshot_stride", "0"},
      {"trace", "0"},
      {"refine", "0"},
  };
  return keys;
}

struct Config {
  std::map<std::string, std::string> values;

  const std::string& raw(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end() || it->second.empty())
      throw ValidationError("missing required key '" + key + "'");
    return it->second;
  }
  double get_double(const std::string& key) const {
    try {
      std::size_t pos = 0;
      const double v = std::stod(raw(key), &pos);
      if (pos != raw(key).size()) throw std::invalid_argument("");
      return v;
    } catch (const ValidationError&) {
      throw;
    } catch (...) {
      throw ValidationError("key '" + key + "' is not a number: '" + raw(key) + "'");
    }
  }
  long long get_int(const std::string& key) const {
    const double v = get_double(key);
    if (v != std::floor(v)) throw ValidationError("key '" + key + "' must be an integer");
    return static_cast<long long>(v);
  }
  bool get_bool(const std::string& key) const { return get_int(key) != 0; }
  std::vector<double> get_list(const std::string& key) const {
    std::vector<double> out;
    std::istringstream ss(raw(key));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        out.push_back(std::stod(tok));
      } catch (...) {
        throw ValidationError("key '" + key + "' has a bad list entry '" + tok + "'");
      }
    }
    if (out.empty()) throw ValidationError("key '" + key + "' is an empty list");
    return out;
  }
};

Config parse_config_file(const std::string& path) {
  Config cfg;
  cfg.values = key_defaults();
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(line_no) +
                            " is not 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key_defaults().find(key) == key_defaults().end())
      throw ValidationError("unknown key '" + key + "'");
    cfg.values[key] = value;
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Builders

KernelSpec kernel_spec_from(const Config& cfg) {
  KernelSpec spec;
  spec.kind = cfg.raw("kernel");
  if (spec.kind == "mollified_biot_savart") spec.params["delta"] = cfg.get_double("delta");
  if (spec.kind == "gaussian_rotor") spec.params["ell"] = cfg.get_double("ell");
  return spec;
}

RandomCurveLaw law_from(const Config& cfg) {
  RandomCurveLaw law;
  const std::string kind = cfg.raw("law");
  if (kind == "fixed_circle") law.kind = RandomCurveLaw::Kind::FixedCircle;
  else if (kind == "random_circle") law.kind = RandomCurveLaw::Kind::RandomCircle;
  else if (kind == "random_fourier_loop") law.kind = RandomCurveLaw::Kind::RandomFourierLoop;
  else throw ValidationError("unknown law '" + kind + "'");
  law.dim = static_cast<int>(cfg.get_int("dim"));
  const auto lo = cfg.get_list("law_center_lo");
  const auto hi = cfg.get_list("law_center_hi");
  if (static_cast<int>(lo.size()) < law.dim || static_cast<int>(hi.size()) < law.dim)
    throw ValidationError("law_center_lo/hi need at least dim entries");
  for (int i = 0; i < law.dim; ++i) {
    law.center_lo[i] = lo[i];
    law.center_hi[i] = hi[i];
  }
  law.radius_min = cfg.get_double("law_radius_min");
  law.radius_max = cfg.get_double("law_radius_max");
  law.fourier_order = static_cast<int>(cfg.get_int("law_order"));
  law.fourier_decay = cfg.get_double("law_decay");
  law.amplitude = cfg.get_double("law_amplitude");
  law.arclength_cap = cfg.get_double("law_arclength_cap");
  if (law.radius_min <= 0 || law.radius_max < law.radius_min)
    throw ValidationError("law radius range must satisfy 0 < min <= max");
  return law;
}

WeightMode weight_mode_from(const Config& cfg) {
  const std::string mode = cfg.raw("weight_mode");
  if (mode == "equal") return WeightMode::EqualOneOverN;
  if (mode == "unit") return WeightMode::Unit;
  throw ValidationError("unknown weight_mode '" + mode + "'");
}

CurveFamily family_from(const Config& cfg) {
  const std::string source = cfg.raw("family");
  if (source == "file") return read_family(cfg.raw("family_file"));
  if (source != "law") throw ValidationError("unknown family source '" + source + "'");
  const RandomCurveLaw law = law_from(cfg);
  Rng rng(static_cast<std::uint64_t>(cfg.get_int("seed")));
  return sample_family(law, static_cast<int>(cfg.get_int("n_filaments")),
                       static_cast<int>(cfg.get_int("samples")), weight_mode_from(cfg), rng);
}

TestFieldDictionary dict_from(const Config& cfg) {
  std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("dict_seed"));
  if (seed == 0) seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
  return make_dictionary(static_cast<int>(cfg.get_int("dim")),
                         static_cast<int>(cfg.get_int("dict_fields")),
                         static_cast<int>(cfg.get_int("dict_features")),
                         cfg.get_double("dict_freq_scale"), cfg.get_double("dict_diameter"),
                         seed);
}

StudyConfig study_from(const Config& cfg, int threads) {
  StudyConfig sc;
  sc.samples_m = static_cast<int>(cfg.get_int("samples"));
  sc.t_final = cfg.get_double("t_final");
  sc.dt = cfg.get_double("dt");
  sc.threads = threads;
  sc.seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
  return sc;
}

// ---------------------------------------------------------------------------
// Output plumbing

struct Outputs {
  fs::path dir;
  explicit Outputs(const std::string& out) : dir(out) {
    fs::create_directories(dir);
    fs::create_directories(dir / "snapshots");
  }
  void write(const std::string& name, const std::string& content) const {
    write_text_file((dir / name).string(), content);
  }
  void snapshot(int step, const CurveFamily& family) const {
    char name[64];
    std::snprintf(name, sizeof(name), "snapshots/snap_%06d", step);
    write_family((dir / name).string(), family);
  }
};

void write_manifest(const Outputs& out, const std::string& subcommand, const Config& cfg) {
  json manifest;
  manifest["subcommand"] = subcommand;
  manifest["build"]["id"] = FILAMENTS_BUILD_ID;
  manifest["config"] = cfg.values;
  out.write("manifest.json", manifest.dump(2) + "\n");
}

void write_path_snapshots(const Outputs& out, const CurrentPath& path, int stride) {
  out.snapshot(0, path.states.front().family);
  const int S = path.steps();
  if (stride > 0)
    for (int s = stride; s < S; s += stride) out.snapshot(s, path.states[s].family);
  if (S > 0) out.snapshot(S, path.states.back().family);
}

// ---------------------------------------------------------------------------
// Subcommand runners

void run_simulate(const Config& cfg, const Outputs& out, int threads) {
  const int dim = static_cast<int>(cfg.get_int("dim"));
  const auto kernel = make_kernel(kernel_spec_from(cfg), dim);
  const CurveFamily family = family_from(cfg);
  SimulateOptions opt;
  opt.t_final = cfg.get_double("t_final");
  opt.dt = cfg.get_double("dt");
  opt.threads = threads;
  opt.track_jacobians = cfg.get_bool("trace");
  const SimulateResult r = simulate_filaments(family, *kernel, opt);

  write_path_snapshots(out, r.path, static_cast<int>(cfg.get_int("snapshot_stride")));

  json rep;
  rep["t_final"] = opt.t_final;
  rep["steps"] = r.path.steps();
  rep["mass_norm_upper_initial"] = r.mass_upper.front();
  rep["mass_norm_upper_final"] = r.mass_upper.back();
  rep["mass_growth_ok"] = mass_growth_ok(r.mass_upper, opt.dt, kernel->c_b());
  if (opt.track_jacobians) {
    const FlowBoundsReport fb = flow_bounds_check(r.trace, kernel->c_b(), r.mass_sup);
    rep["flow_bound_ok"] = fb.all_ok;
    rep["flow_bound_max_log_ratio"] = fb.max_log_ratio;
    rep["det_min"] = fb.det_min;
    rep["det_max"] = fb.det_max;
    out.write("trace.csv", trace_csv(r.trace));
  }
  out.write("report.json", rep.dump(2) + "\n");

  std::ostringstream csv;
  csv << "step,time,mass_norm_upper\n";
  for (std::size_t s = 0; s < r.mass_upper.size(); ++s)
    csv << s << "," << format_double(r.path.time(static_cast<int>(s))) << ","
        << format_double(r.mass_upper[s]) << "\n";
  out.write("report.csv", csv.str());
}

void run_picard(const Config& cfg, const Outputs& out, int threads) {
  const int dim = static_cast<int>(cfg.get_int("dim"));
  const auto kernel = make_kernel(kernel_spec_from(cfg), dim);
  const CurveFamily family = family_from(cfg);
  const TestFieldDictionary dict = dict_from(cfg);

  PicardConfig pc;
  pc.t_final = cfg.get_double("t_final");
  pc.dt = cfg.get_double("dt");
  pc.window = cfg.get_double("window");
  pc.tol = cfg.get_double("tol");
  pc.max_iter = static_cast<int>(cfg.get_int("max_iter"));
  pc.threads = threads;
  const PicardResult r = picard_solve(FilamentCurrent{family}, *kernel, dict, pc);

  double equivalence = -1.0;
  if (cfg.get_bool("picard_check_equivalence")) {
    SimulateOptions opt;
    opt.t_final = pc.t_final;
    opt.dt = pc.dt;
    opt.threads = threads;
    const SimulateResult sim = simulate_filaments(family, *kernel, opt);
    equivalence = path_sup_distance(r.path, sim.path);
  }

  write_path_snapshots(out, r.path, static_cast<int>(cfg.get_int("snapshot_stride")));
  out.write("report.json", picard_report_json(r, equivalence));
  out.write("report.csv", picard_report_csv(r));
}

void run_verify_pde(const Config& cfg, const Outputs& out, int threads) {
  const int dim = static_cast<int>(cfg.get_int("dim"));
  const auto kernel = make_kernel(kernel_spec_from(cfg), dim);
  const CurveFamily family = family_from(cfg);
  const TestFieldDictionary dict = dict_from(cfg);

  SimulateOptions opt;
  opt.t_final = cfg.get_double("t_final");
  opt.dt = cfg.get_double("dt");
  opt.threads = threads;
  const SimulateResult run = simulate_filaments(family, *kernel, opt);
  const ResidualReport rep = weak_residual(run.path, *kernel, dict, threads);

  double refined = -1.0, ratio = -1.0;
  if (cfg.get_bool("refine")) {
    SimulateOptions half = opt;
    half.dt = opt.dt / 2.0;
    const SimulateResult run2 = simulate_filaments(family, *kernel, half);
    refined = weak_residual(run2.path, *kernel, dict, threads).max_abs;
    ratio = refined > 0.0 ? rep.max_abs / refined : 0.0;
  }
  out.write("report.json", residual_report_json(rep, refined, ratio));
  out.write("report.csv", residual_report_csv(rep));
}

void run_meanfield(const Config& cfg, const Outputs& out, int threads) {
  const int dim = static_cast<int>(cfg.get_int("dim"));
  const auto kernel = make_kernel(kernel_spec_from(cfg), dim);
  const TestFieldDictionary dict = dict_from(cfg);
  MeanfieldConfig mf;
  for (double n : cfg.get_list("ns")) mf.ns.push_back(static_cast<int>(n));
  mf.n_ref = static_cast<int>(cfg.get_int("n_ref"));
  mf.trials = static_cast<int>(cfg.get_int("trials"));
  mf.tagged = static_cast<int>(cfg.get_int("tagged"));
  mf.ref_check = cfg.get_bool("ref_check");
  const MeanfieldReport rep =
      meanfield_study(law_from(cfg), *kernel, dict, study_from(cfg, threads), mf);
  out.write("report.json", meanfield_report_json(rep));
  out.write("report.csv", meanfield_report_csv(rep));
}

void run_contdep(const Config& cfg, const Outputs& out, int threads) {
  const int dim = static_cast<int>(cfg.get_int("dim"));
  const auto kernel = make_kernel(kernel_spec_from(cfg), dim);
  const TestFieldDictionary dict = dict_from(cfg);
  ContdepConfig cd;
  cd.scales = cfg.get_list("perturb_scales");
  const auto dir = cfg.get_list("perturb_direction");
  if (static_cast<int>(dir.size()) < dim)
    throw ValidationError("perturb_direction needs at least dim entries");
  for (int i = 0; i < dim; ++i) cd.direction[i] = dir[i];
  const ContdepReport rep =
      contdep_study(family_from(cfg), *kernel, dict, study_from(cfg, threads), cd);
  out.write("report.json", contdep_report_json(rep));
  out.write("report.csv", contdep_report_csv(rep));
  if (!rep.per_field_initial.empty())
    out.write("dict_values.csv", dict_values_csv(rep.per_field_initial));
}

void run_chaos(const Config& cfg, const Outputs& out, int threads) {
  const int dim = static_cast<int>(cfg.get_int("dim"));
  const auto kernel = make_kernel(kernel_spec_from(cfg), dim);
  const TestFieldDictionary dict = dict_from(cfg);
  ChaosConfig ch;
  for (double n : cfg.get_list("ns")) ch.ns.push_back(static_cast<int>(n));
  ch.trials = static_cast<int>(cfg.get_int("trials"));
  ch.r = static_cast<int>(cfg.get_int("r"));
  ch.n_ref = static_cast<int>(cfg.get_int("n_ref"));
  ch.theta1 = static_cast<int>(cfg.get_int("chaos_theta1"));
  ch.theta2 = static_cast<int>(cfg.get_int("chaos_theta2"));
  const ChaosReport rep =
      chaos_study(law_from(cfg), *kernel, dict, study_from(cfg, threads), ch);
  out.write("report.json", chaos_report_json(rep));
  out.write("report.csv", chaos_report_csv(rep));
}

void run_check_kernel(const Config& cfg, const Outputs& out) {
  const int dim = static_cast<int>(cfg.get_int("dim"));
  const auto kernel = make_kernel(kernel_spec_from(cfg), dim);
  const int points = static_cast<int>(cfg.get_int("points"));
  const int d = kernel->dim();

  double max_jac_rel = 0.0, max_hess_rel = 0.0, max_div = 0.0;
  bool bounds_ok = true;
  const double h = 1e-5;
  KroneckerSequence seq(d);
  std::vector<double> x(3), K(d * d), Kp(d * d), Km(d * d);
  std::vector<double> DK(d * d * d), DKfd(d * d * d), DKp(d * d * d), DKm(d * d * d);
  std::vector<double> D2K(d * d * d * d), D2Kfd(d * d * d * d);
  for (int p = 0; p < points; ++p) {
    seq.point(p, x.data());
    for (int i = 0; i < d; ++i) x[i] = (2.0 * x[i] - 1.0) * kernel->audit_halfwidth();

    kernel->matrix(x.data(), K.data());
    if (op_norm(K.data(), d) > kernel->bounds().k_inf * (1.0 + 1e-12)) bounds_ok = false;

    kernel->jacobian_tensor(x.data(), DK.data());
    double scale = 1e-12;
    for (double v : DK) scale = std::max(scale, std::abs(v));
    for (int m = 0; m < d; ++m) {
      std::vector<double> xp(x), xm(x);
      xp[m] += h;
      xm[m] -= h;
      kernel->matrix(xp.data(), Kp.data());
      kernel->matrix(xm.data(), Km.data());
      for (int il = 0; il < d * d; ++il) {
        const double fd = (Kp[il] - Km[il]) / (2.0 * h);
        max_jac_rel = std::max(max_jac_rel, std::abs(DK[il * d + m] - fd) / scale);
      }
    }

    kernel->hessian_tensor(x.data(), D2K.data());
    double scale2 = 1e-12;
    for (double v : D2K) scale2 = std::max(scale2, std::abs(v));
    for (int n = 0; n < d; ++n) {
      std::vector<double> xp(x), xm(x);
      xp[n] += h;
      xm[n] -= h;
      kernel->jacobian_tensor(xp.data(), DKp.data());
      kernel->jacobian_tensor(xm.data(), DKm.data());
      for (int ilm = 0; ilm < d * d * d; ++ilm) {
        const double fd = (DKp[ilm] - DKm[ilm]) / (2.0 * h);
        max_hess_rel = std::max(max_hess_rel, std::abs(D2K[ilm * d + n] - fd) / scale2);
      }
    }

    if (kernel->divergence_free()) {
      for (int j = 0; j < d; ++j) {
        double div = 0.0;
        for (int i = 0; i < d; ++i) div += DK[(i * d + j) * d + i];
        max_div = std::max(max_div, std::abs(div));
      }
    }
  }

  const bool jac_ok = max_jac_rel <= 1e-6;
  const bool hess_ok = max_hess_rel <= 1e-6;
  const bool div_ok = !kernel->divergence_free() || max_div <= 1e-8;
  const bool all_ok = bounds_ok && jac_ok && hess_ok && div_ok;

  json rep;
  rep["kernel"] = kernel->spec().kind;
  rep["dim"] = d;
  rep["bounds"]["k_inf"] = kernel->bounds().k_inf;
  rep["bounds"]["dk_inf"] = kernel->bounds().dk_inf;
  rep["bounds"]["d2k_inf"] = kernel->bounds().d2k_inf;
  rep["bounds"]["d3k_inf"] = kernel->bounds().d3k_inf;
  rep["c_b"] = kernel->c_b();
  rep["bl_operator_bound"] = bl_operator_bound(*kernel);
  rep["divergence_free"] = kernel->divergence_free();
  rep["points"] = points;
  rep["max_jacobian_rel_err"] = max_jac_rel;
  rep["max_hessian_rel_err"] = max_hess_rel;
  rep["max_column_divergence"] = max_div;
  rep["bounds_ok"] = bounds_ok;
  rep["derivatives_ok"] = jac_ok && hess_ok;
  rep["ok"] = all_ok;
  out.write("report.json", rep.dump(2) + "\n");

  std::cout << "kernel " << kernel->spec().kind << " d=" << d
            << " |K|=" << format_double(kernel->bounds().k_inf)
            << " |DK|=" << format_double(kernel->bounds().dk_inf)
            << " |D2K|=" << format_double(kernel->bounds().d2k_inf)
            << " |D3K|=" << format_double(kernel->bounds().d3k_inf)
            << " C_B=" << format_double(kernel->c_b())
            << " divergence_free=" << (kernel->divergence_free() ? 1 : 0)
            << " checks=" << (all_ok ? "pass" : "FAIL") << "\n";
  if (!all_ok) throw NumericError("check-kernel: audit failed");
}

int run(int argc, char** argv) {
  CLI::App app{"filaments: interacting-filament dynamics and mean-field verification"};
  app.require_subcommand(1);

  std::string config_path, replay_path, out_override;
  long long seed_override = -1;
  int threads_override = -1;

  for (const char* name :
       {"simulate", "picard", "verify-pde", "meanfield", "contdep", "chaos", "check-kernel"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "flat key = value config file");
    sub->add_option("--replay", replay_path, "manifest.json of a previous run");
    sub->add_option("--out", out_override, "output directory");
    sub->add_option("--seed", seed_override, "master seed override");
    sub->add_option("--threads", threads_override, "thread count override (0 = auto)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: validation: " << e.what() << "\n";
    return 1;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    Config cfg;
    std::string subcommand = sub;
    if (!replay_path.empty()) {
      const json manifest = json::parse(read_text_file(replay_path));
      subcommand = manifest.at("subcommand").get<std::string>();
      if (subcommand != sub)
        throw ValidationError("replay manifest is for subcommand '" + subcommand + "'");
      cfg.values = key_defaults();
      for (const auto& [key, value] : manifest.at("config").items()) {
        if (key_defaults().find(key) == key_defaults().end())
          throw ValidationError("unknown key '" + key + "' in manifest");
        cfg.values[key] = value.get<std::string>();
      }
    } else if (!config_path.empty()) {
      cfg = parse_config_file(config_path);
    } else {
      throw ValidationError("missing --config or --replay");
    }

    if (seed_override >= 0) cfg.values["seed"] = std::to_string(seed_override);
    if (!out_override.empty()) cfg.values["out"] = out_override;
    // The thread override is an execution detail: results are bit-identical
    // for any thread count, so it is not recorded in the manifest.
    const int threads = resolve_threads(
        threads_override >= 0 ? threads_override : static_cast<int>(cfg.get_int("threads")));

    const Outputs out(cfg.raw("out"));
    write_manifest(out, subcommand, cfg);

    if (sub == "simulate") run_simulate(cfg, out, threads);
    else if (sub == "picard") run_picard(cfg, out, threads);
    else if (sub == "verify-pde") run_verify_pde(cfg, out, threads);
    else if (sub == "meanfield") run_meanfield(cfg, out, threads);
    else if (sub == "contdep") run_contdep(cfg, out, threads);
    else if (sub == "chaos") run_chaos(cfg, out, threads);
    else if (sub == "check-kernel") run_check_kernel(cfg, out);
    return 0;
  } catch (const ValidationError& e) {
    std::cerr << "error: validation: " << e.what() << "\n";
    return 1;
  } catch (const ContractionError& e) {
    std::cerr << "error: non-contraction: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "error: numeric: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: validation: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace filaments::cli

int main(int argc, char** argv) { return filaments::cli::run(argc, argv); }
