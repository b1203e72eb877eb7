#include "filaments/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "filaments/errors.hpp"

namespace filaments {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("io: cannot open '" + path + "' for writing");
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("io: cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string family_csv(const CurveFamily& family) {
  const int d = family.dim();
  std::ostringstream out;
  out << "filament_index,sigma_index";
  for (int k = 0; k < d; ++k) out << ",x_" << k;
  out << "\n";
  for (int j = 0; j < family.size(); ++j) {
    const Curve& c = family.curves[j];
    for (int m = 0; m < c.samples; ++m) {
      out << j << "," << m;
      for (int k = 0; k < d; ++k) out << "," << format_double(c.pts[m * d + k]);
      out << "\n";
    }
  }
  return out.str();
}

std::string family_sidecar_json(const CurveFamily& family) {
  const int d = family.dim();
  int m = family.curves.front().samples;
  for (const Curve& c : family.curves)
    if (c.samples != m)
      throw ValidationError("io: snapshot requires a uniform sample count");
  json sidecar;
  sidecar["d"] = d;
  sidecar["N"] = family.size();
  sidecar["M"] = m;
  sidecar["weights"] = family.weights;
  std::vector<bool> closed;
  for (const Curve& c : family.curves) closed.push_back(c.closed);
  sidecar["closed"] = closed;
  return sidecar.dump(2) + "\n";
}

void write_family(const std::string& base_path, const CurveFamily& family) {
  write_text_file(base_path + ".csv", family_csv(family));
  write_text_file(base_path + ".json", family_sidecar_json(family));
}

CurveFamily read_family(const std::string& base_path) {
  const json sidecar = json::parse(read_text_file(base_path + ".json"));
  const int d = sidecar.at("d").get<int>();
  const int n = sidecar.at("N").get<int>();
  const int m = sidecar.at("M").get<int>();
  CurveFamily family;
  family.weights = sidecar.at("weights").get<std::vector<double>>();
  const std::vector<bool> closed = sidecar.at("closed").get<std::vector<bool>>();
  if (static_cast<int>(family.weights.size()) != n || static_cast<int>(closed.size()) != n)
    throw ValidationError("io: sidecar weights/closed length mismatch");
  for (int j = 0; j < n; ++j) {
    Curve c;
    c.dim = d;
    c.samples = m;
    c.closed = closed[j];
    c.pts.assign(static_cast<std::size_t>(m) * d, 0.0);
    family.curves.push_back(std::move(c));
  }

  std::istringstream in(read_text_file(base_path + ".csv"));
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("io: empty snapshot csv");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    std::vector<std::string> cols;
    while (std::getline(ls, tok, ',')) cols.push_back(tok);
    if (static_cast<int>(cols.size()) != 2 + d)
      throw ValidationError("io: bad snapshot row '" + line + "'");
    const int j = std::stoi(cols[0]);
    const int s = std::stoi(cols[1]);
    if (j < 0 || j >= n || s < 0 || s >= m)
      throw ValidationError("io: snapshot row out of range");
    for (int k = 0; k < d; ++k) family.curves[j].pts[s * d + k] = std::stod(cols[2 + k]);
  }
  validate_family(family);
  return family;
}

std::string trace_csv(const FlowTrace& trace) {
  std::ostringstream out;
  out << "step,time,max_norm_Dphi,bound_rhs,det_min,det_max\n";
  for (const FlowTraceRow& r : trace.rows) {
    out << r.step << "," << format_double(r.time) << "," << format_double(r.max_dphi) << ","
        << format_double(std::exp(r.bound_rhs_log)) << "," << format_double(r.det_min) << ","
        << format_double(r.det_max) << "\n";
  }
  return out.str();
}

std::string residual_report_json(const ResidualReport& r, double refined_max_abs,
                                 double refinement_ratio) {
  json j;
  j["max_abs"] = r.max_abs;
  j["per_field_max"] = r.per_field_max;
  j["times"] = r.times;
  if (refined_max_abs >= 0.0) {
    j["refined_max_abs"] = refined_max_abs;
    j["refinement_ratio"] = refinement_ratio;
  }
  return j.dump(2) + "\n";
}

std::string residual_report_csv(const ResidualReport& r) {
  std::ostringstream out;
  out << "field_index,time,residual\n";
  for (std::size_t k = 0; k < r.residual.size(); ++k)
    for (std::size_t s = 0; s < r.times.size(); ++s)
      out << k << "," << format_double(r.times[s]) << ","
          << format_double(r.residual[k][s]) << "\n";
  return out.str();
}

std::string picard_report_json(const PicardResult& r, double equivalence_sup_distance) {
  json j;
  j["windows"] = json::array();
  for (const PicardWindow& w : r.windows) {
    json jw;
    jw["t_start"] = w.t_start;
    jw["t_end"] = w.t_end;
    jw["iterations"] = w.iterations;
    jw["halvings"] = w.halvings;
    jw["increments"] = w.increments;
    jw["contraction"] = w.contraction;
    j["windows"].push_back(jw);
  }
  j["n_windows"] = r.windows.size();
  if (equivalence_sup_distance >= 0.0)
    j["equivalence_sup_distance"] = equivalence_sup_distance;
  return j.dump(2) + "\n";
}

std::string picard_report_csv(const PicardResult& r) {
  std::ostringstream out;
  out << "window,iteration,increment\n";
  for (std::size_t w = 0; w < r.windows.size(); ++w)
    for (std::size_t i = 0; i < r.windows[w].increments.size(); ++i)
      out << w << "," << i + 1 << "," << format_double(r.windows[w].increments[i]) << "\n";
  return out.str();
}

std::string meanfield_report_json(const MeanfieldReport& r) {
  json j;
  j["ns"] = r.ns;
  j["e1_mean"] = r.e1_mean;
  j["e1_se"] = r.e1_se;
  j["e2_mean"] = r.e2_mean;
  j["e2_se"] = r.e2_se;
  j["slope"] = r.slope;
  j["slope_label"] = "empirical rate";
  j["slope_residual"] = r.slope_residual;
  j["ref_error"] = r.ref_error;
  j["ref_error_ratio"] = r.ref_error_ratio;
  j["e1_monotone_2se"] = r.e1_monotone_2se;
  return j.dump(2) + "\n";
}

std::string meanfield_report_csv(const MeanfieldReport& r) {
  std::ostringstream out;
  out << "metric,n,trial,value\n";
  for (std::size_t ni = 0; ni < r.ns.size(); ++ni)
    for (std::size_t t = 0; t < r.e1_trials[ni].size(); ++t)
      out << "e1," << r.ns[ni] << "," << t << "," << format_double(r.e1_trials[ni][t])
          << "\n";
  for (std::size_t ni = 0; ni < r.ns.size(); ++ni)
    for (std::size_t t = 0; t < r.e2_trials[ni].size(); ++t)
      out << "e2," << r.ns[ni] << "," << t << "," << format_double(r.e2_trials[ni][t])
          << "\n";
  return out.str();
}

std::string contdep_report_json(const ContdepReport& r) {
  json j;
  j["scales"] = r.scales;
  j["initial_distance"] = r.initial_distance;
  j["sup_distance"] = r.sup_distance;
  j["ratio"] = r.ratio;
  std::vector<bool> sk(r.skipped.begin(), r.skipped.end());
  j["skipped"] = sk;
  j["max_ratio"] = r.max_ratio;
  j["ratio_spread"] = r.ratio_spread;
  return j.dump(2) + "\n";
}

std::string contdep_report_csv(const ContdepReport& r) {
  std::ostringstream out;
  out << "scale,initial_distance,sup_distance,ratio,skipped\n";
  for (std::size_t i = 0; i < r.scales.size(); ++i)
    out << format_double(r.scales[i]) << "," << format_double(r.initial_distance[i]) << ","
        << format_double(r.sup_distance[i]) << "," << format_double(r.ratio[i]) << ","
        << (r.skipped[i] ? 1 : 0) << "\n";
  return out.str();
}

std::string chaos_report_json(const ChaosReport& r) {
  json j;
  j["ns"] = r.ns;
  j["r"] = r.r;
  j["ref_product_t"] = r.ref_product_t;
  j["ref_product_0"] = r.ref_product_0;
  j["gap"] = r.gap;
  j["gap_se"] = r.gap_se;
  j["gap_raw"] = r.gap_raw;
  j["gap_raw_se"] = r.gap_raw_se;
  j["term_currents"] = r.term_currents;
  j["term_filaments"] = r.term_filaments;
  j["exch_direct"] = r.exch_direct;
  j["exch_identity"] = r.exch_identity;
  j["exch_diff"] = r.exch_diff;
  j["exch_diff_se"] = r.exch_diff_se;
  j["exch_bound"] = r.exch_bound;
  std::vector<bool> match(r.exch_match_2se.begin(), r.exch_match_2se.end());
  j["exch_match_2se"] = match;
  j["strictly_decreasing"] = r.strictly_decreasing;
  return j.dump(2) + "\n";
}

std::string chaos_report_csv(const ChaosReport& r) {
  std::ostringstream out;
  out << "metric,n,trial,value\n";
  for (std::size_t ni = 0; ni < r.ns.size(); ++ni)
    for (std::size_t t = 0; t < r.gap_trials[ni].size(); ++t)
      out << "gap_cv," << r.ns[ni] << "," << t << ","
          << format_double(r.gap_trials[ni][t]) << "\n";
  return out.str();
}

std::string dict_values_csv(const std::vector<double>& per_field) {
  std::ostringstream out;
  out << "field_index,value\n";
  for (std::size_t k = 0; k < per_field.size(); ++k)
    out << k << "," << format_double(per_field[k]) << "\n";
  return out.str();
}

}  // namespace filaments
