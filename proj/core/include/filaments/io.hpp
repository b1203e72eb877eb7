#pragma once

// File formats of the artifact:
//  - curve family snapshots: CSV (filament_index, sigma_index, x_0..x_{d-1})
//    plus a JSON sidecar carrying weights, closed flags, d, M, N,
//  - study/residual/picard reports: JSON (full) and CSV (long format),
//  - flow trace: CSV (step, time, max_norm_Dphi, bound_rhs, det_min, det_max).
// Every floating-point value in CSV output is printed with 17 significant
// digits so files round-trip bit-exactly.

#include <string>

#include "filaments/experiments.hpp"
#include "filaments/solver.hpp"

namespace filaments {

std::string format_double(double v);  // %.17g

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// Snapshot pair <base>.csv / <base>.json.
void write_family(const std::string& base_path, const CurveFamily& family);
CurveFamily read_family(const std::string& base_path);

std::string family_csv(const CurveFamily& family);
std::string family_sidecar_json(const CurveFamily& family);

std::string trace_csv(const FlowTrace& trace);

std::string residual_report_json(const ResidualReport& r, double refined_max_abs = -1.0,
                                 double refinement_ratio = -1.0);
std::string residual_report_csv(const ResidualReport& r);

std::string picard_report_json(const PicardResult& r, double equivalence_sup_distance = -1.0);
std::string picard_report_csv(const PicardResult& r);

std::string meanfield_report_json(const MeanfieldReport& r);
std::string meanfield_report_csv(const MeanfieldReport& r);

std::string contdep_report_json(const ContdepReport& r);
std::string contdep_report_csv(const ContdepReport& r);

std::string chaos_report_json(const ChaosReport& r);
std::string chaos_report_csv(const ChaosReport& r);

std::string dict_values_csv(const std::vector<double>& per_field);

}  // namespace filaments
