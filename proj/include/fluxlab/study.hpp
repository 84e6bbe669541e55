#pragma once

// Study runners: ground-point evaluation, scaling studies, phase-diagram
// sweeps, visibility cuts and sampling studies, with CSV/JSON persistence.
// Parameter points run on a worker pool; output order is configuration
// order regardless of completion order.

#include <optional>
#include <string>
#include <vector>

#include "fluxlab/config.hpp"
#include "fluxlab/scaling.hpp"

namespace fluxlab::cli {

struct ResultRow {
    int L = 0;
    double J = 0.0, gamma = 0.0, Jz = 0.0;
    std::string axis;
    int cut = 0;
    std::string backend;
    std::optional<double> energy, energy_residual_or_variance, S_vN, var_omega, var_complement,
        var_total, reduced, beta, imbalance, G_r, xi;
};

std::string result_header();
std::string format_row(const ResultRow& r);
std::string rows_to_json(const std::vector<ResultRow>& rows);

struct StudyOutcome {
    std::vector<ResultRow> rows;
    std::vector<std::string> failures;
    int exit_code = 0;
};

/// Dispatch on config.kind, write outputs under config.out_dir, return the
/// outcome. Exit code 3 signals solver failures or cross-check rejections.
StudyOutcome run_study(const StudyConfig& cfg);

StudyOutcome run_ground(const StudyConfig& cfg);
StudyOutcome run_scaling_study(const StudyConfig& cfg);
StudyOutcome run_phase_diagram(const StudyConfig& cfg);
StudyOutcome run_visibility_cut(const StudyConfig& cfg);
StudyOutcome run_sampling_study(const StudyConfig& cfg);

/// `validate` subcommand: schema check of a rows.csv file. Returns 0 or 4.
int validate_rows_csv(const std::string& path, std::string& message);

/// `fit` subcommand: classify an "L,value" series file.
scaling::ScalingFit classify_series_csv(const std::string& path, int min_L = 8);

/// 17-significant-digit float formatting used in all CSV output.
std::string format_float(double v);

}  // namespace fluxlab::cli
