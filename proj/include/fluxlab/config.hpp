#pragma once

// Study configuration: flat key-value text with one section per concern.
// Unknown sections or keys are configuration errors. The `defaults`
// subcommand prints a fully commented default file.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fluxlab/model.hpp"

namespace fluxlab::cli {

enum class StudyKind { Ground, Scaling, PhaseDiagram, VisibilityCut, Sampling };

const char* study_kind_name(StudyKind k);
StudyKind study_kind_from_name(const std::string& s);

enum class BackendChoice { Ed, Dmrg, Auto };

const char* backend_name(BackendChoice b);
BackendChoice backend_from_name(const std::string& s);

struct GridAxis {
    double min = 0.0;
    double max = 0.0;
    double step = 0.1;

    std::vector<double> values() const;
};

struct StudyConfig {
    StudyKind kind = StudyKind::Ground;
    std::string out_dir = "out";
    std::uint64_t seed = 20240817;
    int workers = 0;  // 0: hardware concurrency

    // chain / parameters
    std::vector<int> lengths = {12};
    double J = 1.0;
    double gamma = 0.0;
    double Jz = 0.0;

    // phase-diagram grid
    GridAxis gamma_grid{0.0, 1.0, 0.1};
    GridAxis jz_grid{-1.0, 1.0, 0.1};

    // visibility cut
    GridAxis cut_gamma{0.0, 0.6, 0.05};

    // observables
    std::vector<SpinAxis> axes = {SpinAxis::X, SpinAxis::Y, SpinAxis::Z};
    std::optional<int> cut;  // empty: half

    // solver
    BackendChoice backend = BackendChoice::Auto;
    ParitySector sector = ParitySector::Even;
    int chi_max = 128;
    int max_sweeps = 50;
    double variance_target = 1e-10;
    double lanczos_tol = 1e-10;
    int ed_ceiling = 20;

    // sampling
    std::vector<int> shot_counts = {100, 1000, 10000, 100000};
    int n_seeds = 20;
    std::string shots_csv_in;

    void validate() const;  // throws std::invalid_argument on bad combinations
};

/// Parse the key-value config text. Throws std::invalid_argument with a
/// descriptive message on any unknown section/key or malformed value.
StudyConfig parse_config_text(const std::string& text);
StudyConfig load_config(const std::string& path);

/// The default config, fully commented; `defaults` prints this.
std::string default_config_text();

}  // namespace fluxlab::cli
