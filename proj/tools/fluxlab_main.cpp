// fluxlab command-line driver.
//
// Subcommands: ground, scaling, phase-diagram, visibility-cut, sampling,
// fit, defaults, validate. Exit status: 0 success, 2 configuration error,
// 3 solver non-convergence or cross-check rejection, 4 validation failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "fluxlab/config.hpp"
#include "fluxlab/study.hpp"

using namespace fluxlab;

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<std::string> out;
    std::optional<std::string> backend;
    std::optional<std::string> sector;
    std::optional<int> workers;
    std::optional<std::uint64_t> seed;
    std::optional<int> chi_max;
};

void add_common(CLI::App* sub, CommonFlags& f) {
    sub->add_option("--config", f.config_path, "study configuration file")->required();
    sub->add_option("--out", f.out, "output directory (overrides config)");
    sub->add_option("--backend", f.backend, "ed | dmrg | auto (overrides config)");
    sub->add_option("--sector", f.sector, "even | odd | full (overrides config)");
    sub->add_option("--workers", f.workers, "worker threads (overrides config)");
    sub->add_option("--seed", f.seed, "seed (overrides config)");
    sub->add_option("--chi-max", f.chi_max, "DMRG bond ceiling (overrides config)");
}

int run_kind(const CommonFlags& f, cli::StudyKind kind) {
    cli::StudyConfig cfg;
    try {
        cfg = cli::load_config(f.config_path);
        if (cfg.kind != kind) {
            std::cerr << "config error: config kind '" << cli::study_kind_name(cfg.kind)
                      << "' does not match subcommand '" << cli::study_kind_name(kind) << "'\n";
            return 2;
        }
        if (f.out) cfg.out_dir = *f.out;
        if (f.backend) cfg.backend = cli::backend_from_name(*f.backend);
        if (f.sector) cfg.sector = sector_from_name(*f.sector);
        if (f.workers) cfg.workers = *f.workers;
        if (f.seed) cfg.seed = *f.seed;
        if (f.chi_max) cfg.chi_max = *f.chi_max;
        cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    try {
        const auto outcome = cli::run_study(cfg);
        for (const auto& fail : outcome.failures) std::cerr << "warning: " << fail << "\n";
        std::cout << "wrote " << outcome.rows.size() << " rows to " << cfg.out_dir << "\n";
        return outcome.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fluxlab: ground-state entanglement and fluctuation studies of XYZ spin chains"};
    app.require_subcommand(1);

    CommonFlags ground_f, scaling_f, phase_f, vis_f, samp_f;
    auto* ground = app.add_subcommand("ground", "single-point ground-state evaluation");
    add_common(ground, ground_f);
    auto* scalingc = app.add_subcommand("scaling", "finite-size scaling study");
    add_common(scalingc, scaling_f);
    auto* phase = app.add_subcommand("phase-diagram", "gamma-Jz diagnostic sweep");
    add_common(phase, phase_f);
    auto* vis = app.add_subcommand("visibility-cut", "visibility along a gamma cut");
    add_common(vis, vis_f);
    auto* samp = app.add_subcommand("sampling", "shot-based estimation study");
    add_common(samp, samp_f);

    std::string fit_path;
    int fit_min_L = 8;
    auto* fit = app.add_subcommand("fit", "classify an L,value series file");
    fit->add_option("series", fit_path, "series CSV")->required();
    fit->add_option("--min-L", fit_min_L, "smallest L included in fits");

    auto* defaults = app.add_subcommand("defaults", "print the default configuration");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "validate a rows.csv file");
    validate->add_option("file", validate_path, "rows.csv path")->required();

    CLI11_PARSE(app, argc, argv);

    if (ground->parsed()) return run_kind(ground_f, cli::StudyKind::Ground);
    if (scalingc->parsed()) return run_kind(scaling_f, cli::StudyKind::Scaling);
    if (phase->parsed()) return run_kind(phase_f, cli::StudyKind::PhaseDiagram);
    if (vis->parsed()) return run_kind(vis_f, cli::StudyKind::VisibilityCut);
    if (samp->parsed()) return run_kind(samp_f, cli::StudyKind::Sampling);

    if (fit->parsed()) {
        try {
            const auto f = cli::classify_series_csv(fit_path, fit_min_L);
            std::cout << f.to_json() << "\n";
            return 0;
        } catch (const std::exception& e) {
            std::cerr << "fit error: " << e.what() << "\n";
            return 2;
        }
    }
    if (defaults->parsed()) {
        std::cout << cli::default_config_text();
        return 0;
    }
    if (validate->parsed()) {
        std::string message;
        const int rc = cli::validate_rows_csv(validate_path, message);
        std::cout << message << "\n";
        return rc;
    }
    return 2;
}
