#include "fluxlab/study.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "fluxlab/exact.hpp"
#include "fluxlab/fluctuations.hpp"
#include "fluxlab/mps.hpp"
#include "fluxlab/sampler.hpp"

namespace fluxlab::cli {

namespace fs = std::filesystem;
using fluctuations::EdBackend;
using fluctuations::ExpectationBackend;

std::string format_float(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string result_header() {
    return "L,J,gamma,Jz,axis,cut,backend,energy,energy_residual_or_variance,S_vN,var_omega,"
           "var_complement,var_total,reduced,beta,imbalance,G_r,xi";
}

namespace {

std::string opt_field(const std::optional<double>& v) {
    return v ? format_float(*v) : std::string();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
    f << text;
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

// worker pool over indexed tasks; exceptions are captured per index
void parallel_for(int n, int workers, const std::function<void(int)>& task,
                  std::vector<std::string>& errors) {
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min(workers, n));
    errors.assign(n, std::string());
    std::atomic<int> next{0};
    auto body = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                task(i);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            } catch (...) {
                errors[i] = "unknown error";
            }
        }
    };
    if (workers == 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(body);
        for (auto& t : pool) t.join();
    }
}

struct SolvedPoint {
    std::shared_ptr<exact::PureState> ed_state;
    std::shared_ptr<mps::MPSState> mps_state;
    std::unique_ptr<ExpectationBackend> backend;
    double energy = 0.0;
    double residual_or_variance = 0.0;
    std::string tag;
};

SolvedPoint solve_ed(const StudyConfig& cfg, int L, const XYZParams& p) {
    exact::EdOptions opts;
    opts.tol = cfg.lanczos_tol;
    opts.seed = cfg.seed;
    opts.ceiling = cfg.ed_ceiling;
    auto res = exact::ground_state_lanczos(ChainSpec(L), p, cfg.sector, opts);
    SolvedPoint out;
    out.ed_state = std::make_shared<exact::PureState>(std::move(res.state));
    out.backend = std::make_unique<EdBackend>(*out.ed_state);
    out.energy = res.energy;
    out.residual_or_variance = res.residual_norm;
    out.tag = "ed";
    return out;
}

SolvedPoint solve_dmrg(const StudyConfig& cfg, int L, const XYZParams& p) {
    mps::DmrgOptions opts;
    opts.chi_max = cfg.chi_max;
    opts.max_sweeps = cfg.max_sweeps;
    opts.variance_target = cfg.variance_target;
    opts.seed = cfg.seed;
    auto mpo = mps::build_xyz_mpo(ChainSpec(L), p);
    auto res = mps::dmrg_ground_state(mpo, opts);
    SolvedPoint out;
    out.mps_state = std::make_shared<mps::MPSState>(std::move(res.state));
    out.backend = std::make_unique<mps::MpsBackend>(*out.mps_state);
    out.energy = res.energy;
    out.residual_or_variance = res.report.final_variance;
    out.tag = "dmrg";
    return out;
}

SolvedPoint solve_point(const StudyConfig& cfg, int L, const XYZParams& p) {
    const int ed_limit = std::min(cfg.ed_ceiling, 20);
    switch (cfg.backend) {
        case BackendChoice::Ed: return solve_ed(cfg, L, p);
        case BackendChoice::Dmrg: return solve_dmrg(cfg, L, p);
        case BackendChoice::Auto: break;
    }
    if (L > ed_limit) return solve_dmrg(cfg, L, p);
    SolvedPoint ed = solve_ed(cfg, L, p);
    if (L <= 14) {
        // cross-check mode: both backends must agree or the row is rejected.
        // DMRG targets the global ground state, so the ED reference for the
        // comparison is the full sector even when the row uses a projection.
        const Bipartition half = Bipartition::half(L);
        double ref_energy = ed.energy;
        double ref_entropy = ed.backend->entropy(half);
        if (cfg.sector != ParitySector::Full) {
            StudyConfig full_cfg = cfg;
            full_cfg.sector = ParitySector::Full;
            const SolvedPoint ed_full = solve_ed(full_cfg, L, p);
            ref_energy = ed_full.energy;
            ref_entropy = ed_full.backend->entropy(half);
        }
        const SolvedPoint dm = solve_dmrg(cfg, L, p);
        const double de = std::abs(ref_energy - dm.energy);
        const double ds = std::abs(ref_entropy - dm.backend->entropy(half));
        if (de > 1e-8 || ds > 1e-6) {
            std::ostringstream msg;
            msg << "backend cross-check rejected row: dE=" << de << " dS=" << ds;
            throw std::runtime_error(msg.str());
        }
    }
    return ed;
}

std::optional<double> xi_from_z_decay(const ExpectationBackend& b) {
    const int L = b.length();
    std::vector<std::pair<double, double>> decay;
    for (int r = 2; r <= L / 2; ++r) {
        double acc = 0.0;
        int cnt = 0;
        for (int i = 0; i + r < L; ++i) {
            acc += std::abs(fluctuations::connected_correlator(b, SpinAxis::Z, i, i + r));
            ++cnt;
        }
        if (cnt > 0) decay.emplace_back(r, acc / cnt);
    }
    try {
        const auto fit = scaling::correlation_length(decay);
        if (!fit.decaying) return std::nullopt;
        return fit.xi;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

std::vector<ResultRow> rows_for_point(const StudyConfig& cfg, int L, const XYZParams& p,
                                      const SolvedPoint& sp) {
    const int cut = cfg.cut.value_or(L / 2);
    const Bipartition omega(cut, L);
    const double imb = fluctuations::imbalance(*sp.backend);
    const double gr = fluctuations::string_correlator_avg(*sp.backend, std::max(1, L / 4));
    const std::optional<double> xi = xi_from_z_decay(*sp.backend);

    std::vector<ResultRow> rows;
    for (SpinAxis axis : cfg.axes) {
        const auto rep = fluctuations::fluctuation_report(*sp.backend, axis, omega);
        ResultRow r;
        r.L = L;
        r.J = p.J;
        r.gamma = p.gamma;
        r.Jz = p.Jz;
        r.axis = axis_name(axis);
        r.cut = cut;
        r.backend = sp.tag;
        r.energy = sp.energy;
        r.energy_residual_or_variance = sp.residual_or_variance;
        r.S_vN = rep.entropy;
        r.var_omega = rep.var_omega;
        r.var_complement = rep.var_complement;
        r.var_total = rep.var_total;
        r.reduced = rep.reduced;
        r.beta = rep.visibility;
        r.imbalance = imb;
        r.G_r = gr;
        r.xi = xi;
        rows.push_back(std::move(r));
    }
    return rows;
}

ResultRow failure_row(const StudyConfig& cfg, int L, const XYZParams& p, SpinAxis axis) {
    ResultRow r;
    r.L = L;
    r.J = p.J;
    r.gamma = p.gamma;
    r.Jz = p.Jz;
    r.axis = axis_name(axis);
    r.cut = cfg.cut.value_or(L / 2);
    r.backend = backend_name(cfg.backend);
    return r;
}

void write_rows(const fs::path& dir, const std::vector<ResultRow>& rows) {
    std::ostringstream csv;
    csv << result_header() << "\n";
    for (const auto& r : rows) csv << format_row(r) << "\n";
    write_text(dir / "rows.csv", csv.str());
    write_text(dir / "rows.json", rows_to_json(rows));
}

void write_series(const fs::path& path, const std::vector<std::pair<int, double>>& pts) {
    std::ostringstream out;
    out << "L,value\n";
    for (const auto& [L, v] : pts) out << L << "," << format_float(v) << "\n";
    write_text(path, out.str());
}

}  // namespace

std::string format_row(const ResultRow& r) {
    std::ostringstream out;
    out << r.L << "," << format_float(r.J) << "," << format_float(r.gamma) << ","
        << format_float(r.Jz) << "," << r.axis << "," << r.cut << "," << r.backend << ","
        << opt_field(r.energy) << "," << opt_field(r.energy_residual_or_variance) << ","
        << opt_field(r.S_vN) << "," << opt_field(r.var_omega) << ","
        << opt_field(r.var_complement) << "," << opt_field(r.var_total) << ","
        << opt_field(r.reduced) << "," << opt_field(r.beta) << "," << opt_field(r.imbalance)
        << "," << opt_field(r.G_r) << "," << opt_field(r.xi);
    return out.str();
}

std::string rows_to_json(const std::vector<ResultRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json j;
        j["L"] = r.L;
        j["J"] = r.J;
        j["gamma"] = r.gamma;
        j["Jz"] = r.Jz;
        j["axis"] = r.axis;
        j["cut"] = r.cut;
        j["backend"] = r.backend;
        auto put = [&j](const char* k, const std::optional<double>& v) {
            if (v)
                j[k] = *v;
            else
                j[k] = nullptr;
        };
        put("energy", r.energy);
        put("energy_residual_or_variance", r.energy_residual_or_variance);
        put("S_vN", r.S_vN);
        put("var_omega", r.var_omega);
        put("var_complement", r.var_complement);
        put("var_total", r.var_total);
        put("reduced", r.reduced);
        put("beta", r.beta);
        put("imbalance", r.imbalance);
        put("G_r", r.G_r);
        put("xi", r.xi);
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

StudyOutcome run_ground(const StudyConfig& cfg) {
    StudyOutcome out;
    const int L = cfg.lengths.front();
    const XYZParams p(cfg.J, cfg.gamma, cfg.Jz);
    try {
        const SolvedPoint sp = solve_point(cfg, L, p);
        out.rows = rows_for_point(cfg, L, p, sp);
    } catch (const std::exception& e) {
        out.failures.push_back(std::string("ground point failed: ") + e.what());
        for (SpinAxis a : cfg.axes) out.rows.push_back(failure_row(cfg, L, p, a));
        out.exit_code = 3;
    }
    return out;
}

StudyOutcome run_scaling_study(const StudyConfig& cfg) {
    StudyOutcome out;
    const int n = static_cast<int>(cfg.lengths.size());
    std::vector<std::vector<ResultRow>> per_L(n);
    std::vector<std::string> errors;
    parallel_for(
        n, cfg.workers,
        [&](int i) {
            const int L = cfg.lengths[i];
            const XYZParams p(cfg.J, cfg.gamma, cfg.Jz);
            const SolvedPoint sp = solve_point(cfg, L, p);
            per_L[i] = rows_for_point(cfg, L, p, sp);
        },
        errors);
    for (int i = 0; i < n; ++i) {
        if (!errors[i].empty()) {
            const XYZParams p(cfg.J, cfg.gamma, cfg.Jz);
            out.failures.push_back("L=" + std::to_string(cfg.lengths[i]) + ": " + errors[i]);
            for (SpinAxis a : cfg.axes) out.rows.push_back(failure_row(cfg, cfg.lengths[i], p, a));
            out.exit_code = 3;
            continue;
        }
        for (auto& r : per_L[i]) out.rows.push_back(std::move(r));
    }
    return out;
}

StudyOutcome run_phase_diagram(const StudyConfig& cfg) {
    StudyOutcome out;
    const int L = cfg.lengths.front();
    const auto gammas = cfg.gamma_grid.values();
    const auto jzs = cfg.jz_grid.values();
    const int n = static_cast<int>(gammas.size() * jzs.size());
    std::vector<std::vector<ResultRow>> per_point(n);
    std::vector<std::string> errors;
    parallel_for(
        n, cfg.workers,
        [&](int i) {
            const double g = gammas[i / jzs.size()];
            const double jz = jzs[i % jzs.size()];
            const XYZParams p(cfg.J, g, jz);
            const SolvedPoint sp = solve_point(cfg, L, p);
            per_point[i] = rows_for_point(cfg, L, p, sp);
        },
        errors);
    for (int i = 0; i < n; ++i) {
        const double g = gammas[i / jzs.size()];
        const double jz = jzs[i % jzs.size()];
        if (!errors[i].empty()) {
            out.failures.push_back("gamma=" + format_float(g) + " Jz=" + format_float(jz) + ": " +
                                   errors[i]);
            const XYZParams p(cfg.J, g, jz);
            for (SpinAxis a : cfg.axes) out.rows.push_back(failure_row(cfg, L, p, a));
            out.exit_code = 3;
            continue;
        }
        for (auto& r : per_point[i]) out.rows.push_back(std::move(r));
    }
    return out;
}

StudyOutcome run_visibility_cut(const StudyConfig& cfg) {
    StudyOutcome out;
    const int L = cfg.lengths.front();
    const auto gammas = cfg.cut_gamma.values();
    const int n = static_cast<int>(gammas.size());
    std::vector<std::vector<ResultRow>> per_point(n);
    std::vector<std::string> errors;
    parallel_for(
        n, cfg.workers,
        [&](int i) {
            const XYZParams p(cfg.J, gammas[i], cfg.Jz);
            const SolvedPoint sp = solve_point(cfg, L, p);
            per_point[i] = rows_for_point(cfg, L, p, sp);
        },
        errors);
    for (int i = 0; i < n; ++i) {
        if (!errors[i].empty()) {
            out.failures.push_back("gamma=" + format_float(gammas[i]) + ": " + errors[i]);
            const XYZParams p(cfg.J, gammas[i], cfg.Jz);
            for (SpinAxis a : cfg.axes) out.rows.push_back(failure_row(cfg, L, p, a));
            out.exit_code = 3;
            continue;
        }
        for (auto& r : per_point[i]) out.rows.push_back(std::move(r));
    }
    return out;
}

StudyOutcome run_sampling_study(const StudyConfig& cfg) {
    StudyOutcome out;
    const int L = cfg.lengths.front();
    const XYZParams p(cfg.J, cfg.gamma, cfg.Jz);
    try {
        const SolvedPoint sp = solve_ed(cfg, L, p);
        out.rows = rows_for_point(cfg, L, p, sp);
    } catch (const std::exception& e) {
        out.failures.push_back(std::string("sampling ground state failed: ") + e.what());
        out.exit_code = 3;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dispatch and persistence

StudyOutcome run_study(const StudyConfig& cfg) {
    cfg.validate();
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);

    StudyOutcome out;
    switch (cfg.kind) {
        case StudyKind::Ground: out = run_ground(cfg); break;
        case StudyKind::Scaling: out = run_scaling_study(cfg); break;
        case StudyKind::PhaseDiagram: out = run_phase_diagram(cfg); break;
        case StudyKind::VisibilityCut: out = run_visibility_cut(cfg); break;
        case StudyKind::Sampling: out = run_sampling_study(cfg); break;
    }

    write_rows(dir, out.rows);

    if (cfg.kind == StudyKind::Ground) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& r : out.rows) {
            nlohmann::json e;
            e["axis"] = r.axis;
            e["energy"] = r.energy ? nlohmann::json(*r.energy) : nlohmann::json(nullptr);
            j.push_back(e);
        }
        write_text(dir / "ground.json", j.dump(2) + "\n");
    }

    if (cfg.kind == StudyKind::Scaling) {
        // per-observable series files and the classification summary
        auto series_of = [&](const std::string& axis,
                             const std::function<std::optional<double>(const ResultRow&)>& get) {
            std::vector<std::pair<int, double>> pts;
            for (const auto& r : out.rows)
                if ((axis.empty() || r.axis == axis))
                    if (auto v = get(r)) pts.emplace_back(r.L, *v);
            // one entry per L (take the first axis row for axis-independent fields)
            std::vector<std::pair<int, double>> uniq;
            for (const auto& pt : pts)
                if (uniq.empty() || uniq.back().first != pt.first) uniq.push_back(pt);
            return uniq;
        };

        const auto svn = series_of("", [](const ResultRow& r) { return r.S_vN; });
        write_series(dir / "series_svn.csv", svn);

        nlohmann::json summary;
        auto classify_into = [&](const std::string& name,
                                 const std::vector<std::pair<int, double>>& pts) {
            if (pts.size() < 4) {
                summary[name] = nullptr;
                return std::optional<scaling::ScalingFit>{};
            }
            scaling::ScalingSeries s;
            s.points = pts;
            s.label = name;
            try {
                const auto fit = scaling::classify_scaling(s);
                summary[name] = nlohmann::json::parse(fit.to_json());
                return std::optional<scaling::ScalingFit>(fit);
            } catch (const std::exception& e) {
                summary[name] = std::string("unclassifiable: ") + e.what();
                return std::optional<scaling::ScalingFit>{};
            }
        };

        const auto entropy_fit = classify_into("entropy", svn);
        for (SpinAxis a : cfg.axes) {
            const std::string ax = axis_name(a);
            const auto var = series_of(ax, [](const ResultRow& r) { return r.var_omega; });
            const auto vtot = series_of(ax, [](const ResultRow& r) { return r.var_total; });
            const auto red = series_of(ax, [](const ResultRow& r) { return r.reduced; });
            const auto beta = series_of(ax, [](const ResultRow& r) { return r.beta; });
            write_series(dir / ("series_var_" + ax + ".csv"), var);
            write_series(dir / ("series_vartot_" + ax + ".csv"), vtot);
            write_series(dir / ("series_reduced_" + ax + ".csv"), red);
            write_series(dir / ("series_beta_" + ax + ".csv"), beta);
            const auto fit = classify_into("reduced_" + ax, red);
            if (entropy_fit && fit)
                summary["agreement_" + ax] = (entropy_fit->cls == fit->cls);
        }
        if (!out.failures.empty()) summary["gaps"] = out.failures;
        write_text(dir / "classification.json", summary.dump(2) + "\n");
    }

    if (cfg.kind == StudyKind::PhaseDiagram) {
        std::ostringstream grid;
        grid << "L,J,gamma,Jz,distance,imbalance,G_r,beta_x,beta_y,beta_z,S_vN\n";
        // one grid line per parameter point, assembled from the axis rows
        for (size_t i = 0; i < out.rows.size();) {
            const auto& first = out.rows[i];
            std::optional<double> bx, by, bz;
            size_t j = i;
            for (; j < out.rows.size() && out.rows[j].L == first.L &&
                   out.rows[j].gamma == first.gamma && out.rows[j].Jz == first.Jz;
                 ++j) {
                if (out.rows[j].axis == "x") bx = out.rows[j].beta;
                if (out.rows[j].axis == "y") by = out.rows[j].beta;
                if (out.rows[j].axis == "z") bz = out.rows[j].beta;
            }
            const double dist =
                critical_line_distance(XYZParams(first.J, first.gamma, first.Jz));
            grid << first.L << "," << format_float(first.J) << "," << format_float(first.gamma)
                 << "," << format_float(first.Jz) << "," << format_float(dist) << ","
                 << opt_field(first.imbalance) << "," << opt_field(first.G_r) << ","
                 << opt_field(bx) << "," << opt_field(by) << "," << opt_field(bz) << ","
                 << opt_field(first.S_vN) << "\n";
            i = j;
        }
        write_text(dir / "grid.csv", grid.str());
    }

    if (cfg.kind == StudyKind::VisibilityCut) {
        std::ostringstream cutcsv;
        cutcsv << "L,J,gamma,Jz,beta_x,beta_y,beta_z\n";
        for (size_t i = 0; i < out.rows.size();) {
            const auto& first = out.rows[i];
            std::optional<double> bx, by, bz;
            size_t j = i;
            for (; j < out.rows.size() && out.rows[j].gamma == first.gamma; ++j) {
                if (out.rows[j].axis == "x") bx = out.rows[j].beta;
                if (out.rows[j].axis == "y") by = out.rows[j].beta;
                if (out.rows[j].axis == "z") bz = out.rows[j].beta;
            }
            cutcsv << first.L << "," << format_float(first.J) << "," << format_float(first.gamma)
                   << "," << format_float(first.Jz) << "," << opt_field(bx) << ","
                   << opt_field(by) << "," << opt_field(bz) << "\n";
            i = j;
        }
        write_text(dir / "visibility.csv", cutcsv.str());
    }

    if (cfg.kind == StudyKind::Sampling && out.exit_code == 0) {
        const int L = cfg.lengths.front();
        const XYZParams p(cfg.J, cfg.gamma, cfg.Jz);
        const SolvedPoint sp = solve_ed(cfg, L, p);
        const Bipartition omega(cfg.cut.value_or(L / 2), L);

        std::ostringstream est;
        est << "axis,N,seed,estimate,stderr,exact\n";
        nlohmann::json summary;

        if (!cfg.shots_csv_in.empty()) {
            const auto shots = sampler::load_shots_csv(cfg.shots_csv_in);
            const auto e = sampler::estimate_reduced_fluctuation(shots, omega);
            est << axis_name(cfg.axes.front()) << "," << shots.shots() << ",," << format_float(e.value)
                << "," << format_float(e.standard_error) << ",\n";
        } else {
            for (SpinAxis axis : cfg.axes) {
                const double exact_value = fluctuations::reduced_fluctuation(
                    *sp.backend, axis, omega, fluctuations::Route::VarianceDiff);
                std::vector<double> slopes;
                for (int k = 0; k < cfg.n_seeds; ++k) {
                    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(k);
                    double sx = 0, sy = 0, sxx = 0, sxy = 0;
                    int cnt = 0;
                    for (int N : cfg.shot_counts) {
                        const auto shots = sampler::sample_shots(*sp.ed_state, axis, N, seed);
                        const auto e = sampler::estimate_reduced_fluctuation(shots, omega);
                        est << axis_name(axis) << "," << N << "," << seed << ","
                            << format_float(e.value) << "," << format_float(e.standard_error)
                            << "," << format_float(exact_value) << "\n";
                        const double x = std::log(static_cast<double>(N));
                        const double y = std::log(std::max(e.standard_error, 1e-300));
                        sx += x;
                        sy += y;
                        sxx += x * x;
                        sxy += x * y;
                        ++cnt;
                    }
                    if (cnt >= 2) slopes.push_back((cnt * sxy - sx * sy) / (cnt * sxx - sx * sx));
                }
                double mean = 0;
                for (double s : slopes) mean += s;
                if (!slopes.empty()) mean /= static_cast<double>(slopes.size());
                summary[std::string("slope_") + axis_name(axis)] = mean;
            }
        }
        write_text(dir / "estimates.csv", est.str());
        write_text(dir / "sampling_summary.json", summary.dump(2) + "\n");
    }

    if (!out.failures.empty()) {
        std::ostringstream f;
        for (const auto& s : out.failures) f << s << "\n";
        write_text(dir / "failures.txt", f.str());
    }
    return out;
}

// ---------------------------------------------------------------------------
// validate / fit subcommands

int validate_rows_csv(const std::string& path, std::string& message) {
    std::ifstream f(path);
    if (!f) {
        message = "cannot open " + path;
        return 4;
    }
    std::string line;
    if (!std::getline(f, line)) {
        message = "empty file";
        return 4;
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != result_header()) {
        message = "header mismatch";
        return 4;
    }
    int lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) fields.push_back(tok);
        // stringstream drops trailing empty fields; restore them
        const size_t commas = static_cast<size_t>(std::count(line.begin(), line.end(), ','));
        while (fields.size() < commas + 1) fields.push_back("");
        if (fields.size() != 18) {
            message = "line " + std::to_string(lineno) + ": expected 18 fields, got " +
                      std::to_string(fields.size());
            return 4;
        }
        auto is_number = [](const std::string& s) {
            if (s.empty()) return false;
            try {
                size_t pos = 0;
                (void)std::stod(s, &pos);
                return pos == s.size();
            } catch (...) {
                return false;
            }
        };
        for (int i : {0, 1, 2, 3, 5}) {
            if (!is_number(fields[i])) {
                message = "line " + std::to_string(lineno) + ": field " + std::to_string(i) +
                          " must be numeric";
                return 4;
            }
        }
        if (fields[4] != "x" && fields[4] != "y" && fields[4] != "z") {
            message = "line " + std::to_string(lineno) + ": bad axis";
            return 4;
        }
        if (fields[6] != "ed" && fields[6] != "dmrg" && fields[6] != "auto") {
            message = "line " + std::to_string(lineno) + ": bad backend";
            return 4;
        }
        for (int i = 7; i < 18; ++i) {
            if (!fields[i].empty() && !is_number(fields[i])) {
                message = "line " + std::to_string(lineno) + ": field " + std::to_string(i) +
                          " must be numeric or empty";
                return 4;
            }
        }
    }
    message = "ok";
    return 0;
}

scaling::ScalingFit classify_series_csv(const std::string& path, int min_L) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("fit: cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) throw std::invalid_argument("fit: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "L,value") throw std::invalid_argument("fit: expected header 'L,value'");
    scaling::ScalingSeries s;
    s.label = path;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw std::invalid_argument("fit: bad line: " + line);
        s.points.emplace_back(std::stoi(line.substr(0, comma)),
                              std::stod(line.substr(comma + 1)));
    }
    return scaling::classify_scaling(s, min_L);
}

}  // namespace fluxlab::cli
