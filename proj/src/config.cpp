#include "fluxlab/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fluxlab::cli {

const char* study_kind_name(StudyKind k) {
    switch (k) {
        case StudyKind::Ground: return "ground";
        case StudyKind::Scaling: return "scaling";
        case StudyKind::PhaseDiagram: return "phase_diagram";
        case StudyKind::VisibilityCut: return "visibility_cut";
        case StudyKind::Sampling: return "sampling";
    }
    return "?";
}

StudyKind study_kind_from_name(const std::string& s) {
    if (s == "ground") return StudyKind::Ground;
    if (s == "scaling") return StudyKind::Scaling;
    if (s == "phase_diagram" || s == "phase-diagram") return StudyKind::PhaseDiagram;
    if (s == "visibility_cut" || s == "visibility-cut") return StudyKind::VisibilityCut;
    if (s == "sampling") return StudyKind::Sampling;
    throw std::invalid_argument("unknown study kind: " + s);
}

const char* backend_name(BackendChoice b) {
    switch (b) {
        case BackendChoice::Ed: return "ed";
        case BackendChoice::Dmrg: return "dmrg";
        case BackendChoice::Auto: return "auto";
    }
    return "?";
}

BackendChoice backend_from_name(const std::string& s) {
    if (s == "ed") return BackendChoice::Ed;
    if (s == "dmrg") return BackendChoice::Dmrg;
    if (s == "auto") return BackendChoice::Auto;
    throw std::invalid_argument("unknown backend: " + s);
}

std::vector<double> GridAxis::values() const {
    if (!(step > 0)) throw std::invalid_argument("grid step must be > 0");
    if (max < min) throw std::invalid_argument("grid max < min");
    std::vector<double> out;
    const int n = static_cast<int>(std::floor((max - min) / step + 1e-9)) + 1;
    const double snap = 1e-12 * std::max(std::abs(min), std::abs(max));
    for (int i = 0; i < n; ++i) {
        double v = min + i * step;
        if (std::abs(v) <= snap) v = 0.0;
        out.push_back(v);
    }
    return out;
}

void StudyConfig::validate() const {
    if (lengths.empty()) throw std::invalid_argument("config: empty L list");
    for (int L : lengths)
        if (L < 2 || L > 64) throw std::invalid_argument("config: L out of range [2,64]");
    if (axes.empty()) throw std::invalid_argument("config: empty axes list");
    if (chi_max < 2) throw std::invalid_argument("config: chi_max >= 2 required");
    if (max_sweeps < 1) throw std::invalid_argument("config: max_sweeps >= 1 required");
    if (!(variance_target > 0)) throw std::invalid_argument("config: variance_target > 0");
    if (!(lanczos_tol > 0)) throw std::invalid_argument("config: lanczos_tol > 0");
    if (ed_ceiling < 2 || ed_ceiling > 24)
        throw std::invalid_argument("config: ed_ceiling out of range [2,24]");
    if (kind == StudyKind::Sampling) {
        if (shot_counts.empty()) throw std::invalid_argument("config: empty shot_counts");
        for (int n : shot_counts)
            if (n < 2) throw std::invalid_argument("config: shot counts must be >= 2");
        if (n_seeds < 1) throw std::invalid_argument("config: n_seeds >= 1");
    }
    if (cut) {
        for (int L : lengths)
            if (*cut <= 0 || *cut >= L)
                throw std::invalid_argument("config: cut must satisfy 0 < cut < L");
    }
    if (kind == StudyKind::Ground && lengths.size() != 1)
        throw std::invalid_argument("config: ground study takes a single L");
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, sep)) out.push_back(trim(tok));
    return out;
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return d;
    } catch (...) {
        throw std::invalid_argument("config: bad numeric value for " + key + ": '" + v + "'");
    }
}

int parse_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const long d = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return static_cast<int>(d);
    } catch (...) {
        throw std::invalid_argument("config: bad integer value for " + key + ": '" + v + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const unsigned long long d = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return d;
    } catch (...) {
        throw std::invalid_argument("config: bad unsigned value for " + key + ": '" + v + "'");
    }
}

}  // namespace

StudyConfig parse_config_text(const std::string& text) {
    StudyConfig cfg;
    std::stringstream ss(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config: bad section header at line " +
                                            std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            if (section != "study" && section != "chain" && section != "grid" &&
                section != "cut" && section != "observables" && section != "solver" &&
                section != "sampling")
                throw std::invalid_argument("config: unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key = value at line " +
                                        std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        const std::string qual = section + "." + key;

        if (qual == "study.kind") cfg.kind = study_kind_from_name(val);
        else if (qual == "study.out") cfg.out_dir = val;
        else if (qual == "study.seed") cfg.seed = parse_u64(qual, val);
        else if (qual == "study.workers") cfg.workers = parse_int(qual, val);
        else if (qual == "chain.L") {
            cfg.lengths.clear();
            for (const auto& t : split(val, ',')) cfg.lengths.push_back(parse_int(qual, t));
        } else if (qual == "chain.J") cfg.J = parse_double(qual, val);
        else if (qual == "chain.gamma") cfg.gamma = parse_double(qual, val);
        else if (qual == "chain.Jz") cfg.Jz = parse_double(qual, val);
        else if (qual == "grid.gamma_min") cfg.gamma_grid.min = parse_double(qual, val);
        else if (qual == "grid.gamma_max") cfg.gamma_grid.max = parse_double(qual, val);
        else if (qual == "grid.gamma_step") cfg.gamma_grid.step = parse_double(qual, val);
        else if (qual == "grid.Jz_min") cfg.jz_grid.min = parse_double(qual, val);
        else if (qual == "grid.Jz_max") cfg.jz_grid.max = parse_double(qual, val);
        else if (qual == "grid.Jz_step") cfg.jz_grid.step = parse_double(qual, val);
        else if (qual == "cut.gamma_min") cfg.cut_gamma.min = parse_double(qual, val);
        else if (qual == "cut.gamma_max") cfg.cut_gamma.max = parse_double(qual, val);
        else if (qual == "cut.gamma_step") cfg.cut_gamma.step = parse_double(qual, val);
        else if (qual == "observables.axes") {
            cfg.axes.clear();
            for (const auto& t : split(val, ',')) cfg.axes.push_back(axis_from_name(t));
        } else if (qual == "observables.cut") {
            if (val == "half") cfg.cut.reset();
            else cfg.cut = parse_int(qual, val);
        } else if (qual == "solver.backend") cfg.backend = backend_from_name(val);
        else if (qual == "solver.sector") cfg.sector = sector_from_name(val);
        else if (qual == "solver.chi_max") cfg.chi_max = parse_int(qual, val);
        else if (qual == "solver.max_sweeps") cfg.max_sweeps = parse_int(qual, val);
        else if (qual == "solver.variance_target") cfg.variance_target = parse_double(qual, val);
        else if (qual == "solver.lanczos_tol") cfg.lanczos_tol = parse_double(qual, val);
        else if (qual == "solver.ed_ceiling") cfg.ed_ceiling = parse_int(qual, val);
        else if (qual == "sampling.shot_counts") {
            cfg.shot_counts.clear();
            for (const auto& t : split(val, ',')) cfg.shot_counts.push_back(parse_int(qual, t));
        } else if (qual == "sampling.n_seeds") cfg.n_seeds = parse_int(qual, val);
        else if (qual == "sampling.shots_csv_in") cfg.shots_csv_in = val;
        else throw std::invalid_argument("config: unknown key '" + qual + "'");
    }
    cfg.validate();
    return cfg;
}

StudyConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("config: cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

std::string default_config_text() {
    return R"(# fluxlab study configuration (defaults)

[study]
kind = ground            # ground | scaling | phase_diagram | visibility_cut | sampling
out = out                # output directory
seed = 20240817          # master seed (solver starts, shot sampling)
workers = 0              # worker threads over parameter points; 0 = all cores

[chain]
L = 12                   # chain length; comma list for scaling studies
J = 1.0                  # exchange scale (J != 0; J < 0 flips the exchange sign)
gamma = 0.0              # anisotropy
Jz = 0.0                 # z coupling

[grid]                   # phase_diagram sweep
gamma_min = 0.0
gamma_max = 1.0
gamma_step = 0.1
Jz_min = -1.0
Jz_max = 1.0
Jz_step = 0.1

[cut]                    # visibility_cut sweep over gamma at fixed Jz
gamma_min = 0.0
gamma_max = 0.6
gamma_step = 0.05

[observables]
axes = x,y,z
cut = half               # bipartition size m, or "half"

[solver]
backend = auto           # ed | dmrg | auto (ed when L <= 20)
sector = even            # even | odd | full (ED parity sector)
chi_max = 128            # DMRG bond-dimension ceiling
max_sweeps = 50
variance_target = 1e-10  # DMRG energy-variance stop
lanczos_tol = 1e-10      # ED residual target
ed_ceiling = 20          # largest L served by ED (hard cap 24)

[sampling]
shot_counts = 100,1000,10000,100000
n_seeds = 20
shots_csv_in =           # optional: estimate from an existing shot CSV
)";
}

}  // namespace fluxlab::cli
