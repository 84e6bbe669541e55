#include "fluxlab/exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <fstream>
#include <functional>
#include <limits>

#include "fluxlab/lanczos.hpp"
#include "fluxlab/rng.hpp"

namespace fluxlab::exact {

using Complex = std::complex<double>;

// ---------------------------------------------------------------------------
// PureState

PureState PureState::basis_state(const ChainSpec& s, std::uint64_t index) {
    if (index >= s.dim()) throw std::invalid_argument("basis_state: index out of range");
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(s.dim());
    v(index) = 1.0;
    return PureState(s, std::move(v));
}

void PureState::normalize() {
    const double n = amplitudes.norm();
    if (n < 1e-300) throw std::runtime_error("PureState::normalize: zero vector");
    amplitudes /= n;
}

void PureState::canonicalize_phase() {
    Eigen::Index imax = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < amplitudes.size(); ++i) {
        const double a = std::abs(amplitudes(i));
        if (a > best + 1e-15) {
            best = a;
            imax = i;
        }
    }
    if (best <= 0) return;
    const Complex ph = amplitudes(imax) / best;
    amplitudes /= ph;
}

// ---------------------------------------------------------------------------
// Hamiltonian kernels
//
// In the z basis every matrix element of the XYZ chain is real:
//   diagonal      -Jz * sum_j s_j s_{j+1}
//   bit pair 01/10 flips with amplitude -J/4      (xx+yy channel)
//   bit pair 00/11 flips with amplitude -gamma/4  (xx-yy channel)

namespace {

template <typename Scalar>
void apply_full(const ChainSpec& spec, const XYZParams& p, const Scalar* in, Scalar* out) {
    const int L = spec.length;
    const std::uint64_t dim = spec.dim();
    const double a_anti = -p.J / 4.0;
    const double a_par = -p.gamma / 4.0;
    const double cz4 = -p.Jz / 4.0;
    const std::uint64_t bond_mask = (std::uint64_t{1} << (L - 1)) - 1;

    for (std::uint64_t t = 0; t < dim; ++t) {
        const std::uint64_t x = (t ^ (t >> 1)) & bond_mask;
        const double diag = cz4 * ((L - 1) - 2 * std::popcount(x));
        Scalar acc = diag * in[t];
        for (int j = 0; j < L - 1; ++j) {
            const unsigned b = (t >> j) & 3u;
            const double amp = (b == 1u || b == 2u) ? a_anti : a_par;
            if (amp != 0.0) acc += amp * in[t ^ (std::uint64_t{3} << j)];
        }
        out[t] = acc;
    }
}

template <bool Even>
void apply_sector_impl(const ChainSpec& spec, const XYZParams& p, const double* in, double* out) {
    const int L = spec.length;
    const std::uint64_t sdim = std::uint64_t{1} << (L - 1);
    const std::uint64_t low_mask = sdim - 1;
    const double a_anti = -p.J / 4.0;
    const double a_par = -p.gamma / 4.0;
    const double cz4 = -p.Jz / 4.0;
    const std::uint64_t bond_mask = (std::uint64_t{1} << (L - 1)) - 1;

    for (std::uint64_t r = 0; r < sdim; ++r) {
        const std::uint64_t par = static_cast<std::uint64_t>(std::popcount(r)) & 1u;
        const std::uint64_t top = Even ? par : (par ^ 1u);
        const std::uint64_t t = r | (top << (L - 1));
        const std::uint64_t x = (t ^ (t >> 1)) & bond_mask;
        const double diag = cz4 * ((L - 1) - 2 * std::popcount(x));
        double acc = diag * in[r];
        for (int j = 0; j < L - 1; ++j) {
            const unsigned b = (t >> j) & 3u;
            const double amp = (b == 1u || b == 2u) ? a_anti : a_par;
            if (amp != 0.0) acc += amp * in[(t ^ (std::uint64_t{3} << j)) & low_mask];
        }
        out[r] = acc;
    }
}

}  // namespace

PureState apply_hamiltonian(const PureState& state, const XYZParams& params) {
    params.validate();
    Eigen::VectorXcd out(state.amplitudes.size());
    apply_full<Complex>(state.spec, params, state.amplitudes.data(), out.data());
    return PureState(state.spec, std::move(out));
}

void apply_hamiltonian_real(const ChainSpec& spec, const XYZParams& params, const double* in,
                            double* out) {
    apply_full<double>(spec, params, in, out);
}

void apply_hamiltonian_sector(const ChainSpec& spec, const XYZParams& params, bool even,
                              const double* in, double* out) {
    if (even)
        apply_sector_impl<true>(spec, params, in, out);
    else
        apply_sector_impl<false>(spec, params, in, out);
}

// ---------------------------------------------------------------------------
// Dense oracle

Eigen::MatrixXd dense_hamiltonian(const ChainSpec& spec, const XYZParams& params) {
    if (spec.length > 10) throw std::invalid_argument("dense_hamiltonian: L <= 10 required");
    const auto dim = static_cast<Eigen::Index>(spec.dim());
    Eigen::MatrixXd H(dim, dim);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim), col(dim);
    for (Eigen::Index c = 0; c < dim; ++c) {
        e(c) = 1.0;
        apply_full<double>(spec, params, e.data(), col.data());
        H.col(c) = col;
        e(c) = 0.0;
    }
    return H;
}

std::vector<double> full_spectrum_small(const ChainSpec& spec, const XYZParams& params) {
    const Eigen::MatrixXd H = dense_hamiltonian(spec, params);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + H.rows());
    std::sort(ev.begin(), ev.end());
    return ev;
}

// ---------------------------------------------------------------------------
// Reduced density matrix and entropy

ReducedDensityMatrix reduced_density_matrix(const PureState& state, const Bipartition& omega,
                                            int omega_ceiling) {
    const int L = state.spec.length;
    const int m = omega.cut;
    if (m <= 0 || m >= L) throw std::invalid_argument("reduced_density_matrix: bad cut");
    if (m > omega_ceiling)
        throw std::invalid_argument("reduced_density_matrix: |Omega| exceeds ceiling");
    const auto d_a = static_cast<Eigen::Index>(std::uint64_t{1} << m);
    const auto d_b = static_cast<Eigen::Index>(std::uint64_t{1} << (L - m));
    // psi reshaped column-major: M(a, e) = psi[a + (e << m)]
    Eigen::Map<const Eigen::MatrixXcd> M(state.amplitudes.data(), d_a, d_b);
    Eigen::MatrixXcd rho = M * M.adjoint();
    rho = ((rho + rho.adjoint()) / 2.0).eval();
    return ReducedDensityMatrix{omega, std::move(rho)};
}

namespace {

double entropy_from_eigenvalues(const Eigen::VectorXd& lam) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        const double l = lam(i);
        if (l > 1e-14) s -= l * std::log(l);
    }
    return s;
}

// Entropy of a real state vector at a contiguous cut, tracing the larger
// side. Used heavily inside the degeneracy-resolution policy.
double entropy_real_cut(const Eigen::VectorXd& psi, int L, int cut) {
    const int m = std::min(cut, L - cut);
    const bool left = (m == cut);
    const auto d_a = static_cast<Eigen::Index>(std::uint64_t{1} << m);
    const auto d_b = static_cast<Eigen::Index>(psi.size() / d_a);
    Eigen::MatrixXd rho;
    if (left) {
        Eigen::Map<const Eigen::MatrixXd> M(psi.data(), d_a, d_b);
        rho = M * M.transpose();
    } else {
        Eigen::Map<const Eigen::MatrixXd> M(psi.data(), d_b, d_a);
        rho = M.transpose() * M;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rho, Eigen::EigenvaluesOnly);
    return entropy_from_eigenvalues(es.eigenvalues());
}

}  // namespace

double von_neumann_entropy(const ReducedDensityMatrix& rdm) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rdm.matrix, Eigen::EigenvaluesOnly);
    return entropy_from_eigenvalues(es.eigenvalues());
}

double entropy_at_cut(const PureState& state, const Bipartition& cut) {
    const int L = state.spec.length;
    if (cut.cut <= L - cut.cut) return von_neumann_entropy(reduced_density_matrix(state, cut));
    // trace the smaller right block; the spectrum is the same for a pure state
    Eigen::Map<const Eigen::MatrixXcd> M(state.amplitudes.data(),
                                         static_cast<Eigen::Index>(std::uint64_t{1} << cut.cut),
                                         static_cast<Eigen::Index>(std::uint64_t{1}
                                                                   << (L - cut.cut)));
    Eigen::MatrixXcd rho = M.transpose() * M.conjugate();
    rho = ((rho + rho.adjoint()) / 2.0).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    return entropy_from_eigenvalues(es.eigenvalues());
}

// ---------------------------------------------------------------------------
// Ground state with deterministic degeneracy resolution

namespace {

struct SectorSpace {
    ParitySector sector;
    int L;
    std::uint64_t dim;

    std::uint64_t unpack(std::uint64_t r) const {
        if (sector == ParitySector::Full) return r;
        return unpack_sector(r, L, sector == ParitySector::Even);
    }
};

double sz_of_basis(std::uint64_t s, int L) {
    return 0.5 * (L - 2 * std::popcount(s & ((std::uint64_t{1} << L) - 1)));
}

double dot_sz(const SectorSpace& sp, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    double acc = 0.0;
    for (std::uint64_t r = 0; r < sp.dim; ++r)
        acc += a(static_cast<Eigen::Index>(r)) * b(static_cast<Eigen::Index>(r)) *
               sz_of_basis(sp.unpack(r), sp.L);
    return acc;
}

double var_sz(const SectorSpace& sp, const Eigen::VectorXd& v) {
    double m1 = 0.0, m2 = 0.0;
    for (std::uint64_t r = 0; r < sp.dim; ++r) {
        const double w = v(static_cast<Eigen::Index>(r)) * v(static_cast<Eigen::Index>(r));
        const double m = sz_of_basis(sp.unpack(r), sp.L);
        m1 += w * m;
        m2 += w * m * m;
    }
    return m2 - m1 * m1;
}

Eigen::VectorXd embed_full(const SectorSpace& sp, const Eigen::VectorXd& v) {
    if (sp.sector == ParitySector::Full) return v;
    Eigen::VectorXd full = Eigen::VectorXd::Zero(std::int64_t{1} << sp.L);
    for (std::uint64_t r = 0; r < sp.dim; ++r)
        full(static_cast<Eigen::Index>(sp.unpack(r))) = v(static_cast<Eigen::Index>(r));
    return full;
}

double entropy_half_sector(const SectorSpace& sp, const Eigen::VectorXd& v) {
    const Eigen::VectorXd full = embed_full(sp, v);
    return entropy_real_cut(full, sp.L, sp.L / 2);
}

// Selection functional: half-cut entropy with a tiny total-Sz bias that
// breaks exact symmetry ties in a fixed direction.
double selection_score(const SectorSpace& sp, const Eigen::VectorXd& v) {
    return entropy_half_sector(sp, v) - 1e-9 * dot_sz(sp, v, v) /* <Sz> */;
}

Eigen::VectorXd resolve_manifold(const SectorSpace& sp,
                                 const std::vector<Eigen::VectorXd>& members) {
    const int g = static_cast<int>(members.size());

    // Tier A: projected total-Sz diagonalization. If the manifold is spanned
    // by Sz-definite states this reproduces them exactly.
    Eigen::MatrixXd proj(g, g);
    for (int a = 0; a < g; ++a)
        for (int b = a; b < g; ++b) proj(a, b) = proj(b, a) = dot_sz(sp, members[a], members[b]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(proj);

    std::vector<Eigen::VectorXd> candidates;
    candidates.reserve(g);
    bool conserved_like = true;
    for (int i = 0; i < g; ++i) {
        Eigen::VectorXd w = Eigen::VectorXd::Zero(members[0].size());
        for (int a = 0; a < g; ++a) w += es.eigenvectors()(a, i) * members[a];
        w.normalize();
        if (var_sz(sp, w) > 1e-6) conserved_like = false;
        candidates.push_back(std::move(w));
    }

    if (conserved_like) {
        int best = 0;
        double best_score = std::numeric_limits<double>::infinity();
        for (int i = 0; i < g; ++i) {
            const double s = selection_score(sp, candidates[i]);
            if (s < best_score - 1e-12) {
                best_score = s;
                best = i;
            }
        }
        return candidates[best];
    }

    // Tier B: minimize the selection functional over the manifold by
    // deterministic pairwise rotations.
    Eigen::VectorXd x = members[0];
    double fx = selection_score(sp, x);
    for (const auto& m : members) {
        const double f = selection_score(sp, m);
        if (f < fx - 1e-12) {
            x = m;
            fx = f;
        }
    }

    const int grid = sp.L >= 18 ? 24 : 48;
    for (int sweep = 0; sweep < 2; ++sweep) {
        for (int a = 0; a < g; ++a) {
            Eigen::VectorXd u = members[a];
            u -= x * x.dot(u);
            const double un = u.norm();
            if (un < 1e-8) continue;
            u /= un;
            double best_theta = 0.0, best_f = fx;
            for (int k = 1; k < grid; ++k) {
                const double theta = M_PI * (k - grid / 2) / grid;  // (-pi/2, pi/2)
                if (theta == 0.0) continue;
                Eigen::VectorXd y = std::cos(theta) * x + std::sin(theta) * u;
                const double f = selection_score(sp, y);
                if (f < best_f - 1e-12) {
                    best_f = f;
                    best_theta = theta;
                }
            }
            // golden-section polish around the best grid angle
            double lo = best_theta - M_PI / grid, hi = best_theta + M_PI / grid;
            const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
            double t1 = hi - gr * (hi - lo), t2 = lo + gr * (hi - lo);
            auto eval = [&](double th) {
                Eigen::VectorXd y = std::cos(th) * x + std::sin(th) * u;
                return selection_score(sp, y);
            };
            double f1 = eval(t1), f2 = eval(t2);
            for (int it = 0; it < 24; ++it) {
                if (f1 < f2) {
                    hi = t2;
                    t2 = t1;
                    f2 = f1;
                    t1 = hi - gr * (hi - lo);
                    f1 = eval(t1);
                } else {
                    lo = t1;
                    t1 = t2;
                    f1 = f2;
                    t2 = lo + gr * (hi - lo);
                    f2 = eval(t2);
                }
            }
            const double th = 0.5 * (lo + hi);
            Eigen::VectorXd y = std::cos(th) * x + std::sin(th) * u;
            const double fy = selection_score(sp, y);
            if (std::min(fy, best_f) < fx - 1e-12) {
                if (fy <= best_f) {
                    x = y;
                    fx = fy;
                } else {
                    x = std::cos(best_theta) * x + std::sin(best_theta) * u;
                    fx = best_f;
                }
                x.normalize();
            }
        }
    }
    return x;
}

}  // namespace

GroundStateResult ground_state_lanczos(const ChainSpec& spec, const XYZParams& params,
                                       ParitySector sector, const EdOptions& opts) {
    params.validate();
    const int L = spec.length;
    if (L < 2) throw std::invalid_argument("ground_state_lanczos: L >= 2 required");
    if (L > std::min(opts.ceiling, 24))
        throw std::invalid_argument("ground_state_lanczos: L exceeds the ED ceiling");
    if (!(opts.tol > 0)) throw std::invalid_argument("ground_state_lanczos: tol must be > 0");

    const SectorSpace sp{sector, L,
                         sector == ParitySector::Full ? spec.dim() : spec.dim() / 2};

    std::function<void(const double*, double*)> matvec;
    if (sector == ParitySector::Full)
        matvec = [&spec, &params](const double* in, double* out) {
            apply_full<double>(spec, params, in, out);
        };
    else
        matvec = [&spec, &params, sector](const double* in, double* out) {
            apply_hamiltonian_sector(spec, params, sector == ParitySector::Even, in, out);
        };

    LanczosSettings lset;
    lset.tol = opts.tol;
    lset.max_matvecs = opts.max_matvecs;
    lset.krylov_budget = opts.krylov_budget;

    auto start_vector = [&](std::uint64_t stream) {
        CounterRng rng(opts.seed, stream);
        Eigen::VectorXd v(static_cast<Eigen::Index>(sp.dim));
        for (std::uint64_t i = 0; i < sp.dim; ++i)
            v(static_cast<Eigen::Index>(i)) = rng.symmetric(i);
        return v;
    };

    GroundStateResult out{0.0, PureState::basis_state(spec, 0), 0.0};

    std::vector<Eigen::VectorXd> members;
    std::vector<double> energies;
    double max_residual = 0.0;
    int total_matvecs = 0;

    auto ground = lowest_eigenpair<double>(matvec, static_cast<std::int64_t>(sp.dim),
                                           start_vector(0), {}, lset);
    members.push_back(ground.vector);
    energies.push_back(ground.value);
    max_residual = ground.residual;
    total_matvecs = ground.matvecs;

    const double window = opts.degeneracy_window * std::max(1.0, std::abs(ground.value));

    // probe upward for quasi-degenerate partners
    while (static_cast<int>(members.size()) < opts.max_cluster &&
           members.size() < sp.dim) {
        LanczosSettings probe = lset;
        probe.tol = std::max(1e-5, lset.tol);
        LanczosResult<double> next;
        try {
            next = lowest_eigenpair<double>(matvec, static_cast<std::int64_t>(sp.dim),
                                            start_vector(members.size()), members, probe);
        } catch (const std::runtime_error&) {
            break;  // probe failure: treat the cluster as complete
        }
        total_matvecs += next.matvecs;
        if (next.value - energies.front() > std::max(2.0 * probe.tol, window)) {
            out.gap_above = next.value - energies.front();
            break;
        }
        if (probe.tol > lset.tol) {
            next = lowest_eigenpair<double>(matvec, static_cast<std::int64_t>(sp.dim),
                                            next.vector, members, lset);
            total_matvecs += next.matvecs;
        }
        if (next.value - energies.front() > window) {
            out.gap_above = next.value - energies.front();
            break;
        }
        members.push_back(next.vector);
        energies.push_back(next.value);
        max_residual = std::max(max_residual, next.residual);
    }

    Eigen::VectorXd chosen;
    if (members.size() == 1) {
        chosen = members.front();
    } else {
        chosen = resolve_manifold(sp, members);
        out.policy_resolved = true;
    }

    // energy and residual of the returned state
    Eigen::VectorXd hx(static_cast<Eigen::Index>(sp.dim));
    matvec(chosen.data(), hx.data());
    ++total_matvecs;
    const double energy = chosen.dot(hx);

    Eigen::VectorXd full = embed_full(sp, chosen);
    Eigen::VectorXcd amps = full.cast<Complex>();
    PureState state(spec, std::move(amps));
    state.normalize();
    state.canonicalize_phase();

    out.energy = energy;
    out.state = std::move(state);
    out.residual_norm = std::max(max_residual, (hx - energy * chosen).norm());
    out.matvecs = total_matvecs;
    out.cluster_dim = static_cast<int>(members.size());
    return out;
}

// ---------------------------------------------------------------------------
// Binary amplitude dump (little-endian host assumed; format is LE on disk)

static constexpr char kPsiMagic[9] = "FLUXPSI1";

void save_pure_state(const PureState& state, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("save_pure_state: cannot open " + path);
    f.write(kPsiMagic, 8);
    const std::uint64_t L = static_cast<std::uint64_t>(state.spec.length);
    f.write(reinterpret_cast<const char*>(&L), 8);
    for (Eigen::Index i = 0; i < state.amplitudes.size(); ++i) {
        const double re = state.amplitudes(i).real();
        const double im = state.amplitudes(i).imag();
        f.write(reinterpret_cast<const char*>(&re), 8);
        f.write(reinterpret_cast<const char*>(&im), 8);
    }
    if (!f) throw std::runtime_error("save_pure_state: write failed");
}

PureState load_pure_state(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("load_pure_state: cannot open " + path);
    char magic[8];
    f.read(magic, 8);
    if (!f || std::string(magic, 8) != std::string(kPsiMagic, 8))
        throw std::runtime_error("load_pure_state: bad magic");
    std::uint64_t L = 0;
    f.read(reinterpret_cast<char*>(&L), 8);
    if (!f || L < 2 || L > 30) throw std::runtime_error("load_pure_state: bad header");
    ChainSpec spec(static_cast<int>(L));
    Eigen::VectorXcd v(static_cast<Eigen::Index>(spec.dim()));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        double re = 0, im = 0;
        f.read(reinterpret_cast<char*>(&re), 8);
        f.read(reinterpret_cast<char*>(&im), 8);
        v(i) = Complex(re, im);
    }
    if (!f) throw std::runtime_error("load_pure_state: truncated file");
    return PureState(spec, std::move(v));
}

}  // namespace fluxlab::exact
