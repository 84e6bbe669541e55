#pragma once

// Matrix-free exact diagonalization backend: Hamiltonian application,
// sector-projected Lanczos ground states with a deterministic resolution of
// quasi-degenerate ground manifolds, reduced density matrices and von
// Neumann entropy.

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "fluxlab/model.hpp"

namespace fluxlab::exact {

struct PureState {
    ChainSpec spec;
    Eigen::VectorXcd amplitudes;

    PureState(ChainSpec s, Eigen::VectorXcd a) : spec(s), amplitudes(std::move(a)) {
        if (static_cast<std::uint64_t>(amplitudes.size()) != spec.dim())
            throw std::invalid_argument("PureState: amplitude count != 2^L");
    }

    static PureState basis_state(const ChainSpec& s, std::uint64_t index);

    double norm() const { return amplitudes.norm(); }
    void normalize();
    /// Global phase fixed so the largest-magnitude amplitude is real positive.
    void canonicalize_phase();
};

struct ReducedDensityMatrix {
    Bipartition omega;
    Eigen::MatrixXcd matrix;
};

struct EdOptions {
    double tol = 1e-12;               // residual target ||H psi - E psi||
    int max_matvecs = 2000;
    int krylov_budget = 64;
    std::uint64_t seed = 0x0F1DE5EEDULL;
    double degeneracy_window = 1e-9;  // relative, scaled by max(1,|E0|)
    int max_cluster = 12;
    int ceiling = 20;                 // configured L ceiling (hard cap 24)
};

struct GroundStateResult {
    double energy = 0.0;
    PureState state;
    double residual_norm = 0.0;
    int matvecs = 0;
    int cluster_dim = 1;          // quasi-degenerate ground manifold size
    bool policy_resolved = false; // manifold rotated by the selection policy
    double gap_above = 0.0;       // energy above the cluster, 0 if not probed
};

/// H|psi> for the open XYZ chain, term by term, no matrix materialized.
PureState apply_hamiltonian(const PureState& state, const XYZParams& params);

/// Real-arithmetic kernel on the full 2^L space (H is real symmetric in the
/// computational basis). Exposed for solver reuse and tests.
void apply_hamiltonian_real(const ChainSpec& spec, const XYZParams& params,
                            const double* in, double* out);

/// Lowest eigenpair within the requested parity sector. Quasi-degenerate
/// ground manifolds are resolved deterministically: Sz-definite members are
/// preferred (projected-Sz diagonalization), then minimal half-cut
/// entanglement entropy, with ties broken toward larger total Sz.
GroundStateResult ground_state_lanczos(const ChainSpec& spec, const XYZParams& params,
                                       ParitySector sector, const EdOptions& opts = {});

/// All 2^L eigenvalues, ascending. Dense; L <= 10.
std::vector<double> full_spectrum_small(const ChainSpec& spec, const XYZParams& params);

/// Dense Hamiltonian matrix, L <= 10. Oracle for property tests.
Eigen::MatrixXd dense_hamiltonian(const ChainSpec& spec, const XYZParams& params);

/// Partial trace over the complement of a contiguous left block.
ReducedDensityMatrix reduced_density_matrix(const PureState& state, const Bipartition& omega,
                                            int omega_ceiling = 14);

/// -sum lambda ln lambda, eigenvalues below 1e-14 skipped. Nats.
double von_neumann_entropy(const ReducedDensityMatrix& rdm);

/// Half-cut entropy convenience that traces out the larger side.
double entropy_at_cut(const PureState& state, const Bipartition& cut);

/// Binary amplitude dump: "FLUXPSI1", L as u64, then little-endian IEEE-754
/// (re, im) pairs.
void save_pure_state(const PureState& state, const std::string& path);
PureState load_pure_state(const std::string& path);

// --- parity-sector packing -------------------------------------------------
// A sector state is stored on the 2^{L-1} free low bits; the top bit is the
// parity completion. unpack_sector(pack) is the identity on sector members.

inline std::uint64_t unpack_sector(std::uint64_t r, int L, bool even) {
    const std::uint64_t par = static_cast<std::uint64_t>(__builtin_popcountll(r)) & 1u;
    const std::uint64_t top = even ? par : (par ^ 1u);
    return r | (top << (L - 1));
}

/// Kernel acting on a packed parity sector.
void apply_hamiltonian_sector(const ChainSpec& spec, const XYZParams& params, bool even,
                              const double* in, double* out);

}  // namespace fluxlab::exact
