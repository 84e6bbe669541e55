#pragma once

// Matrix-product-state backend: XYZ MPO construction, two-site DMRG with
// truncated Schmidt decompositions, energy variance, Schmidt-cut entropy,
// expectation values and dense-state conversion for cross-checks.
//
// Conventions: site tensor A[j] is stored as two chi_l x chi_r matrices,
// one per physical index (0 = up). The amplitude of basis state
// (p_0 .. p_{L-1}) is the product A[0][p_0] ... A[L-1][p_{L-1}] with
// boundary bond dimension 1. MPO site tensors are (wl x wr) grids of 2x2
// matrices indexed (out, in).

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fluxlab/exact.hpp"
#include "fluxlab/fluctuations.hpp"
#include "fluxlab/model.hpp"

namespace fluxlab::mps {

using Complex = std::complex<double>;
using Tensor = std::array<Eigen::MatrixXcd, 2>;

struct MPSState {
    ChainSpec spec;
    std::vector<Tensor> tensors;
    int center = 0;  // canonical center site; left of it left-isometric, right of it right-isometric

    explicit MPSState(const ChainSpec& s) : spec(s), tensors(s.length) {}

    int length() const { return spec.length; }
    int bond_dim(int bond) const;  // bond in [0, L]; boundary bonds are 1
    int max_bond_dim() const;
    double norm() const;

    /// Product state |p_0 p_1 ...> with bits of `pattern` giving p_j.
    static MPSState product_state(const ChainSpec& s, std::uint64_t pattern);

    /// Deterministic random MPS with the requested bond dimension,
    /// canonicalized and normalized.
    static MPSState random(const ChainSpec& s, int chi, std::uint64_t seed);

    /// Compression of a dense state by successive SVDs (L <= 16).
    static MPSState from_dense(const exact::PureState& state, int chi_max,
                               double discard_weight = 1e-14);

    /// Move the canonical center, QR-orthogonalizing along the way.
    void move_center_to(int site);
};

struct MpoSite {
    int wl = 0, wr = 0;
    std::vector<Eigen::Matrix2cd> ops;  // wl*wr, row-major (a*wr + b)

    Eigen::Matrix2cd& at(int a, int b) { return ops[a * wr + b]; }
    const Eigen::Matrix2cd& at(int a, int b) const { return ops[a * wr + b]; }
    bool nonzero(int a, int b) const { return ops[a * wr + b].cwiseAbs().sum() > 0; }
};

struct MPOOperator {
    ChainSpec spec;
    std::vector<MpoSite> sites;

    explicit MPOOperator(const ChainSpec& s) : spec(s), sites(s.length) {}

    /// Dense 2^L x 2^L reconstruction, L <= 10. Oracle for tests.
    Eigen::MatrixXcd to_dense() const;
};

/// Nearest-neighbor finite-state-automaton MPO of the XYZ chain; bulk bond
/// dimension 5.
MPOOperator build_xyz_mpo(const ChainSpec& spec, const XYZParams& params);

struct DmrgOptions {
    int chi_max = 128;
    int max_sweeps = 50;
    double variance_target = 1e-10;
    double discard_weight = 1e-12;
    double energy_tol = 1e-12;         // |dE| sweep-to-sweep stop
    std::uint64_t seed = 0xD31A6EULL;  // reserved for stochastic extensions
    std::optional<std::uint64_t> start_pattern;  // default: even-parity staggered
};

struct DmrgReport {
    std::vector<double> sweep_energy;
    std::vector<double> sweep_truncation;  // max discarded weight per sweep
    double final_variance = 0.0;
    int sweeps = 0;
    bool converged = false;
    std::string stop_reason;  // "variance" | "energy" | "max_sweeps"
    double parity_expectation = 0.0;
    bool parity_mixed = false;  // |<P>| < 0.99 flags sector mixing
};

struct DmrgResult {
    double energy = 0.0;
    MPSState state;
    DmrgReport report;
};

DmrgResult dmrg_ground_state(const MPOOperator& mpo, const DmrgOptions& opts = {});

/// <H^2> - <H>^2 by contracting two MPO layers.
double energy_variance(const MPSState& mps, const MPOOperator& mpo);

/// -sum s^2 ln s^2 over Schmidt values at the cut bond.
double schmidt_entropy(const MPSState& mps, const Bipartition& cut);
Eigen::VectorXd schmidt_values(const MPSState& mps, int bond);

/// <S^a_site> and <S^a_i S^a_j>.
double mps_expectation(const MPSState& mps, SpinAxis axis, int site);
double mps_expectation(const MPSState& mps, SpinAxis axis, int i, int j);

/// Global spin-flip parity <prod_j sigma^z_j>.
double parity_expectation(const MPSState& mps);

/// Amplitude-by-amplitude contraction, L <= 16.
exact::PureState mps_to_dense(const MPSState& mps);

/// Checkpoint: "FLUXMPS1", L as u64, then per site three u64 dims
/// (chi_l, 2, chi_r) and column-major (re, im) doubles per physical block.
void save_mps(const MPSState& mps, const std::string& path);
MPSState load_mps(const std::string& path);

/// Expectation backend adapter for the fluctuations module. Builds per-axis
/// one- and two-point tables once (O(L^2 chi^3)) and serves lookups.
class MpsBackend final : public fluctuations::ExpectationBackend {
  public:
    explicit MpsBackend(const MPSState& mps);
    int length() const override { return mps_.length(); }
    double onsite(SpinAxis axis, int site) const override;
    double two_site(SpinAxis axis, int i, int j) const override;
    double entropy(const Bipartition& cut) const override;
    std::string tag() const override { return "mps"; }

  private:
    void ensure_axis(SpinAxis axis) const;

    MPSState mps_;
    mutable std::array<bool, 3> have_{{false, false, false}};
    mutable std::array<Eigen::VectorXd, 3> onsite_;
    mutable std::array<Eigen::MatrixXd, 3> pair_;
};

}  // namespace fluxlab::mps
