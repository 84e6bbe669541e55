#include "fluxlab/mps.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>

#include "fluxlab/lanczos.hpp"
#include "fluxlab/rng.hpp"

namespace fluxlab::mps {

namespace {

Eigen::Matrix2cd spin_matrix(SpinAxis axis) {
    Eigen::Matrix2cd m;
    switch (axis) {
        case SpinAxis::X: m << 0.0, 0.5, 0.5, 0.0; break;
        case SpinAxis::Y: m << 0.0, Complex(0, -0.5), Complex(0, 0.5), 0.0; break;
        case SpinAxis::Z: m << 0.5, 0.0, 0.0, -0.5; break;
    }
    return m;
}

// stacked-by-physical reshape used for QR / SVD moves: row = p*chi_l + alpha
Eigen::MatrixXcd stack_rows(const Tensor& A) {
    const auto rl = A[0].rows(), rc = A[0].cols();
    Eigen::MatrixXcd M(2 * rl, rc);
    M.topRows(rl) = A[0];
    M.bottomRows(rl) = A[1];
    return M;
}

Eigen::MatrixXcd stack_cols(const Tensor& A) {
    const auto rl = A[0].rows(), rc = A[0].cols();
    Eigen::MatrixXcd M(rl, 2 * rc);
    M.leftCols(rc) = A[0];
    M.rightCols(rc) = A[1];
    return M;
}

struct Svd {
    Eigen::MatrixXcd U, V;
    Eigen::VectorXd s;
};

Svd svd_of(const Eigen::MatrixXcd& M) {
    Svd out;
    if (M.rows() <= 32 || M.cols() <= 32) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
        out.U = svd.matrixU();
        out.V = svd.matrixV();
        out.s = svd.singularValues();
    } else {
        Eigen::BDCSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
        out.U = svd.matrixU();
        out.V = svd.matrixV();
        out.s = svd.singularValues();
    }
    return out;
}

// Schmidt truncation rule: keep the smaller of chi_max and the count that
// leaves discarded weight (sum of dropped s^2) at or below the threshold.
int truncation_rank(const Eigen::VectorXd& s, int chi_max, double discard_weight) {
    const double total = std::max(s.squaredNorm(), 1e-300);
    int keep = static_cast<int>(s.size());
    double tail = 0.0;
    for (int i = static_cast<int>(s.size()) - 1; i >= 1; --i) {
        tail += s(i) * s(i);
        if (tail > discard_weight * total) break;
        keep = i;
    }
    return std::max(1, std::min(keep, chi_max));
}

}  // namespace

// ---------------------------------------------------------------------------
// MPSState basics

int MPSState::bond_dim(int bond) const {
    if (bond <= 0) return static_cast<int>(tensors.front()[0].rows());
    if (bond >= length()) return static_cast<int>(tensors.back()[0].cols());
    return static_cast<int>(tensors[bond][0].rows());
}

int MPSState::max_bond_dim() const {
    int m = 1;
    for (int b = 0; b <= length(); ++b) m = std::max(m, bond_dim(b));
    return m;
}

double MPSState::norm() const {
    Eigen::MatrixXcd E = Eigen::MatrixXcd::Identity(tensors[0][0].rows(), tensors[0][0].rows());
    for (const auto& A : tensors) {
        Eigen::MatrixXcd next = Eigen::MatrixXcd::Zero(A[0].cols(), A[0].cols());
        for (int p = 0; p < 2; ++p) next += A[p].adjoint() * E * A[p];
        E = std::move(next);
    }
    return std::sqrt(std::abs(E(0, 0).real()));
}

MPSState MPSState::product_state(const ChainSpec& s, std::uint64_t pattern) {
    MPSState out(s);
    for (int j = 0; j < s.length; ++j) {
        const int bit = static_cast<int>((pattern >> j) & 1u);
        for (int p = 0; p < 2; ++p) {
            out.tensors[j][p] = Eigen::MatrixXcd::Zero(1, 1);
            if (p == bit) out.tensors[j][p](0, 0) = 1.0;
        }
    }
    out.center = 0;
    return out;
}

MPSState MPSState::random(const ChainSpec& s, int chi, std::uint64_t seed) {
    if (chi < 1) throw std::invalid_argument("MPSState::random: chi >= 1");
    MPSState out(s);
    CounterRng rng(seed, 0xA11CE);
    std::uint64_t ctr = 0;
    const int L = s.length;
    auto bdim = [&](int bond) {
        const double cap_l = std::pow(2.0, std::min(bond, 30));
        const double cap_r = std::pow(2.0, std::min(L - bond, 30));
        return static_cast<int>(std::min({static_cast<double>(chi), cap_l, cap_r}));
    };
    for (int j = 0; j < L; ++j) {
        const int dl = bdim(j), dr = bdim(j + 1);
        for (int p = 0; p < 2; ++p) {
            out.tensors[j][p].resize(dl, dr);
            for (int c = 0; c < dr; ++c)
                for (int r = 0; r < dl; ++r)
                    out.tensors[j][p](r, c) = Complex(rng.symmetric(ctr++), rng.symmetric(ctr++));
        }
    }
    out.center = L - 1;
    out.move_center_to(0);
    const double nrm = std::sqrt(out.tensors[0][0].squaredNorm() + out.tensors[0][1].squaredNorm());
    out.tensors[0][0] /= nrm;
    out.tensors[0][1] /= nrm;
    return out;
}

void MPSState::move_center_to(int site) {
    const int L = length();
    if (site < 0 || site >= L) throw std::invalid_argument("move_center_to: site out of range");
    while (center < site) {
        const int c = center;
        Eigen::MatrixXcd M = stack_rows(tensors[c]);
        Eigen::HouseholderQR<Eigen::MatrixXcd> qr(M);
        const auto k = std::min(M.rows(), M.cols());
        Eigen::MatrixXcd Q = qr.householderQ() * Eigen::MatrixXcd::Identity(M.rows(), k);
        Eigen::MatrixXcd R = qr.matrixQR()
                                 .topLeftCorner(k, M.cols())
                                 .template triangularView<Eigen::Upper>();
        const auto rl = tensors[c][0].rows();
        tensors[c][0] = Q.topRows(rl);
        tensors[c][1] = Q.bottomRows(rl);
        for (int p = 0; p < 2; ++p) tensors[c + 1][p] = (R * tensors[c + 1][p]).eval();
        ++center;
    }
    while (center > site) {
        const int c = center;
        Eigen::MatrixXcd M = stack_cols(tensors[c]);
        Eigen::HouseholderQR<Eigen::MatrixXcd> qr(M.adjoint());
        const auto k = std::min(M.rows(), M.cols());
        Eigen::MatrixXcd Q = qr.householderQ() * Eigen::MatrixXcd::Identity(M.cols(), k);
        Eigen::MatrixXcd Rt = qr.matrixQR()
                                  .topLeftCorner(k, M.rows())
                                  .template triangularView<Eigen::Upper>();
        Eigen::MatrixXcd Qh = Q.adjoint();     // k x (2 chi_r), orthonormal rows
        Eigen::MatrixXcd Lm = Rt.adjoint();    // chi_l x k
        const auto rc = tensors[c][0].cols();
        tensors[c][0] = Qh.leftCols(rc);
        tensors[c][1] = Qh.rightCols(rc);
        for (int p = 0; p < 2; ++p) tensors[c - 1][p] = (tensors[c - 1][p] * Lm).eval();
        --center;
    }
}

MPSState MPSState::from_dense(const exact::PureState& state, int chi_max, double discard_weight) {
    const int L = state.spec.length;
    if (L > 16) throw std::invalid_argument("from_dense: L <= 16 required");
    MPSState out(state.spec);

    Eigen::MatrixXcd carry = Eigen::Map<const Eigen::MatrixXcd>(
        state.amplitudes.data(), 2, static_cast<Eigen::Index>(state.spec.dim() / 2));
    for (int j = 0; j < L - 1; ++j) {
        const auto chi_l = carry.rows() / 2;
        Svd svd = svd_of(carry);
        const int keep = truncation_rank(svd.s, chi_max, discard_weight);
        out.tensors[j][0] = svd.U.topRows(chi_l).leftCols(keep);
        out.tensors[j][1] = svd.U.bottomRows(chi_l).leftCols(keep);
        Eigen::MatrixXcd rest = svd.s.head(keep).asDiagonal() * svd.V.leftCols(keep).adjoint();
        if (j == L - 2) {
            out.tensors[L - 1][0] = rest.col(0);
            out.tensors[L - 1][1] = rest.col(1);
        } else {
            const auto cols = rest.cols() / 2;
            Eigen::MatrixXcd next(2 * keep, cols);
            for (Eigen::Index c = 0; c < cols; ++c)
                for (int p = 0; p < 2; ++p)
                    next.block(p * keep, c, keep, 1) = rest.col(2 * c + p);
            carry = std::move(next);
        }
    }
    out.center = L - 1;
    return out;
}

// ---------------------------------------------------------------------------
// MPO

MPOOperator build_xyz_mpo(const ChainSpec& spec, const XYZParams& params) {
    params.validate();
    const int L = spec.length;
    MPOOperator mpo(spec);
    const Eigen::Matrix2cd I2 = Eigen::Matrix2cd::Identity();
    const Eigen::Matrix2cd Sx = spin_matrix(SpinAxis::X);
    const Eigen::Matrix2cd Sy = spin_matrix(SpinAxis::Y);
    const Eigen::Matrix2cd Sz = spin_matrix(SpinAxis::Z);
    const double cx = params.cx(), cy = params.cy(), cz = params.cz();

    MpoSite bulk;
    bulk.wl = bulk.wr = 5;
    bulk.ops.assign(25, Eigen::Matrix2cd::Zero());
    bulk.at(0, 0) = I2;
    bulk.at(0, 1) = Sx;
    bulk.at(0, 2) = Sy;
    bulk.at(0, 3) = Sz;
    bulk.at(1, 4) = cx * Sx;
    bulk.at(2, 4) = cy * Sy;
    bulk.at(3, 4) = cz * Sz;
    bulk.at(4, 4) = I2;

    for (int j = 0; j < L; ++j) {
        if (j == 0) {
            MpoSite site;
            site.wl = 1;
            site.wr = 5;
            site.ops.assign(5, Eigen::Matrix2cd::Zero());
            for (int c = 0; c < 5; ++c) site.at(0, c) = bulk.at(0, c);
            mpo.sites[j] = std::move(site);
        } else if (j == L - 1) {
            MpoSite site;
            site.wl = 5;
            site.wr = 1;
            site.ops.assign(5, Eigen::Matrix2cd::Zero());
            for (int r = 0; r < 5; ++r) site.at(r, 0) = bulk.at(r, 4);
            mpo.sites[j] = std::move(site);
        } else {
            mpo.sites[j] = bulk;
        }
    }
    return mpo;
}

Eigen::MatrixXcd MPOOperator::to_dense() const {
    if (spec.length > 10) throw std::invalid_argument("MPO::to_dense: L <= 10 required");
    std::vector<Eigen::MatrixXcd> cur(1, Eigen::MatrixXcd::Ones(1, 1));
    for (const auto& site : sites) {
        const auto D = cur[0].rows();
        std::vector<Eigen::MatrixXcd> next(site.wr, Eigen::MatrixXcd::Zero(2 * D, 2 * D));
        for (int b1 = 0; b1 < site.wl; ++b1)
            for (int b2 = 0; b2 < site.wr; ++b2) {
                if (!site.nonzero(b1, b2)) continue;
                const auto& op = site.at(b1, b2);
                for (int po = 0; po < 2; ++po)
                    for (int pi = 0; pi < 2; ++pi)
                        if (op(po, pi) != 0.0) next[b2].block(po * D, pi * D, D, D) += op(po, pi) * cur[b1];
            }
        cur = std::move(next);
    }
    return cur[0];
}

// ---------------------------------------------------------------------------
// Environments

namespace {

using EnvBlock = std::vector<Eigen::MatrixXcd>;  // one matrix per MPO bond index

// Lenv[b](bra, ket); transfer absorbs site j from the left.
EnvBlock transfer_left(const EnvBlock& env, const MpoSite& W, const Tensor& A) {
    const auto dr = A[0].cols();
    EnvBlock out(W.wr, Eigen::MatrixXcd::Zero(dr, dr));
    for (int b1 = 0; b1 < W.wl; ++b1) {
        std::array<Eigen::MatrixXcd, 2> EA;
        bool computed = false;
        for (int b2 = 0; b2 < W.wr; ++b2) {
            if (!W.nonzero(b1, b2)) continue;
            if (!computed) {
                for (int p = 0; p < 2; ++p) EA[p] = env[b1] * A[p];
                computed = true;
            }
            const auto& op = W.at(b1, b2);
            for (int po = 0; po < 2; ++po)
                for (int pi = 0; pi < 2; ++pi)
                    if (op(po, pi) != 0.0) out[b2] += op(po, pi) * (A[po].adjoint() * EA[pi]);
        }
    }
    return out;
}

// Renv[b](ket, bra); transfer absorbs site j from the right.
EnvBlock transfer_right(const EnvBlock& env, const MpoSite& W, const Tensor& A) {
    const auto dl = A[0].rows();
    EnvBlock out(W.wl, Eigen::MatrixXcd::Zero(dl, dl));
    for (int b2 = 0; b2 < W.wr; ++b2) {
        std::array<Eigen::MatrixXcd, 2> AE;
        bool computed = false;
        for (int b1 = 0; b1 < W.wl; ++b1) {
            if (!W.nonzero(b1, b2)) continue;
            if (!computed) {
                for (int p = 0; p < 2; ++p) AE[p] = A[p] * env[b2];
                computed = true;
            }
            const auto& op = W.at(b1, b2);
            for (int po = 0; po < 2; ++po)
                for (int pi = 0; pi < 2; ++pi)
                    if (op(po, pi) != 0.0) out[b1] += op(po, pi) * (AE[pi] * A[po].adjoint());
        }
    }
    return out;
}

// Effective two-site Hamiltonian: X and Y are arrays of 4 chi_l x chi_r
// blocks indexed p0*2 + p1.
struct TwoSiteProblem {
    const EnvBlock* lenv;
    const EnvBlock* renv;
    const MpoSite* w0;
    const MpoSite* w1;
    Eigen::Index chi_l, chi_r;

    Eigen::Index dim() const { return 4 * chi_l * chi_r; }

    void apply(const Complex* in, Complex* out) const {
        using Mat = Eigen::MatrixXcd;
        const int wm = w0->wr;
        const int wl = w0->wl;
        const int wr = w1->wr;
        std::array<Eigen::Map<const Mat>, 4> X{
            Eigen::Map<const Mat>(in, chi_l, chi_r),
            Eigen::Map<const Mat>(in + chi_l * chi_r, chi_l, chi_r),
            Eigen::Map<const Mat>(in + 2 * chi_l * chi_r, chi_l, chi_r),
            Eigen::Map<const Mat>(in + 3 * chi_l * chi_r, chi_l, chi_r)};

        // T[bl][p0][p1] = Lenv[bl] * X[p0][p1]
        std::vector<std::array<Mat, 4>> T(wl);
        for (int b = 0; b < wl; ++b)
            for (int q = 0; q < 4; ++q) T[b][q] = (*lenv)[b] * X[q];

        // U[bm][p0'][p1] = sum_{bl,p0} W0(bl,bm)(p0',p0) T[bl][p0][p1]
        std::vector<std::array<Mat, 4>> U(wm);
        for (int bm = 0; bm < wm; ++bm)
            for (int q = 0; q < 4; ++q) U[bm][q] = Mat::Zero(chi_l, chi_r);
        for (int bl = 0; bl < wl; ++bl)
            for (int bm = 0; bm < wm; ++bm) {
                if (!w0->nonzero(bl, bm)) continue;
                const auto& op = w0->at(bl, bm);
                for (int po = 0; po < 2; ++po)
                    for (int pi = 0; pi < 2; ++pi) {
                        if (op(po, pi) == 0.0) continue;
                        for (int p1 = 0; p1 < 2; ++p1)
                            U[bm][po * 2 + p1] += op(po, pi) * T[bl][pi * 2 + p1];
                    }
            }

        // V[br][p0'][p1'] = sum_{bm,p1} W1(bm,br)(p1',p1) U[bm][p0'][p1]
        std::vector<std::array<Mat, 4>> V(wr);
        for (int br = 0; br < wr; ++br)
            for (int q = 0; q < 4; ++q) V[br][q] = Mat::Zero(chi_l, chi_r);
        for (int bm = 0; bm < wm; ++bm)
            for (int br = 0; br < wr; ++br) {
                if (!w1->nonzero(bm, br)) continue;
                const auto& op = w1->at(bm, br);
                for (int po = 0; po < 2; ++po)
                    for (int pi = 0; pi < 2; ++pi) {
                        if (op(po, pi) == 0.0) continue;
                        for (int p0 = 0; p0 < 2; ++p0)
                            V[br][p0 * 2 + po] += op(po, pi) * U[bm][p0 * 2 + pi];
                    }
            }

        // Y[q] = sum_br V[br][q] * Renv[br]
        for (int q = 0; q < 4; ++q) {
            Eigen::Map<Mat> Y(out + q * chi_l * chi_r, chi_l, chi_r);
            Y.setZero();
            for (int br = 0; br < wr; ++br) Y += V[br][q] * (*renv)[br];
        }
    }
};

double entropy_from_schmidt(const Eigen::VectorXd& s) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        const double w = s(i) * s(i);
        if (w > 1e-14) acc -= w * std::log(w);
    }
    return acc;
}

}  // namespace

// ---------------------------------------------------------------------------
// DMRG

DmrgResult dmrg_ground_state(const MPOOperator& mpo, const DmrgOptions& opts) {
    const int L = mpo.spec.length;
    if (opts.chi_max < 2) throw std::invalid_argument("dmrg: chi_max >= 2 required");
    if (!(opts.variance_target > 0))
        throw std::invalid_argument("dmrg: variance_target must be > 0");

    // even-parity near-staggered start: down spins on odd sites, the last one
    // flipped back up when L/2 is odd
    std::uint64_t pattern = 0;
    if (opts.start_pattern) {
        pattern = *opts.start_pattern;
    } else {
        int downs = 0;
        for (int j = 1; j < L; j += 2) {
            pattern |= (std::uint64_t{1} << j);
            ++downs;
        }
        if (downs % 2 == 1) pattern &= ~(std::uint64_t{1} << (2 * (downs - 1) + 1));
    }

    DmrgResult res{0.0, MPSState::product_state(mpo.spec, pattern), {}};
    MPSState& psi = res.state;
    psi.move_center_to(0);

    // environments per bond
    std::vector<EnvBlock> lenv(L + 1), renv(L + 1);
    lenv[0] = EnvBlock(1, Eigen::MatrixXcd::Ones(1, 1));
    renv[L] = EnvBlock(1, Eigen::MatrixXcd::Ones(1, 1));
    for (int j = L - 1; j >= 1; --j)
        renv[j] = transfer_right(renv[j + 1], mpo.sites[j], psi.tensors[j]);

    double energy = 0.0;
    double prev_energy = std::numeric_limits<double>::quiet_NaN();

    auto update_bond = [&](int j, bool to_right, double& trunc_max) {
        const auto chi_l = psi.tensors[j][0].rows();
        const auto chi_r = psi.tensors[j + 1][0].cols();
        TwoSiteProblem prob{&lenv[j], &renv[j + 2], &mpo.sites[j], &mpo.sites[j + 1], chi_l,
                            chi_r};

        Eigen::VectorXcd theta(prob.dim());
        for (int p0 = 0; p0 < 2; ++p0)
            for (int p1 = 0; p1 < 2; ++p1) {
                Eigen::Map<Eigen::MatrixXcd> blk(theta.data() + (p0 * 2 + p1) * chi_l * chi_r,
                                                 chi_l, chi_r);
                blk = psi.tensors[j][p0] * psi.tensors[j + 1][p1];
            }
        theta.normalize();

        Eigen::VectorXcd ground;
        if (prob.dim() <= 64) {
            // exact dense solve; also reaches states a parity-definite start
            // cannot couple to through the local Krylov space
            Eigen::MatrixXcd heff(prob.dim(), prob.dim());
            Eigen::VectorXcd e = Eigen::VectorXcd::Zero(prob.dim()), col(prob.dim());
            for (Eigen::Index c = 0; c < prob.dim(); ++c) {
                e(c) = 1.0;
                prob.apply(e.data(), col.data());
                heff.col(c) = col;
                e(c) = 0.0;
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(heff);
            energy = es.eigenvalues()(0);
            ground = es.eigenvectors().col(0);
        } else {
            LanczosSettings ls;
            ls.tol = 1e-11 * std::max(1.0, std::abs(energy));
            ls.krylov_budget = static_cast<int>(std::min<Eigen::Index>(prob.dim(), 24));
            ls.max_matvecs = 240;
            ls.throw_on_fail = false;
            auto sol = lowest_eigenpair<Complex>(
                [&prob](const Complex* in, Complex* out) { prob.apply(in, out); }, prob.dim(),
                theta, {}, ls);
            energy = sol.value;
            ground = std::move(sol.vector);
        }

        // split; row = p0*chi_l + alpha, col = p1*chi_r + beta
        Eigen::MatrixXcd M(2 * chi_l, 2 * chi_r);
        for (int p0 = 0; p0 < 2; ++p0)
            for (int p1 = 0; p1 < 2; ++p1)
                M.block(p0 * chi_l, p1 * chi_r, chi_l, chi_r) =
                    Eigen::Map<const Eigen::MatrixXcd>(
                        ground.data() + (p0 * 2 + p1) * chi_l * chi_r, chi_l, chi_r);

        Svd svd = svd_of(M);
        const int keep = truncation_rank(svd.s, opts.chi_max, opts.discard_weight);
        const double total = std::max(svd.s.squaredNorm(), 1e-300);
        double kept = 0.0;
        for (int i = 0; i < keep; ++i) kept += svd.s(i) * svd.s(i);
        trunc_max = std::max(trunc_max, 1.0 - kept / total);

        Eigen::VectorXd s = svd.s.head(keep) / std::sqrt(kept);
        if (to_right) {
            for (int p0 = 0; p0 < 2; ++p0)
                psi.tensors[j][p0] = svd.U.block(p0 * chi_l, 0, chi_l, keep);
            Eigen::MatrixXcd SV = s.cast<Complex>().asDiagonal() * svd.V.leftCols(keep).adjoint();
            for (int p1 = 0; p1 < 2; ++p1)
                psi.tensors[j + 1][p1] = SV.middleCols(p1 * chi_r, chi_r);
            psi.center = j + 1;
            lenv[j + 1] = transfer_left(lenv[j], mpo.sites[j], psi.tensors[j]);
        } else {
            Eigen::MatrixXcd US = svd.U.leftCols(keep) * s.cast<Complex>().asDiagonal();
            for (int p0 = 0; p0 < 2; ++p0)
                psi.tensors[j][p0] = US.middleRows(p0 * chi_l, chi_l);
            for (int p1 = 0; p1 < 2; ++p1)
                psi.tensors[j + 1][p1] =
                    svd.V.leftCols(keep).adjoint().middleCols(p1 * chi_r, chi_r);
            psi.center = j;
            renv[j + 1] = transfer_right(renv[j + 2], mpo.sites[j + 1], psi.tensors[j + 1]);
        }
    };

    DmrgReport& rep = res.report;
    for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
        double trunc_max = 0.0;
        for (int j = 0; j <= L - 2; ++j) update_bond(j, true, trunc_max);
        for (int j = L - 2; j >= 0; --j) update_bond(j, false, trunc_max);

        rep.sweep_energy.push_back(energy);
        rep.sweep_truncation.push_back(trunc_max);
        rep.sweeps = sweep;

        const double variance = energy_variance(psi, mpo);
        rep.final_variance = variance;
        if (variance <= opts.variance_target) {
            rep.converged = true;
            rep.stop_reason = "variance";
            break;
        }
        if (!std::isnan(prev_energy) && std::abs(energy - prev_energy) < opts.energy_tol) {
            rep.converged = true;
            rep.stop_reason = "energy";
            break;
        }
        prev_energy = energy;
        if (sweep == opts.max_sweeps) rep.stop_reason = "max_sweeps";
    }

    rep.parity_expectation = parity_expectation(psi);
    rep.parity_mixed = std::abs(rep.parity_expectation) < 0.99;
    res.energy = energy;
    return res;
}

double energy_variance(const MPSState& psi, const MPOOperator& mpo) {
    const int L = psi.length();
    // <H>
    EnvBlock e1(1, Eigen::MatrixXcd::Ones(1, 1));
    for (int j = 0; j < L; ++j) e1 = transfer_left(e1, mpo.sites[j], psi.tensors[j]);
    const double eh = e1[0](0, 0).real();

    // <H^2>: two MPO layers
    const int w0 = 1;
    std::vector<Eigen::MatrixXcd> T(w0 * w0, Eigen::MatrixXcd::Ones(1, 1));
    int wl = 1;
    for (int j = 0; j < L; ++j) {
        const auto& W = mpo.sites[j];
        const auto& A = psi.tensors[j];
        const int wr = W.wr;
        const auto dr = A[0].cols();
        std::vector<Eigen::MatrixXcd> next(wr * wr, Eigen::MatrixXcd::Zero(dr, dr));
        for (int b1 = 0; b1 < wl; ++b1)
            for (int b2 = 0; b2 < wl; ++b2) {
                const auto& Tb = T[b1 * wl + b2];
                if (Tb.cwiseAbs().sum() == 0.0) continue;
                std::array<Eigen::MatrixXcd, 2> TA;
                for (int p = 0; p < 2; ++p) TA[p] = Tb * A[p];
                std::array<std::array<Eigen::MatrixXcd, 2>, 2> ATA;
                for (int po = 0; po < 2; ++po)
                    for (int p = 0; p < 2; ++p) ATA[po][p] = A[po].adjoint() * TA[p];
                for (int c1 = 0; c1 < wr; ++c1) {
                    if (!W.nonzero(b1, c1)) continue;
                    for (int c2 = 0; c2 < wr; ++c2) {
                        if (!W.nonzero(b2, c2)) continue;
                        const Eigen::Matrix2cd P = W.at(b1, c1) * W.at(b2, c2);
                        for (int po = 0; po < 2; ++po)
                            for (int pi = 0; pi < 2; ++pi)
                                if (P(po, pi) != 0.0)
                                    next[c1 * wr + c2] += P(po, pi) * ATA[po][pi];
                    }
                }
            }
        T = std::move(next);
        wl = wr;
    }
    const double eh2 = T[0](0, 0).real();
    return eh2 - eh * eh;
}

Eigen::VectorXd schmidt_values(const MPSState& mps, int bond) {
    const int L = mps.length();
    if (bond < 1 || bond > L - 1) throw std::invalid_argument("schmidt_values: bond out of range");
    MPSState copy = mps;
    copy.move_center_to(bond);
    Eigen::MatrixXcd M = stack_cols(copy.tensors[bond]);
    Svd svd = svd_of(M);
    return svd.s;
}

double schmidt_entropy(const MPSState& mps, const Bipartition& cut) {
    return entropy_from_schmidt(schmidt_values(mps, cut.cut));
}

// ---------------------------------------------------------------------------
// Expectations

namespace {

Eigen::MatrixXcd plain_left(const Eigen::MatrixXcd& E, const Tensor& A) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(A[0].cols(), A[0].cols());
    for (int p = 0; p < 2; ++p) out += A[p].adjoint() * E * A[p];
    return out;
}

Eigen::MatrixXcd op_left(const Eigen::MatrixXcd& E, const Tensor& A, const Eigen::Matrix2cd& op) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(A[0].cols(), A[0].cols());
    for (int po = 0; po < 2; ++po)
        for (int pi = 0; pi < 2; ++pi)
            if (op(po, pi) != 0.0) out += op(po, pi) * (A[po].adjoint() * E * A[pi]);
    return out;
}

}  // namespace

double mps_expectation(const MPSState& mps, SpinAxis axis, int site) {
    const int L = mps.length();
    if (site < 0 || site >= L) throw std::invalid_argument("mps_expectation: site out of range");
    const Eigen::Matrix2cd op = spin_matrix(axis);
    Eigen::MatrixXcd E = Eigen::MatrixXcd::Ones(1, 1);
    for (int j = 0; j < L; ++j)
        E = (j == site) ? op_left(E, mps.tensors[j], op) : plain_left(E, mps.tensors[j]);
    return E(0, 0).real();
}

double mps_expectation(const MPSState& mps, SpinAxis axis, int i, int j) {
    const int L = mps.length();
    if (i < 0 || j < 0 || i >= L || j >= L)
        throw std::invalid_argument("mps_expectation: site out of range");
    if (i == j) throw std::invalid_argument("mps_expectation: sites must differ");
    if (i > j) std::swap(i, j);
    const Eigen::Matrix2cd op = spin_matrix(axis);
    Eigen::MatrixXcd E = Eigen::MatrixXcd::Ones(1, 1);
    for (int k = 0; k < L; ++k)
        E = (k == i || k == j) ? op_left(E, mps.tensors[k], op) : plain_left(E, mps.tensors[k]);
    return E(0, 0).real();
}

double parity_expectation(const MPSState& mps) {
    Eigen::Matrix2cd pz;
    pz << 1.0, 0.0, 0.0, -1.0;
    Eigen::MatrixXcd E = Eigen::MatrixXcd::Ones(1, 1);
    for (int j = 0; j < mps.length(); ++j) E = op_left(E, mps.tensors[j], pz);
    return E(0, 0).real();
}

exact::PureState mps_to_dense(const MPSState& mps) {
    const int L = mps.length();
    if (L > 16) throw std::invalid_argument("mps_to_dense: L <= 16 required");
    const std::uint64_t dim = mps.spec.dim();
    // rows of `amp` enumerate the processed-prefix basis, columns the bond
    Eigen::MatrixXcd amp = Eigen::MatrixXcd::Ones(1, 1);
    for (int j = 0; j < L; ++j) {
        const auto& A = mps.tensors[j];
        const auto rows = amp.rows();
        Eigen::MatrixXcd next(rows * 2, A[0].cols());
        next.topRows(rows) = amp * A[0];
        next.bottomRows(rows) = amp * A[1];
        amp = std::move(next);
    }
    Eigen::VectorXcd v(static_cast<Eigen::Index>(dim));
    // row index has site j at bit position ... built with p_j appended as the
    // high bit of the prefix, which matches bit j of the basis index
    v = amp.col(0);
    exact::PureState out(mps.spec, std::move(v));
    return out;
}

// ---------------------------------------------------------------------------
// Checkpoint IO

static constexpr char kMpsMagic[9] = "FLUXMPS1";

void save_mps(const MPSState& mps, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("save_mps: cannot open " + path);
    f.write(kMpsMagic, 8);
    const std::uint64_t L = static_cast<std::uint64_t>(mps.length());
    f.write(reinterpret_cast<const char*>(&L), 8);
    for (const auto& A : mps.tensors) {
        const std::uint64_t dims[3] = {static_cast<std::uint64_t>(A[0].rows()), 2,
                                       static_cast<std::uint64_t>(A[0].cols())};
        f.write(reinterpret_cast<const char*>(dims), 24);
        for (int p = 0; p < 2; ++p)
            for (Eigen::Index c = 0; c < A[p].cols(); ++c)
                for (Eigen::Index r = 0; r < A[p].rows(); ++r) {
                    const double re = A[p](r, c).real(), im = A[p](r, c).imag();
                    f.write(reinterpret_cast<const char*>(&re), 8);
                    f.write(reinterpret_cast<const char*>(&im), 8);
                }
    }
    if (!f) throw std::runtime_error("save_mps: write failed");
}

MPSState load_mps(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("load_mps: cannot open " + path);
    char magic[8];
    f.read(magic, 8);
    if (!f || std::string(magic, 8) != std::string(kMpsMagic, 8))
        throw std::runtime_error("load_mps: bad magic");
    std::uint64_t L = 0;
    f.read(reinterpret_cast<char*>(&L), 8);
    if (!f || L < 2 || L > 1024) throw std::runtime_error("load_mps: bad header");
    MPSState out(ChainSpec(static_cast<int>(L)));
    for (std::uint64_t j = 0; j < L; ++j) {
        std::uint64_t dims[3];
        f.read(reinterpret_cast<char*>(dims), 24);
        if (!f || dims[1] != 2) throw std::runtime_error("load_mps: bad site header");
        for (int p = 0; p < 2; ++p) {
            out.tensors[j][p].resize(static_cast<Eigen::Index>(dims[0]),
                                     static_cast<Eigen::Index>(dims[2]));
            for (Eigen::Index c = 0; c < out.tensors[j][p].cols(); ++c)
                for (Eigen::Index r = 0; r < out.tensors[j][p].rows(); ++r) {
                    double re = 0, im = 0;
                    f.read(reinterpret_cast<char*>(&re), 8);
                    f.read(reinterpret_cast<char*>(&im), 8);
                    out.tensors[j][p](r, c) = Complex(re, im);
                }
        }
    }
    if (!f) throw std::runtime_error("load_mps: truncated file");
    out.center = 0;
    return out;
}

// ---------------------------------------------------------------------------
// Expectation backend

MpsBackend::MpsBackend(const MPSState& mps) : mps_(mps) {
    const double n = mps_.norm();
    if (std::abs(n - 1.0) > 1e-6) throw std::invalid_argument("MpsBackend: state must be normalized");
}

void MpsBackend::ensure_axis(SpinAxis axis) const {
    const int a = static_cast<int>(axis);
    if (have_[a]) return;
    const int L = mps_.length();
    const Eigen::Matrix2cd op = spin_matrix(axis);

    // plain right environments R[j] (ket x bra) for sites j..L-1
    std::vector<Eigen::MatrixXcd> R(L + 1);
    R[L] = Eigen::MatrixXcd::Ones(1, 1);
    for (int j = L - 1; j >= 0; --j) {
        const auto& A = mps_.tensors[j];
        R[j] = Eigen::MatrixXcd::Zero(A[0].rows(), A[0].rows());
        for (int p = 0; p < 2; ++p) R[j] += A[p] * R[j + 1] * A[p].adjoint();
    }

    Eigen::VectorXd one = Eigen::VectorXd::Zero(L);
    Eigen::MatrixXd pair = Eigen::MatrixXd::Zero(L, L);

    Eigen::MatrixXcd E = Eigen::MatrixXcd::Ones(1, 1);  // bra x ket, plain prefix
    for (int i = 0; i < L; ++i) {
        const Eigen::MatrixXcd Ei = op_left(E, mps_.tensors[i], op);
        one(i) = (Ei * R[i + 1]).trace().real();
        Eigen::MatrixXcd G = Ei;
        for (int j = i + 1; j < L; ++j) {
            const Eigen::MatrixXcd Gj = op_left(G, mps_.tensors[j], op);
            pair(i, j) = (Gj * R[j + 1]).trace().real();
            if (j + 1 < L) G = plain_left(G, mps_.tensors[j]);
        }
        E = plain_left(E, mps_.tensors[i]);
    }
    pair = (pair + pair.transpose()).eval();
    for (int i = 0; i < L; ++i) pair(i, i) = 0.25;
    onsite_[a] = std::move(one);
    pair_[a] = std::move(pair);
    have_[a] = true;
}

double MpsBackend::onsite(SpinAxis axis, int site) const {
    if (site < 0 || site >= length()) throw std::invalid_argument("onsite: site out of range");
    ensure_axis(axis);
    return onsite_[static_cast<int>(axis)](site);
}

double MpsBackend::two_site(SpinAxis axis, int i, int j) const {
    if (i < 0 || j < 0 || i >= length() || j >= length())
        throw std::invalid_argument("two_site: site out of range");
    if (i == j) throw std::invalid_argument("two_site: sites must differ");
    ensure_axis(axis);
    return pair_[static_cast<int>(axis)](i, j);
}

double MpsBackend::entropy(const Bipartition& cut) const {
    return schmidt_entropy(mps_, cut);
}

}  // namespace fluxlab::mps
