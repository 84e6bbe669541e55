#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "fluxlab/exact.hpp"
#include "fluxlab/fluctuations.hpp"
#include "fluxlab/mps.hpp"
#include "fluxlab/rng.hpp"

using namespace fluxlab;
using namespace fluxlab::mps;
using exact::PureState;

namespace {

PureState singlet_dense() {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(4);
    v(0b01) = std::sqrt(0.5);
    v(0b10) = -std::sqrt(0.5);
    return PureState(ChainSpec(2), v);
}

bool left_isometric(const Tensor& A, double tol) {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(A[0].cols(), A[0].cols());
    for (int p = 0; p < 2; ++p) acc += A[p].adjoint() * A[p];
    return (acc - Eigen::MatrixXcd::Identity(acc.rows(), acc.cols())).norm() < tol;
}

bool right_isometric(const Tensor& A, double tol) {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(A[0].rows(), A[0].rows());
    for (int p = 0; p < 2; ++p) acc += A[p] * A[p].adjoint();
    return (acc - Eigen::MatrixXcd::Identity(acc.rows(), acc.cols())).norm() < tol;
}

}  // namespace

TEST_CASE("xyz mpo reconstructs the dense hamiltonian") {
    SUBCASE("two-site diagonal element") {
        const auto mpo = build_xyz_mpo(ChainSpec(2), XYZParams(1, 0, 1));
        const auto H = mpo.to_dense();
        CHECK(H(0, 0).real() == doctest::Approx(-0.25).epsilon(1e-14));
    }
    SUBCASE("bulk bond dimension is five") {
        const auto mpo = build_xyz_mpo(ChainSpec(6), XYZParams(1, 0.3, 0.2));
        CHECK(mpo.sites[0].wl == 1);
        CHECK(mpo.sites[0].wr == 5);
        for (int j = 1; j < 5; ++j) {
            CHECK(mpo.sites[j].wl == 5);
            CHECK(mpo.sites[j].wr == 5);
        }
        CHECK(mpo.sites[5].wr == 1);
    }
    SUBCASE("zero couplings give the zero operator") {
        const auto mpo = build_xyz_mpo(ChainSpec(3), XYZParams(0, 0, 0));
        CHECK(mpo.to_dense().cwiseAbs().maxCoeff() < 1e-15);
    }
    SUBCASE("random parameter draws match the exact module for L <= 8") {
        CounterRng rng(2024);
        for (int k = 0; k < 20; ++k) {
            const int L = 2 + static_cast<int>(rng.bits(3 * k) % 7);
            const XYZParams p(1.0, rng.symmetric(3 * k + 1), 1.5 * rng.symmetric(3 * k + 2));
            const auto H_mpo = build_xyz_mpo(ChainSpec(L), p).to_dense();
            const auto H_ref = exact::dense_hamiltonian(ChainSpec(L), p);
            CHECK((H_mpo - H_ref.cast<Complex>()).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("product state construction and conversion") {
    const auto psi = MPSState::product_state(ChainSpec(4), 0b0110);
    CHECK(psi.norm() == doctest::Approx(1.0));
    CHECK(psi.max_bond_dim() == 1);
    const auto dense = mps_to_dense(psi);
    CHECK(std::abs(dense.amplitudes(0b0110) - Complex(1, 0)) < 1e-14);
    CHECK(dense.amplitudes.norm() == doctest::Approx(1.0));
}

TEST_CASE("from_dense and mps_to_dense round-trip the singlet") {
    const auto psi = MPSState::from_dense(singlet_dense(), 4);
    CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-12));
    const auto back = mps_to_dense(psi);
    // up to a global phase; amplitude pattern (0, a, -a, 0)
    const Complex a01 = back.amplitudes(0b01), a10 = back.amplitudes(0b10);
    CHECK(std::abs(a01 + a10) < 1e-12);
    CHECK(std::abs(std::abs(a01) - std::sqrt(0.5)) < 1e-12);
    CHECK(std::abs(back.amplitudes(0b00)) < 1e-14);
    CHECK(schmidt_entropy(psi, Bipartition(1, 2)) == doctest::Approx(std::log(2)).epsilon(1e-12));
}

TEST_CASE("random mps round-trips expectations through the dense bridge") {
    const auto psi = MPSState::random(ChainSpec(10), 8, 31);
    CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-10));
    const auto dense = mps_to_dense(psi);
    CHECK(dense.norm() == doctest::Approx(1.0).epsilon(1e-10));
    fluctuations::EdBackend ed(dense);
    for (auto axis : {SpinAxis::X, SpinAxis::Y, SpinAxis::Z}) {
        for (int i = 0; i < 10; i += 3)
            CHECK(mps_expectation(psi, axis, i) ==
                  doctest::Approx(ed.onsite(axis, i)).epsilon(1e-10));
        CHECK(mps_expectation(psi, axis, 1, 6) ==
              doctest::Approx(ed.two_site(axis, 1, 6)).epsilon(1e-10));
    }
}

TEST_CASE("mps expectation values on hand states") {
    const auto up = MPSState::product_state(ChainSpec(4), 0);
    CHECK(mps_expectation(up, SpinAxis::Z, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(mps_expectation(up, SpinAxis::X, 0) == doctest::Approx(0.0).epsilon(1e-14));
    const auto sg = MPSState::from_dense(singlet_dense(), 4);
    CHECK(mps_expectation(sg, SpinAxis::Z, 0, 1) == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK_THROWS_AS(mps_expectation(up, SpinAxis::Z, 4), std::invalid_argument);
}

TEST_CASE("schmidt entropy of product states vanishes") {
    const auto up = MPSState::product_state(ChainSpec(6), 0b101);
    for (int b = 1; b < 6; ++b) CHECK(schmidt_entropy(up, Bipartition(b, 6)) ==
                                      doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("dmrg solves the two-site chain exactly") {
    CounterRng rng(1);
    for (int k = 0; k < 5; ++k) {
        const XYZParams p(1.0, rng.symmetric(2 * k), 1.5 * rng.symmetric(2 * k + 1));
        const auto mpo = build_xyz_mpo(ChainSpec(2), p);
        DmrgOptions opts;
        opts.chi_max = 4;
        opts.variance_target = 1e-12;
        const auto res = dmrg_ground_state(mpo, opts);
        const auto ev = exact::full_spectrum_small(ChainSpec(2), p);
        CHECK(res.energy == doctest::Approx(ev.front()).epsilon(1e-12));
        CHECK(energy_variance(res.state, mpo) < 1e-12);
    }
}

TEST_CASE("dmrg with zero couplings converges immediately") {
    const auto mpo = build_xyz_mpo(ChainSpec(6), XYZParams(0, 0, 0));
    DmrgOptions opts;
    opts.chi_max = 8;
    const auto res = dmrg_ground_state(mpo, opts);
    CHECK(res.energy == doctest::Approx(0.0));
    CHECK(res.report.final_variance == doctest::Approx(0.0));
    CHECK(res.report.sweeps == 1);
    CHECK(res.report.converged);
}

TEST_CASE("dmrg matches exact diagonalization at a critical point") {
    const XYZParams p(1.0, 0.4, 0.7);
    const auto mpo = build_xyz_mpo(ChainSpec(12), p);
    DmrgOptions opts;
    opts.chi_max = 64;
    opts.variance_target = 1e-10;
    const auto res = dmrg_ground_state(mpo, opts);

    exact::EdOptions eo;
    eo.tol = 1e-11;
    const auto ed = exact::ground_state_lanczos(ChainSpec(12), p, ParitySector::Even, eo);
    CHECK(res.energy == doctest::Approx(ed.energy).epsilon(1e-8));

    // entropy cross-check through the dense bridge
    const double s_mps = schmidt_entropy(res.state, Bipartition::half(12));
    const double s_ed = exact::entropy_at_cut(ed.state, Bipartition::half(12));
    CHECK(s_mps == doctest::Approx(s_ed).epsilon(1e-7));

    // energies non-increasing sweep to sweep
    const auto& es = res.report.sweep_energy;
    for (size_t i = 1; i < es.size(); ++i) CHECK(es[i] <= es[i - 1] + 1e-10);
    CHECK(res.report.final_variance <= 1e-8);
    CHECK(std::abs(res.report.parity_expectation) > 0.99);
}

TEST_CASE("dmrg truncation monotonicity in chi") {
    const XYZParams p(-1.0, -0.5, 0.0);
    const auto mpo = build_xyz_mpo(ChainSpec(10), p);
    DmrgOptions lo;
    lo.chi_max = 8;
    lo.variance_target = 1e-13;
    lo.max_sweeps = 12;
    DmrgOptions hi = lo;
    hi.chi_max = 16;
    const auto rlo = dmrg_ground_state(mpo, lo);
    const auto rhi = dmrg_ground_state(mpo, hi);
    CHECK(rhi.energy <= rlo.energy + 1e-10);
}

TEST_CASE("canonical isometries hold after dmrg sweeps") {
    const auto mpo = build_xyz_mpo(ChainSpec(8), XYZParams(1, 0.3, 0.4));
    DmrgOptions opts;
    opts.chi_max = 16;
    const auto res = dmrg_ground_state(mpo, opts);
    const auto& psi = res.state;
    for (int j = 0; j < psi.center; ++j) CHECK(left_isometric(psi.tensors[j], 1e-10));
    for (int j = psi.center + 1; j < psi.length(); ++j)
        CHECK(right_isometric(psi.tensors[j], 1e-10));
    CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("energy variance is nonnegative on random states") {
    const auto mpo = build_xyz_mpo(ChainSpec(8), XYZParams(1, 0.2, -0.5));
    const auto psi = MPSState::random(ChainSpec(8), 6, 5);
    CHECK(energy_variance(psi, mpo) >= -1e-10);
}

TEST_CASE("mps backend agrees with the dense backend") {
    const auto psi = MPSState::random(ChainSpec(8), 8, 777);
    MpsBackend mb(psi);
    fluctuations::EdBackend eb(mps_to_dense(psi));
    for (auto axis : {SpinAxis::X, SpinAxis::Y, SpinAxis::Z}) {
        for (int i = 0; i < 8; ++i)
            CHECK(mb.onsite(axis, i) == doctest::Approx(eb.onsite(axis, i)).epsilon(1e-10));
        for (int i = 0; i < 8; ++i)
            for (int j = i + 1; j < 8; ++j)
                CHECK(mb.two_site(axis, i, j) ==
                      doctest::Approx(eb.two_site(axis, i, j)).epsilon(1e-10));
    }
    for (int cut = 1; cut < 8; ++cut)
        CHECK(mb.entropy(Bipartition(cut, 8)) ==
              doctest::Approx(eb.entropy(Bipartition(cut, 8))).epsilon(1e-9));
}

TEST_CASE("checkpoint io round-trips bit-exactly") {
    const auto tmp = std::filesystem::temp_directory_path() / "fluxlab_mps_test.bin";
    const auto psi = MPSState::random(ChainSpec(7), 5, 99);
    save_mps(psi, tmp.string());
    const auto back = load_mps(tmp.string());
    REQUIRE(back.length() == psi.length());
    for (int j = 0; j < 7; ++j)
        for (int p = 0; p < 2; ++p) {
            REQUIRE(back.tensors[j][p].rows() == psi.tensors[j][p].rows());
            REQUIRE(back.tensors[j][p].cols() == psi.tensors[j][p].cols());
            CHECK((back.tensors[j][p] - psi.tensors[j][p]).norm() == 0.0);
        }
    std::filesystem::remove(tmp);
}

TEST_CASE("mps size guards") {
    CHECK_THROWS_AS(mps_to_dense(MPSState::random(ChainSpec(17), 2, 1)), std::invalid_argument);
    const auto mpo = build_xyz_mpo(ChainSpec(4), XYZParams(1, 0, 0));
    DmrgOptions opts;
    opts.chi_max = 1;
    CHECK_THROWS_AS(dmrg_ground_state(mpo, opts), std::invalid_argument);
}
