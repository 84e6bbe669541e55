// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
// the process exits nonzero if any criterion fails. Runs the conserved
// critical, gapped and critical regimes at desk scale (ED L <= 20, DMRG
// L <= 40, chi <= 48) plus the exact micro-cases and the sampling protocol.
//
// Conventions: antiferromagnetic exchange realized with J = -1; couplings
// below are quoted as multiples of J. Scaling grids use L = 0 (mod 4)
// (open-boundary half-cut observables alternate between L mod 4 branches).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fluxlab/exact.hpp"
#include "fluxlab/fluctuations.hpp"
#include "fluxlab/mps.hpp"
#include "fluxlab/rng.hpp"
#include "fluxlab/sampler.hpp"
#include "fluxlab/scaling.hpp"

using namespace fluxlab;
using fluctuations::EdBackend;
using fluctuations::Route;
using Complex = std::complex<double>;

namespace {

struct Check {
    bool ok = true;
    std::ostringstream detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            detail << (detail.str().empty() ? "" : "; ") << what;
        }
    }
};

exact::PureState random_state(int L, std::uint64_t seed) {
    ChainSpec spec(L);
    CounterRng rng(seed);
    Eigen::VectorXcd v(spec.dim());
    for (std::uint64_t i = 0; i < spec.dim(); ++i)
        v(static_cast<Eigen::Index>(i)) = Complex(rng.symmetric(2 * i), rng.symmetric(2 * i + 1));
    exact::PureState s(spec, std::move(v));
    s.normalize();
    return s;
}

exact::PureState random_product(int L, std::uint64_t seed) {
    ChainSpec spec(L);
    CounterRng rng(seed);
    Eigen::VectorXcd v = Eigen::VectorXcd::Ones(1);
    for (int j = 0; j < L; ++j) {
        const double theta = 3.1415926535 * rng.uniform(2 * j);
        const double phi = 6.2831853071 * rng.uniform(2 * j + 1);
        Eigen::Vector2cd site(std::cos(theta),
                              std::sin(theta) * Complex(std::cos(phi), std::sin(phi)));
        Eigen::VectorXcd next(v.size() * 2);
        next.head(v.size()) = site(0) * v;
        next.tail(v.size()) = site(1) * v;
        v = std::move(next);
    }
    return exact::PureState(spec, v);
}

exact::PureState singlet() {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(4);
    v(0b01) = std::sqrt(0.5);
    v(0b10) = -std::sqrt(0.5);
    return exact::PureState(ChainSpec(2), v);
}

exact::PureState cat_state() {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(4);
    v(0b00) = std::sqrt(0.5);
    v(0b11) = std::sqrt(0.5);
    return exact::PureState(ChainSpec(2), v);
}

exact::GroundStateResult solve(int L, double J, double g, double Jz, ParitySector sec,
                               double tol = 1e-10) {
    exact::EdOptions o;
    o.tol = tol;
    return exact::ground_state_lanczos(ChainSpec(L), XYZParams(J, g, Jz), sec, o);
}

scaling::ScalingFit classify(const std::vector<std::pair<int, double>>& pts, int min_L = 8) {
    scaling::ScalingSeries s;
    s.points = pts;
    return scaling::classify_scaling(s, min_L);
}

double log_fit_r2(const std::vector<std::pair<int, double>>& pts) {
    scaling::ScalingSeries s;
    s.points = pts;
    return scaling::fit_form(s, scaling::ScalingForm::Log).r_squared;
}

// ---------------------------------------------------------------------------

Check criterion1() {
    Check c;
    int count = 0;
    for (int rep = 0; rep < 34 && count < 100; ++rep) {
        for (int L : {4, 6, 8}) {
            if (count >= 100) break;
            EdBackend b(random_state(L, 1000 + 17 * count));
            const Bipartition cut(1 + (count % (L - 1)), L);
            for (auto a : {SpinAxis::X, SpinAxis::Y, SpinAxis::Z}) {
                const double vd = fluctuations::reduced_fluctuation(b, a, cut, Route::VarianceDiff);
                const double cr = fluctuations::reduced_fluctuation(b, a, cut, Route::Cross);
                const double cs =
                    fluctuations::reduced_fluctuation(b, a, cut, Route::CorrelatorSum);
                c.require(std::abs(vd - cr) < 1e-10 && std::abs(vd - cs) < 1e-10,
                          "route mismatch at state " + std::to_string(count));
            }
            ++count;
        }
    }
    c.detail << "states=" << count;
    return c;
}

Check criterion2() {
    Check c;
    for (int k = 0; k < 50; ++k) {
        const int L = 5 + (k % 4);
        EdBackend b(random_product(L, 4000 + k));
        const Bipartition half(L / 2, L);
        for (auto a : {SpinAxis::X, SpinAxis::Y, SpinAxis::Z})
            c.require(std::abs(fluctuations::reduced_fluctuation(b, a, half)) < 1e-12,
                      "nonzero reduced fluctuation on product " + std::to_string(k));
        c.require(std::abs(b.entropy(half)) < 1e-12,
                  "nonzero entropy on product " + std::to_string(k));
    }
    return c;
}

Check criterion3() {
    Check c;
    {
        EdBackend b(singlet());
        const Bipartition cut(1, 2);
        c.require(std::abs(fluctuations::reduced_fluctuation(b, SpinAxis::Z, cut) - 0.25) < 1e-10,
                  "singlet reduced != 1/4");
        c.require(std::abs(b.entropy(cut) - std::log(2)) < 1e-10, "singlet entropy != ln 2");
        const auto beta = fluctuations::visibility(b, SpinAxis::Z, cut);
        c.require(beta && std::abs(*beta - 1.0) < 1e-10, "singlet visibility != 1");
    }
    {
        EdBackend b(cat_state());
        const Bipartition cut(1, 2);
        c.require(std::abs(fluctuations::reduced_fluctuation(b, SpinAxis::Z, cut) + 0.25) < 1e-10,
                  "cat reduced != -1/4");
        const auto beta = fluctuations::visibility(b, SpinAxis::Z, cut);
        c.require(beta && std::abs(*beta + 1.0) < 1e-10, "cat visibility != -1");
    }
    return c;
}

Check criterion4() {
    Check c;
    std::vector<std::pair<int, double>> svn, var_half;
    for (int L : {8, 12, 16, 20}) {
        const auto r = solve(L, -1, 0, -0.5, ParitySector::Full);
        EdBackend b(r.state);
        const Bipartition half = Bipartition::half(L);
        const double vt = fluctuations::total_variance(b, SpinAxis::Z);
        c.require(vt < 1e-10, "var_tot(Sz) >= 1e-10 at L=" + std::to_string(L));
        const auto beta = fluctuations::visibility(b, SpinAxis::Z, half);
        c.require(beta && std::abs(*beta - 1.0) < 1e-8,
                  "beta(Sz) != 1 at L=" + std::to_string(L));
        svn.push_back({L, b.entropy(half)});
        var_half.push_back({L, fluctuations::subsystem_variance(b, SpinAxis::Z, half)});
    }
    const auto fs = classify(svn);
    const auto fv = classify(var_half);
    c.require(fs.cls == scaling::ScalingForm::Log, "S_vN class != log");
    c.require(fv.cls == scaling::ScalingForm::Log, "var_half(Sz) class != log");
    const double r2s = log_fit_r2(svn), r2v = log_fit_r2(var_half);
    c.require(r2s > 0.99, "S_vN log fit R2 <= 0.99");
    c.require(r2v > 0.99, "var_half log fit R2 <= 0.99");
    c.detail << "R2(S)=" << r2s << " R2(var)=" << r2v;
    return c;
}

Check criterion5() {
    Check c;
    const XYZParams p(-1, -0.5, 0);

    // ED side: plateaus at L <= 20, correlation length from the L=20 state
    std::vector<std::pair<int, double>> varx;
    double ed_red[3] = {0, 0, 0};
    for (int L : {8, 12, 16, 20}) {
        const auto r = solve(L, p.J, p.gamma, p.Jz, ParitySector::Even);
        EdBackend b(r.state);
        const Bipartition half = Bipartition::half(L);
        varx.push_back({L, fluctuations::subsystem_variance(b, SpinAxis::X, half)});
        if (L == 20) {
            int ai = 0;
            for (auto a : {SpinAxis::X, SpinAxis::Y, SpinAxis::Z})
                ed_red[ai++] = fluctuations::reduced_fluctuation(b, a, half);
            std::vector<std::pair<double, double>> decay;
            for (int rr = 2; rr <= 10; ++rr) {
                double acc = 0;
                int cnt = 0;
                for (int i = 0; i + rr < 20; ++i) {
                    acc += std::abs(fluctuations::connected_correlator(b, SpinAxis::Z, i, i + rr));
                    ++cnt;
                }
                decay.push_back({rr, acc / cnt});
            }
            const auto fit = scaling::correlation_length(decay);
            c.require(fit.decaying && std::isfinite(fit.xi), "xi not finite");
            c.require(fit.r_squared > 0.95, "xi fit R2 <= 0.95");
            c.detail << "xi=" << fit.xi << " R2=" << fit.r_squared;
        }
    }

    // DMRG side: the L >= 28 tail sits past the cat/broken selection
    // transition, one representative per chain length
    std::vector<std::pair<int, double>> svn, redx, redy, redz;
    double dm_red[3] = {0, 0, 0};
    for (int L : {24, 28, 32, 36, 40}) {
        auto mpo = mps::build_xyz_mpo(ChainSpec(L), p);
        mps::DmrgOptions o;
        o.chi_max = 48;
        o.variance_target = 1e-11;
        const auto res = mps::dmrg_ground_state(mpo, o);
        c.require(res.report.final_variance <= 1e-8,
                  "dmrg variance > 1e-8 at L=" + std::to_string(L));
        mps::MpsBackend b(res.state);
        const Bipartition half = Bipartition::half(L);
        varx.push_back({L, fluctuations::subsystem_variance(b, SpinAxis::X, half)});
        if (L >= 28) {
            svn.push_back({L, b.entropy(half)});
            redx.push_back({L, fluctuations::reduced_fluctuation(b, SpinAxis::X, half)});
            redy.push_back({L, fluctuations::reduced_fluctuation(b, SpinAxis::Y, half)});
            redz.push_back({L, fluctuations::reduced_fluctuation(b, SpinAxis::Z, half)});
        }
        if (L == 40) {
            dm_red[0] = fluctuations::reduced_fluctuation(b, SpinAxis::X, half);
            dm_red[1] = fluctuations::reduced_fluctuation(b, SpinAxis::Y, half);
            dm_red[2] = fluctuations::reduced_fluctuation(b, SpinAxis::Z, half);
        }
    }
    c.require(classify(svn).cls == scaling::ScalingForm::Constant, "S_vN class != area");
    c.require(classify(redx).cls == scaling::ScalingForm::Constant, "reduced_x class != area");
    c.require(classify(redy).cls == scaling::ScalingForm::Constant, "reduced_y class != area");
    c.require(classify(redz).cls == scaling::ScalingForm::Constant, "reduced_z class != area");
    c.require(classify(varx).cls == scaling::ScalingForm::Linear, "bare var(Sx) class != volume");
    for (int a = 0; a < 3; ++a)
        c.require(std::abs(ed_red[a] - dm_red[a]) < 1e-4,
                  "ED/DMRG plateau mismatch on axis " + std::to_string(a));
    return c;
}

Check criterion6() {
    Check c;
    std::vector<std::pair<int, double>> svn, redz, redx;
    for (int L : {8, 12, 16, 20}) {
        const auto r = solve(L, -1, -0.4, -0.7, ParitySector::Full);
        EdBackend b(r.state);
        const Bipartition half = Bipartition::half(L);
        const double rz = fluctuations::reduced_fluctuation(b, SpinAxis::Z, half);
        const double rx = fluctuations::reduced_fluctuation(b, SpinAxis::X, half);
        c.require(std::abs(rz - rx) < 1e-6, "reduced x/z differ at L=" + std::to_string(L));
        const auto by = fluctuations::visibility(b, SpinAxis::Y, half);
        c.require(by && std::abs(*by - 1.0) < 1e-6, "beta(Sy) != 1 at L=" + std::to_string(L));
        svn.push_back({L, b.entropy(half)});
        redz.push_back({L, rz});
        redx.push_back({L, rx});
    }
    c.require(classify(svn).cls == scaling::ScalingForm::Log, "S_vN class != log");
    c.require(classify(redz).cls == scaling::ScalingForm::Log, "reduced_z class != log");
    c.require(classify(redx).cls == scaling::ScalingForm::Log, "reduced_x class != log");
    return c;
}

Check criterion7() {
    Check c;
    std::vector<double> bz, by_all;
    double by_peak = -2, by_at_04 = -2;
    for (int k = 0; k <= 12; ++k) {
        const double g = -0.05 * k;  // gamma/J from 0 to 0.6
        const auto r = solve(16, -1, g, -0.7, ParitySector::Even);
        EdBackend b(r.state);
        const Bipartition half = Bipartition::half(16);
        for (auto a : {SpinAxis::X, SpinAxis::Y, SpinAxis::Z}) {
            const auto beta = fluctuations::visibility(b, a, half);
            if (beta) {
                c.require(*beta >= -1.0 - 1e-10 && *beta <= 1.0 + 1e-10,
                          "beta out of [-1,1]");
                if (a == SpinAxis::Y) {
                    by_all.push_back(*beta);
                    by_peak = std::max(by_peak, *beta);
                    if (k == 8) by_at_04 = *beta;
                }
                if (a == SpinAxis::Z && k <= 8) bz.push_back(*beta);
            }
        }
    }
    c.require(!bz.empty() && std::abs(bz.front() - 1.0) < 1e-6, "beta(Sz) != 1 at gamma=0");
    for (size_t i = 1; i < bz.size(); ++i)
        c.require(bz[i] <= bz[i - 1] + 1e-9, "beta(Sz) not monotone on [0, 0.4]");
    c.require(std::abs(by_at_04 - 1.0) < 1e-6, "beta(Sy) != 1 at gamma = 0.4J");
    c.require(by_at_04 >= by_peak - 1e-12, "beta(Sy) does not peak at gamma = 0.4J");
    c.detail << "beta_z: 1 -> " << bz.back() << ", beta_y(0.4J)=" << by_at_04;
    return c;
}

Check criterion8() {
    Check c;
    CounterRng rng(88);
    for (int k = 0; k < 10; ++k) {
        const int L = (k % 2 == 0) ? 12 : 14;
        const double g = -(0.3 + 0.3 * rng.uniform(2 * k));
        const double jz = 0.3 * rng.symmetric(2 * k + 1);
        const auto ed = solve(L, -1, g, jz, ParitySector::Full);
        auto mpo = mps::build_xyz_mpo(ChainSpec(L), XYZParams(-1, g, jz));
        mps::DmrgOptions o;
        o.chi_max = 64;
        o.variance_target = 1e-10;
        const auto dm = mps::dmrg_ground_state(mpo, o);
        const double de = std::abs(ed.energy - dm.energy);
        const double ds = std::abs(exact::entropy_at_cut(ed.state, Bipartition::half(L)) -
                                   mps::schmidt_entropy(dm.state, Bipartition::half(L)));
        c.require(de < 1e-8, "energy mismatch " + std::to_string(de) + " at draw " +
                                 std::to_string(k));
        c.require(ds < 1e-6, "entropy mismatch at draw " + std::to_string(k));
        c.require(dm.report.final_variance <= 1e-8, "dmrg variance > 1e-8 at draw " +
                                                        std::to_string(k));
    }
    return c;
}

Check criterion9() {
    Check c;
    const auto r = solve(12, -1, -0.4, -0.7, ParitySector::Full);
    EdBackend b(r.state);
    const Bipartition half = Bipartition::half(12);
    const double exact_value = fluctuations::reduced_fluctuation(b, SpinAxis::Z, half);

    const auto shots = sampler::sample_shots(r.state, SpinAxis::Z, 100000, 20240817);
    const auto est = sampler::estimate_reduced_fluctuation(shots, half);
    c.require(std::abs(est.value - exact_value) <= 5 * est.standard_error,
              "estimate off by > 5 SE");

    double slope_sum = 0;
    const int seeds = 20;
    for (int k = 0; k < seeds; ++k) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int cnt = 0;
        for (int N : {100, 1000, 10000, 100000}) {
            const auto sh = sampler::sample_shots(r.state, SpinAxis::Z, N, 500 + k);
            const auto e = sampler::estimate_reduced_fluctuation(sh, half);
            const double x = std::log(static_cast<double>(N));
            const double y = std::log(e.standard_error);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++cnt;
        }
        slope_sum += (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    }
    const double slope = slope_sum / seeds;
    c.require(std::abs(slope + 0.5) <= 0.05, "SE scaling slope outside -0.5 +- 0.05");
    c.detail << "slope=" << slope << " est=" << est.value << "+-" << est.standard_error
             << " exact=" << exact_value;
    return c;
}

Check criterion10() {
    Check c;
    for (int n = 1; n <= 20; ++n) {
        double mean = 0, second = 0;
        double pk = std::pow(0.5, n);
        for (int k = 0; k <= n; ++k) {
            const double s = 0.5 * (n - 2 * k);
            mean += pk * s;
            second += pk * s * s;
            pk = pk * (n - k) / (k + 1);
        }
        c.require(std::abs(second - mean * mean - fluctuations::binomial_counting_variance(n)) <
                      1e-12,
                  "binomial variance mismatch at N=" + std::to_string(n));
    }
    const auto r = solve(16, -1, 0, 0, ParitySector::Full);
    EdBackend b(r.state);
    const Bipartition half = Bipartition::half(16);
    const double var = fluctuations::subsystem_variance(b, SpinAxis::Z, half);
    // effective number of binomially active spins from the entropy in bits
    const double n_active = b.entropy(half) / std::log(2.0);
    const double ratio = var / fluctuations::binomial_counting_variance(
                                   std::max(1, static_cast<int>(std::round(n_active))));
    const double ratio_cont = var / (n_active / 4.0);
    c.require(ratio_cont > 0.5 && ratio_cont < 2.0, "counting variance off by > factor 2");
    c.detail << "N_a=" << n_active << " ratio=" << ratio_cont << " (rounded " << ratio << ")";
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    using Entry = std::pair<const char*, std::function<Check()>>;
    const std::vector<Entry> criteria = {
        {"route equivalence of the reduced fluctuation", criterion1},
        {"separability: products have zero reduced fluctuation and entropy", criterion2},
        {"exact micro-values: singlet and cat state", criterion3},
        {"conserved critical case: log scaling, beta(Sz)=1", criterion4},
        {"gapped case: area law, volume bare fluctuations, finite xi", criterion5},
        {"critical case: log scaling, x/z identity, beta(Sy)=1", criterion6},
        {"visibility cut: monotone beta(Sz), beta(Sy) peak at 0.4J", criterion7},
        {"backend agreement: ED vs DMRG on random draws", criterion8},
        {"measurement protocol: estimator consistency and 1/sqrt(N) errors", criterion9},
        {"counting oracle: binomial variance and conserved-case magnitude", criterion10},
    };

    std::vector<int> which;
    for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));

    int failures = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        if (!which.empty() &&
            std::find(which.begin(), which.end(), static_cast<int>(i) + 1) == which.end())
            continue;
        const auto t0 = std::chrono::steady_clock::now();
        Check c;
        try {
            c = criteria[i].second();
        } catch (const std::exception& e) {
            c.ok = false;
            c.detail << "exception: " << e.what();
        }
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%2zu] %-62s %s  (%.1fs)%s%s\n", i + 1, criteria[i].first,
                    c.ok ? "PASS" : "FAIL", dt, c.detail.str().empty() ? "" : "  -- ",
                    c.detail.str().c_str());
        std::fflush(stdout);
        if (!c.ok) ++failures;
    }
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
