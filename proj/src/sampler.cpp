#include "fluxlab/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "fluxlab/rng.hpp"

namespace fluxlab::sampler {

using Complex = std::complex<double>;

namespace {

// Rotate amplitudes so the computational basis enumerates S^axis product
// eigenstates, bit value 0 meaning outcome +1/2 along the axis.
Eigen::VectorXcd rotate_to_axis(const exact::PureState& state, SpinAxis axis) {
    Eigen::VectorXcd phi = state.amplitudes;
    if (axis == SpinAxis::Z) return phi;
    const int L = state.spec.length;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int j = 0; j < L; ++j) {
        const std::uint64_t fj = std::uint64_t{1} << j;
        for (std::uint64_t t = 0; t < state.spec.dim(); ++t) {
            if (t & fj) continue;
            const Complex up = phi(static_cast<Eigen::Index>(t));
            const Complex dn = phi(static_cast<Eigen::Index>(t | fj));
            if (axis == SpinAxis::X) {
                // <+x| , <-x|
                phi(static_cast<Eigen::Index>(t)) = inv_sqrt2 * (up + dn);
                phi(static_cast<Eigen::Index>(t | fj)) = inv_sqrt2 * (up - dn);
            } else {
                // <+y| = (<0| - i<1|)/sqrt2, <-y| = (<0| + i<1|)/sqrt2
                phi(static_cast<Eigen::Index>(t)) = inv_sqrt2 * (up - Complex(0, 1) * dn);
                phi(static_cast<Eigen::Index>(t | fj)) = inv_sqrt2 * (up + Complex(0, 1) * dn);
            }
        }
    }
    return phi;
}

}  // namespace

ShotMatrix sample_shots(const exact::PureState& state, SpinAxis axis, int n_shots,
                        std::uint64_t seed) {
    if (n_shots < 1) throw std::invalid_argument("sample_shots: N >= 1 required");
    const int L = state.spec.length;
    if (L > 24) throw std::invalid_argument("sample_shots: L exceeds the ED ceiling");

    const Eigen::VectorXcd phi = rotate_to_axis(state, axis);
    const std::uint64_t dim = state.spec.dim();
    std::vector<double> cdf(dim);
    double acc = 0.0;
    for (std::uint64_t t = 0; t < dim; ++t) {
        acc += std::norm(phi(static_cast<Eigen::Index>(t)));
        cdf[t] = acc;
    }
    const double total = cdf.back();
    if (total <= 0) throw std::runtime_error("sample_shots: zero-norm state");

    ShotMatrix out;
    out.axis = axis;
    out.seed = seed;
    out.values.resize(n_shots, L);

    CounterRng rng(seed, static_cast<std::uint64_t>(axis));
    for (int i = 0; i < n_shots; ++i) {
        const double u = rng.uniform(static_cast<std::uint64_t>(i)) * total;
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        const std::uint64_t t =
            static_cast<std::uint64_t>(std::min<std::ptrdiff_t>(it - cdf.begin(),
                                                                static_cast<std::ptrdiff_t>(dim) - 1));
        for (int j = 0; j < L; ++j) out.values(i, j) = ((t >> j) & 1u) ? -0.5 : 0.5;
    }
    return out;
}

FluctuationEstimate estimate_reduced_fluctuation(const ShotMatrix& shots,
                                                 const Bipartition& omega) {
    const int n = shots.shots();
    const int L = shots.length();
    if (n < 2) throw std::invalid_argument("estimate_reduced_fluctuation: N >= 2 required");
    if (omega.cut <= 0 || omega.cut >= L)
        throw std::invalid_argument("estimate_reduced_fluctuation: bad bipartition");

    Eigen::VectorXd a(n), b(n), ab(n);
    for (int i = 0; i < n; ++i) {
        double sa = 0, sb = 0;
        for (int j = 0; j < L; ++j) (j < omega.cut ? sa : sb) += shots.values(i, j);
        a(i) = sa;
        b(i) = sb;
        ab(i) = sa * sb;
    }
    const double sa = a.sum(), sb = b.sum(), sab = ab.sum();

    auto estimator = [](double ma, double mb, double mab, int m) {
        const double corr = m > 1 ? static_cast<double>(m) / (m - 1) : 1.0;
        return corr * (ma * mb - mab);
    };

    FluctuationEstimate out;
    out.value = estimator(sa / n, sb / n, sab / n, n);

    // delete-1 jackknife; two-pass variance to avoid cancellation when the
    // leave-one-out spread is many orders below the estimate
    Eigen::VectorXd theta(n);
    for (int i = 0; i < n; ++i) {
        const double ma = (sa - a(i)) / (n - 1);
        const double mb = (sb - b(i)) / (n - 1);
        const double mab = (sab - ab(i)) / (n - 1);
        theta(i) = estimator(ma, mb, mab, n - 1);
    }
    const double jmean = theta.mean();
    const double ss = (theta.array() - jmean).square().sum();
    out.standard_error = std::sqrt(ss * (n - 1) / n);
    return out;
}

void save_shots_csv(const ShotMatrix& shots, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("save_shots_csv: cannot open " + path);
    f << "shot";
    for (int j = 0; j < shots.length(); ++j) f << ",site_" << j;
    f << "\n";
    for (int i = 0; i < shots.shots(); ++i) {
        f << i;
        for (int j = 0; j < shots.length(); ++j)
            f << (shots.values(i, j) > 0 ? ",0.5" : ",-0.5");
        f << "\n";
    }
    if (!f) throw std::runtime_error("save_shots_csv: write failed");
}

ShotMatrix load_shots_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_shots_csv: cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("load_shots_csv: empty file");
    int L = 0;
    {
        std::stringstream ss(line);
        std::string tok;
        if (!std::getline(ss, tok, ',') || tok != "shot")
            throw std::runtime_error("load_shots_csv: bad header");
        while (std::getline(ss, tok, ',')) {
            if (tok != "site_" + std::to_string(L))
                throw std::runtime_error("load_shots_csv: bad header column " + tok);
            ++L;
        }
        if (L < 2) throw std::runtime_error("load_shots_csv: too few sites");
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::getline(ss, tok, ',');  // shot index, ignored
        std::vector<double> row;
        while (std::getline(ss, tok, ',')) {
            const double v = std::stod(tok);
            if (std::abs(std::abs(v) - 0.5) > 1e-12)
                throw std::runtime_error("load_shots_csv: entries must be +-0.5");
            row.push_back(v);
        }
        if (static_cast<int>(row.size()) != L)
            throw std::runtime_error("load_shots_csv: ragged row");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("load_shots_csv: no shots");
    ShotMatrix out;
    out.values.resize(static_cast<Eigen::Index>(rows.size()), L);
    for (size_t i = 0; i < rows.size(); ++i)
        for (int j = 0; j < L; ++j) out.values(static_cast<Eigen::Index>(i), j) = rows[i][j];
    return out;
}

}  // namespace fluxlab::sampler
