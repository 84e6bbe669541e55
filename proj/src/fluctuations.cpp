#include "fluxlab/fluctuations.hpp"

#include <bit>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace fluxlab::fluctuations {

using Complex = std::complex<double>;

// ---------------------------------------------------------------------------
// EdBackend

EdBackend::EdBackend(const exact::PureState& state) : state_(state) {
    const double n = state_.norm();
    if (std::abs(n - 1.0) > 1e-8)
        throw std::invalid_argument("EdBackend: state must be normalized");
}

void EdBackend::ensure_axis(SpinAxis axis) const {
    const int a = static_cast<int>(axis);
    if (have_[a]) return;
    const int L = state_.spec.length;
    const std::uint64_t dim = state_.spec.dim();
    const auto& psi = state_.amplitudes;

    Eigen::VectorXd one = Eigen::VectorXd::Zero(L);
    Eigen::MatrixXd pair = Eigen::MatrixXd::Zero(L, L);

    if (axis == SpinAxis::Z) {
        std::vector<double> s(L);
        for (std::uint64_t t = 0; t < dim; ++t) {
            const double w = std::norm(psi(static_cast<Eigen::Index>(t)));
            if (w == 0.0) continue;
            for (int j = 0; j < L; ++j) s[j] = 0.5 - ((t >> j) & 1u);
            for (int i = 0; i < L; ++i) {
                one(i) += w * s[i];
                for (int j = i + 1; j < L; ++j) pair(i, j) += w * s[i] * s[j];
            }
        }
    } else {
        const bool yy = (axis == SpinAxis::Y);
        for (int i = 0; i < L; ++i) {
            const std::uint64_t fi = std::uint64_t{1} << i;
            double acc = 0.0;
            for (std::uint64_t t = 0; t < dim; ++t) {
                const Complex c = std::conj(psi(static_cast<Eigen::Index>(t ^ fi))) *
                                  psi(static_cast<Eigen::Index>(t));
                if (!yy)
                    acc += 0.5 * c.real();
                else
                    acc += 0.5 * (((t >> i) & 1u) ? -1.0 : 1.0) * (Complex(0, 1) * c).real();
            }
            one(i) = acc;
            for (int j = i + 1; j < L; ++j) {
                const std::uint64_t f = fi | (std::uint64_t{1} << j);
                double acc2 = 0.0;
                for (std::uint64_t t = 0; t < dim; ++t) {
                    const Complex c = std::conj(psi(static_cast<Eigen::Index>(t ^ f))) *
                                      psi(static_cast<Eigen::Index>(t));
                    if (!yy) {
                        acc2 += 0.25 * c.real();
                    } else {
                        const int bi = (t >> i) & 1u, bj = (t >> j) & 1u;
                        acc2 += -0.25 * ((bi + bj) % 2 ? -1.0 : 1.0) * c.real();
                    }
                }
                pair(i, j) = acc2;
            }
        }
    }
    pair = (pair + pair.transpose()).eval();
    for (int i = 0; i < L; ++i) pair(i, i) = 0.25;  // (S^a)^2 = 1/4 on spin-1/2
    onsite_[a] = std::move(one);
    pair_[a] = std::move(pair);
    have_[a] = true;
}

double EdBackend::onsite(SpinAxis axis, int site) const {
    if (site < 0 || site >= length()) throw std::invalid_argument("onsite: site out of range");
    ensure_axis(axis);
    return onsite_[static_cast<int>(axis)](site);
}

double EdBackend::two_site(SpinAxis axis, int i, int j) const {
    if (i < 0 || j < 0 || i >= length() || j >= length())
        throw std::invalid_argument("two_site: site out of range");
    if (i == j) throw std::invalid_argument("two_site: sites must differ");
    ensure_axis(axis);
    return pair_[static_cast<int>(axis)](i, j);
}

double EdBackend::entropy(const Bipartition& cut) const {
    return exact::entropy_at_cut(state_, cut);
}

// ---------------------------------------------------------------------------
// Observables

double onsite_expectation(const ExpectationBackend& b, SpinAxis axis, int site) {
    return b.onsite(axis, site);
}

double connected_correlator(const ExpectationBackend& b, SpinAxis axis, int i, int j) {
    if (i == j) throw std::invalid_argument("connected_correlator: i != j required");
    return b.two_site(axis, i, j) - b.onsite(axis, i) * b.onsite(axis, j);
}

namespace {

double block_variance(const ExpectationBackend& b, SpinAxis axis, int begin, int end) {
    double mean = 0.0, second = 0.0;
    for (int i = begin; i < end; ++i) {
        mean += b.onsite(axis, i);
        second += 0.25;
        for (int j = i + 1; j < end; ++j) second += 2.0 * b.two_site(axis, i, j);
    }
    return second - mean * mean;
}

}  // namespace

double subsystem_variance(const ExpectationBackend& b, SpinAxis axis, const Bipartition& omega) {
    if (omega.cut <= 0 || omega.cut >= b.length())
        throw std::invalid_argument("subsystem_variance: bad bipartition");
    return block_variance(b, axis, 0, omega.cut);
}

double total_variance(const ExpectationBackend& b, SpinAxis axis) {
    return block_variance(b, axis, 0, b.length());
}

double reduced_fluctuation(const ExpectationBackend& b, SpinAxis axis, const Bipartition& omega,
                           Route route) {
    const int L = b.length();
    const int m = omega.cut;
    if (m <= 0 || m >= L) throw std::invalid_argument("reduced_fluctuation: bad bipartition");

    switch (route) {
        case Route::VarianceDiff: {
            const double vo = block_variance(b, axis, 0, m);
            const double vc = block_variance(b, axis, m, L);
            const double vt = total_variance(b, axis);
            return 0.5 * (vo + vc - vt);
        }
        case Route::Cross: {
            double mo = 0.0, mc = 0.0, cross = 0.0;
            for (int i = 0; i < m; ++i) mo += b.onsite(axis, i);
            for (int j = m; j < L; ++j) mc += b.onsite(axis, j);
            for (int i = 0; i < m; ++i)
                for (int j = m; j < L; ++j) cross += b.two_site(axis, i, j);
            return mo * mc - cross;
        }
        case Route::CorrelatorSum: {
            double acc = 0.0;
            for (int i = 0; i < m; ++i)
                for (int j = m; j < L; ++j) acc -= connected_correlator(b, axis, i, j);
            return acc;
        }
    }
    throw std::logic_error("reduced_fluctuation: unknown route");
}

std::optional<double> visibility(const ExpectationBackend& b, SpinAxis axis,
                                 const Bipartition& omega) {
    const double vo = subsystem_variance(b, axis, omega);
    const double vc = block_variance(b, axis, omega.cut, b.length());
    const double denom = vo + vc;
    if (denom < 1e-14) return std::nullopt;
    return 1.0 - total_variance(b, axis) / denom;
}

double imbalance(const ExpectationBackend& b) {
    const int L = b.length();
    double even = 0.0, odd = 0.0, total = 0.0;
    for (int j = 0; j < L; ++j) {
        const double v = b.onsite(SpinAxis::Z, j);
        total += v;
        (j % 2 == 0 ? even : odd) += v;
    }
    return (even - odd) / (total + L);
}

double string_correlator_avg(const ExpectationBackend& b, int r) {
    const int L = b.length();
    if (r < 1 || r > L - 1) throw std::invalid_argument("string_correlator_avg: r out of range");
    double acc = 0.0;
    for (int j = 0; j + r < L; ++j) acc += std::abs(b.two_site(SpinAxis::X, j, j + r));
    return acc / (L - r);
}

double binomial_counting_variance(int n_active) {
    if (n_active < 1) throw std::invalid_argument("binomial_counting_variance: N_a >= 1");
    return n_active / 4.0;
}

FluctuationReport fluctuation_report(const ExpectationBackend& b, SpinAxis axis,
                                     const Bipartition& omega) {
    FluctuationReport rep;
    rep.axis = axis;
    rep.omega = omega;
    rep.var_omega = subsystem_variance(b, axis, omega);
    rep.var_complement = block_variance(b, axis, omega.cut, b.length());
    rep.var_total = total_variance(b, axis);
    rep.reduced = 0.5 * (rep.var_omega + rep.var_complement - rep.var_total);
    rep.visibility = visibility(b, axis, omega);
    rep.entropy = b.entropy(omega);
    rep.backend = b.tag();

    const double cross = reduced_fluctuation(b, axis, omega, Route::Cross);
    if (std::abs(cross - rep.reduced) > 1e-9 * std::max(1.0, std::abs(rep.reduced)))
        throw std::logic_error("fluctuation_report: route consistency violated");
    if (rep.visibility && (*rep.visibility < -1.0 - 1e-10 || *rep.visibility > 1.0 + 1e-10))
        throw std::logic_error("fluctuation_report: visibility out of bounds");
    return rep;
}

std::string FluctuationReport::to_json() const {
    nlohmann::json j;
    j["axis"] = axis_name(axis);
    j["cut"] = omega.cut;
    j["var_omega"] = var_omega;
    j["var_complement"] = var_complement;
    j["var_total"] = var_total;
    j["reduced"] = reduced;
    if (visibility)
        j["beta"] = *visibility;
    else
        j["beta"] = nullptr;
    j["S_vN"] = entropy;
    j["backend"] = backend;
    return j.dump();
}

}  // namespace fluxlab::fluctuations
