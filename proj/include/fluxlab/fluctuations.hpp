#pragma once

// Fluctuation and entanglement observables over a backend-agnostic
// expectation interface: on-site expectations, connected correlators,
// subsystem/total variances, reduced fluctuations (three equivalent routes),
// visibility, imbalance, G_r and the binomial counting oracle.

#include <memory>
#include <optional>
#include <string>

#include "fluxlab/exact.hpp"
#include "fluxlab/model.hpp"

namespace fluxlab::fluctuations {

/// One- and two-site same-axis expectations plus bipartite entropy.
/// Implemented by the ED and MPS backends.
class ExpectationBackend {
  public:
    virtual ~ExpectationBackend() = default;
    virtual int length() const = 0;
    /// <S^a_site>
    virtual double onsite(SpinAxis axis, int site) const = 0;
    /// <S^a_i S^a_j>, i != j
    virtual double two_site(SpinAxis axis, int i, int j) const = 0;
    /// von Neumann entropy at a contiguous cut, nats
    virtual double entropy(const Bipartition& cut) const = 0;
    virtual std::string tag() const = 0;
};

/// Expectation backend over a full amplitude vector. Pair tables are built
/// lazily per axis and cached.
class EdBackend final : public ExpectationBackend {
  public:
    explicit EdBackend(const exact::PureState& state);
    int length() const override { return state_.spec.length; }
    double onsite(SpinAxis axis, int site) const override;
    double two_site(SpinAxis axis, int i, int j) const override;
    double entropy(const Bipartition& cut) const override;
    std::string tag() const override { return "ed"; }

    const exact::PureState& state() const { return state_; }

  private:
    void ensure_axis(SpinAxis axis) const;

    exact::PureState state_;
    mutable std::array<bool, 3> have_{{false, false, false}};
    mutable std::array<Eigen::VectorXd, 3> onsite_;
    mutable std::array<Eigen::MatrixXd, 3> pair_;
};

enum class Route { Cross, VarianceDiff, CorrelatorSum };

struct FluctuationReport {
    SpinAxis axis = SpinAxis::Z;
    Bipartition omega;
    double var_omega = 0.0;
    double var_complement = 0.0;
    double var_total = 0.0;
    double reduced = 0.0;
    std::optional<double> visibility;
    double entropy = 0.0;
    std::string backend;

    std::string to_json() const;
};

double onsite_expectation(const ExpectationBackend& b, SpinAxis axis, int site);

/// <S^a_i S^a_j> - <S^a_i><S^a_j>
double connected_correlator(const ExpectationBackend& b, SpinAxis axis, int i, int j);

/// Variance of A_Omega = sum_{i in Omega} S^a_i.
double subsystem_variance(const ExpectationBackend& b, SpinAxis axis, const Bipartition& omega);

double total_variance(const ExpectationBackend& b, SpinAxis axis);

/// Reduced fluctuation; the three routes are algebraically identical and
/// agree within round-off.
double reduced_fluctuation(const ExpectationBackend& b, SpinAxis axis, const Bipartition& omega,
                           Route route = Route::VarianceDiff);

/// beta = 1 - var_tot / (var_Omega + var_complement); empty when the
/// denominator is below 1e-14.
std::optional<double> visibility(const ExpectationBackend& b, SpinAxis axis,
                                 const Bipartition& omega);

/// Staggered sublattice magnetization ratio, sites 0-indexed.
double imbalance(const ExpectationBackend& b);

/// G_r = mean over j of |<S^x_j S^x_{j+r}>|.
double string_correlator_avg(const ExpectationBackend& b, int r);

/// Exact variance of the subsystem spin under the binomial counting
/// distribution: N_a / 4.
double binomial_counting_variance(int n_active);

FluctuationReport fluctuation_report(const ExpectationBackend& b, SpinAxis axis,
                                     const Bipartition& omega);

}  // namespace fluxlab::fluctuations
