#pragma once

// Simulated measurement protocol: projective single-shot readout of every
// site along one axis, drawn from the exact Born distribution, plus
// shot-based estimation of the reduced fluctuation with delete-1 jackknife
// standard errors.

#include <cstdint>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "fluxlab/exact.hpp"
#include "fluxlab/model.hpp"

namespace fluxlab::sampler {

struct ShotMatrix {
    SpinAxis axis = SpinAxis::Z;
    std::uint64_t seed = 0;
    Eigen::MatrixXd values;  // N x L, entries +-0.5

    int shots() const { return static_cast<int>(values.rows()); }
    int length() const { return static_cast<int>(values.cols()); }
};

/// Rotates the state into the product eigenbasis of S^axis and draws N
/// configurations by exact CDF inversion. Deterministic given the seed;
/// shot i uses counter value i.
ShotMatrix sample_shots(const exact::PureState& state, SpinAxis axis, int n_shots,
                        std::uint64_t seed);

struct FluctuationEstimate {
    double value = 0.0;
    double standard_error = 0.0;
};

/// delta_r^2 estimate: mean(a_Omega) mean(a_comp) - mean(a_Omega a_comp)
/// with the unbiased N/(N-1) covariance correction; the error is a delete-1
/// jackknife over shots.
FluctuationEstimate estimate_reduced_fluctuation(const ShotMatrix& shots,
                                                 const Bipartition& omega);

/// CSV with header "shot,site_0,...,site_{L-1}" and values +-0.5.
void save_shots_csv(const ShotMatrix& shots, const std::string& path);
ShotMatrix load_shots_csv(const std::string& path);

}  // namespace fluxlab::sampler
