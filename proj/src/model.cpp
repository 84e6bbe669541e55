#include "fluxlab/model.hpp"

#include <bit>
#include <cmath>

namespace fluxlab {

double critical_line_distance(const XYZParams& p) {
    p.validate();
    const double half = (p.J + p.gamma) / 2.0;
    const double d_plus = p.Jz - half;
    const double d_minus = p.Jz + half;
    // tie (equal magnitudes) goes to the + line
    return std::abs(d_minus) < std::abs(d_plus) ? d_minus : d_plus;
}

ParitySector parity_of_basis_state(std::uint64_t bits, const ChainSpec& spec) {
    if (bits >= spec.dim())
        throw std::invalid_argument("parity_of_basis_state: index out of range");
    return (std::popcount(bits) % 2 == 0) ? ParitySector::Even : ParitySector::Odd;
}

}  // namespace fluxlab
