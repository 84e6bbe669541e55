#pragma once

// Domain types shared by all solvers and observables: chain geometry,
// XYZ couplings, spin axes, bipartitions and parity sectors.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace fluxlab {

/// One spin-1/2 chain with open boundaries. Site 0 is the leftmost site;
/// basis index bit b_j encodes site j, bit value 0 = spin up.
struct ChainSpec {
    int length = 2;

    explicit ChainSpec(int L) : length(L) {
        if (L < 2) throw std::invalid_argument("ChainSpec: length must be >= 2");
        if (L > 64) throw std::invalid_argument("ChainSpec: length must be <= 64");
    }

    /// Full Hilbert-space dimension; only meaningful on dense-vector paths.
    std::uint64_t dim() const {
        if (length > 30)
            throw std::invalid_argument("ChainSpec::dim: basis indexing requires L <= 30");
        return std::uint64_t{1} << length;
    }
};

/// Nearest-neighbor exchange couplings of the XYZ chain,
///   H = -sum_j [ (J+gamma)/2 Sx Sx + (J-gamma)/2 Sy Sy + Jz Sz Sz ],
/// with S = sigma/2. J sets the energy scale and must be nonzero when used
/// as a normalization.
struct XYZParams {
    double J = 1.0;
    double gamma = 0.0;
    double Jz = 0.0;

    XYZParams() = default;
    XYZParams(double J_, double gamma_, double Jz_) : J(J_), gamma(gamma_), Jz(Jz_) {
        validate();
    }

    void validate() const {
        if (!std::isfinite(J) || !std::isfinite(gamma) || !std::isfinite(Jz))
            throw std::invalid_argument("XYZParams: couplings must be finite");
    }

    // Bond coefficients as they appear in front of Sx Sx, Sy Sy, Sz Sz.
    double cx() const { return -(J + gamma) / 2.0; }
    double cy() const { return -(J - gamma) / 2.0; }
    double cz() const { return -Jz; }
};

enum class SpinAxis { X, Y, Z };

inline const char* axis_name(SpinAxis a) {
    switch (a) {
        case SpinAxis::X: return "x";
        case SpinAxis::Y: return "y";
        case SpinAxis::Z: return "z";
    }
    return "?";
}

inline SpinAxis axis_from_name(const std::string& s) {
    if (s == "x" || s == "X") return SpinAxis::X;
    if (s == "y" || s == "Y") return SpinAxis::Y;
    if (s == "z" || s == "Z") return SpinAxis::Z;
    throw std::invalid_argument("unknown spin axis: " + s);
}

/// Contiguous left block Omega = [0, m) with 0 < m < L; the complement is
/// implied. "Half" means m = L/2.
struct Bipartition {
    int cut = 1;  // m = number of sites in Omega

    Bipartition() = default;
    Bipartition(int m, int L) : cut(m) {
        if (m <= 0 || m >= L)
            throw std::invalid_argument("Bipartition: cut must satisfy 0 < m < L");
    }

    static Bipartition half(int L) { return Bipartition(L / 2, L); }

    bool contains(int site) const { return site < cut; }
};

enum class ParitySector { Even, Odd, Full };

inline const char* sector_name(ParitySector s) {
    switch (s) {
        case ParitySector::Even: return "even";
        case ParitySector::Odd: return "odd";
        case ParitySector::Full: return "full";
    }
    return "?";
}

inline ParitySector sector_from_name(const std::string& s) {
    if (s == "even") return ParitySector::Even;
    if (s == "odd") return ParitySector::Odd;
    if (s == "full") return ParitySector::Full;
    throw std::invalid_argument("unknown parity sector: " + s);
}

/// Signed distance to the nearest critical line Jz = s (J+gamma)/2,
/// s in {+1,-1}; smallest by absolute value, sign preserved, ties resolved
/// toward the + line. Zero exactly on a line.
double critical_line_distance(const XYZParams& p);

/// Parity of a computational basis state: even iff the number of down spins
/// (set bits) is even.
ParitySector parity_of_basis_state(std::uint64_t bits, const ChainSpec& spec);

}  // namespace fluxlab
