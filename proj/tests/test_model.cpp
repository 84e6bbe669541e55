#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <bit>

#include "fluxlab/model.hpp"
#include "fluxlab/rng.hpp"

using namespace fluxlab;

TEST_CASE("critical line distance at tabulated points") {
    CHECK(critical_line_distance(XYZParams(1, 0.4, 0.7)) == doctest::Approx(0.0).epsilon(1e-15));
    // tie at gamma=0, Jz=0 resolves toward the + line
    CHECK(critical_line_distance(XYZParams(1, 0, 0)) == doctest::Approx(-0.5));
    CHECK(critical_line_distance(XYZParams(1, 0.5, 0.75)) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("critical line distance is antisymmetric under Jz -> -Jz away from ties") {
    CounterRng rng(77);
    for (int k = 0; k < 200; ++k) {
        const double g = rng.symmetric(2 * k);
        const double jz = 1.5 * rng.symmetric(2 * k + 1);
        const XYZParams p(1.0, g, jz);
        const XYZParams m(1.0, g, -jz);
        const double half = (p.J + p.gamma) / 2.0;
        if (std::abs(std::abs(jz - half) - std::abs(jz + half)) < 1e-9) continue;  // tie
        CHECK(critical_line_distance(m) == doctest::Approx(-critical_line_distance(p)).epsilon(1e-12));
    }
}

TEST_CASE("parity of basis states") {
    ChainSpec two(2);
    CHECK(parity_of_basis_state(0b00, two) == ParitySector::Even);  // up-up
    CHECK(parity_of_basis_state(0b10, two) == ParitySector::Odd);   // up-down
    CHECK(parity_of_basis_state(0b11, two) == ParitySector::Even);  // down-down
    CHECK_THROWS_AS(parity_of_basis_state(4, two), std::invalid_argument);
}

TEST_CASE("parity sectors split the basis evenly") {
    for (int L = 2; L <= 10; ++L) {
        ChainSpec spec(L);
        std::uint64_t even = 0, odd = 0;
        for (std::uint64_t t = 0; t < spec.dim(); ++t)
            (parity_of_basis_state(t, spec) == ParitySector::Even ? even : odd)++;
        CHECK(even == spec.dim() / 2);
        CHECK(odd == spec.dim() / 2);
    }
}

TEST_CASE("chain and bipartition validation") {
    CHECK_THROWS_AS(ChainSpec(1), std::invalid_argument);
    CHECK_THROWS_AS(Bipartition(0, 4), std::invalid_argument);
    CHECK_THROWS_AS(Bipartition(4, 4), std::invalid_argument);
    CHECK(Bipartition::half(8).cut == 4);
    CHECK_THROWS_AS(XYZParams(1, std::nan(""), 0), std::invalid_argument);
}

TEST_CASE("counter rng is stateless and stream-separated") {
    CounterRng a(123, 0), b(123, 0), c(123, 1);
    CHECK(a.bits(7) == b.bits(7));
    CHECK(a.bits(7) != c.bits(7));
    double lo = 1, hi = 0;
    for (int i = 0; i < 1000; ++i) {
        const double u = a.uniform(i);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    CHECK(lo < 0.05);
    CHECK(hi > 0.95);
}
