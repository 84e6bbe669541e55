#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "fluxlab/rng.hpp"
#include "fluxlab/scaling.hpp"

using namespace fluxlab;
using namespace fluxlab::scaling;

namespace {

ScalingSeries make_series(const std::vector<int>& Ls, const std::function<double(int)>& f) {
    ScalingSeries s;
    for (int L : Ls) s.points.emplace_back(L, f(L));
    return s;
}

}  // namespace

TEST_CASE("fit_form recovers noiseless generators exactly") {
    const std::vector<int> Ls{8, 12, 16, 20};
    SUBCASE("logarithmic") {
        const auto fit = fit_form(make_series(Ls, [](int L) { return 2.0 + 0.5 * std::log(L); }),
                                  ScalingForm::Log);
        CHECK(fit.a == doctest::Approx(2.0).epsilon(1e-10));
        CHECK(fit.b == doctest::Approx(0.5).epsilon(1e-10));
        CHECK(fit.rss < 1e-20);
    }
    SUBCASE("linear") {
        const auto fit =
            fit_form(make_series(Ls, [](int L) { return 0.1 * L; }), ScalingForm::Linear);
        CHECK(fit.b == doctest::Approx(0.1).epsilon(1e-10));
        CHECK(fit.rss < 1e-20);
    }
    SUBCASE("constant") {
        const auto fit =
            fit_form(make_series(Ls, [](int) { return 7.0; }), ScalingForm::Constant);
        CHECK(fit.a == doctest::Approx(7.0).epsilon(1e-12));
        CHECK(fit.rss == doctest::Approx(0.0));
    }
}

TEST_CASE("series validation") {
    ScalingSeries bad;
    bad.points = {{8, 1.0}, {8, 2.0}};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    ScalingSeries nan_series;
    nan_series.points = {{8, std::nan("")}};
    CHECK_THROWS_AS(nan_series.validate(), std::invalid_argument);
}

TEST_CASE("classification identifies its own generator") {
    const std::vector<int> Ls{8, 10, 12, 14, 16, 20, 24};
    for (double b : {0.05, 0.3, 1.0}) {
        const auto log_fit =
            classify_scaling(make_series(Ls, [b](int L) { return 1.0 + b * std::log(L); }));
        CHECK(log_fit.cls == ScalingForm::Log);
        const auto lin_fit =
            classify_scaling(make_series(Ls, [b](int L) { return 0.2 + b * L; }));
        CHECK(lin_fit.cls == ScalingForm::Linear);
        const auto const_fit =
            classify_scaling(make_series(Ls, [b](int) { return 3.0 + b; }));
        CHECK(const_fit.cls == ScalingForm::Constant);
    }
}

TEST_CASE("classification is invariant under positive rescaling") {
    const std::vector<int> Ls{8, 12, 16, 20, 24};
    CounterRng rng(5);
    for (int k = 0; k < 10; ++k) {
        // noisy-ish log data via deterministic jitter
        auto base = make_series(Ls, [&rng, k](int L) {
            return 0.4 + 0.25 * std::log(L) + 0.003 * rng.symmetric(L + 100 * k);
        });
        const auto f1 = classify_scaling(base);
        for (double c : {0.01, 3.0, 1000.0}) {
            ScalingSeries scaled = base;
            for (auto& p : scaled.points) p.second *= c;
            const auto f2 = classify_scaling(scaled);
            CHECK(f2.cls == f1.cls);
            // score differences shift uniformly: pairwise gaps preserved
            CHECK((f2.score_log - f2.score_linear) ==
                  doctest::Approx(f1.score_log - f1.score_linear).epsilon(1e-6));
        }
    }
}

TEST_CASE("saturated series with sub-resolution drift classify as area") {
    // monotone drift at 1e-8 relative must not masquerade as a log law
    ScalingSeries s;
    for (int i = 0; i < 6; ++i)
        s.points.emplace_back(20 + 4 * i, 0.043816 * (1.0 + 1e-8 * std::exp(-i)));
    const auto fit = classify_scaling(s);
    CHECK(fit.cls == ScalingForm::Constant);
    // genuine slow log growth stays log even near the floor scale
    ScalingSeries g;
    for (int i = 0; i < 6; ++i) {
        const int L = 20 + 4 * i;
        g.points.emplace_back(L, 0.0438 + 1e-3 * std::log(L));
    }
    CHECK(classify_scaling(g).cls == ScalingForm::Log);
}

TEST_CASE("classification needs four usable points and honors min_L") {
    auto s = make_series({8, 12, 16}, [](int L) { return std::log(L); });
    CHECK_THROWS_AS(classify_scaling(s), std::invalid_argument);
    auto with_small = make_series({2, 4, 8, 12, 16, 20}, [](int L) { return std::log(L); });
    const auto fit = classify_scaling(with_small);  // drops L < 8
    CHECK(fit.cls == ScalingForm::Log);
}

TEST_CASE("mixed form fits its generator") {
    const auto mf = fit_mixed(make_series({8, 12, 16, 20, 24, 32},
                                          [](int L) { return 1.0 + 0.3 * std::log(L) + 0.02 * L; }));
    CHECK(mf.a == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(mf.b == doctest::Approx(0.3).epsilon(1e-8));
    CHECK(mf.c == doctest::Approx(0.02).epsilon(1e-8));
}

TEST_CASE("correlation length from synthetic exponential decay") {
    std::vector<std::pair<double, double>> decay;
    for (int r = 1; r <= 8; ++r) decay.emplace_back(r, 0.3 * std::exp(-r / 2.5));
    const auto fit = correlation_length(decay);
    CHECK(fit.decaying);
    CHECK(fit.xi == doctest::Approx(2.5).epsilon(1e-8));
    CHECK(fit.amplitude == doctest::Approx(0.3).epsilon(1e-8));
    CHECK(fit.r_squared > 0.999999);
}

TEST_CASE("correlation length edge cases") {
    SUBCASE("constant correlators are flagged, xi = infinity") {
        std::vector<std::pair<double, double>> flat;
        for (int r = 1; r <= 6; ++r) flat.emplace_back(r, 0.25);
        const auto fit = correlation_length(flat);
        CHECK(!fit.decaying);
        CHECK(std::isinf(fit.xi));
    }
    SUBCASE("points at the floor are dropped") {
        std::vector<std::pair<double, double>> decay{{1, 0.1}, {2, 0.05}, {3, 1e-13}, {4, 1e-14}};
        CHECK_THROWS_AS(correlation_length(decay), std::invalid_argument);
    }
    SUBCASE("fewer than three points") {
        std::vector<std::pair<double, double>> two{{1, 0.1}, {2, 0.05}};
        CHECK_THROWS_AS(correlation_length(two), std::invalid_argument);
    }
}

TEST_CASE("scaling fit serializes with per-class scores") {
    const auto fit = classify_scaling(
        make_series({8, 12, 16, 20}, [](int L) { return 0.5 * std::log(L); }));
    const auto json = fit.to_json();
    CHECK(json.find("\"class\":\"log\"") != std::string::npos);
    CHECK(json.find("\"scores\"") != std::string::npos);
}
