#include <doctest.h>

#include <cmath>

#include "instab/benchmark.hpp"
#include "instab/error.hpp"
#include "instab/viscosity_br.hpp"

using namespace instab;

namespace {

const Grid kUnit(0.0, 1.0, 2001);

ScalarField zero_on(const Grid& g) { return ScalarField::constant(g, 0.0); }

}  // namespace

TEST_CASE("hjb_residual on simple fields") {
    const PlayerParams p{1, 1};
    const Grid g(0.0, 1.0, 11);
    const ScalarField id = ScalarField::identity(g);
    const ScalarField res = hjb_residual(id, zero_on(g), p);
    for (std::size_t i = 1; i + 1 < g.size(); ++i) CHECK(res[i] == 0.0);
    const ScalarField half = ScalarField::constant(g, 0.5);
    CHECK(hjb_residual(half, zero_on(g), p)[2] == doctest::Approx(0.3));
}

TEST_CASE("closed-form value has a small residual on its active region") {
    const PlayerParams p{7, 15};
    const auto cf = closed_form_solution(p, 2001);
    const ScalarField res = hjb_residual(cf.v, zero_on(kUnit), p);
    double sup = 0.0;
    for (std::size_t i = 1; kUnit.node(i) < cf.threshold - 3 * kUnit.spacing(); ++i) sup = std::max(sup, std::abs(res[i]));
    CHECK(sup < 1e-6);
}

TEST_CASE("best response to a passive opponent is the benchmark") {
    const PlayerParams p{7, 15};
    const BestResponse br = solve_br(p, zero_on(kUnit));
    const auto cf = closed_form_solution(p, 2001);
    double sup = 0.0;
    for (std::size_t i = 0; i < 2001; ++i) sup = std::max(sup, std::abs(br.v[i] - cf.v[i]));
    CHECK(sup < 1e-4);
    CHECK(std::abs(br.lower_threshold - cf.threshold) <= 2 * kUnit.spacing());
    CHECK(br.upper_threshold == 1.0);
    CHECK(br.residual < 1e-8);
    CHECK_FALSE(br.kink.has_value());
    CHECK(br.kink_violation.empty());
}

TEST_CASE("zero initialization reaches the same fixed point") {
    const PlayerParams p{7, 15};
    const BestResponse a = solve_br(p, zero_on(kUnit));
    const BestResponse b = solve_br(p, zero_on(kUnit), {.init = Initialization::Zero});
    double sup = 0.0;
    for (std::size_t i = 0; i < 2001; ++i) sup = std::max(sup, std::abs(a.v[i] - b.v[i]));
    CHECK(sup < 1e-9);
}

TEST_CASE("discretization error shrinks at second order") {
    const PlayerParams p{7, 15};
    std::vector<double> errs;
    for (std::size_t n : {501u, 1001u, 2001u}) {
        const Grid g(0.0, 1.0, n);
        const BestResponse br = solve_br(p, zero_on(g));
        const auto cf = closed_form_solution(p, n);
        double sup = 0.0;
        for (std::size_t i = 0; i < n; ++i) sup = std::max(sup, std::abs(br.v[i] - cf.v[i]));
        errs.push_back(sup);
    }
    for (std::size_t k = 1; k < errs.size(); ++k) {
        CAPTURE(errs[k - 1]);
        CAPTURE(errs[k]);
        const double ratio = errs[k - 1] / errs[k];
        CHECK(ratio > 2.0);
        CHECK(ratio < 8.0);
    }
}

TEST_CASE("constant opponent volatility opens a detrimental region") {
    const PlayerParams p{7, 15};
    const BestResponse br = solve_br(p, ScalarField::constant(kUnit, 0.05));
    CHECK(br.upper_threshold < 1.0);
    CHECK(br.v.back() < 1.0);
    CHECK(br.lower_threshold > 0.0);
    CHECK(br.lower_threshold <= br.upper_threshold);
    CHECK(br.residual < 1e-6);
    // Region signs and value bounds.
    const double band = default_threshold_band(kUnit);
    for (std::size_t i = 0; i < 2001; ++i) {
        const double x = kUnit.node(i), e = br.v[i] - x;
        if (x < br.lower_threshold) CHECK(e >= -band);
        if (x > br.upper_threshold) CHECK(e <= band);
        CHECK(br.v[i] >= 0.0);
        CHECK(br.v[i] <= 1.0);
        if (x >= br.lower_threshold) CHECK(br.control[i] == 0.0);
    }
}

TEST_CASE("solve_br rejects bad opponents") {
    const PlayerParams p{7, 15};
    CHECK_THROWS_AS(solve_br(p, ScalarField::constant(kUnit, -0.1)), Error);
    CHECK_THROWS_AS(solve_br(p, ScalarField::constant(Grid(0.0, 0.5, 11), 0.0)), Error);
}

TEST_CASE("threshold extraction") {
    const Thresholds id = extract_thresholds(ScalarField::identity(kUnit));
    CHECK(id.degenerate);
    CHECK(id.lower == 0.0);
    CHECK(id.upper == 1.0);
    const auto cf = closed_form_solution({7, 15}, 2001);
    const Thresholds t = extract_thresholds(cf.v);
    CHECK_FALSE(t.degenerate);
    CHECK(std::abs(t.lower - cf.threshold) <= 2 * kUnit.spacing());
    CHECK(t.upper == 1.0);
}

TEST_CASE("kink detection") {
    CHECK_FALSE(detect_kink(ScalarField::identity(kUnit)).has_value());
    CHECK_FALSE(detect_kink(closed_form_solution({7, 15}, 2001).v).has_value());
    // Concave tent: slope 1 then 0.5 at x = 0.4.
    const ScalarField tent = ScalarField::sample(kUnit, [](double x) { return x < 0.4 ? x : 0.4 + 0.5 * (x - 0.4); });
    const auto k = detect_kink(tent);
    REQUIRE(k.has_value());
    CHECK(k->location == doctest::Approx(0.4));
    CHECK(k->slope_left == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(k->slope_right == doctest::Approx(0.5).epsilon(1e-6));
    const ScalarField vee = ScalarField::sample(kUnit, [](double x) { return x < 0.4 ? 0.5 * x : 0.2 + (x - 0.4); });
    CHECK_THROWS_WITH_AS(detect_kink(vee), doctest::Contains("convex kink"), Error);
}

TEST_CASE("best response is non-increasing against an increasing opponent") {
    const PlayerParams p{7, 15};
    const BestResponse br = solve_br(p, ScalarField::sample(kUnit, [](double x) { return 0.1 * x * x; }));
    for (std::size_t i = 1; kUnit.node(i) < br.lower_threshold; ++i) CHECK(br.control[i] <= br.control[i - 1]);
}
