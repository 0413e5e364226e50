#include <doctest.h>

#include <cmath>

#include "instab/benchmark.hpp"
#include "instab/error.hpp"

using namespace instab;

namespace {

// (18 / 735)^(1/3), computed by hand: 735 = 7^2 * 15.
constexpr double kXStar7_15 = 0.29039895908900;

}  // namespace

TEST_CASE("closed form for (7,15)") {
    const PlayerParams p{7, 15};
    REQUIRE(closed_form_threshold(p).has_value());
    CHECK(*closed_form_threshold(p) == doctest::Approx(kXStar7_15).epsilon(1e-12));
    const auto sol = closed_form_solution(p, 2001);
    // a(0) = (r / 6) x*^2, v(0) = (r^2 c / 72) x*^4
    CHECK(sol.control[0] == doctest::Approx(7.0 / 6.0 * kXStar7_15 * kXStar7_15).epsilon(1e-12));
    CHECK(sol.v0 == doctest::Approx(735.0 / 72.0 * std::pow(kXStar7_15, 4)).epsilon(1e-12));
    CHECK_FALSE(closed_form_threshold({1, 2}).has_value());
}

TEST_CASE("shooting reproduces the closed form") {
    for (const PlayerParams p : {PlayerParams{7, 15}, PlayerParams{5, 6}, PlayerParams{6, 15}, PlayerParams{10, 1}}) {
        CAPTURE(p.r);
        CAPTURE(p.c);
        const auto sol = solve_benchmark(p, 1.0);
        const auto cf = closed_form_solution(p, 2001);
        CHECK(sol.boundary_mode == BoundaryMode::SmoothPasting);
        CHECK(std::abs(sol.threshold - cf.threshold) < 1e-8);
        double sup_v = 0.0, sup_a = 0.0;
        for (std::size_t i = 0; i < 2001; ++i) {
            sup_v = std::max(sup_v, std::abs(sol.v[i] - cf.v[i]));
            sup_a = std::max(sup_a, std::abs(sol.control[i] - cf.control[i]));
        }
        CHECK(sup_v < 1e-8);
        CHECK(sup_a < 1e-8);
        CHECK(sol.shape.kind == ControlShape::Kind::Convex);
    }
}

TEST_CASE("energy identity and control bound on the active region") {
    const PlayerParams p{7, 15};
    const auto sol = solve_benchmark(p, 0.2);
    const Grid& g = sol.v.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double w = sol.v[i] - g.node(i);
        const double a = sol.control[i];
        CHECK(std::abs(p.r * w - 0.5 * p.r * p.c * a * a) < 1e-8);
        CHECK(a <= std::sqrt(2.0 / p.c));
    }
}

TEST_CASE("short domain is absorbed with a square-root control") {
    const PlayerParams p{7, 15};
    const auto sol = solve_benchmark(p, 0.2);
    CHECK(sol.boundary_mode == BoundaryMode::AbsorbedAtDomainEnd);
    CHECK(sol.threshold == 0.2);
    CHECK(sol.v.back() == doctest::Approx(0.2));
    CHECK(sol.left_slope_at_threshold < 1.0);
    REQUIRE(sol.shape.kind == ControlShape::Kind::ConvexConcave);
    REQUIRE(sol.shape.inflection.has_value());
    CHECK(*sol.shape.inflection > 0.0);
    CHECK(*sol.shape.inflection < 0.2);
    const double h = sol.v.grid().spacing();
    CHECK(vanishing_exponent(sol.control, 0.2, 10 * h, 100 * h) == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("impatient-cheap player is absorbed at 1") {
    const auto sol = solve_benchmark({1, 2}, 1.0);
    CHECK(sol.boundary_mode == BoundaryMode::AbsorbedAtDomainEnd);
    CHECK(sol.threshold == 1.0);
    CHECK(sol.v.back() == 1.0);
    const Grid& g = sol.v.grid();
    for (std::size_t i = 0; i + 1 < g.size(); ++i) CHECK(sol.v[i] > g.node(i));
}

TEST_CASE("comparative statics in r^2 c") {
    const auto lo = solve_benchmark({7, 15}, 1.0);
    const auto hi = solve_benchmark({7, 30}, 1.0);
    CHECK(hi.threshold < lo.threshold);
    for (std::size_t i = 0; i < 2001; ++i) {
        CHECK(hi.control[i] <= lo.control[i]);
        CHECK(hi.v[i] <= lo.v[i]);
        if (lo.v.grid().node(i) < lo.threshold - 1e-3) CHECK(hi.v[i] < lo.v[i]);
    }
}

TEST_CASE("mirrored benchmark for B") {
    const auto sol = solve_benchmark({7, 15, Side::B}, 1.0);
    const auto m = mirror_for_b(sol);
    CHECK(m.threshold == doctest::Approx(1.0 - kXStar7_15).epsilon(1e-10));
    CHECK(m.control.back() == sol.control.front());
    CHECK_THROWS_AS(mirror_for_b(solve_benchmark({7, 15, Side::A}, 1.0)), Error);
}

TEST_CASE("invalid inputs") {
    CHECK_THROWS_WITH_AS(solve_benchmark({0, 15}, 1.0), "r must be a positive finite number", Error);
    CHECK_THROWS_AS(solve_benchmark({7, 15}, 1.0, {.n = 2}), Error);
    CHECK_THROWS_AS(solve_benchmark({7, 15}, 1.5), Error);
    CHECK_THROWS_AS(solve_benchmark({7, 15}, 0.0), Error);
    CHECK_THROWS_WITH_AS(solve_benchmark({7, 15}, 1.0, {.n = 2001, .w0_lo = 0.5, .w0_hi = 1.0}),
                         doctest::Contains("shooting bracket failed"), Error);
}
