#include <doctest.h>

#include <cmath>

#include "instab/error.hpp"
#include "instab/sde_sim.hpp"

using namespace instab;

namespace {

const Equilibrium& deterrence() {
    static const Equilibrium eq = build_deterrence({1, 2, Side::A}, {1, 2, Side::B}, 0.5);
    return eq;
}

const Equilibrium& accommodating() {
    static const Equilibrium eq = build_accommodating({7, 15, Side::A}, {7, 15, Side::B});
    return eq;
}

SimConfig small(double x0) {
    SimConfig c;
    c.x0 = x0;
    c.dt = 1e-3;
    c.t_max = 5.0;
    c.n_paths = 200;
    return c;
}

}  // namespace

TEST_CASE("keyed normals look standard") {
    const std::size_t n = 200000;
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = keyed_normal(42, i % 97, i / 97);
        s += z;
        s2 += z * z;
    }
    CHECK(std::abs(s / n) < 0.01);
    CHECK(std::abs(s2 / n - 1.0) < 0.02);
    CHECK(keyed_normal(1, 2, 3) == keyed_normal(1, 2, 3));
    CHECK(keyed_normal(1, 2, 3) != keyed_normal(1, 3, 2));
}

TEST_CASE("simulation is reproducible and stays in the unit interval") {
    SimConfig c = small(0.1);
    c.dt = 5e-3;  // coarse steps fold often
    const SimResult a = simulate(deterrence(), c);
    const SimResult b = simulate(deterrence(), c);
    CHECK(a.states == b.states);
    for (const auto& row : a.states) {
        for (double x : row) {
            CHECK(x >= 0.0);
            CHECK(x <= 1.0);
        }
    }
    CHECK(a.containment);
}

TEST_CASE("start inside the stable set stays put") {
    const SimResult r = simulate(accommodating(), small(0.5));
    for (const auto& row : r.states) {
        for (double x : row) CHECK(x == 0.5);
    }
    CHECK(r.checkpoints.front().frac_converged == 1.0);
    CHECK(submartingale_check(r, InstabilityRegion::ASide).pass);
}

TEST_CASE("accommodating paths converge toward A's threshold from below") {
    const SimResult r = simulate(accommodating(), small(0.05));
    double top = 0.0;
    for (double v : r.path_max) top = std::max(top, v);
    CHECK(top <= accommodating().stable_hi);
    CHECK(r.checkpoints.back().mean_abs_dist < r.checkpoints.front().mean_abs_dist);
    CHECK(r.containment);
}

TEST_CASE("submartingale check") {
    const SimResult r = simulate(deterrence(), small(0.1));
    CHECK(submartingale_check(r, InstabilityRegion::ASide).pass);
    CHECK_THROWS_AS(submartingale_check(r, InstabilityRegion::BSide), Error);

    SimResult flipped = r;
    for (Checkpoint& c : flipped.checkpoints) c.mean_increment = -c.mean_increment;
    CHECK_FALSE(submartingale_check(flipped, InstabilityRegion::ASide).pass);

    const SimResult up = simulate(deterrence(), small(0.9));
    CHECK(submartingale_check(up, InstabilityRegion::BSide).pass);
    double low = 1.0;
    for (double v : up.path_min) low = std::min(low, v);
    CHECK(low >= 0.5);
}

TEST_CASE("halving the step barely moves the convergence fraction") {
    SimConfig c = small(0.2);
    c.t_max = 1.0;
    const double coarse = simulate(deterrence(), c).frac_converged;
    c.dt /= 2;
    const double fine = simulate(deterrence(), c).frac_converged;
    CHECK(std::abs(coarse - fine) < 0.05);
}

TEST_CASE("configuration validation") {
    SimConfig c = small(0.1);
    c.dt = 0.1;
    CHECK_THROWS_WITH_AS(simulate(deterrence(), c), doctest::Contains("dt"), Error);
    c = small(1.5);
    CHECK_THROWS_WITH_AS(simulate(deterrence(), c), doctest::Contains("x0"), Error);
    c = small(0.1);
    c.n_paths = 0;
    CHECK_THROWS_WITH_AS(simulate(deterrence(), c), doctest::Contains("n_paths"), Error);
}
