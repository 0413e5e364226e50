#include <doctest.h>

#include <cmath>

#include "instab/error.hpp"
#include "instab/grid.hpp"

using namespace instab;

TEST_CASE("grid nodes hit both ends exactly") {
    const Grid g(0.0, 1.0, 2001);
    CHECK(g.node(0) == 0.0);
    CHECK(g.node(2000) == 1.0);
    CHECK(g.spacing() == doctest::Approx(5e-4));
    CHECK(g.nearest_index(0.29) == 580);
    CHECK(g.nearest_index(-3.0) == 0);
    CHECK(g.nearest_index(7.0) == 2000);
}

TEST_CASE("interp_linear is exact at nodes and linear between them") {
    const Grid g(0.0, 1.0, 11);
    const ScalarField f = ScalarField::sample(g, [](double x) { return x * x; });
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(interp_linear(f, g.node(i)) == f[i]);
    CHECK(interp_linear(f, 0.15) == doctest::Approx(0.5 * (0.01 + 0.04)));
    CHECK_THROWS_AS(interp_linear(f, 1.5), Error);
}

TEST_CASE("mirror is an involution") {
    const Grid g(0.2, 0.9, 8);
    const ScalarField f = ScalarField::sample(g, [](double x) { return std::sin(5 * x); });
    const ScalarField m = mirror(f);
    CHECK(m.grid().lo() == doctest::Approx(0.1));
    CHECK(m.grid().hi() == doctest::Approx(0.8));
    CHECK(m[0] == f.back());
    const ScalarField mm = mirror(m);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(mm[i] == f[i]);
}

TEST_CASE("bisect finds the cube root of 2") {
    const double root = bisect([](double x) { return x * x * x - 2.0; }, 0.0, 2.0, 1e-13);
    CHECK(root == doctest::Approx(std::cbrt(2.0)).epsilon(1e-12));
}

TEST_CASE("tridiagonal solve reproduces a known vector") {
    // -u'' = 2 on (0, 1) with u(0) = u(1) = 0 has u = x (1 - x); the 3-point
    // scheme is exact for quadratics.
    const std::size_t n = 9;
    const double h = 1.0 / (n + 1);
    std::vector<double> lo(n, -1.0), di(n, 2.0), up(n, -1.0), rhs(n, 2.0 * h * h);
    const auto u = solve_tridiagonal(lo, di, up, rhs);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = (i + 1) * h;
        CHECK(u[i] == doctest::Approx(x * (1 - x)).epsilon(1e-12));
    }
}

TEST_CASE("rk4 integrates w'' = w to cosh") {
    const auto traj = integrate_until([](double, double w) { return w; }, {0.0, 1.0, 0.0},
                                      [](const OdeState&) { return false; }, 1e-3, 1.0);
    CHECK(traj.points.back().x == doctest::Approx(1.0));
    CHECK(traj.points.back().w == doctest::Approx(std::cosh(1.0)).epsilon(1e-10));
    CHECK_FALSE(traj.event.has_value());
}
