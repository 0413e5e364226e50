#include <doctest.h>

#include <cmath>

#include "instab/benchmark.hpp"
#include "instab/error.hpp"
#include "instab/mdp_oracle.hpp"

using namespace instab;

TEST_CASE("oracle matches the closed form for (7,15)") {
    const PlayerParams p{7, 15};
    MdpSpec spec;
    spec.params = p;
    const MdpSolution sol = solve_mdp(spec);
    const auto cf = closed_form_solution(p, 201);
    CHECK(compare(sol.value, cf.v).sup <= 1e-2);
    CHECK(sol.a_max == doctest::Approx(std::sqrt(2.0 / 15.0)));
    // CFL equality with b = 0.
    CHECK(2.0 * sol.a_max * sol.delta / std::pow(0.005, 2) == doctest::Approx(1.0));

    // Value is non-decreasing, within [0, 1] and above the identity.
    const Grid& g = sol.value.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(sol.value[i] >= g.node(i) - 1e-12);
        CHECK(sol.value[i] <= 1.0 + 1e-12);
        if (i > 0) CHECK(sol.value[i] >= sol.value[i - 1]);
    }
    CHECK(sol.value.back() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sol.policy.back() == 0.0);

    // The greedy threshold sits below x* because the smallest positive
    // action exceeds (r/6)(x* - x)^2 close to x*.
    double thr = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (sol.policy[i] > 0.0) thr = g.node(i);
    }
    CHECK(thr <= cf.threshold);
    CHECK(thr >= cf.threshold - 0.06);
}

TEST_CASE("single zero action keeps the status quo") {
    MdpSpec spec;
    spec.grid = Grid(0.0, 1.0, 51);
    spec.actions = 1;
    spec.params = {7, 15};
    const MdpSolution sol = solve_mdp(spec);
    for (std::size_t i = 0; i < 51; ++i) CHECK(sol.value[i] == doctest::Approx(spec.grid.node(i)).epsilon(1e-12));
}

TEST_CASE("oracle moves toward the closed form under refinement") {
    const PlayerParams p{10, 1};
    double prev = 1.0;
    for (std::size_t n : {26u, 51u, 101u}) {
        MdpSpec spec;
        spec.grid = Grid(0.0, 1.0, n);
        spec.actions = 2 * (n - 1) + 1;
        spec.params = p;
        const double err = compare(solve_mdp(spec).value, closed_form_solution(p, n).v).sup;
        CHECK(err < prev);
        prev = err;
    }
}

TEST_CASE("CFL violation is rejected") {
    MdpSpec spec;
    spec.grid = Grid(0.0, 1.0, 51);
    spec.params = {7, 15};
    spec.delta = 1.0;
    CHECK_THROWS_WITH_AS(solve_mdp(spec), doctest::Contains("CFL"), Error);
}

TEST_CASE("compare") {
    const Grid g(0.0, 1.0, 11);
    const ScalarField id = ScalarField::identity(g);
    CHECK(compare(id, id).sup == 0.0);
    const ScalarField up = ScalarField::sample(g, [](double x) { return x + 0.5; });
    CHECK(compare(id, up).sup == doctest::Approx(0.5));
    const ScalarField fine = ScalarField::identity(Grid(0.0, 1.0, 101));
    CHECK(compare(id, fine).sup < 1e-15);
}
