#include <doctest.h>

#include <cstdint>
#include <cstring>
#include <random>
#include <vector>

#include "instab/kernels.hpp"

using namespace instab::kernels;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed, double lo, double hi) {
    std::mt19937_64 gen(seed);
    std::vector<double> v(n);
    for (double& x : v) x = lo + (hi - lo) * (static_cast<double>(gen() >> 11) * 0x1.0p-53);
    return v;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("scalar table is always available and listed first") {
    const auto tables = available_tables();
    REQUIRE(!tables.empty());
    CHECK(tables.front()->isa == Isa::Scalar);
    CHECK(isa_name(active().isa).size() > 0);
}

TEST_CASE("every kernel variant matches the scalar reference bit for bit") {
    const KernelTable& ref = scalar_table();
    // Odd sizes exercise the vector tails.
    for (std::size_t n : {1u, 3u, 4u, 7u, 64u, 201u, 2001u}) {
        const auto v = noise(n, 11 + n, -1.0, 1.0);
        const auto base = noise(n, 12 + n, -1.0, 1.0);
        const auto slope = noise(n, 13 + n, -2.0, 2.0);
        const auto actions = noise(37, 14, 0.0, 0.5);
        const auto penalty = noise(37, 15, 0.0, 0.1);
        const BellmanInputs in{base, slope, actions, penalty};
        const auto diff = noise(n, 16 + n, 0.0, 0.3);
        const auto z = noise(n, 17 + n, -4.0, 4.0);
        const auto x0 = noise(n, 18 + n, 0.0, 1.0);

        std::vector<double> d_ref(n, 0.0), m_ref(n), a_ref(n), x_ref = x0;
        std::vector<std::uint32_t> k_ref(n);
        ref.second_diff(v, 1e4, d_ref);
        ref.bellman_max(in, m_ref);
        ref.bellman_argmax(in, a_ref, k_ref);
        ref.reflected_step(x_ref, diff, z, 0.3);

        for (const KernelTable* t : available_tables()) {
            CAPTURE(isa_name(t->isa));
            CAPTURE(n);
            std::vector<double> d(n, 0.0), m(n), a(n), x = x0;
            std::vector<std::uint32_t> k(n);
            t->second_diff(v, 1e4, d);
            t->bellman_max(in, m);
            t->bellman_argmax(in, a, k);
            t->reflected_step(x, diff, z, 0.3);
            CHECK(same_bits(d, d_ref));
            CHECK(same_bits(m, m_ref));
            CHECK(same_bits(a, a_ref));
            CHECK(k == k_ref);
            CHECK(same_bits(x, x_ref));
        }
    }
}

TEST_CASE("argmax reports the lowest maximizing index") {
    const std::vector<double> base{0.0, 0.0, 0.0, 0.0, 0.0}, slope{0.0, 1.0, -1.0, 0.0, 0.0};
    const std::vector<double> actions{0.0, 1.0, 2.0}, penalty{0.0, 0.0, 0.0};
    for (const KernelTable* t : available_tables()) {
        std::vector<double> out(5);
        std::vector<std::uint32_t> arg(5);
        t->bellman_argmax({base, slope, actions, penalty}, out, arg);
        CHECK(arg == std::vector<std::uint32_t>{0, 2, 0, 0, 0});
        CHECK(out[1] == 2.0);
    }
}

TEST_CASE("reflection folds large steps back into the unit interval") {
    for (const KernelTable* t : available_tables()) {
        std::vector<double> x{0.1, 0.9, 0.5, 0.0, 1.0};
        const std::vector<double> d{0.5, 0.5, 0.5, 0.5, 0.5};
        const std::vector<double> z{-0.35, 0.35, 3.7, -2.2, 5.1};
        t->reflected_step(x, d, z, 1.0);
        CHECK(x[0] == doctest::Approx(0.25));
        CHECK(x[1] == doctest::Approx(0.75));
        for (double v : x) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}
