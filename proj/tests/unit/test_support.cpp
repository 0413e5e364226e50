#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "instab/artifacts.hpp"
#include "instab/parallel.hpp"

using namespace instab;

TEST_CASE("numbers round-trip through 17 significant digits") {
    for (double v : {0.1, 1.0 / 3.0, 0.29039895908900243, 1e-300, -2.5e17, 0.0}) {
        CHECK(std::strtod(format_number(v).c_str(), nullptr) == v);
    }
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(200.0) == "200");
}

TEST_CASE("csv layout") {
    CsvTable t({"name", "value"});
    t.row({"plain", "1"}).row({"a,b", "say \"hi\""});
    CHECK(t.str() == "name,value\r\nplain,1\r\n\"a,b\",\"say \"\"hi\"\"\"\r\n");
    CHECK_THROWS(t.row({"short"}));
}

TEST_CASE("parallel_for visits every index once and rethrows") {
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
    for (const auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS_AS(parallel_for(50, [](std::size_t i) {
                        if (i == 17) throw std::runtime_error("boom");
                    }),
                    std::runtime_error);
    CHECK(worker_count() >= 1);
}
