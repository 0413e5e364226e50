// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failing criteria (0 when all pass).
#include <cstdio>

#include "instab/suites.hpp"

int main() {
    int failed = 0;
    for (const instab::Check& c : instab::run_all()) {
        std::printf("[%s] criterion %2d  %-32s %6.2fs  %s\n", c.pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                    c.seconds, c.detail.c_str());
        std::fflush(stdout);
        if (!c.pass) ++failed;
    }
    std::printf("%d of 10 criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
