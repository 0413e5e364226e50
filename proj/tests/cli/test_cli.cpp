// Runs the instab binary and checks exit codes and output files.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(INSTAB_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("instab_cli_" + name);
    fs::remove_all(p);
    return p;
}

nlohmann::json load(const fs::path& p) {
    std::ifstream in(p);
    return nlohmann::json::parse(in);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("benchmark writes csv and json") {
    const fs::path out = scratch("benchmark");
    CHECK(run("benchmark --r 7 --c 15 --n 401 --out " + out.string()) == 0);
    const auto j = load(out / "benchmark.json");
    CHECK(j["threshold"].get<double>() == doctest::Approx(0.290398959089).epsilon(1e-7));
    CHECK(j["boundary_mode"] == "smooth_pasting");
    const std::string csv = slurp(out / "benchmark.csv");
    CHECK(csv.rfind("x,v,control,v_minus_identity\r\n", 0) == 0);
}

TEST_CASE("benchmark for B is written in the shared state") {
    const fs::path out = scratch("benchmark_b");
    CHECK(run("benchmark --r 7 --c 15 --side B --n 401 --out " + out.string()) == 0);
    CHECK(load(out / "benchmark.json")["threshold"].get<double>() ==
          doctest::Approx(1.0 - 0.290398959089).epsilon(1e-7));
    const std::string csv = slurp(out / "benchmark.csv");
    CHECK(csv.find("\r\n0,1,0,0\r\n") != std::string::npos);
}

TEST_CASE("bad parameters exit with 2") {
    CHECK(run("benchmark --r 0 --c 15") == 2);
    CHECK(run("benchmark --r 7") == 2);
    CHECK(run("equilibrium --ra 7 --ca 15 --rb 7 --cb 15 --xbar 0.5") == 2);
    CHECK(run("equilibrium --ra 1 --ca 2 --rb 1 --cb 2 --xbar nope") == 2);
    CHECK(run("simulate --ra 1 --ca 2 --rb 1 --cb 2 --xbar mid --dt 0.5 --t-max 1") == 2);
}

TEST_CASE("equilibrium exit codes follow verification") {
    const fs::path out = scratch("equilibrium");
    CHECK(run("equilibrium --ra 1 --ca 2 --rb 1 --cb 2 --xbar mid --n 1001 --out " + out.string()) == 0);
    const auto j = load(out / "equilibrium.json");
    CHECK(j["regime"] == "deterrence");
    CHECK(j["pass"] == true);
    CHECK(j["xbar"].get<double>() == doctest::Approx(0.5));

    const fs::path bad = scratch("equilibrium_bad");
    CHECK(run("equilibrium --ra 1 --ca 2 --rb 1 --cb 2 --xbar 0.25 --n 1001 --out " + bad.string()) == 4);
    CHECK(load(bad / "equilibrium.json")["pass"] == false);
}

TEST_CASE("simulate refuses an unverified equilibrium") {
    const fs::path out = scratch("simulate_bad");
    CHECK(run("simulate --ra 1 --ca 2 --rb 1 --cb 2 --xbar 0.25 --n 1001 --out " + out.string()) == 4);
    CHECK_FALSE(fs::exists(out / "simulation.csv"));
}

TEST_CASE("config file supplies flags and command line wins") {
    const fs::path dir = scratch("config");
    fs::create_directories(dir);
    {
        std::ofstream cfg(dir / "bench.cfg");
        cfg << "# benchmark for a patient player\nr=7\nc=15\nn=401\n";
    }
    CHECK(run("benchmark --config " + (dir / "bench.cfg").string() + " --c 30 --out " + dir.string()) == 0);
    CHECK(load(dir / "benchmark.json")["params"]["c"].get<double>() == 30.0);

    {
        std::ofstream cfg(dir / "bogus.cfg");
        cfg << "r=7\nc=15\nnot_a_flag=3\n";
    }
    CHECK(run("benchmark --config " + (dir / "bogus.cfg").string()) == 2);
    CHECK(run("benchmark --config " + (dir / "missing.cfg").string()) == 2);
}

TEST_CASE("verify") {
    CHECK(run("verify --suite simulation") == 0);
    // The closed-form suite carries the residual criterion, which is red.
    CHECK(run("verify --suite closed-form") == 1);
    CHECK(run("verify --suite oracle --oracle-tol 1e-15") == 1);
    CHECK(run("verify --suite nonsense") == 2);
}
