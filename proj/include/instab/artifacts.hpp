#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "instab/benchmark.hpp"
#include "instab/equilibrium.hpp"
#include "instab/sde_sim.hpp"

namespace instab {

using Json = nlohmann::ordered_json;

/// Shortest form with 17 significant digits; parses back to the same double.
std::string format_number(double v);

/// RFC 4180 table: header row, comma separators, CRLF line ends, fields quoted
/// only when they contain a comma, quote or line break.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    CsvTable& row(std::vector<std::string> cells);
    std::string str() const;
    void write(const std::filesystem::path& path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

void write_json(const std::filesystem::path& path, const Json& doc);

Json params_json(const PlayerParams& p);
Json kink_json(const std::optional<KinkReport>& k);
Json verification_json(const VerificationReport& r);

CsvTable benchmark_csv(const BenchmarkSolution& sol);
Json benchmark_json(const BenchmarkSolution& sol, double residual);

CsvTable equilibrium_csv(const Equilibrium& eq);
Json equilibrium_json(const Equilibrium& eq);

CsvTable simulation_csv(const SimResult& res);
Json simulation_json(const SimResult& res, const SubmartingaleReport& sub);

CsvTable sweep_csv(const SweepResult& res);
Json sweep_json(const SweepResult& res, const SweepSpec& spec);

}  // namespace instab
