#include "instab/artifacts.hpp"

#include <charconv>
#include <fstream>

#include "instab/error.hpp"

namespace instab {

std::string format_number(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return {buf, res.ptr};
}

namespace {

std::string quote(const std::string& cell) {
    if (cell.find_first_of(",\"\r\n") == std::string::npos) return cell;
    std::string out = "\"";
    for (char ch : cell) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + '"';
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) fail_argument("cannot open " + path.string() + " for writing");
    os << text;
    if (!os) fail_argument("failed writing " + path.string());
}

const char* side_name(Side s) { return s == Side::A ? "A" : "B"; }

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::row(std::vector<std::string> cells) {
    if (cells.size() != header_.size()) fail_argument("csv row width does not match the header");
    rows_.push_back(std::move(cells));
    return *this;
}

std::string CsvTable::str() const {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += quote(cells[i]);
        }
        out += "\r\n";
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
}

void CsvTable::write(const std::filesystem::path& path) const { write_text(path, str()); }

void write_json(const std::filesystem::path& path, const Json& doc) { write_text(path, doc.dump(2) + "\n"); }

Json params_json(const PlayerParams& p) { return {{"r", p.r}, {"c", p.c}, {"side", side_name(p.side)}}; }

Json kink_json(const std::optional<KinkReport>& k) {
    if (!k) return nullptr;
    return {{"location", k->location}, {"slope_left", k->slope_left}, {"slope_right", k->slope_right}};
}

Json verification_json(const VerificationReport& r) {
    auto span = [](const std::optional<std::pair<double, double>>& s) {
        return s ? Json::array({s->first, s->second}) : Json(nullptr);
    };
    return {
        {"h", r.h},
        {"control_discrepancy_a", r.control_discrepancy_a},
        {"control_discrepancy_b", r.control_discrepancy_b},
        {"discrepancy_span_a", span(r.discrepancy_span_a)},
        {"discrepancy_span_b", span(r.discrepancy_span_b)},
        {"threshold_discrepancy_a", r.threshold_discrepancy_a},
        {"threshold_discrepancy_b", r.threshold_discrepancy_b},
        {"br_thresholds_a", Json::array({r.br_lower_a, r.br_upper_a})},
        {"br_thresholds_b", Json::array({r.br_lower_b, r.br_upper_b})},
        {"decoupling_violations", r.decoupling_violations},
        {"convex_kink", r.convex_kink},
        {"kink_message", r.kink_message},
        {"residual_a", r.residual_a},
        {"residual_b", r.residual_b},
        {"dominance", {{"control_a", r.dominance_control_a},
                       {"value_a", r.dominance_value_a},
                       {"control_b", r.dominance_control_b},
                       {"value_b", r.dominance_value_b}}},
        {"pass", r.pass},
    };
}

CsvTable benchmark_csv(const BenchmarkSolution& sol) {
    CsvTable t({"x", "v", "control", "v_minus_identity"});
    if (sol.params.side == Side::B) {
        // Written in the shared state x; B's status quo is 1 - x.
        const MirroredBenchmark m = mirror_for_b(sol);
        const Grid& g = m.v.grid();
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double x = g.node(i);
            t.row({format_number(x), format_number(m.v[i]), format_number(m.control[i]),
                   format_number(m.v[i] - (1.0 - x))});
        }
        return t;
    }
    const Grid& g = sol.v.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.node(i);
        t.row({format_number(x), format_number(sol.v[i]), format_number(sol.control[i]),
               format_number(sol.v[i] - x)});
    }
    return t;
}

Json benchmark_json(const BenchmarkSolution& sol, double residual) {
    Json shape = {{"kind", sol.shape.kind == ControlShape::Kind::Convex ? "convex" : "convex_concave"},
                  {"inflection", optional_number(sol.shape.inflection)}};
    return {
        {"params", params_json(sol.params)},
        {"domain_hi", sol.domain_hi},
        {"n", sol.v.size()},
        {"threshold", sol.params.side == Side::B ? 1.0 - sol.threshold : sol.threshold},
        {"boundary_mode", sol.boundary_mode == BoundaryMode::SmoothPasting ? "smooth_pasting" : "absorbed"},
        {"shape", shape},
        {"v0", sol.v0},
        {"left_slope_at_threshold", sol.left_slope_at_threshold},
        {"residual", residual},
    };
}

CsvTable equilibrium_csv(const Equilibrium& eq) {
    CsvTable t({"x", "a_star", "b_star", "v_a", "v_b"});
    const Grid& g = eq.a_star.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        t.row({format_number(g.node(i)), format_number(eq.a_star[i]), format_number(eq.b_star[i]),
               format_number(eq.v_a[i]), format_number(eq.v_b[i])});
    }
    return t;
}

Json equilibrium_json(const Equilibrium& eq) {
    Json doc = {
        {"params_a", params_json(eq.params_a)},
        {"params_b", params_json(eq.params_b)},
        {"n", eq.a_star.size()},
        {"regime", regime_name(eq.regime)},
        {"xbar", optional_number(eq.xbar)},
        {"x_a0", eq.x_a0},
        {"x_b0", eq.x_b0},
        {"stable_lo", eq.stable_lo},
        {"stable_hi", eq.stable_hi},
        {"kinks", {{"a", kink_json(eq.kink_a)}, {"b", kink_json(eq.kink_b)}}},
        {"kink_violation", eq.kink_violation},
        {"verification", eq.verification ? verification_json(*eq.verification) : Json(nullptr)},
        {"pass", eq.verification ? eq.verification->pass : false},
    };
    return doc;
}

CsvTable simulation_csv(const SimResult& res) {
    CsvTable t({"t", "mean", "mean_abs_dist", "frac_converged", "mean_increment", "se", "dist_se"});
    for (const Checkpoint& c : res.checkpoints) {
        t.row({format_number(c.t), format_number(c.mean), format_number(c.mean_abs_dist),
               format_number(c.frac_converged), format_number(c.mean_increment), format_number(c.se),
               format_number(c.dist_se)});
    }
    return t;
}

Json simulation_json(const SimResult& res, const SubmartingaleReport& sub) {
    const SimConfig& c = res.cfg;
    double hi = 0.0, lo = 1.0, mean = 0.0;
    const auto& terminal = res.states.back();
    for (double v : terminal) mean += v;
    mean /= static_cast<double>(terminal.size());
    for (std::size_t p = 0; p < res.path_max.size(); ++p) {
        hi = std::max(hi, res.path_max[p]);
        lo = std::min(lo, res.path_min[p]);
    }
    return {
        {"config", {{"x0", c.x0},
                    {"dt", c.dt},
                    {"t_max", c.t_max},
                    {"n_paths", c.n_paths},
                    {"seed", c.seed},
                    {"freeze_eps", c.freeze_eps},
                    {"converge_delta", c.converge_delta},
                    {"checkpoints", c.checkpoints}}},
        {"stable_lo", res.stable_lo},
        {"stable_hi", res.stable_hi},
        {"terminal", {{"mean", mean},
                      {"mean_abs_dist", res.checkpoints.back().mean_abs_dist},
                      {"frac_converged", res.frac_converged},
                      {"max_state", hi},
                      {"min_state", lo}}},
        {"containment", res.containment},
        {"submartingale", {{"region", sub.region == InstabilityRegion::ASide ? "A" : "B"}, {"pass", sub.pass}}},
    };
}

CsvTable sweep_csv(const SweepResult& res) {
    CsvTable t({"impatience", "r_a", "c_a", "x_a0", "x_b0", "regime", "stable_lo", "stable_hi", "sso_ok",
                "containment_ok"});
    for (const SweepPoint& p : res.points) {
        t.row({format_number(p.impatience), format_number(p.pa.r), format_number(p.pa.c), format_number(p.x_a0),
               format_number(p.x_b0), regime_name(p.regime), format_number(p.stable_lo), format_number(p.stable_hi),
               p.sso_ok ? "true" : "false", verdict_name(p.containment)});
    }
    return t;
}

Json sweep_json(const SweepResult& res, const SweepSpec& spec) {
    Json welfare = Json::array();
    for (const WelfareComparison& w : res.welfare) {
        welfare.push_back({{"index", w.index},
                           {"domain_hi", w.domain_hi},
                           {"min_gain", w.min_gain},
                           {"verdict", verdict_name(w.verdict)},
                           {"note", w.note}});
    }
    return {
        {"params_b", params_json(spec.pb)},
        {"r_a", spec.r_a},
        {"points", res.points.size()},
        {"theta", optional_number(res.theta)},
        {"theta_reason", res.theta ? Json(nullptr) : Json(res.theta_reason)},
        {"regime_flips", res.regime_flips},
        {"all_sso", res.all_sso},
        {"all_containment", res.all_containment},
        {"welfare", welfare},
    };
}

}  // namespace instab
