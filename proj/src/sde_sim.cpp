#include "instab/sde_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

#include "instab/error.hpp"
#include "instab/kernels.hpp"
#include "instab/parallel.hpp"

namespace instab {
namespace {

std::uint64_t splitmix(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Uniform in (0, 1]: 53 random bits, offset so log() never sees zero.
double unit(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

double distance(double x, double lo, double hi) noexcept {
    if (x < lo) return lo - x;
    if (x > hi) return x - hi;
    return 0.0;
}

std::vector<std::size_t> checkpoint_steps(const SimConfig& cfg, std::size_t total) {
    std::vector<std::size_t> steps{0};
    const double first = 1e-3 * cfg.t_max;
    const std::size_t count = cfg.checkpoints;
    for (std::size_t k = 0; k < count; ++k) {
        const double frac = count == 1 ? 1.0 : static_cast<double>(k) / static_cast<double>(count - 1);
        const double t = first * std::pow(cfg.t_max / first, frac);
        std::size_t s = k + 1 == count ? total : static_cast<std::size_t>(std::llround(t / cfg.dt));
        s = std::clamp<std::size_t>(s, 1, total);
        if (s > steps.back()) steps.push_back(s);
    }
    return steps;
}

constexpr std::size_t kBlock = 64;

}  // namespace

void validate(const SimConfig& cfg) {
    if (!(cfg.x0 >= 0.0 && cfg.x0 <= 1.0)) fail_argument("x0 must lie in [0, 1]");
    if (!(cfg.dt > 0.0)) fail_argument("dt must be positive");
    if (!(cfg.t_max > 0.0 && std::isfinite(cfg.t_max))) fail_argument("t_max must be positive");
    if (cfg.dt > 1e-3 * cfg.t_max * (1.0 + 1e-12)) fail_argument("dt must not exceed 1e-3 * t_max");
    if (cfg.n_paths < 1) fail_argument("n_paths must be at least 1");
    if (!(cfg.freeze_eps >= 0.0)) fail_argument("freeze_eps must be non-negative");
    if (!(cfg.converge_delta > 0.0)) fail_argument("converge_delta must be positive");
    if (cfg.checkpoints < 1) fail_argument("checkpoints must be at least 1");
}

double keyed_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t step) noexcept {
    const std::uint64_t key = splitmix(splitmix(seed) ^ (path * 0xd1b54a32d192ed03ULL));
    const std::uint64_t u1 = splitmix(key ^ (2 * step));
    const std::uint64_t u2 = splitmix(key ^ (2 * step + 1));
    return std::sqrt(-2.0 * std::log(unit(u1))) * std::cos(2.0 * std::numbers::pi * unit(u2));
}

SimResult simulate(const Equilibrium& eq, const SimConfig& cfg) {
    validate(cfg);
    const Grid& g = eq.a_star.grid();
    const std::size_t n = g.size();
    std::vector<double> diffusion(n);
    for (std::size_t i = 0; i < n; ++i) diffusion[i] = eq.a_star[i] + eq.b_star[i];
    const double h = g.spacing();
    auto diffusion_at = [&](double x) {
        const double t = x / h;
        const std::size_t k = std::min(static_cast<std::size_t>(t), n - 2);
        return diffusion[k] + (t - static_cast<double>(k)) * (diffusion[k + 1] - diffusion[k]);
    };

    const double lo = eq.stable_lo;
    const double hi = eq.stable_hi;
    const std::size_t total = static_cast<std::size_t>(std::llround(cfg.t_max / cfg.dt));
    const std::vector<std::size_t> marks = checkpoint_steps(cfg, total);
    const double sqrt_dt = std::sqrt(cfg.dt);
    const std::size_t paths = cfg.n_paths;

    SimResult res;
    res.cfg = cfg;
    res.stable_lo = lo;
    res.stable_hi = hi;
    res.band = h;
    res.states.assign(marks.size(), std::vector<double>(paths));
    res.path_max.assign(paths, cfg.x0);
    res.path_min.assign(paths, cfg.x0);

    const auto& kt = kernels::active();
    const std::size_t blocks = (paths + kBlock - 1) / kBlock;
    parallel_for(blocks, [&](std::size_t blk) {
        const std::size_t p0 = blk * kBlock;
        const std::size_t m = std::min(kBlock, paths - p0);
        std::vector<double> x(m, cfg.x0), prev(m), d(m), z(m);
        std::vector<char> frozen(m, 0);
        std::size_t live = m;
        std::size_t mark = 0;
        for (std::size_t step = 0;; ++step) {
            if (step == marks[mark]) {
                for (std::size_t j = 0; j < m; ++j) res.states[mark][p0 + j] = x[j];
                if (++mark == marks.size()) break;
            }
            if (live == 0) {
                // Nothing moves any more; fill the remaining checkpoints.
                for (; mark < marks.size(); ++mark)
                    for (std::size_t j = 0; j < m; ++j) res.states[mark][p0 + j] = x[j];
                break;
            }
            for (std::size_t j = 0; j < m; ++j) {
                if (frozen[j]) {
                    d[j] = 0.0;
                    z[j] = 0.0;
                    continue;
                }
                d[j] = diffusion_at(x[j]);
                if (d[j] < cfg.freeze_eps) {
                    frozen[j] = 1;
                    --live;
                    d[j] = 0.0;
                    z[j] = 0.0;
                    continue;
                }
                z[j] = keyed_normal(cfg.seed, p0 + j, step);
            }
            std::copy(x.begin(), x.end(), prev.begin());
            kt.reflected_step(x, d, z, sqrt_dt);
            for (std::size_t j = 0; j < m; ++j) {
                if (frozen[j]) continue;
                if (std::isnan(x[j])) fail_solver("simulate: NaN state (corrupted strategy field)");
                if (prev[j] < lo && x[j] >= lo) {
                    x[j] = lo;
                    frozen[j] = 1;
                    --live;
                } else if (prev[j] > hi && x[j] <= hi) {
                    x[j] = hi;
                    frozen[j] = 1;
                    --live;
                }
                res.path_max[p0 + j] = std::max(res.path_max[p0 + j], x[j]);
                res.path_min[p0 + j] = std::min(res.path_min[p0 + j], x[j]);
            }
        }
    });

    const double count = static_cast<double>(paths);
    auto mean_se = [&](const std::vector<double>& v) {
        double m = 0.0;
        for (double e : v) m += e;
        m /= count;
        double ss = 0.0;
        for (double e : v) ss += (e - m) * (e - m);
        return std::pair{m, paths > 1 ? std::sqrt(ss / (count - 1.0) / count) : 0.0};
    };
    std::vector<double> dist(paths), inc(paths);
    for (std::size_t k = 0; k < marks.size(); ++k) {
        Checkpoint c;
        c.t = k + 1 == marks.size() && k > 0 ? cfg.t_max : static_cast<double>(marks[k]) * cfg.dt;
        double s = 0.0, conv = 0.0;
        for (std::size_t p = 0; p < paths; ++p) {
            const double xv = res.states[k][p];
            s += xv;
            dist[p] = distance(xv, lo, hi);
            if (dist[p] <= cfg.converge_delta) conv += 1.0;
            inc[p] = k > 0 ? xv - res.states[k - 1][p] : 0.0;
        }
        c.mean = s / count;
        c.frac_converged = conv / count;
        std::tie(c.mean_abs_dist, c.dist_se) = mean_se(dist);
        if (k > 0) std::tie(c.mean_increment, c.se) = mean_se(inc);
        res.checkpoints.push_back(c);
    }
    res.frac_converged = res.checkpoints.back().frac_converged;

    const double slack = 2.0 * res.band;
    for (std::size_t p = 0; p < paths; ++p) {
        if (cfg.x0 < lo && res.path_max[p] > hi + slack) res.containment = false;
        if (cfg.x0 > hi && res.path_min[p] < lo - slack) res.containment = false;
    }
    return res;
}

SubmartingaleReport submartingale_check(const SimResult& result, InstabilityRegion region) {
    const double x0 = result.cfg.x0;
    if (region == InstabilityRegion::ASide && x0 > result.stable_hi)
        fail_argument("submartingale_check: x0 lies above the stable set, not on the A side");
    if (region == InstabilityRegion::BSide && x0 < result.stable_lo)
        fail_argument("submartingale_check: x0 lies below the stable set, not on the B side");
    SubmartingaleReport rep;
    rep.region = region;
    for (std::size_t k = 1; k < result.checkpoints.size(); ++k) {
        const Checkpoint& c = result.checkpoints[k];
        rep.mean_increment.push_back(c.mean_increment);
        rep.se.push_back(c.se);
        const bool ok = region == InstabilityRegion::ASide ? c.mean_increment >= -3.0 * c.se
                                                           : c.mean_increment <= 3.0 * c.se;
        if (!ok) rep.pass = false;
    }
    return rep;
}

}  // namespace instab
