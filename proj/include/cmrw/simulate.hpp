#ifndef CMRW_SIMULATE_HPP
#define CMRW_SIMULATE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <thread>
#include <variant>
#include <vector>

#include "ctmc.hpp"
#include "error.hpp"
#include "pmf.hpp"
#include "tridiagonal.hpp"

namespace cmrw {

struct FixedTime { double t = 1.0; };
struct GeometricTime { double a = 0.5; };
struct NegBinTime { int r = 1; double a = 0.5; };
struct GammaTime { int r = 1; double t = 1.0; };

using TimeSpec = std::variant<FixedTime, GeometricTime, NegBinTime, GammaTime>;

struct SimConfig {
    std::uint64_t paths = 100000;
    std::uint64_t seed = 20240601;
    TimeSpec time = FixedTime{};
    /// 0 picks hardware concurrency. Results do not depend on it.
    unsigned threads = 0;
    /// Keep the full state sequence of the first `record_paths` paths.
    std::size_t record_paths = 0;
};

struct EmpiricalMarginal {
    StateGrid grid;
    std::vector<std::uint64_t> counts;
    std::uint64_t n = 0;
    std::vector<std::vector<std::size_t>> paths;

    double frequency(std::size_t j) const { return static_cast<double>(counts[j]) / static_cast<double>(n); }

    std::vector<double> frequencies() const {
        std::vector<double> f(counts.size());
        for (std::size_t j = 0; j < f.size(); ++j) f[j] = frequency(j);
        return f;
    }

    double sample_mean() const {
        double s = 0.0;
        for (std::size_t j = 0; j < counts.size(); ++j) s += grid[j] * static_cast<double>(counts[j]);
        return s / static_cast<double>(n);
    }
};

inline double tv_distance(std::span<const double> freq, std::span<const double> p) {
    if (freq.size() != p.size()) throw Error(ErrorKind::GridMismatch, "distributions differ in length");
    double s = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) s += std::abs(freq[j] - p[j]);
    return 0.5 * s;
}

inline double tv_distance(const EmpiricalMarginal& emp, const TargetPMF& p) {
    if (!(emp.grid == p.grid())) throw Error(ErrorKind::GridMismatch, "empirical and target grids differ");
    return tv_distance(emp.frequencies(), p.masses());
}

namespace detail {

/// Paths are drawn in blocks; block b uses its own engine keyed by (seed, b).
inline constexpr std::uint64_t kBlockPaths = 1024;

inline std::mt19937_64 block_engine(std::uint64_t seed, std::uint64_t block) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (block + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return std::mt19937_64(z ^ (z >> 31));
}

inline std::size_t sample_index(std::span<const double> weights, double u) {
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        if (weights[j] <= 0.0) continue;
        acc += weights[j];
        last = j;
        if (u < acc) return j;
    }
    return last;
}

/// Runs `one_path(engine, record)` for every path. Workers take whole blocks
/// and sum their own counts, so the result matches sequential execution.
template <class PathFn>
EmpiricalMarginal run_paths(const StateGrid& grid, const SimConfig& cfg, PathFn one_path) {
    if (cfg.paths < 1) throw Error(ErrorKind::InvalidParameter, "need at least one path");
    const std::size_t m = grid.size();
    unsigned workers = cfg.threads != 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());

    EmpiricalMarginal out;
    out.grid = grid;
    out.n = cfg.paths;
    out.counts.assign(m, 0);
    const std::size_t recorded = static_cast<std::size_t>(std::min<std::uint64_t>(cfg.record_paths, cfg.paths));
    out.paths.resize(recorded);

    const std::uint64_t blocks = (cfg.paths + kBlockPaths - 1) / kBlockPaths;
    workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, blocks));
    std::vector<std::vector<std::uint64_t>> partial(workers, std::vector<std::uint64_t>(m, 0));
    auto work = [&](unsigned w) {
        for (std::uint64_t b = blocks * w / workers; b < blocks * (w + 1) / workers; ++b) {
            auto engine = block_engine(cfg.seed, b);
            const std::uint64_t end = std::min(cfg.paths, (b + 1) * kBlockPaths);
            for (std::uint64_t i = b * kBlockPaths; i < end; ++i) {
                std::vector<std::size_t>* record = i < recorded ? &out.paths[static_cast<std::size_t>(i)] : nullptr;
                ++partial[w][one_path(engine, record)];
            }
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    }
    for (const auto& part : partial) {
        for (std::size_t j = 0; j < m; ++j) out.counts[j] += part[j];
    }
    return out;
}

}  // namespace detail

/// Discrete chain stopped at an independent Ge(a) or NB(r, a) time.
inline EmpiricalMarginal simulate_discrete(const Tridiagonal& kernel, const StateGrid& grid,
                                           const InitialVector& v, const SimConfig& cfg) {
    int r = 0;
    double a = 0.0;
    if (const auto* g = std::get_if<GeometricTime>(&cfg.time)) {
        r = 1;
        a = g->a;
    } else if (const auto* nb = std::get_if<NegBinTime>(&cfg.time)) {
        r = nb->r;
        a = nb->a;
    } else {
        throw Error(ErrorKind::InvalidParameter, "discrete simulation needs a geometric or negative binomial time");
    }
    if (!(a >= 0.0 && a < 1.0) || r < 1) throw Error(ErrorKind::InvalidParameter, "need a in [0,1) and r >= 1");
    if (kernel.size() != grid.size() || v.size() != grid.size()) {
        throw Error(ErrorKind::GridMismatch, "kernel, initial vector and grid sizes differ");
    }

    return detail::run_paths(grid, cfg, [&](std::mt19937_64& engine, std::vector<std::size_t>* record) {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::geometric_distribution<long> epoch(1.0 - a);
        std::size_t j = detail::sample_index(v.weights, unit(engine));
        long steps = 0;
        for (int k = 0; k < r; ++k) steps += epoch(engine);
        if (record) record->push_back(j);
        for (long s = 0; s < steps; ++s) {
            if (kernel.diag(j) >= 1.0) break;  // absorbing
            const double u = unit(engine);
            if (u >= kernel.diag(j)) j = u < kernel.diag(j) + kernel.lower(j) ? j - 1 : j + 1;
            if (record) record->push_back(j);
        }
        return j;
    });
}

/// Continuous walk at a fixed time t or an independent Gamma(r, t/r) time
/// (sum of r exponentials with mean t/r).
inline EmpiricalMarginal simulate_ctmc(const Generator& gen, const InitialVector& v, const SimConfig& cfg) {
    bool gamma = false;
    int r = 1;
    double t = 0.0;
    if (const auto* f = std::get_if<FixedTime>(&cfg.time)) {
        t = f->t;
    } else if (const auto* g = std::get_if<GammaTime>(&cfg.time)) {
        gamma = true;
        r = g->r;
        t = g->t;
    } else {
        throw Error(ErrorKind::InvalidParameter, "continuous simulation needs a fixed or gamma time");
    }
    if (!(t >= 0.0) || r < 1 || (gamma && !(t > 0.0))) {
        throw Error(ErrorKind::InvalidParameter, "need t >= 0 (t > 0 for gamma times) and r >= 1");
    }
    if (v.size() != gen.size()) throw Error(ErrorKind::GridMismatch, "initial vector does not match generator");
    const JumpWeights w = alpha(gen.grid());
    const RateVector& rho = gen.rates();

    return detail::run_paths(gen.grid(), cfg, [&](std::mt19937_64& engine, std::vector<std::size_t>* record) {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::size_t j = detail::sample_index(v.weights, unit(engine));
        double horizon = t;
        if (gamma) {
            std::exponential_distribution<double> piece(static_cast<double>(r) / t);
            horizon = 0.0;
            for (int k = 0; k < r; ++k) horizon += piece(engine);
        }
        if (record) record->push_back(j);
        double clock = 0.0;
        while (rho[j] > 0.0) {
            std::exponential_distribution<double> hold(rho[j]);
            clock += hold(engine);
            if (clock > horizon) break;
            j = unit(engine) < w.up[j] ? j + 1 : j - 1;
            if (record) record->push_back(j);
        }
        return j;
    });
}

}  // namespace cmrw

#endif  // CMRW_SIMULATE_HPP
