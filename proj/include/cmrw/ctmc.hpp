#ifndef CMRW_CTMC_HPP
#define CMRW_CTMC_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "negbin.hpp"
#include "pmf.hpp"
#include "walk_kernel.hpp"

namespace cmrw {

/**
 * Continuous-time martingale walk on a grid: holding intensity rho_j at state
 * i_j, exit split by `alpha`. Both ends absorb.
 */
class Generator {
public:
    Generator() = default;
    Generator(StateGrid grid, RateVector rates) : grid_(std::move(grid)), rates_(std::move(rates)) {
        grid_.require_nondegenerate();
        if (rates_.size() != grid_.size()) throw Error(ErrorKind::GridMismatch, "rates do not match grid");
    }

    static Generator zero(StateGrid grid) {
        const std::size_t m = grid.size();
        return Generator(std::move(grid), RateVector::zeros(m));
    }

    const StateGrid& grid() const noexcept { return grid_; }
    const RateVector& rates() const noexcept { return rates_; }
    std::size_t size() const noexcept { return grid_.size(); }
    double max_rate() const { return rates_.max_interior(); }

    /// Q with Q_jj = -rho_j, Q_{j,j+1} = rho_j up_j, Q_{j,j-1} = rho_j down_j.
    Tridiagonal matrix() const {
        const JumpWeights w = alpha(grid_);
        Tridiagonal q(size(), KernelKind::Generator);
        for (std::size_t j = 0; j < size(); ++j) {
            q.diag(j) = -rates_[j];
            if (j > 0) q.lower(j) = rates_[j] * w.down[j];
            if (j + 1 < size()) q.upper(j) = rates_[j] * w.up[j];
        }
        return q;
    }

private:
    StateGrid grid_;
    RateVector rates_;
};

/// rho_j = (r / t) lambda_j.
inline Generator rates_from_lambda(const StateGrid& grid, const LambdaVector& lambda, int r, double t) {
    if (!(t > 0.0)) throw Error(ErrorKind::InvalidParameter, "t must be positive");
    if (r < 1) throw Error(ErrorKind::InvalidParameter, "r must be >= 1");
    std::vector<double> rho(lambda.values().begin(), lambda.values().end());
    for (double& x : rho) x *= static_cast<double>(r) / t;
    return Generator(grid, RateVector(std::move(rho)));
}

/// Law at an independent Gamma(r, t/r) time: v (I - (t/r) Q)^{-r}.
inline std::vector<double> gamma_marginal(std::span<const double> v, const Generator& gen, int r, double t) {
    if (!(t > 0.0)) throw Error(ErrorKind::InvalidParameter, "t must be positive");
    if (r < 1) throw Error(ErrorKind::InvalidParameter, "r must be >= 1");
    const Tridiagonal q = gen.matrix();
    const double h = t / r;
    Tridiagonal system(q.size());
    for (std::size_t j = 0; j < q.size(); ++j) {
        system.diag(j) = 1.0 - h * q.diag(j);
        system.lower(j) = -h * q.lower(j);
        system.upper(j) = -h * q.upper(j);
    }
    return left_solve_power(system, v, r);
}

/**
 * v e^{sQ} by uniformization: with Lambda = max rho and K = I + Q / Lambda,
 * e^{sQ} = sum_k Pois(k; Lambda s) K^k. The horizon is cut into pieces with
 * Lambda ds <= 8; each series stops once the Poisson tail is below 1e-14 and
 * the leftover weight goes on the last power, so every step maps
 * distributions to distributions exactly.
 */
inline std::vector<double> matexp_marginal(std::span<const double> v, const Generator& gen, double s) {
    if (!(s >= 0.0)) throw Error(ErrorKind::InvalidParameter, "horizon must be nonnegative");
    std::vector<double> x(v.begin(), v.end());
    const double lam = gen.max_rate();
    if (s == 0.0 || lam == 0.0) return x;

    Tridiagonal k = gen.matrix();
    for (std::size_t j = 0; j < k.size(); ++j) {
        k.diag(j) = 1.0 + k.diag(j) / lam;
        k.lower(j) /= lam;
        k.upper(j) /= lam;
    }
    const double total = lam * s;
    const auto pieces = static_cast<long>(std::ceil(total / 8.0));
    const double mu = total / static_cast<double>(pieces);

    for (long piece = 0; piece < pieces; ++piece) {
        std::vector<double> term = x;
        double w = std::exp(-mu);
        double cum = w;
        std::vector<double> acc(term.size());
        for (std::size_t j = 0; j < acc.size(); ++j) acc[j] = w * term[j];
        for (int n = 1; 1.0 - cum > 1e-14 && n < 400; ++n) {
            term = k.left_multiply(term);
            w *= mu / n;
            cum += w;
            for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += w * term[j];
        }
        const double tail = 1.0 - cum;
        for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += tail * term[j];
        x = std::move(acc);
    }
    return x;
}

/// Kreĭn string of a generator. Interior atoms are finite; both ends carry
/// infinite mass (the absorbing cemeteries).
struct StringMeasure {
    StateGrid grid;
    std::vector<double> atoms;

    /// Step string function M(x) = M~(x) - M~(0), M~(x) = sum of interior atoms at or left of x.
    double cumulative(double x) const {
        auto tilde = [&](double y) {
            double s = 0.0;
            for (std::size_t j = 1; j + 1 < grid.size(); ++j) {
                if (grid[j] <= y) s += atoms[j];
            }
            return s;
        };
        return tilde(x) - tilde(0.0);
    }
};

inline double interior_gap_factor(const StateGrid& g, std::size_t j) {
    return (g[j + 1] - g[j - 1]) / ((g[j] - g[j - 1]) * (g[j + 1] - g[j]));
}

inline StringMeasure string_measure(const Generator& gen) {
    const StateGrid& g = gen.grid();
    StringMeasure out{g, std::vector<double>(g.size(), std::numeric_limits<double>::infinity())};
    for (std::size_t j = 1; j + 1 < g.size(); ++j) {
        const double rho = gen.rates()[j];
        if (!(rho > 0.0)) {
            throw Error(ErrorKind::InvalidParameter, "zero holding intensity at interior state " + std::to_string(j));
        }
        out.atoms[j] = interior_gap_factor(g, j) / rho;
    }
    return out;
}

inline Generator rates_from_string(const StringMeasure& sm) {
    const StateGrid& g = sm.grid;
    if (sm.atoms.size() != g.size()) throw Error(ErrorKind::GridMismatch, "string atoms do not match grid");
    std::vector<double> rho(g.size(), 0.0);
    for (std::size_t j = 1; j + 1 < g.size(); ++j) {
        if (!(sm.atoms[j] > 0.0) || !std::isfinite(sm.atoms[j])) {
            throw Error(ErrorKind::InvalidParameter, "interior string atom must be positive and finite");
        }
        rho[j] = interior_gap_factor(g, j) / sm.atoms[j];
    }
    return Generator(g, RateVector(std::move(rho)));
}

struct TraceEntry {
    int r = 0;
    std::vector<double> lambda;
    std::vector<double> rates;
    /// ||v e^{tQ(rho^(r))} - p||_inf for the raw continuation rates.
    double residual = 0.0;
    /// Best residual among this entry and its extrapolations.
    double best_residual = 0.0;
};

using ContinuationTrace = std::vector<TraceEntry>;

struct DeterministicOptions {
    int r0 = 2;
    int r_max = 1 << 14;
    double tolerance = 1e-6;
    /// Romberg extrapolation of rho^(r) in 1/r along the doubling sequence.
    bool extrapolate = true;
    int max_extrapolation_order = 6;
    bool newton_polish = false;
    int polish_iterations = 50;
    FixedPointOptions fixed_point;
};

struct DeterministicCalibration {
    Generator generator;
    ContinuationTrace trace;
    double residual = std::numeric_limits<double>::infinity();
    bool converged = false;
    /// Last r solved and the Romberg order of the returned rates (0 = raw).
    int r_final = 0;
    int extrapolation_order = 0;
    bool polished = false;
    std::string diagnostic;
};

inline double deterministic_residual(const TargetPMF& p, const InitialVector& v, const Generator& gen, double t) {
    return sup_distance(matexp_marginal(v.weights, gen, t), p.masses());
}

namespace detail {

inline std::optional<Generator> generator_if_valid(const StateGrid& grid, const std::vector<double>& rho) {
    for (std::size_t j = 1; j + 1 < rho.size(); ++j) {
        if (!(rho[j] > 0.0) || !std::isfinite(rho[j])) return std::nullopt;
    }
    std::vector<double> full = rho;
    full.front() = 0.0;
    full.back() = 0.0;
    return Generator(grid, RateVector(std::move(full)));
}

/// Levenberg-Marquardt on rho -> v e^{tQ(rho)} - p with a forward-difference Jacobian.
inline std::optional<std::pair<Generator, double>> polish_rates(const TargetPMF& p, const InitialVector& v,
                                                                const Generator& start, double t, int iterations) {
    const std::size_t m = p.size();
    const auto n = static_cast<Eigen::Index>(m - 2);
    auto eval = [&](const Eigen::VectorXd& x) -> std::optional<Eigen::VectorXd> {
        std::vector<double> rho(m, 0.0);
        for (Eigen::Index k = 0; k < n; ++k) rho[static_cast<std::size_t>(k) + 1] = x[k];
        const auto gen = generator_if_valid(p.grid(), rho);
        if (!gen) return std::nullopt;
        const auto law = matexp_marginal(v.weights, *gen, t);
        Eigen::VectorXd res(static_cast<Eigen::Index>(m));
        for (std::size_t j = 0; j < m; ++j) res[static_cast<Eigen::Index>(j)] = law[j] - p[j];
        return res;
    };
    Eigen::VectorXd x(n);
    for (Eigen::Index k = 0; k < n; ++k) x[k] = start.rates()[static_cast<std::size_t>(k) + 1];
    auto res = eval(x);
    if (!res) return std::nullopt;
    double mu = 1e-6;
    for (int it = 0; it < iterations; ++it) {
        Eigen::MatrixXd jac(res->size(), n);
        for (Eigen::Index k = 0; k < n; ++k) {
            const double step = 1e-7 * std::max(1.0, std::abs(x[k]));
            Eigen::VectorXd shifted = x;
            shifted[k] += step;
            const auto rk = eval(shifted);
            if (!rk) return std::nullopt;
            jac.col(k) = (*rk - *res) / step;
        }
        bool improved = false;
        for (int tries = 0; tries < 20; ++tries) {
            Eigen::MatrixXd lhs = jac.transpose() * jac;
            lhs.diagonal().array() += mu;
            const Eigen::VectorXd delta = lhs.ldlt().solve(-jac.transpose() * *res);
            const Eigen::VectorXd trial = x + delta;
            const auto rt = eval(trial);
            if (rt && rt->lpNorm<Eigen::Infinity>() < res->lpNorm<Eigen::Infinity>()) {
                x = trial;
                res = rt;
                mu = std::max(mu * 0.3, 1e-12);
                improved = true;
                break;
            }
            mu *= 10.0;
        }
        if (!improved) break;
    }
    std::vector<double> rho(m, 0.0);
    for (Eigen::Index k = 0; k < n; ++k) rho[static_cast<std::size_t>(k) + 1] = x[k];
    const auto gen = generator_if_valid(p.grid(), rho);
    if (!gen) return std::nullopt;
    return std::make_pair(*gen, res->lpNorm<Eigen::Infinity>());
}

}  // namespace detail

/**
 * Continuation in r towards a deterministic horizon t.
 *
 * For r = r0, 2 r0, 4 r0, ... solve the NB fixed point through its law form
 * v N^{-r} = p (warm-started at the previous rates), set rho^(r) = (r/t) lambda^(r), and stop once some
 * candidate generator reproduces p at time t within `tolerance`. Candidates
 * are the raw rho^(r) and, when enabled, their Romberg extrapolations in 1/r.
 * Exhausting r_max returns the best candidate with converged = false.
 */
inline DeterministicCalibration calibrate_deterministic(const TargetPMF& p, double t,
                                                        const DeterministicOptions& opts = {}) {
    if (!(t > 0.0)) throw Error(ErrorKind::InvalidParameter, "t must be positive");
    if (opts.r0 < 1 || opts.r_max < opts.r0) throw Error(ErrorKind::InvalidParameter, "need 1 <= r0 <= r_max");
    p.grid().require_nondegenerate();
    p.require_positive();
    const InitialVector v = initial_vector(p);
    const std::size_t m = p.size();

    DeterministicCalibration out;
    if (m == 2) {
        out.generator = Generator::zero(p.grid());
        out.residual = deterministic_residual(p, v, out.generator, t);
        out.converged = out.residual <= opts.tolerance;
        return out;
    }

    const double fp_tol = opts.fixed_point.resolved_tolerance(m);
    std::vector<std::vector<std::vector<double>>> romberg;
    std::optional<LambdaVector> warm = opts.fixed_point.warm_start;

    for (long r = opts.r0; r <= opts.r_max; r *= 2) {
        FixedPointOptions fp = opts.fixed_point;
        fp.tolerance = fp_tol;
        fp.warm_start = warm;
        fp.law_first = true;
        NegBinSolution sol;
        try {
            sol = solve_negbin(p, static_cast<int>(r), fp);
        } catch (const NoConvergenceError& e) {
            out.diagnostic = e.what();
            break;
        }
        const Generator raw = rates_from_lambda(p.grid(), sol.lambda, static_cast<int>(r), t);
        TraceEntry entry;
        entry.r = static_cast<int>(r);
        entry.lambda.assign(sol.lambda.values().begin(), sol.lambda.values().end());
        entry.rates.assign(raw.rates().values().begin(), raw.rates().values().end());
        entry.residual = deterministic_residual(p, v, raw, t);
        entry.best_residual = entry.residual;
        out.r_final = entry.r;

        auto consider = [&](const Generator& gen, double res, int order) {
            if (res < out.residual) {
                out.residual = res;
                out.generator = gen;
                out.extrapolation_order = order;
            }
        };
        consider(raw, entry.residual, 0);

        if (opts.extrapolate) {
            std::vector<std::vector<double>> row{entry.rates};
            if (!romberg.empty()) {
                const auto& prev = romberg.back();
                const std::size_t orders = std::min<std::size_t>(prev.size(), static_cast<std::size_t>(opts.max_extrapolation_order));
                for (std::size_t k = 1; k <= orders; ++k) {
                    const double f = std::ldexp(1.0, static_cast<int>(k));
                    std::vector<double> next(m, 0.0);
                    for (std::size_t j = 1; j + 1 < m; ++j) next[j] = (f * row[k - 1][j] - prev[k - 1][j]) / (f - 1.0);
                    row.push_back(std::move(next));
                }
            }
            for (std::size_t k = 1; k < row.size(); ++k) {
                if (const auto gen = detail::generator_if_valid(p.grid(), row[k])) {
                    const double res = deterministic_residual(p, v, *gen, t);
                    entry.best_residual = std::min(entry.best_residual, res);
                    consider(*gen, res, static_cast<int>(k));
                }
            }
            romberg.push_back(std::move(row));
        }
        out.trace.push_back(std::move(entry));

        if (out.residual <= opts.tolerance) {
            out.converged = true;
            break;
        }
        std::vector<double> next_warm(sol.lambda.values().begin(), sol.lambda.values().end());
        for (double& x : next_warm) x *= 0.5;
        warm = LambdaVector(std::move(next_warm));
    }

    if (out.trace.empty()) {
        out.generator = Generator::zero(p.grid());
        out.residual = deterministic_residual(p, v, out.generator, t);
    }
    if (opts.newton_polish && !out.trace.empty()) {
        if (auto polished = detail::polish_rates(p, v, out.generator, t, opts.polish_iterations)) {
            if (polished->second < out.residual) {
                out.generator = polished->first;
                out.residual = polished->second;
                out.polished = true;
            }
        }
    }
    out.converged = out.residual <= opts.tolerance;
    if (!out.converged && out.diagnostic.empty()) {
        out.diagnostic = "residual " + std::to_string(out.residual) + " above tolerance after r = " +
                         std::to_string(out.r_final);
    }
    return out;
}

}  // namespace cmrw

#endif  // CMRW_CTMC_HPP
