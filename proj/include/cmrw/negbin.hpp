#ifndef CMRW_NEGBIN_HPP
#define CMRW_NEGBIN_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "pmf.hpp"
#include "walk_kernel.hpp"

namespace cmrw {

struct FixedPointOptions {
    /// omega in lambda <- (1 - omega) lambda + omega F(h(lambda)).
    double damping = 0.5;
    int max_iterations = 20000;
    /// ||lambda - F(h(lambda))||_inf target. Unset: 1e-10 for M <= 16, 1e-8 above.
    std::optional<double> tolerance;
    /// Regularization levels for the fallback map, solved in order with warm starts.
    std::vector<double> eps_schedule{1e-2, 1e-4, 1e-6};
    /// Lower clip for interior lambda while iterating.
    double positivity_floor = 1e-14;
    /// Newton on the fixed-point residual before any damped iteration.
    bool use_newton = true;
    int max_newton_iterations = 60;
    std::optional<LambdaVector> warm_start;
    /// Try Newton on the law equation v N^{-r} = p before the fixed-point
    /// stages. The forward map h = p N^{r-1} amplifies rounding like a
    /// backward heat flow, so long continuations want this on.
    bool law_first = false;

    double resolved_tolerance(std::size_t m) const {
        if (tolerance) return *tolerance;
        return m <= 16 ? 1e-10 : 1e-8;
    }
};

struct NegBinSolution {
    LambdaVector lambda;
    int r = 1;
    double a0 = 0.0;
    /// Residual of the accepting stage: ||lambda - F(h(lambda))||_inf, or for
    /// the "law" method ||v N(lambda)^{-r} - p||_inf.
    double residual = 0.0;
    /// ||v N(lambda)^{-r} - p||_inf, the law at the matching random time.
    double law_residual = 0.0;
    int iterations = 0;
    bool used_fallback = false;
    /// "closed", "newton", "law", "damped" or "regularized".
    std::string method;
};

struct NegBinDiagnostics {
    int r = 0;
    std::vector<double> best_lambda;
    double best_residual = std::numeric_limits<double>::infinity();
    int iterations = 0;
    std::string last_stage;
};

class NoConvergenceError : public Error {
public:
    NoConvergenceError(const std::string& what, NegBinDiagnostics diagnostics)
        : Error(ErrorKind::NoConvergence, what), diagnostics_(std::move(diagnostics)) {}

    const NegBinDiagnostics& diagnostics() const noexcept { return diagnostics_; }

private:
    NegBinDiagnostics diagnostics_;
};

inline double a_zero(const LambdaVector& lambda) {
    const double star = lambda.max_interior();
    return star / (1.0 + star);
}

/// q(a) = (1/a - 1) lambda; needs a in [a0, 1).
inline QVector q_of_a(const LambdaVector& lambda, double a) {
    if (!(a > 0.0 && a < 1.0)) throw Error(ErrorKind::InvalidParameter, "a must lie in (0,1)");
    std::vector<double> q(lambda.values().begin(), lambda.values().end());
    const double scale = 1.0 / a - 1.0;
    for (double& e : q) {
        e *= scale;
        if (e > 1.0 + 1e-12) {
            throw Error(ErrorKind::InvalidParameter,
                        "a = " + std::to_string(a) + " is below a0 = " + std::to_string(a_zero(lambda)));
        }
        e = std::min(e, 1.0);
    }
    return QVector(std::move(q));
}

/// ||lambda - F(h(p, lambda, r))||_inf, evaluated from scratch.
inline double fixed_point_residual(const TargetPMF& p, const LambdaVector& lambda, int r) {
    const std::vector<double> image = eff(p.grid(), h_map(p, lambda, r));
    return sup_distance(lambda.values(), image);
}

/// ||v N(lambda)^{-r} - p||_inf, by r tridiagonal solves.
inline double law_residual(const TargetPMF& p, const LambdaVector& lambda, int r) {
    const std::vector<double> law = left_solve_power(build_N(p.grid(), lambda), initial_vector(p).weights, r);
    return sup_distance(law, p.masses());
}

/// Law at NB(r, a) for the solved lambda minus the target. Independent of a by construction.
inline double verify_negbin(const TargetPMF& p, const NegBinSolution& sol, double a) {
    const InitialVector v = initial_vector(p);
    const Tridiagonal kernel = build_P(p.grid(), q_of_a(sol.lambda, a));
    return sup_distance(resolvent_dist(v.weights, kernel, a, sol.r), p.masses());
}

/// `count` values spread over [a0, upper], both ends included.
inline std::vector<double> sample_a_values(double a0, int count, double upper = 1.0 - 1e-3) {
    std::vector<double> out;
    const double lo = std::max(a0, 1e-6);
    if (count <= 1 || !(upper > lo)) return {std::min(lo, upper)};
    for (int k = 0; k < count; ++k) out.push_back(lo + (upper - lo) * k / (count - 1));
    return out;
}

namespace detail {

/// lambda -> F(h(p, lambda, r)) on full-length vectors; nullopt once the
/// iterate leaves the region where the map is defined.
class FixedPointMap {
public:
    FixedPointMap(const TargetPMF& p, int r) : p_(p), r_(r), n_(p.size()) {}

    std::optional<std::vector<double>> operator()(const std::vector<double>& lambda) const {
        for (double x : lambda) {
            if (!(x >= 0.0) || !std::isfinite(x)) return std::nullopt;
        }
        try {
            const std::vector<double> h = h_map(p_, LambdaVector(lambda), r_);
            for (double x : h) {
                if (!(x > 0.0)) return std::nullopt;
            }
            return eff(p_.grid(), h);
        } catch (const Error&) {
            return std::nullopt;
        }
    }

    /// Regularized map: F applied to the clipped, renormalized h.
    std::optional<std::vector<double>> regularized(const std::vector<double>& lambda, double eps) const {
        for (double x : lambda) {
            if (!(x >= 0.0) || !std::isfinite(x)) return std::nullopt;
        }
        try {
            std::vector<double> h = h_map(p_, LambdaVector(lambda), r_);
            double denom = 0.0;
            for (double x : h) denom += std::max(x, eps);
            double c = 0.0;
            for (double& x : h) {
                x = std::max(x / denom, eps);
                c += x;
            }
            for (double& x : h) x /= c;
            return eff(p_.grid(), h);
        } catch (const Error&) {
            return std::nullopt;
        }
    }

    std::size_t size() const noexcept { return n_; }
    int r() const noexcept { return r_; }

private:
    const TargetPMF& p_;
    int r_;
    std::size_t n_;
};

struct StageResult {
    std::vector<double> lambda;
    double residual = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

/// Newton with backtracking on G(u) = u - r F(h(u / r)), u = r lambda over the
/// interior states. The scaling keeps u of order one as r grows.
inline StageResult newton_stage(const FixedPointMap& map, std::vector<double> lambda, double tol, int max_iter) {
    const std::size_t m = map.size();
    const std::size_t n = m - 2;
    const double r = map.r();
    StageResult out;
    out.lambda = lambda;

    auto residual_vector = [&](const Eigen::VectorXd& u) -> std::optional<Eigen::VectorXd> {
        std::vector<double> full(m, 0.0);
        for (std::size_t k = 0; k < n; ++k) full[k + 1] = u[static_cast<Eigen::Index>(k)] / r;
        const auto image = map(full);
        if (!image) return std::nullopt;
        Eigen::VectorXd g(static_cast<Eigen::Index>(n));
        for (std::size_t k = 0; k < n; ++k) g[static_cast<Eigen::Index>(k)] = u[static_cast<Eigen::Index>(k)] - r * (*image)[k + 1];
        return g;
    };

    Eigen::VectorXd u(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) u[static_cast<Eigen::Index>(k)] = r * lambda[k + 1];
    auto g = residual_vector(u);
    if (!g) return out;
    double norm = g->lpNorm<Eigen::Infinity>();

    auto record = [&](const Eigen::VectorXd& at, double res) {
        out.residual = res / r;
        for (std::size_t k = 0; k < n; ++k) out.lambda[k + 1] = at[static_cast<Eigen::Index>(k)] / r;
    };
    record(u, norm);

    for (int it = 0; it < max_iter; ++it) {
        out.iterations = it + 1;
        if (norm / r <= tol) {
            out.converged = true;
            return out;
        }
        Eigen::MatrixXd jac(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(n); ++k) {
            double step = 1e-7 * std::max(1.0, std::abs(u[k]));
            Eigen::VectorXd shifted = u;
            shifted[k] += step;
            auto gk = residual_vector(shifted);
            if (!gk) {
                step = -step;
                shifted[k] = u[k] + step;
                gk = residual_vector(shifted);
                if (!gk) return out;
            }
            jac.col(k) = (*gk - *g) / step;
        }
        const Eigen::VectorXd delta = jac.colPivHouseholderQr().solve(-*g);
        if (!delta.allFinite()) return out;

        double s = 1.0;
        bool accepted = false;
        while (s > 1e-10) {
            const Eigen::VectorXd trial = u + s * delta;
            if (trial.minCoeff() > 0.0) {
                auto gt = residual_vector(trial);
                if (gt) {
                    const double trial_norm = gt->lpNorm<Eigen::Infinity>();
                    if (trial_norm < (1.0 - 1e-4 * s) * norm) {
                        u = trial;
                        g = gt;
                        norm = trial_norm;
                        accepted = true;
                        break;
                    }
                }
            }
            s *= 0.5;
        }
        record(u, norm);
        if (!accepted) {
            out.converged = norm / r <= tol;
            return out;
        }
    }
    out.converged = norm / r <= tol;
    return out;
}

/// Newton with backtracking on the interior rows of v N(u / r)^{-r} - p,
/// u = r lambda. Equivalent to the fixed point when h > 0, and evaluated with
/// solves only, so it stays accurate for large r.
inline StageResult law_stage(const TargetPMF& p, int r, std::vector<double> lambda, double tol, int max_iter) {
    const std::size_t m = p.size();
    const auto n = static_cast<Eigen::Index>(m - 2);
    const double rr = r;
    const InitialVector v = initial_vector(p);
    StageResult out;
    out.lambda = lambda;

    auto to_lambda = [&](const Eigen::VectorXd& u) {
        std::vector<double> full(m, 0.0);
        for (Eigen::Index k = 0; k < n; ++k) full[static_cast<std::size_t>(k) + 1] = u[k] / rr;
        return full;
    };
    // Full residual vector; the interior rows drive Newton, the sup norm decides.
    auto law_minus_p = [&](const Eigen::VectorXd& u) -> std::optional<Eigen::VectorXd> {
        if (!(u.minCoeff() > 0.0) || !u.allFinite()) return std::nullopt;
        try {
            const auto law = left_solve_power(build_N(p.grid(), LambdaVector(to_lambda(u))), v.weights, r);
            Eigen::VectorXd d(static_cast<Eigen::Index>(m));
            for (std::size_t j = 0; j < m; ++j) d[static_cast<Eigen::Index>(j)] = law[j] - p[j];
            return d;
        } catch (const Error&) {
            return std::nullopt;
        }
    };

    Eigen::VectorXd u(n);
    for (Eigen::Index k = 0; k < n; ++k) u[k] = std::max(rr * lambda[static_cast<std::size_t>(k) + 1], 1e-12);
    auto d = law_minus_p(u);
    if (!d) return out;
    double norm = d->lpNorm<Eigen::Infinity>();
    auto record = [&] {
        out.residual = norm;
        out.lambda = to_lambda(u);
    };
    record();

    for (int it = 0; it < max_iter; ++it) {
        out.iterations = it + 1;
        if (norm <= tol) {
            out.converged = true;
            return out;
        }
        Eigen::MatrixXd jac(n, n);
        for (Eigen::Index k = 0; k < n; ++k) {
            double step = 1e-7 * std::max(1.0, std::abs(u[k]));
            if (step >= u[k]) step = -0.5 * u[k];
            Eigen::VectorXd shifted = u;
            shifted[k] += step;
            auto dk = law_minus_p(shifted);
            if (!dk) return out;
            jac.col(k) = (dk->segment(1, n) - d->segment(1, n)) / step;
        }
        const Eigen::VectorXd delta = jac.colPivHouseholderQr().solve(-d->segment(1, n));
        if (!delta.allFinite()) return out;

        bool accepted = false;
        for (double s = 1.0; s > 1e-10; s *= 0.5) {
            const Eigen::VectorXd trial = u + s * delta;
            auto dt = law_minus_p(trial);
            if (!dt) continue;
            const double trial_norm = dt->lpNorm<Eigen::Infinity>();
            if (trial_norm < (1.0 - 1e-4 * s) * norm) {
                u = trial;
                d = dt;
                norm = trial_norm;
                accepted = true;
                break;
            }
        }
        record();
        if (!accepted) break;
    }
    out.converged = norm <= tol;
    return out;
}

/// lambda <- (1 - w) lambda + w T(lambda), with per-step halving of w when the
/// candidate leaves the domain of T, and global halving on residual growth.
template <class Map>
StageResult damped_stage(const Map& map_fn, std::vector<double> lambda, const FixedPointOptions& opts, double tol) {
    StageResult out;
    const std::size_t m = lambda.size();
    auto image = map_fn(lambda);
    if (!image) return out;
    double residual = sup_distance(lambda, *image);
    out.lambda = lambda;
    out.residual = residual;
    double omega = opts.damping;

    for (int it = 0; it < opts.max_iterations; ++it) {
        out.iterations = it + 1;
        if (residual <= tol) {
            out.converged = true;
            return out;
        }
        double step = omega;
        std::vector<double> candidate(m, 0.0);
        std::optional<std::vector<double>> cand_image;
        for (int halvings = 0; halvings < 60; ++halvings) {
            for (std::size_t j = 1; j + 1 < m; ++j) {
                candidate[j] = std::max((1.0 - step) * lambda[j] + step * (*image)[j], opts.positivity_floor);
            }
            cand_image = map_fn(candidate);
            if (cand_image) break;
            step *= 0.5;
        }
        if (!cand_image) return out;
        const double cand_residual = sup_distance(candidate, *cand_image);
        if (cand_residual > residual) omega = std::max(omega * 0.5, 1e-6);
        lambda = std::move(candidate);
        image = std::move(cand_image);
        residual = cand_residual;
        if (residual < out.residual) {
            out.residual = residual;
            out.lambda = lambda;
        }
    }
    out.converged = out.residual <= tol;
    return out;
}

}  // namespace detail

/**
 * Solves lambda = F(h(p, lambda, r)), h = p N^{r-1}(lambda).
 *
 * Strategy: Newton from the warm start (default: (1 + F(p))^{1/r} - 1, exact
 * for three states, shrunk toward zero until h stays positive), then Newton
 * on the equivalent law equation v N^{-r} = p (first when `law_first`),
 * then damped iteration from the best point, then the regularized map over
 * `eps_schedule` followed by a final unregularized solve. Returns the first
 * fixed point reached; uniqueness is not assumed.
 */
inline NegBinSolution solve_negbin(const TargetPMF& p, int r, const FixedPointOptions& opts = {}) {
    if (r < 1) throw Error(ErrorKind::InvalidParameter, "r must be >= 1");
    if (!(opts.damping > 0.0 && opts.damping <= 1.0)) {
        throw Error(ErrorKind::InvalidParameter, "damping must lie in (0,1]");
    }
    p.grid().require_nondegenerate();
    p.require_positive();
    const std::size_t m = p.size();
    const double tol = opts.resolved_tolerance(m);
    if (!(tol > 0.0)) throw Error(ErrorKind::InvalidParameter, "tolerance must be positive");

    NegBinSolution sol;
    sol.r = r;
    if (m == 2) {
        sol.lambda = LambdaVector::zeros(2);
        sol.method = "closed";
        return sol;
    }

    if (r == 1) {
        sol.lambda = LambdaVector(eff(p));
        sol.residual = fixed_point_residual(p, sol.lambda, r);
        sol.law_residual = law_residual(p, sol.lambda, r);
        sol.iterations = 1;
        sol.method = "closed";
        sol.a0 = a_zero(sol.lambda);
        return sol;
    }

    std::vector<double> start;
    if (opts.warm_start) {
        if (opts.warm_start->size() != m) throw Error(ErrorKind::GridMismatch, "warm start does not match grid");
        start.assign(opts.warm_start->values().begin(), opts.warm_start->values().end());
    } else {
        start = eff(p);
        for (double& x : start) x = std::pow(1.0 + x, 1.0 / r) - 1.0;
    }
    for (std::size_t j = 1; j + 1 < m; ++j) start[j] = std::max(start[j], opts.positivity_floor);

    const detail::FixedPointMap map(p, r);
    // Shrink toward lambda = 0, where h = p, until the map is defined.
    for (int k = 0; k < 60 && !map(start); ++k) {
        for (std::size_t j = 1; j + 1 < m; ++j) start[j] = std::max(0.5 * start[j], opts.positivity_floor);
    }
    auto finish = [&](const detail::StageResult& st, const char* method, bool fallback, int iterations) {
        sol.lambda = LambdaVector(st.lambda);
        sol.law_residual = law_residual(p, sol.lambda, r);
        sol.residual = std::string(method) == "law" ? sol.law_residual : fixed_point_residual(p, sol.lambda, r);
        sol.iterations = iterations;
        sol.used_fallback = fallback;
        sol.method = method;
        sol.a0 = a_zero(sol.lambda);
        return sol;
    };

    NegBinDiagnostics diag;
    diag.r = r;
    diag.best_lambda = start;
    auto remember = [&](const detail::StageResult& st, const char* stage) {
        diag.iterations += st.iterations;
        diag.last_stage = stage;
        if (st.residual < diag.best_residual && !st.lambda.empty()) {
            diag.best_residual = st.residual;
            diag.best_lambda = st.lambda;
        }
    };

    auto plain = [&](const std::vector<double>& x) { return map(x); };

    auto law = [&](const std::vector<double>& from, bool fallback) -> std::optional<NegBinSolution> {
        auto st = detail::law_stage(p, r, from, tol, opts.max_newton_iterations);
        diag.iterations += st.iterations;
        diag.last_stage = "law";
        if (st.converged) return finish(st, "law", fallback, diag.iterations);
        return std::nullopt;
    };

    if (opts.law_first) {
        if (auto done = law(start, false)) return *done;
    }
    if (opts.use_newton) {
        const auto st = detail::newton_stage(map, start, tol, opts.max_newton_iterations);
        remember(st, "newton");
        if (st.converged) return finish(st, "newton", false, diag.iterations);
    }
    if (!opts.law_first && opts.use_newton) {
        if (auto done = law(diag.best_lambda, false)) return *done;
    }
    {
        const auto st = detail::damped_stage(plain, diag.best_lambda, opts, tol);
        remember(st, "damped");
        if (st.converged) return finish(st, "damped", false, diag.iterations);
    }

    std::vector<double> warm = diag.best_lambda;
    for (double eps : opts.eps_schedule) {
        auto regularized = [&](const std::vector<double>& x) { return map.regularized(x, eps); };
        const auto st = detail::damped_stage(regularized, warm, opts, tol);
        diag.iterations += st.iterations;
        if (!st.lambda.empty()) warm = st.lambda;
    }
    if (opts.use_newton) {
        const auto st = detail::newton_stage(map, warm, tol, opts.max_newton_iterations);
        remember(st, "regularized-newton");
        if (st.converged) return finish(st, "regularized", true, diag.iterations);
    }
    {
        const auto st = detail::damped_stage(plain, warm, opts, tol);
        remember(st, "regularized-damped");
        if (st.converged) return finish(st, "regularized", true, diag.iterations);
    }

    throw NoConvergenceError("fixed point for r = " + std::to_string(r) + " not reached; best residual " +
                                 std::to_string(diag.best_residual),
                             std::move(diag));
}

}  // namespace cmrw

#endif  // CMRW_NEGBIN_HPP
