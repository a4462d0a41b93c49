#ifndef CMRW_WALK_KERNEL_HPP
#define CMRW_WALK_KERNEL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "pmf.hpp"
#include "tridiagonal.hpp"

namespace cmrw {

/// Martingale neighbour split at each interior state; zero at both ends.
struct JumpWeights {
    std::vector<double> up;
    std::vector<double> down;
};

inline JumpWeights alpha(const StateGrid& grid) {
    grid.require_nondegenerate();
    const std::size_t m = grid.size();
    JumpWeights w{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};
    for (std::size_t j = 1; j + 1 < m; ++j) {
        const double span = grid[j + 1] - grid[j - 1];
        w.up[j] = (grid[j] - grid[j - 1]) / span;
        w.down[j] = (grid[j + 1] - grid[j]) / span;
    }
    return w;
}

/**
 * Per-state parameter vector pinned to zero at the two absorbing ends.
 * The tag supplies the name used in diagnostics and any extra bound.
 */
template <class Tag>
class BoundaryPinnedVector {
public:
    BoundaryPinnedVector() = default;

    explicit BoundaryPinnedVector(std::vector<double> values) : values_(std::move(values)) {
        if (values_.size() < 2) {
            throw Error(ErrorKind::DegenerateGrid, std::string(Tag::name) + " needs at least two entries");
        }
        if (values_.front() != 0.0 || values_.back() != 0.0) {
            throw Error(ErrorKind::InvalidParameter, std::string(Tag::name) + " must vanish at both boundaries");
        }
        for (std::size_t j = 0; j < values_.size(); ++j) {
            if (!std::isfinite(values_[j]) || values_[j] < 0.0) {
                throw Error(ErrorKind::InvalidParameter,
                            std::string(Tag::name) + "[" + std::to_string(j) + "] is negative or not finite");
            }
        }
    }

    static BoundaryPinnedVector zeros(std::size_t m) {
        return BoundaryPinnedVector(std::vector<double>(m, 0.0));
    }

    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t j) const { return values_[j]; }
    std::span<const double> values() const noexcept { return values_; }

    double max_interior() const {
        double best = 0.0;
        for (std::size_t j = 1; j + 1 < values_.size(); ++j) best = std::max(best, values_[j]);
        return best;
    }

    double min_interior() const {
        if (values_.size() < 3) return 0.0;
        double best = values_[1];
        for (std::size_t j = 1; j + 1 < values_.size(); ++j) best = std::min(best, values_[j]);
        return best;
    }

private:
    std::vector<double> values_;
};

struct QTag { static constexpr const char* name = "q"; };
struct LambdaTag { static constexpr const char* name = "lambda"; };
struct RateTag { static constexpr const char* name = "rate"; };

/// Jump probabilities of the discrete chain. Entries above 1 are representable
/// (infeasible geometric solutions report them) but cannot build a kernel.
using QVector = BoundaryPinnedVector<QTag>;
using LambdaVector = BoundaryPinnedVector<LambdaTag>;
using RateVector = BoundaryPinnedVector<RateTag>;

using TransitionKernel = Tridiagonal;

/// One-step matrix P(q): stay w.p. 1 - q_j, otherwise split by `alpha`.
inline Tridiagonal build_P(const StateGrid& grid, const QVector& q) {
    if (q.size() != grid.size()) throw Error(ErrorKind::GridMismatch, "q does not match grid");
    const JumpWeights w = alpha(grid);
    Tridiagonal p(grid.size(), KernelKind::Discrete);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        if (q[j] > 1.0 + kAlgebraicTol) {
            throw Error(ErrorKind::InvalidParameter, "q[" + std::to_string(j) + "] exceeds 1");
        }
        const double qj = std::min(q[j], 1.0);
        p.diag(j) = 1.0 - qj;
        if (j > 0) p.lower(j) = w.down[j] * qj;
        if (j + 1 < grid.size()) p.upper(j) = w.up[j] * qj;
    }
    return p;
}

/// N(lambda) = I + diag(lambda) (I - alpha); equals (I - aP(q)) / (1 - a) for q = (1/a - 1) lambda.
inline Tridiagonal build_N(const StateGrid& grid, const LambdaVector& lambda) {
    if (lambda.size() != grid.size()) throw Error(ErrorKind::GridMismatch, "lambda does not match grid");
    const JumpWeights w = alpha(grid);
    Tridiagonal n(grid.size(), KernelKind::Resolvent);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        n.diag(j) = 1.0 + lambda[j];
        if (j > 0) n.lower(j) = -lambda[j] * w.down[j];
        if (j + 1 < grid.size()) n.upper(j) = -lambda[j] * w.up[j];
    }
    return n;
}

namespace detail {

inline double ell_prefactor(const StateGrid& g, std::size_t j) {
    return (g[j + 1] - g[j - 1]) / ((g[j + 1] - g[j]) * (g[j] - g[j - 1]));
}

inline std::size_t splice_of_vector(const StateGrid& grid, std::span<const double> w) {
    if (w.size() != grid.size()) throw Error(ErrorKind::GridMismatch, "vector does not match grid");
    return splice_index(grid, mean_on_grid(grid, w));
}

inline double ell_at(const StateGrid& g, std::span<const double> w, std::size_t j, std::size_t splice) {
    const std::size_t m = g.size();
    if (j == 0 || j + 1 >= m) return 0.0;
    double s = 0.0;
    if (j < splice) {
        for (std::size_t k = 0; k < j; ++k) s += (g[j] - g[k]) * w[k];
    } else {
        for (std::size_t k = j + 1; k < m; ++k) s += (g[k] - g[j]) * w[k];
    }
    return ell_prefactor(g, j) * s;
}

}  // namespace detail

/**
 * Cumulative tail functional L(w, j) (j 0-based).
 *
 * Left of the splice index it weighs the mass below i_j, from the splice index
 * on it weighs the mass above. Both branches agree when the mean sits on i_j.
 * Accepts signed mass-1 vectors; the splice index comes from the mean of `w`.
 */
inline double ell(const StateGrid& grid, std::span<const double> w, std::size_t j) {
    const std::size_t splice = detail::splice_of_vector(grid, w);
    return detail::ell_at(grid, w, j, splice);
}

/// F(w, j) = L(w, j) / w_j where L > 0, else 0 (also for L < 0, which only
/// signed iterates produce). Throws DivisionGuard when L > 0 but w_j <= 0.
inline std::vector<double> eff(const StateGrid& grid, std::span<const double> w) {
    const std::size_t splice = detail::splice_of_vector(grid, w);
    std::vector<double> f(grid.size(), 0.0);
    for (std::size_t j = 1; j + 1 < grid.size(); ++j) {
        const double l = detail::ell_at(grid, w, j, splice);
        if (!(l > 0.0)) continue;
        if (!(w[j] > 0.0)) {
            throw Error(ErrorKind::DivisionGuard,
                        "L > 0 but weight " + std::to_string(w[j]) + " <= 0 at state " + std::to_string(j));
        }
        f[j] = l / w[j];
    }
    return f;
}

inline std::vector<double> eff(const TargetPMF& pmf) { return eff(pmf.grid(), pmf.masses()); }

/// h = b N^{r-1}(lambda), by r - 1 tridiagonal row-vector products.
inline std::vector<double> h_map(const StateGrid& grid, std::span<const double> b, const LambdaVector& lambda, int r) {
    if (r < 1) throw Error(ErrorKind::InvalidParameter, "r must be >= 1");
    std::vector<double> h(b.begin(), b.end());
    if (r == 1) return h;
    const Tridiagonal n = build_N(grid, lambda);
    for (int k = 1; k < r; ++k) h = n.left_multiply(h);
    return h;
}

inline std::vector<double> h_map(const TargetPMF& p, const LambdaVector& lambda, int r) {
    return h_map(p.grid(), p.masses(), lambda, r);
}

/// x * A^{-r} by r successive solves.
inline std::vector<double> left_solve_power(const Tridiagonal& a, std::span<const double> x, int r, double scale = 1.0) {
    std::vector<double> y(x.begin(), x.end());
    for (int k = 0; k < r; ++k) {
        y = a.left_solve(y);
        if (scale != 1.0) {
            for (double& e : y) e *= scale;
        }
    }
    return y;
}

/// Law at an independent NB(r, a) time: (1-a)^r v (I - aP)^{-r}.
inline std::vector<double> resolvent_dist(std::span<const double> v, const Tridiagonal& p, double a, int r) {
    if (!(a > 0.0 && a < 1.0)) throw Error(ErrorKind::InvalidParameter, "a must lie in (0,1)");
    if (r < 1) throw Error(ErrorKind::InvalidParameter, "r must be >= 1");
    Tridiagonal system(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) {
        system.diag(j) = 1.0 - a * p.diag(j);
        system.lower(j) = -a * p.lower(j);
        system.upper(j) = -a * p.upper(j);
    }
    return left_solve_power(system, v, r, 1.0 - a);
}

inline double sup_distance(std::span<const double> x, std::span<const double> y) {
    double d = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) d = std::max(d, std::abs(x[j] - y[j]));
    return d;
}

}  // namespace cmrw

#endif  // CMRW_WALK_KERNEL_HPP
