#ifndef CMRW_GEOMETRIC_HPP
#define CMRW_GEOMETRIC_HPP

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

#include "error.hpp"
#include "pmf.hpp"
#include "walk_kernel.hpp"

namespace cmrw {

/// Closed-form calibration at an independent Ge(a) time.
struct GeometricSolution {
    QVector q;
    double a = 0.0;
    bool feasible = false;
    /// ||resolvent law - p||_inf; only computed for feasible solutions (else +inf).
    double residual = 0.0;
    /// Interior index of the largest q when infeasible.
    std::size_t violated_state = 0;
};

/// Smallest a with (1/a - 1) max_k F(p,k) <= 1. Zero when there is no interior.
inline double min_feasible_a(const TargetPMF& p) {
    p.require_positive();
    const std::vector<double> f = eff(p);
    const double f_star = *std::max_element(f.begin(), f.end());
    return f_star / (1.0 + f_star);
}

inline double verify_geometric(const TargetPMF& p, const GeometricSolution& sol) {
    const InitialVector v = initial_vector(p);
    const Tridiagonal kernel = build_P(p.grid(), sol.q);
    return sup_distance(resolvent_dist(v.weights, kernel, sol.a, 1), p.masses());
}

/// q_j = (1/a - 1) F(p, j). Infeasible a still yields q, flagged, so callers can move a upward.
inline GeometricSolution solve_geometric(const TargetPMF& p, double a) {
    if (!(a > 0.0 && a < 1.0)) throw Error(ErrorKind::InvalidParameter, "a must lie in (0,1)");
    p.grid().require_nondegenerate();
    p.require_positive();

    std::vector<double> q = eff(p);
    const double scale = 1.0 / a - 1.0;
    GeometricSolution sol;
    sol.a = a;
    sol.feasible = true;
    double worst = 0.0;
    for (std::size_t j = 1; j + 1 < q.size(); ++j) {
        q[j] *= scale;
        if (q[j] > worst) {
            worst = q[j];
            sol.violated_state = j;
        }
    }
    sol.q = QVector(std::move(q));
    sol.feasible = worst <= 1.0 + kAlgebraicTol;
    if (sol.feasible) {
        sol.violated_state = 0;
        sol.residual = verify_geometric(p, sol);
    } else {
        sol.residual = std::numeric_limits<double>::infinity();
    }
    return sol;
}

}  // namespace cmrw

#endif  // CMRW_GEOMETRIC_HPP
