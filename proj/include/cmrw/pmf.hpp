#ifndef CMRW_PMF_HPP
#define CMRW_PMF_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace cmrw {

/// Absolute tolerance for algebraic identities (row sums, martingale splits).
inline constexpr double kAlgebraicTol = 1e-12;
/// Absolute tolerance for identities that go through a linear solve.
inline constexpr double kSolveTol = 1e-10;
/// Default floor below which ingested masses are dropped.
inline constexpr double kDefaultMassFloor = 1e-9;

/**
 * Finite, strictly increasing set of states i_1 < ... < i_M.
 *
 * A single-point grid is representable (it is what atomizing a point mass
 * produces) but is degenerate: everything that calibrates calls
 * `require_nondegenerate()` first.
 */
class StateGrid {
public:
    StateGrid() = default;

    explicit StateGrid(std::vector<double> states) : states_(std::move(states)) {
        if (states_.empty()) {
            throw Error(ErrorKind::InvalidInput, "state grid is empty");
        }
        for (std::size_t j = 0; j < states_.size(); ++j) {
            if (!std::isfinite(states_[j])) {
                throw Error(ErrorKind::InvalidInput, "state " + std::to_string(j) + " is not finite");
            }
            if (j > 0 && !(states_[j] > states_[j - 1])) {
                throw Error(ErrorKind::InvalidInput,
                            "states must be strictly increasing (index " + std::to_string(j) + ")");
            }
        }
    }

    std::size_t size() const noexcept { return states_.size(); }
    double operator[](std::size_t j) const { return states_[j]; }
    double front() const { return states_.front(); }
    double back() const { return states_.back(); }
    std::span<const double> states() const noexcept { return states_; }

    bool degenerate() const noexcept { return states_.size() < 2; }

    void require_nondegenerate() const {
        if (degenerate()) {
            throw Error(ErrorKind::DegenerateGrid, "grid needs at least two states");
        }
    }

    friend bool operator==(const StateGrid&, const StateGrid&) = default;

private:
    std::vector<double> states_;
};

/// sum_j i_j w_j for any vector on the grid (signed vectors allowed).
inline double mean_on_grid(const StateGrid& grid, std::span<const double> w) {
    double s = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) s += grid[j] * w[j];
    return s;
}

/// Probability mass function on a StateGrid: the calibration target.
class TargetPMF {
public:
    TargetPMF() = default;

    TargetPMF(StateGrid grid, std::vector<double> masses)
        : grid_(std::move(grid)), masses_(std::move(masses)) {
        if (masses_.size() != grid_.size()) {
            throw Error(ErrorKind::InvalidInput, "grid has " + std::to_string(grid_.size()) +
                                                     " states but " + std::to_string(masses_.size()) +
                                                     " masses were given");
        }
        double total = 0.0;
        for (std::size_t j = 0; j < masses_.size(); ++j) {
            if (!std::isfinite(masses_[j]) || masses_[j] < 0.0) {
                throw Error(ErrorKind::InvalidInput, "mass " + std::to_string(j) + " is negative or not finite");
            }
            total += masses_[j];
        }
        if (std::abs(total - 1.0) > kAlgebraicTol) {
            throw Error(ErrorKind::InvalidInput, "masses sum to " + std::to_string(total) + ", not 1");
        }
    }

    /// Drops masses below `floor`, renormalizes what is left. Used on ingestion
    /// of external data where exact zeros (or rounding dust) are common.
    static TargetPMF from_raw(std::span<const double> states, std::span<const double> masses,
                              double floor = kDefaultMassFloor) {
        if (states.size() != masses.size()) {
            throw Error(ErrorKind::InvalidInput, "states and masses differ in length");
        }
        std::vector<double> kept_states;
        std::vector<double> kept_masses;
        double total = 0.0;
        for (std::size_t j = 0; j < states.size(); ++j) {
            if (!std::isfinite(masses[j]) || masses[j] < 0.0) {
                throw Error(ErrorKind::InvalidInput, "mass " + std::to_string(j) + " is negative or not finite");
            }
            if (masses[j] < floor) continue;
            kept_states.push_back(states[j]);
            kept_masses.push_back(masses[j]);
            total += masses[j];
        }
        if (kept_masses.empty() || !(total > 0.0)) {
            throw Error(ErrorKind::InvalidInput, "no mass above the floor");
        }
        for (double& m : kept_masses) m /= total;
        return TargetPMF(StateGrid(std::move(kept_states)), std::move(kept_masses));
    }

    const StateGrid& grid() const noexcept { return grid_; }
    std::span<const double> masses() const noexcept { return masses_; }
    std::size_t size() const noexcept { return masses_.size(); }
    double operator[](std::size_t j) const { return masses_[j]; }

    double min_mass() const { return *std::min_element(masses_.begin(), masses_.end()); }

    /// Calibration theorems need every state charged.
    void require_positive() const {
        for (std::size_t j = 0; j < masses_.size(); ++j) {
            if (!(masses_[j] > 0.0)) {
                throw Error(ErrorKind::NonPositiveMass, "mass at state " + std::to_string(j) + " is not positive");
            }
        }
    }

private:
    StateGrid grid_;
    std::vector<double> masses_;
};

/// Law of X_{0+}: the martingale split of e_0 onto its two bracketing states.
struct InitialVector {
    std::vector<double> weights;

    std::size_t size() const noexcept { return weights.size(); }
    double operator[](std::size_t j) const { return weights[j]; }
};

inline double expectation(const TargetPMF& pmf) { return mean_on_grid(pmf.grid(), pmf.masses()); }

/// 0-based l with i_{l-1} < mean <= i_l. Requires i_1 < mean <= i_M.
inline std::size_t splice_index(const StateGrid& grid, double mean) {
    grid.require_nondegenerate();
    if (!(mean > grid.front()) || !(mean <= grid.back())) {
        throw Error(ErrorKind::InvalidInput, "mean " + std::to_string(mean) + " lies outside the grid hull (" +
                                                 std::to_string(grid.front()) + ", " +
                                                 std::to_string(grid.back()) + "]");
    }
    auto states = grid.states();
    auto it = std::lower_bound(states.begin(), states.end(), mean);
    return static_cast<std::size_t>(it - states.begin());
}

inline std::size_t splice_index(const TargetPMF& pmf) {
    pmf.grid().require_nondegenerate();
    double e0 = expectation(pmf);
    // Rounding can push e_0 a hair outside the hull when all mass sits on an end.
    e0 = std::clamp(e0, pmf.grid().front(), pmf.grid().back());
    if (e0 == pmf.grid().front()) {
        throw Error(ErrorKind::DegenerateGrid, "all mass at the lowest state; no splice index");
    }
    return splice_index(pmf.grid(), e0);
}

inline InitialVector initial_vector(const TargetPMF& pmf) {
    const StateGrid& grid = pmf.grid();
    const std::size_t l = splice_index(pmf);
    const double e0 = expectation(pmf);
    InitialVector v{std::vector<double>(grid.size(), 0.0)};
    if (e0 >= grid[l]) {
        v.weights[l] = 1.0;
        return v;
    }
    const double gap = grid[l] - grid[l - 1];
    v.weights[l] = (e0 - grid[l - 1]) / gap;
    v.weights[l - 1] = (grid[l] - e0) / gap;
    return v;
}

}  // namespace cmrw

#endif  // CMRW_PMF_HPP
