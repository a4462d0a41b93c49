#ifndef CMRW_SMILE_HPP
#define CMRW_SMILE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "pmf.hpp"

namespace cmrw {

/// European call quotes C(K_1) > ... on strikes K_1 < ... < K_m, all from one maturity.
struct QuoteGrid {
    std::vector<double> strikes;
    std::vector<double> calls;
    /// Optional forward (mean) reference. When absent, K_1 + C_1 is used.
    std::optional<double> forward;
};

/// Undiscounted call prices E[(X - K)^+] of a PMF.
inline std::vector<double> call_prices(const TargetPMF& pmf, std::span<const double> strikes) {
    std::vector<double> out;
    out.reserve(strikes.size());
    for (double k : strikes) {
        double c = 0.0;
        for (std::size_t j = 0; j < pmf.size(); ++j) c += std::max(pmf.grid()[j] - k, 0.0) * pmf[j];
        out.push_back(c);
    }
    return out;
}

namespace detail {

inline std::string strike_label(double k) {
    std::string s = std::to_string(k);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
}

}  // namespace detail

/**
 * Discrete Breeden-Litzenberger: the mass at K_j is the jump in the slope of
 * the piecewise linear call curve, with slope -1 left of K_1 and 0 right of
 * K_m. Rejects quotes that are negative, increasing, too steep, or
 * non-convex, naming the offending strike.
 */
inline TargetPMF smile_to_pmf(const QuoteGrid& quotes, double floor = kDefaultMassFloor) {
    const auto& k = quotes.strikes;
    const auto& c = quotes.calls;
    const std::size_t m = k.size();
    if (m < 2 || c.size() != m) throw Error(ErrorKind::InvalidInput, "need at least two strikes with one call price each");
    double scale = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        if (!std::isfinite(k[j]) || !std::isfinite(c[j])) throw Error(ErrorKind::InvalidInput, "non-finite quote");
        if (j > 0 && !(k[j] > k[j - 1])) throw Error(ErrorKind::InvalidInput, "strikes must be strictly increasing");
        scale = std::max({scale, std::abs(k[j]), std::abs(c[j])});
    }
    const double tol = 1e-12 * std::max(scale, 1.0);

    for (std::size_t j = 0; j < m; ++j) {
        if (c[j] < -tol) throw Error(ErrorKind::Arbitrage, "negative call price at K = " + detail::strike_label(k[j]));
    }
    if (c[m - 1] > 1e-8 * std::max(scale, 1.0)) {
        throw Error(ErrorKind::InvalidInput, "call at the last strike K = " + detail::strike_label(k[m - 1]) +
                                                 " must be zero; extend the strike grid past the support");
    }
    std::vector<double> slope(m + 1);
    slope[0] = -1.0;
    slope[m] = 0.0;
    for (std::size_t j = 1; j < m; ++j) slope[j] = (c[j] - c[j - 1]) / (k[j] - k[j - 1]);
    for (std::size_t j = 1; j < m; ++j) {
        if (slope[j] > tol) {
            throw Error(ErrorKind::Arbitrage, "call price increases at K = " + detail::strike_label(k[j]));
        }
        if (slope[j] < -1.0 - tol) {
            throw Error(ErrorKind::Arbitrage, "call slope below -1 at K = " + detail::strike_label(k[j]));
        }
    }

    std::vector<double> masses(m);
    for (std::size_t j = 0; j < m; ++j) {
        masses[j] = slope[j + 1] - slope[j];
        if (masses[j] < -tol) {
            throw Error(ErrorKind::Arbitrage, "call prices not convex at K = " + detail::strike_label(k[j]));
        }
        masses[j] = std::max(masses[j], 0.0);
    }

    const double implied_forward = k[0] + c[0];
    if (quotes.forward && std::abs(*quotes.forward - implied_forward) > 1e-8 * std::max(scale, 1.0)) {
        throw Error(ErrorKind::InvalidInput, "forward " + std::to_string(*quotes.forward) +
                                                 " disagrees with quote-implied " + std::to_string(implied_forward));
    }
    return TargetPMF::from_raw(k, masses, floor);
}

}  // namespace cmrw

#endif  // CMRW_SMILE_HPP
