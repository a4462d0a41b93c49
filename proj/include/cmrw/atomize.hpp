#ifndef CMRW_ATOMIZE_HPP
#define CMRW_ATOMIZE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/lognormal.hpp>

#include "error.hpp"
#include "pmf.hpp"

namespace cmrw {

/**
 * Probability distribution on the real line, seen through its CDF.
 *
 * `quantile(u)` is the generalized inverse inf{z : F(z) >= u}; it may return
 * +infinity for u = 1 when the support is unbounded above.
 */
class CdfOracle {
public:
    virtual ~CdfOracle() = default;
    virtual double cdf(double x) const = 0;
    virtual double quantile(double u) const = 0;
    virtual double mean() const = 0;
};

class UniformCdf final : public CdfOracle {
public:
    UniformCdf(double lo, double hi) : lo_(lo), hi_(hi) {
        if (!(hi > lo)) throw Error(ErrorKind::InvalidParameter, "uniform needs lo < hi");
    }
    double cdf(double x) const override { return std::clamp((x - lo_) / (hi_ - lo_), 0.0, 1.0); }
    double quantile(double u) const override { return lo_ + std::clamp(u, 0.0, 1.0) * (hi_ - lo_); }
    double mean() const override { return 0.5 * (lo_ + hi_); }

private:
    double lo_;
    double hi_;
};

/// Finitely many atoms. Also backs empirical CDFs read from (x, F(x)) data.
class DiscreteCdf final : public CdfOracle {
public:
    DiscreteCdf(std::vector<double> atoms, const std::vector<double>& masses) : atoms_(std::move(atoms)) {
        if (atoms_.empty() || atoms_.size() != masses.size()) {
            throw Error(ErrorKind::InvalidInput, "discrete law needs matching non-empty atoms and masses");
        }
        double total = 0.0;
        for (std::size_t k = 0; k < atoms_.size(); ++k) {
            if (k > 0 && !(atoms_[k] > atoms_[k - 1])) {
                throw Error(ErrorKind::InvalidInput, "atoms must be strictly increasing");
            }
            if (masses[k] < 0.0) throw Error(ErrorKind::InvalidInput, "negative atom mass");
            total += masses[k];
            cumulative_.push_back(total);
        }
        if (std::abs(total - 1.0) > 1e-9) {
            throw Error(ErrorKind::InvalidInput, "atom masses sum to " + std::to_string(total));
        }
        for (double& c : cumulative_) c = std::min(c / total, 1.0);
        cumulative_.back() = 1.0;
    }

    /// Right-continuous step CDF through the points (x_k, F_k).
    static DiscreteCdf from_cdf_points(const std::vector<double>& xs, const std::vector<double>& fs) {
        if (xs.empty() || xs.size() != fs.size()) {
            throw Error(ErrorKind::InvalidInput, "empirical CDF needs matching non-empty columns");
        }
        std::vector<double> masses;
        double prev = 0.0;
        for (std::size_t k = 0; k < fs.size(); ++k) {
            if (fs[k] < prev - 1e-12 || fs[k] > 1.0 + 1e-9) {
                throw Error(ErrorKind::InvalidInput,
                            "empirical CDF is not nondecreasing in [0,1] at row " + std::to_string(k));
            }
            masses.push_back(std::max(fs[k] - prev, 0.0));
            prev = std::max(prev, fs[k]);
        }
        if (std::abs(prev - 1.0) > 1e-9) {
            throw Error(ErrorKind::InvalidInput, "empirical CDF must reach 1 (last value " + std::to_string(prev) + ")");
        }
        return DiscreteCdf(xs, masses);
    }

    static DiscreteCdf bernoulli(double p) {
        if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::InvalidParameter, "bernoulli needs p in (0,1)");
        return DiscreteCdf({0.0, 1.0}, {1.0 - p, p});
    }

    static DiscreteCdf point_mass(double c) { return DiscreteCdf({c}, {1.0}); }

    double cdf(double x) const override {
        auto it = std::upper_bound(atoms_.begin(), atoms_.end(), x);
        if (it == atoms_.begin()) return 0.0;
        return cumulative_[static_cast<std::size_t>(it - atoms_.begin()) - 1];
    }

    double quantile(double u) const override {
        // Slack absorbs rounding in the running sums.
        const double target = u - 1e-14;
        auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), target);
        if (it == cumulative_.end()) return atoms_.back();
        return atoms_[static_cast<std::size_t>(it - cumulative_.begin())];
    }

    double mean() const override {
        double m = 0.0;
        double prev = 0.0;
        for (std::size_t k = 0; k < atoms_.size(); ++k) {
            m += atoms_[k] * (cumulative_[k] - prev);
            prev = cumulative_[k];
        }
        return m;
    }

private:
    std::vector<double> atoms_;
    std::vector<double> cumulative_;
};

class LognormalCdf final : public CdfOracle {
public:
    LognormalCdf(double location, double scale) : dist_(location, scale) {
        if (!(scale > 0.0)) throw Error(ErrorKind::InvalidParameter, "lognormal needs scale > 0");
    }
    double cdf(double x) const override { return x <= 0.0 ? 0.0 : boost::math::cdf(dist_, x); }
    double quantile(double u) const override {
        if (u <= 0.0) return 0.0;
        if (u >= 1.0) return std::numeric_limits<double>::infinity();
        return boost::math::quantile(dist_, u);
    }
    double mean() const override { return boost::math::mean(dist_); }

private:
    boost::math::lognormal_distribution<double> dist_;
};

/**
 * Quantile atomization with mesh 2^-n.
 *
 * x_1 = F^-1(2^-n), x_{j+1} = F^-1(F(x_j) + 2^-n), stopping once F(x_j) = 1 or
 * the upper tail 1 - F(x_j) drops below the mesh. Masses are CDF increments,
 * with everything above x_{M-1} given to the last atom, so the output CDF
 * agrees with F at every support point but the last.
 */
inline TargetPMF atomize(const CdfOracle& law, int n) {
    if (n < 1 || n > 52) throw Error(ErrorKind::InvalidParameter, "atomization level n must be in [1, 52]");
    const double mesh = std::ldexp(1.0, -n);

    std::vector<double> points;
    std::vector<double> cdfs;
    const double first = law.quantile(mesh);
    if (!std::isfinite(first)) {
        throw Error(ErrorKind::InvalidInput, "lower tail cannot be localized: quantile(2^-n) is not finite");
    }
    points.push_back(first);
    cdfs.push_back(law.cdf(first));

    const std::size_t max_points = (std::size_t{1} << std::min(n, 30)) + 2;
    while (cdfs.back() < 1.0 && 1.0 - cdfs.back() >= mesh) {
        if (points.size() > max_points) {
            throw Error(ErrorKind::InvalidInput, "CDF oracle did not advance; inconsistent cdf/quantile");
        }
        const double next = law.quantile(std::min(cdfs.back() + mesh, 1.0));
        if (!std::isfinite(next)) break;  // unbounded tail: absorbed into the last atom
        if (!(next > points.back())) {
            throw Error(ErrorKind::InvalidInput, "CDF oracle quantile is not increasing");
        }
        points.push_back(next);
        cdfs.push_back(law.cdf(next));
    }

    const std::size_t count = points.size();
    std::vector<double> masses(count);
    if (count == 1) {
        masses[0] = 1.0;
    } else {
        masses[0] = cdfs[0];
        for (std::size_t j = 1; j + 1 < count; ++j) masses[j] = cdfs[j] - cdfs[j - 1];
        masses[count - 1] = 1.0 - cdfs[count - 2];
    }
    return TargetPMF(StateGrid(std::move(points)), std::move(masses));
}

}  // namespace cmrw

#endif  // CMRW_ATOMIZE_HPP
