#ifndef CMRW_TRIDIAGONAL_HPP
#define CMRW_TRIDIAGONAL_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"

namespace cmrw {

enum class KernelKind { Discrete, Resolvent, Generator, General };

/**
 * M x M tridiagonal matrix stored by diagonals.
 *
 * Row j holds lower[j] at column j-1, diag[j] at j and upper[j] at j+1;
 * lower[0] and upper[M-1] are always zero. All the chains here act on row
 * vectors (distributions), so the primary products are x * T and the
 * solve of y * T = b.
 */
class Tridiagonal {
public:
    Tridiagonal() = default;
    explicit Tridiagonal(std::size_t m, KernelKind kind = KernelKind::General)
        : lower_(m, 0.0), diag_(m, 0.0), upper_(m, 0.0), kind_(kind) {}

    static Tridiagonal identity(std::size_t m) {
        Tridiagonal t(m);
        for (double& d : t.diag_) d = 1.0;
        return t;
    }

    std::size_t size() const noexcept { return diag_.size(); }
    KernelKind kind() const noexcept { return kind_; }
    void set_kind(KernelKind kind) noexcept { kind_ = kind; }

    double& lower(std::size_t j) { return lower_[j]; }
    double& diag(std::size_t j) { return diag_[j]; }
    double& upper(std::size_t j) { return upper_[j]; }
    double lower(std::size_t j) const { return lower_[j]; }
    double diag(std::size_t j) const { return diag_[j]; }
    double upper(std::size_t j) const { return upper_[j]; }

    double at(std::size_t j, std::size_t k) const {
        if (k == j) return diag_[j];
        if (k + 1 == j) return lower_[j];
        if (k == j + 1) return upper_[j];
        return 0.0;
    }

    double row_sum(std::size_t j) const { return lower_[j] + diag_[j] + upper_[j]; }

    /// sum_k T_{jk} x_k for the row j.
    double row_dot(std::size_t j, std::span<const double> x) const {
        double s = diag_[j] * x[j];
        if (j > 0) s += lower_[j] * x[j - 1];
        if (j + 1 < size()) s += upper_[j] * x[j + 1];
        return s;
    }

    /// Returns x * T.
    std::vector<double> left_multiply(std::span<const double> x) const {
        const std::size_t m = size();
        std::vector<double> y(m);
        for (std::size_t k = 0; k < m; ++k) {
            double s = x[k] * diag_[k];
            if (k > 0) s += x[k - 1] * upper_[k - 1];
            if (k + 1 < m) s += x[k + 1] * lower_[k + 1];
            y[k] = s;
        }
        return y;
    }

    /// Returns T * x.
    std::vector<double> right_multiply(std::span<const double> x) const {
        std::vector<double> y(size());
        for (std::size_t j = 0; j < size(); ++j) y[j] = row_dot(j, x);
        return y;
    }

    /// Solves y * T = b (Thomas algorithm on the transpose).
    std::vector<double> left_solve(std::span<const double> b) const {
        const std::size_t m = size();
        // Transpose: sub(k) = upper[k-1], diag(k) = diag[k], super(k) = lower[k+1].
        std::vector<double> c(m, 0.0);
        std::vector<double> d(m, 0.0);
        for (std::size_t k = 0; k < m; ++k) {
            const double sub = k > 0 ? upper_[k - 1] : 0.0;
            const double sup = k + 1 < m ? lower_[k + 1] : 0.0;
            const double pivot = diag_[k] - (k > 0 ? sub * c[k - 1] : 0.0);
            if (pivot == 0.0 || !std::isfinite(pivot)) {
                throw Error(ErrorKind::InvalidParameter, "singular tridiagonal system");
            }
            c[k] = sup / pivot;
            d[k] = (b[k] - (k > 0 ? sub * d[k - 1] : 0.0)) / pivot;
        }
        std::vector<double> y(m);
        y[m - 1] = d[m - 1];
        for (std::size_t k = m - 1; k-- > 0;) y[k] = d[k] - c[k] * y[k + 1];
        return y;
    }

    Eigen::MatrixXd dense() const {
        const auto m = static_cast<Eigen::Index>(size());
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
        for (Eigen::Index j = 0; j < m; ++j) {
            const auto u = static_cast<std::size_t>(j);
            out(j, j) = diag_[u];
            if (j > 0) out(j, j - 1) = lower_[u];
            if (j + 1 < m) out(j, j + 1) = upper_[u];
        }
        return out;
    }

private:
    std::vector<double> lower_;
    std::vector<double> diag_;
    std::vector<double> upper_;
    KernelKind kind_ = KernelKind::General;
};

}  // namespace cmrw

#endif  // CMRW_TRIDIAGONAL_HPP
