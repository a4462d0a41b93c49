#ifndef CMRW_ERROR_HPP
#define CMRW_ERROR_HPP

#include <stdexcept>
#include <string>

namespace cmrw {

enum class ErrorKind {
    InvalidInput,
    DegenerateGrid,
    NonPositiveMass,
    InvalidParameter,
    DivisionGuard,
    NoConvergence,
    GridMismatch,
    Arbitrage,
    Parse,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::DegenerateGrid: return "degenerate-grid";
    case ErrorKind::NonPositiveMass: return "nonpositive-mass";
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::DivisionGuard: return "division-guard";
    case ErrorKind::NoConvergence: return "no-convergence";
    case ErrorKind::GridMismatch: return "grid-mismatch";
    case ErrorKind::Arbitrage: return "arbitrage";
    case ErrorKind::Parse: return "parse";
    }
    return "unknown";
}

/// Base of every error the library raises. `kind()` is stable and is what
/// the CLI maps onto exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    /// Numerical failures (exit code 1) as opposed to bad input (exit code 2).
    bool is_numerical() const noexcept {
        return kind_ == ErrorKind::NoConvergence || kind_ == ErrorKind::DivisionGuard;
    }

private:
    ErrorKind kind_;
};

}  // namespace cmrw

#endif  // CMRW_ERROR_HPP
