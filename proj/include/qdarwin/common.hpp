// common.hpp: shared scalar types, atom indices and error types

#pragma once

#include <compare>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qdarwin {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Label of one Shannon atom: frequency band k, time slot l.
struct AtomIndex {
    int k{0};
    int l{0};
    auto operator<=>(const AtomIndex&) const = default;
};

inline std::string to_string(const AtomIndex& a) {
    return "(" + std::to_string(a.k) + "," + std::to_string(a.l) + ")";
}

/// Raised when a lattice cannot reach the requested energy capture under the atom cap.
class GridInfeasible : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when an adaptive quadrature misses its absolute tolerance.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, AtomIndex atom, double error_estimate)
        : std::runtime_error(what + " at atom " + to_string(atom) +
                             " (error estimate " + std::to_string(error_estimate) + ")"),
          atom_(atom),
          error_estimate_(error_estimate) {}

    AtomIndex atom() const noexcept { return atom_; }
    double error_estimate() const noexcept { return error_estimate_; }

private:
    AtomIndex atom_;
    double error_estimate_;
};

}  // namespace qdarwin
