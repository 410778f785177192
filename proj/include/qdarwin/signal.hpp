// signal.hpp: probe wavepackets, the Shannon-atom lattice and branch coefficients
//
// Units: sigma = 1 fixes the scale in every driver; the functions below accept any positive
// sigma. A Shannon atom (k, l) is the band [2 pi k / T, 2 pi (k+1) / T) carrying the phase
// exp(i omega l T); its coefficient on a spectral amplitude psi is
//
//     psi_{k,l} = sqrt(T / 2 pi) * int_band exp(-i omega l T) psi(omega) d omega.
//
// The two scattered branches are psi_s(omega) = exp(i omega tau_s) phi(omega), so the
// coefficient of branch s peaks near l T = tau_s.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdarwin/common.hpp"
#include "qdarwin/faddeeva.hpp"
#include "qdarwin/quadrature.hpp"

namespace qdarwin::signal {

namespace detail {

/// int_a^b exp(i omega u) exp(-(omega - center)^2 / (2 s^2)) d omega, with b possibly +inf.
/// The complex error functions are folded into Faddeeva evaluations so that large |u|
/// never produces exp(+u^2) intermediates.
inline cplx gaussian_band_integral(double center, double s, double u, double a, double b) {
    if (!(b > a)) return {0.0, 0.0};
    const double xa = a - center;
    const double xb = b - center;
    const double rt2s = std::sqrt(2.0) * s;

    // exp(-s^2 u^2 / 2) erfc(z) and exp(-s^2 u^2 / 2) erfc(-z), z = (x - i s^2 u) / (s sqrt 2)
    auto upper = [&](double x) -> cplx {  // x >= 0
        if (std::isinf(x)) return {0.0, 0.0};
        const cplx arg{s * s * u / rt2s, x / rt2s};
        return std::exp(cplx{-x * x / (2.0 * s * s), u * x}) * special::faddeeva_upper(arg);
    };
    auto lower = [&](double x) -> cplx {  // x <= 0
        const cplx arg{-s * s * u / rt2s, -x / rt2s};
        return std::exp(cplx{-x * x / (2.0 * s * s), u * x}) * special::faddeeva_upper(arg);
    };

    cplx bracket;
    if (xa >= 0.0) {
        bracket = upper(xa) - upper(xb);
    } else if (xb <= 0.0) {
        bracket = lower(xb) - lower(xa);
    } else {
        bracket = 2.0 * std::exp(-0.5 * s * s * u * u) - upper(xb) - lower(xa);
    }
    return std::exp(cplx{0.0, center * u}) * (s * std::sqrt(kPi / 2.0)) * bracket;
}

/// int_a^b exp(-(x - c)^2 / s^2) dx, tail-accurate.
inline double gaussian_mass(double c, double s, double a, double b) {
    if (!(b > a)) return 0.0;
    const double za = (a - c) / s;
    const double zb = (b - c) / s;
    double diff;
    if (za >= 0.0) {
        diff = std::erfc(za) - std::erfc(zb);
    } else if (zb <= 0.0) {
        diff = std::erfc(-zb) - std::erfc(-za);
    } else {
        diff = 2.0 - std::erfc(zb) - std::erfc(-za);
    }
    return 0.5 * s * std::sqrt(kPi) * diff;
}

}  // namespace detail

/// Normalized Gaussian spectral amplitude phi(omega) = exp(-(omega-omega0)^2 / 2 sigma^2) / sqrt(N)
/// with hard support omega >= 0.
class Wavepacket {
public:
    Wavepacket(double omega0, double sigma) : omega0_(omega0), sigma_(sigma) {
        if (!(sigma > 0.0) || !(omega0 > 0.0))
            throw std::invalid_argument("wavepacket: omega0 and sigma must be positive");
        if (omega0 < 5.0 * sigma)
            throw std::invalid_argument("wavepacket: omega0 must be at least 5 sigma (got omega0/sigma = " +
                                        std::to_string(omega0 / sigma) + ")");
        norm_ = detail::gaussian_mass(omega0, sigma, 0.0, std::numeric_limits<double>::infinity());
    }

    double omega0() const noexcept { return omega0_; }
    double sigma() const noexcept { return sigma_; }
    /// N such that int_0^inf |phi|^2 = 1.
    double norm() const noexcept { return norm_; }

    double amplitude(double omega) const {
        if (omega < 0.0) return 0.0;
        const double x = (omega - omega0_) / sigma_;
        return std::exp(-0.5 * x * x) / std::sqrt(norm_);
    }
    double intensity(double omega) const {
        const double a = amplitude(omega);
        return a * a;
    }

    /// Spectral window [lo, hi] outside of which |phi|^2 < 1e-60.
    double support_lo() const noexcept { return std::max(0.0, omega0_ - 12.0 * sigma_); }
    double support_hi() const noexcept { return omega0_ + 12.0 * sigma_; }

    /// int_a^b |phi|^2 d omega.
    double band_energy(double a, double b) const {
        return detail::gaussian_mass(omega0_, sigma_, std::max(a, 0.0), b) / norm_;
    }

    /// phi(t) = int phi(omega) exp(i omega t) d omega / sqrt(2 pi), cutoff included.
    cplx time_amplitude(double t) const {
        return detail::gaussian_band_integral(omega0_, sigma_, t, 0.0,
                                              std::numeric_limits<double>::infinity()) /
               std::sqrt(kTwoPi * norm_);
    }

    /// Coefficient of exp(i omega tau) phi(omega) on atom (k, l) of a lattice of period T.
    cplx atom_coefficient(double period, AtomIndex atom, double tau) const {
        const double a = std::max(0.0, kTwoPi * atom.k / period);
        const double b = kTwoPi * (atom.k + 1) / period;
        if (b <= 0.0) return {0.0, 0.0};
        const double u = tau - atom.l * period;
        return std::sqrt(period / kTwoPi) / std::sqrt(norm_) *
               detail::gaussian_band_integral(omega0_, sigma_, u, a, b);
    }

private:
    double omega0_;
    double sigma_;
    double norm_{1.0};
};

inline Wavepacket gaussian_wavepacket(double omega0, double sigma) { return Wavepacket(omega0, sigma); }

/// Time-delay dispersive scattering: b_out(omega) = exp(i omega tau_s) b_in(omega).
class ScatteringModel {
public:
    ScatteringModel(double tau0, double tau1) : tau0_(tau0), tau1_(tau1) {}

    /// Delays placed symmetrically around t = 0.
    static ScatteringModel centered(double dtau) { return {-0.5 * dtau, 0.5 * dtau}; }

    double tau0() const noexcept { return tau0_; }
    double tau1() const noexcept { return tau1_; }
    double tau(int s) const noexcept { return s == 0 ? tau0_ : tau1_; }
    double dtau() const noexcept { return tau1_ - tau0_; }
    double taubar() const noexcept { return 0.5 * (tau0_ + tau1_); }

    ScatteringModel shifted(double c) const { return {tau0_ + c, tau1_ + c}; }

private:
    double tau0_;
    double tau1_;
};

/// G(tau) = int_0^inf |phi(omega)|^2 exp(i omega tau) d omega, closed form.
inline cplx autocorrelation(const Wavepacket& wp, double tau) {
    const double s = wp.sigma() / std::sqrt(2.0);
    return detail::gaussian_band_integral(wp.omega0(), s, tau, 0.0, std::numeric_limits<double>::infinity()) /
           wp.norm();
}

/// Rectangular window of Shannon atoms, k in [k_min, k_max], l in [l_min, l_max].
struct AtomGrid {
    double period{1.0};
    int k_min{0}, k_max{0};
    int l_min{0}, l_max{0};
    double energy_capture[2]{0.0, 0.0};
    double eps_grid{1e-6};

    std::size_t k_count() const { return static_cast<std::size_t>(k_max - k_min + 1); }
    std::size_t l_count() const { return static_cast<std::size_t>(l_max - l_min + 1); }
    std::size_t size() const { return k_count() * l_count(); }

    bool contains(AtomIndex a) const { return a.k >= k_min && a.k <= k_max && a.l >= l_min && a.l <= l_max; }

    /// Atoms in lexicographic (k, l) order.
    std::vector<AtomIndex> atoms() const {
        std::vector<AtomIndex> out;
        out.reserve(size());
        for (int k = k_min; k <= k_max; ++k)
            for (int l = l_min; l <= l_max; ++l) out.push_back({k, l});
        return out;
    }

    double omega_center(int k) const { return kTwoPi * (k + 0.5) / period; }
    double t_center(int l) const { return l * period; }
};

/// Smallest lattice window whose captured energy is at least 1 - eps_grid for both branches.
/// The k window is grown until the frequency marginal reaches 1 - eps_grid / 2; the l window
/// then grows symmetrically from the slots nearest tau0 / T and tau1 / T.
inline AtomGrid build_grid(const Wavepacket& wp, const ScatteringModel& sc, double period,
                           double eps_grid = 1e-6, std::size_t max_atoms = 4096) {
    if (!(period > 0.0)) throw std::invalid_argument("build_grid: period must be positive");
    if (!(eps_grid > 0.0) || eps_grid >= 1.0) throw std::invalid_argument("build_grid: eps_grid must lie in (0, 1)");

    AtomGrid g;
    g.period = period;
    g.eps_grid = eps_grid;

    auto band = [&](int k) { return wp.band_energy(kTwoPi * k / period, kTwoPi * (k + 1) / period); };

    const int kc = static_cast<int>(std::floor(wp.omega0() * period / kTwoPi));
    g.k_min = g.k_max = kc;
    double freq_capture = band(kc);
    while (freq_capture < 1.0 - 0.5 * eps_grid) {
        if (g.k_min > 0) freq_capture += band(--g.k_min);
        freq_capture += band(++g.k_max);
        if (g.k_count() > max_atoms)
            throw GridInfeasible("build_grid: frequency window alone exceeds the atom cap");
    }

    const int l0 = static_cast<int>(std::lround(sc.tau0() / period));
    const int l1 = static_cast<int>(std::lround(sc.tau1() / period));
    g.l_min = std::min(l0, l1);
    g.l_max = std::max(l0, l1);

    auto column_energy = [&](int l, double acc[2]) {
        for (int k = g.k_min; k <= g.k_max; ++k)
            for (int s = 0; s < 2; ++s) acc[s] += std::norm(wp.atom_coefficient(period, {k, l}, sc.tau(s)));
    };

    double cap[2] = {0.0, 0.0};
    for (int l = g.l_min; l <= g.l_max; ++l) column_energy(l, cap);
    if (g.size() > max_atoms)
        throw GridInfeasible("build_grid: the delay span alone exceeds the atom cap");

    while (std::min(cap[0], cap[1]) < 1.0 - eps_grid) {
        if (g.size() + 2 * g.k_count() > max_atoms) {
            std::ostringstream msg;
            msg << "build_grid: capture " << std::min(cap[0], cap[1]) << " still below 1 - " << eps_grid << " at "
                << g.size() << " atoms (cap " << max_atoms << ")";
            throw GridInfeasible(msg.str());
        }
        column_energy(--g.l_min, cap);
        column_energy(++g.l_max, cap);
    }
    g.energy_capture[0] = cap[0];
    g.energy_capture[1] = cap[1];
    return g;
}

/// Complex coefficients of the two scattered branches over an explicit atom list.
///
/// Raw coefficients keep their absolute scale (their squared norms sum to the captured energy).
/// Information quantities use the unit-normalized view, which closes the system on the atoms
/// actually present.
class BranchCoefficients {
public:
    BranchCoefficients() = default;

    BranchCoefficients(double period, std::vector<AtomIndex> atoms, std::vector<cplx> branch0,
                       std::vector<cplx> branch1)
        : period_(period), atoms_(std::move(atoms)) {
        if (branch0.size() != atoms_.size() || branch1.size() != atoms_.size())
            throw std::invalid_argument("BranchCoefficients: size mismatch");
        if (!std::is_sorted(atoms_.begin(), atoms_.end()) ||
            std::adjacent_find(atoms_.begin(), atoms_.end()) != atoms_.end())
            throw std::invalid_argument("BranchCoefficients: atoms must be strictly increasing");
        raw_[0] = std::move(branch0);
        raw_[1] = std::move(branch1);
        for (int s = 0; s < 2; ++s) {
            capture_[s] = 0.0;
            for (const auto& c : raw_[s]) capture_[s] += std::norm(c);
        }
        for (int s = 0; s < 2; ++s) {
            unit_[s].resize(atoms_.size());
            const double scale = capture_[s] > 0.0 ? 1.0 / std::sqrt(capture_[s]) : 0.0;
            for (std::size_t i = 0; i < atoms_.size(); ++i) unit_[s][i] = raw_[s][i] * scale;
        }
        a_tot_ = {0.0, 0.0};
        unit_a_tot_ = {0.0, 0.0};
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            a_tot_ += std::conj(raw_[1][i]) * raw_[0][i];
            unit_a_tot_ += std::conj(unit_[1][i]) * unit_[0][i];
        }
    }

    double period() const noexcept { return period_; }
    std::size_t size() const noexcept { return atoms_.size(); }
    const std::vector<AtomIndex>& atoms() const noexcept { return atoms_; }
    AtomIndex atom(std::size_t i) const { return atoms_.at(i); }

    std::span<const cplx> raw(int s) const { return raw_[s]; }
    std::span<const cplx> unit(int s) const { return unit_[s]; }

    double capture(int s) const noexcept { return capture_[s]; }
    /// <phi1|phi0> over the atom list, raw scale.
    cplx a_tot() const noexcept { return a_tot_; }
    /// <phi1|phi0> between unit-normalized branches.
    cplx unit_a_tot() const noexcept { return unit_a_tot_; }

    std::optional<std::size_t> index_of(AtomIndex a) const {
        auto it = std::lower_bound(atoms_.begin(), atoms_.end(), a);
        if (it == atoms_.end() || *it != a) return std::nullopt;
        return static_cast<std::size_t>(it - atoms_.begin());
    }

    /// Sub-lattice with the same raw coefficients; the unit view is renormalized on the subset.
    BranchCoefficients restrict_to(std::vector<std::size_t> members) const {
        std::sort(members.begin(), members.end());
        members.erase(std::unique(members.begin(), members.end()), members.end());
        std::vector<AtomIndex> atoms;
        std::vector<cplx> b0, b1;
        for (auto i : members) {
            atoms.push_back(atoms_.at(i));
            b0.push_back(raw_[0][i]);
            b1.push_back(raw_[1][i]);
        }
        return {period_, std::move(atoms), std::move(b0), std::move(b1)};
    }

private:
    double period_{1.0};
    std::vector<AtomIndex> atoms_;
    std::vector<cplx> raw_[2];
    std::vector<cplx> unit_[2];
    double capture_[2]{0.0, 0.0};
    cplx a_tot_{};
    cplx unit_a_tot_{};
};

enum class CoefficientMethod { ClosedForm, Quadrature };

/// Spectral amplitude callback with a finite support [lo, hi]; used by the quadrature path.
struct Spectrum {
    std::function<cplx(double)> amplitude;
    double lo{0.0};
    double hi{0.0};
};

inline Spectrum spectrum_of(const Wavepacket& wp) {
    return {[wp](double w) { return cplx{wp.amplitude(w), 0.0}; }, wp.support_lo(), wp.support_hi()};
}

/// Quadrature value of one coefficient of exp(i omega tau) psi(omega); abs tolerance 1e-12.
inline cplx atom_coefficient_quadrature(const Spectrum& spec, double period, AtomIndex atom, double tau,
                                        double abs_tol = 1e-12) {
    const double a = std::max({0.0, kTwoPi * atom.k / period, spec.lo});
    const double b = std::min(kTwoPi * (atom.k + 1) / period, spec.hi);
    if (!(b > a)) return {0.0, 0.0};
    const double pref = std::sqrt(period / kTwoPi);
    const double u = tau - atom.l * period;
    auto f = [&](double w) { return spec.amplitude(w) * std::exp(cplx{0.0, w * u}); };
    auto r = quad::integrate(f, a, b, abs_tol / pref, 20000);
    if (!r.converged) throw QuadratureError("branch coefficient quadrature did not converge", atom, r.error * pref);
    return pref * r.value;
}

/// Branch coefficients over every atom of the grid.
inline BranchCoefficients branch_coefficients(const AtomGrid& grid, const Wavepacket& wp, const ScatteringModel& sc,
                                              CoefficientMethod method = CoefficientMethod::ClosedForm) {
    auto atoms = grid.atoms();
    std::vector<cplx> b0(atoms.size()), b1(atoms.size());
    const Spectrum spec = spectrum_of(wp);
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (method == CoefficientMethod::ClosedForm) {
            b0[i] = wp.atom_coefficient(grid.period, atoms[i], sc.tau0());
            b1[i] = wp.atom_coefficient(grid.period, atoms[i], sc.tau1());
        } else {
            b0[i] = atom_coefficient_quadrature(spec, grid.period, atoms[i], sc.tau0());
            b1[i] = atom_coefficient_quadrature(spec, grid.period, atoms[i], sc.tau1());
        }
    }
    return {grid.period, std::move(atoms), std::move(b0), std::move(b1)};
}

/// Quadrature path for an arbitrary spectral amplitude.
inline BranchCoefficients branch_coefficients(const AtomGrid& grid, const Spectrum& spec, const ScatteringModel& sc) {
    auto atoms = grid.atoms();
    std::vector<cplx> b0(atoms.size()), b1(atoms.size());
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        b0[i] = atom_coefficient_quadrature(spec, grid.period, atoms[i], sc.tau0());
        b1[i] = atom_coefficient_quadrature(spec, grid.period, atoms[i], sc.tau1());
    }
    return {grid.period, std::move(atoms), std::move(b0), std::move(b1)};
}

/// Indices of the heaviest atoms (by combined branch weight), at most max_atoms of them.
inline std::vector<std::size_t> heaviest_atoms(const BranchCoefficients& c, std::size_t max_atoms) {
    std::vector<std::size_t> idx(c.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    auto weight = [&](std::size_t i) { return std::norm(c.raw(0)[i]) + std::norm(c.raw(1)[i]); };
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return weight(a) > weight(b); });
    if (idx.size() > max_atoms) idx.resize(max_atoms);
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace qdarwin::signal
