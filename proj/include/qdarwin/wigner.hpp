// wigner.hpp: time-frequency picture of the scattered probe
//
// Convention: W_psi(t, omega) = int psi(omega + W/2) psi*(omega - W/2) exp(-i W t) dW, so that
// int int W dt d omega / 2 pi = <psi|psi> and a delay exp(i omega tau) moves W to t = +tau.
// For the Gaussian probe W(t, omega) = (2 sigma sqrt(pi) / N) exp(-(omega-omega0)^2/sigma^2 - sigma^2 t^2),
// where N is the normalization of phi on omega >= 0.
//
// The Wigner function of atom (k, l) is (T / pi) sin(2 d u) / u with u = t - l T and d the
// distance from omega to the nearest band edge. Its t-integral against a Gaussian is done in
// closed form, leaving one adaptive integral over the band.

#pragma once

#include <cmath>
#include <vector>

#include "qdarwin/common.hpp"
#include "qdarwin/info.hpp"
#include "qdarwin/quadrature.hpp"
#include "qdarwin/signal.hpp"

namespace qdarwin::wigner {

using signal::AtomGrid;
using signal::BranchCoefficients;
using signal::ScatteringModel;
using signal::Wavepacket;

inline double wigner_gaussian(const Wavepacket& wp, double t, double omega) {
    const double s = wp.sigma();
    const double x = (omega - wp.omega0()) / s;
    return 2.0 * s * std::sqrt(kPi) / wp.norm() * std::exp(-x * x - s * s * t * t);
}

/// Shannon-atom Wigner window at (t, omega).
inline double wigner_atom(double period, AtomIndex atom, double t, double omega) {
    const double lo = kTwoPi * atom.k / period, hi = kTwoPi * (atom.k + 1) / period;
    if (!(omega > lo && omega < hi)) return 0.0;
    const double d = std::min(omega - lo, hi - omega);
    const double u = t - atom.l * period;
    if (std::abs(u) < 1e-12) return (period / kPi) * 2.0 * d;
    return (period / kPi) * std::sin(2.0 * d * u) / u;
}

struct TfTolerance {
    double abs_tol{1e-11};
    std::size_t max_segments{4000};
};

namespace detail {

/// int dt W_atom(t, omega) exp(-sigma^2 (t - c)^2), for omega inside the band at distance d from its edges.
inline double atom_time_integral(double period, double sigma, double d, double c_minus_lT) {
    // sin(2 d u) / u = (1/2) int_{-2d}^{2d} exp(i nu u) d nu; the u-integral of a Gaussian is closed form.
    const double s = std::sqrt(2.0) * sigma;
    const double inner = signal::detail::gaussian_band_integral(0.0, s, c_minus_lT, 0.0, 2.0 * d).real();
    return (period / kPi) * (std::sqrt(kPi) / sigma) * inner;
}

/// int int W_atom(t, omega) W_phi(t - shift, omega) f(omega) dt d omega / 2 pi, complex weight f.
template <class Weight>
cplx atom_overlap(const Wavepacket& wp, double period, AtomIndex atom, double shift, Weight&& f,
                  const TfTolerance& tol) {
    const double lo = std::max({0.0, kTwoPi * atom.k / period, wp.support_lo()});
    const double hi = std::min(kTwoPi * (atom.k + 1) / period, wp.support_hi());
    if (!(hi > lo)) return {0.0, 0.0};
    const double band_lo = kTwoPi * atom.k / period, band_hi = kTwoPi * (atom.k + 1) / period;
    const double mid = 0.5 * (band_lo + band_hi);
    const double s = wp.sigma();
    const double amp = 2.0 * s * std::sqrt(kPi) / wp.norm();
    auto integrand = [&](double omega) -> cplx {
        const double d = std::min(omega - band_lo, band_hi - omega);
        const double x = (omega - wp.omega0()) / s;
        const double wt = atom_time_integral(period, s, d, shift - atom.l * period);
        return f(omega) * (amp * std::exp(-x * x) * wt / kTwoPi);
    };
    std::vector<double> breaks{lo};
    if (mid > lo && mid < hi) breaks.push_back(mid);
    breaks.push_back(hi);
    auto r = quad::integrate_pieces(integrand, breaks, tol.abs_tol, tol.max_segments);
    if (!r.converged) throw QuadratureError("time-frequency overlap did not converge", atom, r.error);
    return r.value;
}

}  // namespace detail

/// log|D_{k,l}| of one atom at nbar = 1 from the three time-frequency spots.
inline double coherent_atomic_deco_tf(const Wavepacket& wp, const ScatteringModel& sc, double period, AtomIndex atom,
                                      const TfTolerance& tol = {}) {
    auto one = [](double) { return cplx{1.0, 0.0}; };
    const double dt = sc.dtau();
    const cplx s0 = detail::atom_overlap(wp, period, atom, sc.tau0(), one, tol);
    const cplx s1 = detail::atom_overlap(wp, period, atom, sc.tau1(), one, tol);
    const cplx x = detail::atom_overlap(wp, period, atom, sc.taubar(),
                                        [dt](double w) { return cplx{std::cos(w * dt), 0.0}; }, tol);
    return -0.5 * (s0.real() + s1.real() - 2.0 * x.real());
}

/// p_F(s) and a_F = <phi1|Pi_F|phi0> of a set of atoms from time-frequency integrals (raw scale).
struct TfOverlap {
    double p0{0.0};
    double p1{0.0};
    cplx a{};
};

inline TfOverlap tf_overlap_stats(const Wavepacket& wp, const ScatteringModel& sc, double period,
                                  const std::vector<AtomIndex>& atoms, const TfTolerance& tol = {}) {
    auto one = [](double) { return cplx{1.0, 0.0}; };
    const double dt = sc.dtau();
    TfOverlap out;
    for (const auto& at : atoms) {
        out.p0 += detail::atom_overlap(wp, period, at, sc.tau0(), one, tol).real();
        out.p1 += detail::atom_overlap(wp, period, at, sc.tau1(), one, tol).real();
        out.a += detail::atom_overlap(wp, period, at, sc.taubar(),
                                      [dt](double w) { return std::exp(cplx{0.0, -w * dt}); }, tol);
    }
    return out;
}

/// Time-resolved limit: log|D_{k,l}| ~ -(T / 2) |phi(tau0 - t_l) - phi(tau1 - t_l)|^2 at nbar = 1.
inline double time_resolved_log_deco(const Wavepacket& wp, const ScatteringModel& sc, double period, int l) {
    const double tl = l * period;
    return -0.5 * period * std::norm(wp.time_amplitude(sc.tau0() - tl) - wp.time_amplitude(sc.tau1() - tl));
}

/// Frequency-resolved limit: log|D_{k,l=0}| ~ -2 sin^2(omega_k dtau / 2) |phi(omega_k)|^2 (2 pi / T) nbar.
inline double frequency_resolved_log_deco(const Wavepacket& wp, const ScatteringModel& sc, double period, int k,
                                          double nbar = 1.0) {
    const double wk = kTwoPi * (k + 0.5) / period;
    const double sn = std::sin(0.5 * wk * sc.dtau());
    return -2.0 * sn * sn * wp.intensity(wk) * (kTwoPi / period) * nbar;
}

/// Per-atom mutual information over the lattice.
struct TFMap {
    double period{1.0};
    info::ProbeSpec probe;
    double system_entropy{0.0};
    std::vector<AtomIndex> atoms;
    std::vector<double> t_center;
    std::vector<double> omega_center;
    std::vector<double> mi_bits;
};

inline TFMap atomic_mi_map(const BranchCoefficients& c, const info::ProbeSpec& probe) {
    TFMap m;
    m.period = c.period();
    m.probe = probe;
    fragments::FragmentAccumulator empty(c);
    m.system_entropy = info::system_entropy(empty.overlap(), probe);
    for (std::size_t i = 0; i < c.size(); ++i) {
        const auto a = c.atom(i);
        m.atoms.push_back(a);
        m.t_center.push_back(a.l * c.period());
        m.omega_center.push_back(kTwoPi * (a.k + 0.5) / c.period());
        m.mi_bits.push_back(std::max(0.0, info::mutual_info(empty.overlap_with(i), probe)));
    }
    return m;
}

}  // namespace qdarwin::wigner
