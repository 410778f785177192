// info.hpp: entropies, mutual information, Holevo information and the N_F decomposition
//
// All entropies are in bits. h2 takes the eigenvalue gap x of a qubit density matrix, whose
// eigenvalues are (1 +- x) / 2.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "qdarwin/common.hpp"
#include "qdarwin/fragments.hpp"

namespace qdarwin::info {

using fragments::Decoherence;
using fragments::FragmentOverlap;

inline constexpr double kLn2 = std::numbers::ln2;

// ---------------------------------------------------------------------------------------------
// entropies

namespace detail {

/// h2 from q = (1 - x) / 2, the smaller eigenvalue; accurate for q -> 0.
inline double h2_small_eigenvalue(double q) {
    if (q <= 0.0) return 0.0;
    if (q >= 0.5) return 1.0;
    return (-q * std::log(q) - (1.0 - q) * std::log1p(-q)) / kLn2;
}

inline double xlog2x(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

}  // namespace detail

/// Binary entropy of a qubit with eigenvalue gap x.
inline double binary_entropy(double x) {
    if (!(x >= -1e-9 && x <= 1.0 + 1e-9))
        throw std::domain_error("binary_entropy: argument " + std::to_string(x) + " outside [0, 1]");
    x = std::clamp(x, 0.0, 1.0);
    return detail::h2_small_eigenvalue(0.5 * (1.0 - x));
}

/// Binary entropy of exp(log_x), exact near x = 1. log_x is clamped to <= 0.
inline double binary_entropy_log(double log_x) {
    if (log_x >= 0.0) return 0.0;
    return detail::h2_small_eigenvalue(-0.5 * std::expm1(log_x));
}

/// Shannon entropy of a probability vector, in bits.
inline double shannon_entropy(const std::vector<double>& p) {
    double h = 0.0;
    for (double v : p) h -= detail::xlog2x(v);
    return h;
}

// ---------------------------------------------------------------------------------------------
// probes

struct ProbeSpec {
    enum class Kind { Coherent, Fock };
    Kind kind{Kind::Coherent};
    double intensity{1.0};  // nbar for coherent, n for Fock

    static ProbeSpec coherent(double nbar) {
        if (!(nbar >= 0.0)) throw std::invalid_argument("coherent probe: nbar must be non-negative");
        return {Kind::Coherent, nbar};
    }
    static ProbeSpec fock(int n) {
        if (n < 1) throw std::invalid_argument("Fock probe: n must be at least 1");
        return {Kind::Fock, static_cast<double>(n)};
    }

    bool is_fock() const { return kind == Kind::Fock; }
    int photons() const { return static_cast<int>(std::lround(intensity)); }
    double nbar() const { return intensity; }
    std::string name() const { return is_fock() ? "fock" : "coherent"; }
};

// ---------------------------------------------------------------------------------------------
// coherent probe

/// I(S,F) = h2(|D_tot|) + h2(|D_F|) - h2(|D_tot| / |D_F|), from log-moduli.
inline double coherent_mutual_info_log(double log_dF, double log_dtot) {
    log_dF = std::min(log_dF, 0.0);
    log_dtot = std::min(log_dtot, 0.0);
    const double ratio = std::min(log_dtot - log_dF, 0.0);
    return binary_entropy_log(log_dtot) + binary_entropy_log(log_dF) - binary_entropy_log(ratio);
}

inline double coherent_mutual_info(double abs_dF, double abs_dtot) {
    return coherent_mutual_info_log(std::log(std::clamp(abs_dF, 1e-300, 1.0)),
                                    std::log(std::clamp(abs_dtot, 1e-300, 1.0)));
}

inline double coherent_mutual_info(const FragmentOverlap& o, double nbar) {
    return coherent_mutual_info_log(o.coherent(nbar).log_abs, o.coherent_tot(nbar).log_abs);
}

// ---------------------------------------------------------------------------------------------
// Fock probe

namespace detail {

inline double log_choose(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

/// C(n,k) p^k pc^(n-k) with 0^0 = 1; pc is the complement probability supplied separately.
inline double binomial_pmf(int n, int k, double p, double pc) {
    if (p <= 0.0) return k == 0 ? (pc > 0.0 ? std::pow(pc, n) : (n == 0 ? 1.0 : 0.0)) : 0.0;
    if (pc <= 0.0) return k == n ? std::pow(p, n) : 0.0;
    return std::exp(log_choose(n, k) + k * std::log(p) + (n - k) * std::log(pc));
}

/// |z|^k with 0^0 = 1.
inline double ipow(double x, int k) { return k == 0 ? 1.0 : std::pow(x, k); }

/// z^k for complex z, with 0^0 = 1.
inline cplx cpow(cplx z, int k) {
    if (k == 0) return {1.0, 0.0};
    const double m = std::abs(z);
    if (m == 0.0) return {0.0, 0.0};
    return std::polar(std::pow(m, k), k * std::arg(z));
}

inline double gap_from_det(double four_det) { return std::sqrt(std::clamp(1.0 - four_det, 0.0, 1.0)); }

}  // namespace detail

/// Photon-counting statistics of fragment F for an n-photon probe.
struct FockPhotonStats {
    int n{1};
    std::vector<double> pk;       // p_F(k), k = 0..n
    std::vector<double> b0, b1;   // C(n,k) p_s^k (1 - p_s)^(n-k)
    std::vector<double> ps0, ps1; // p_F(s|k)
    std::vector<double> dk;       // D_F(k)
    std::vector<double> dkc;      // D_Fc(n-k)
    double g_abs{0.0};
    double gc_abs{0.0};
};

inline FockPhotonStats fock_photon_stats(const FragmentOverlap& o, int n) {
    if (n < 1) throw std::invalid_argument("fock_photon_stats: n must be at least 1");
    FockPhotonStats st;
    st.n = n;
    st.g_abs = std::abs(o.g());
    st.gc_abs = std::abs(o.gc());
    const auto m = static_cast<std::size_t>(n + 1);
    st.pk.resize(m);
    st.b0.resize(m);
    st.b1.resize(m);
    st.ps0.resize(m);
    st.ps1.resize(m);
    st.dk.resize(m);
    st.dkc.resize(m);
    for (int k = 0; k <= n; ++k) {
        const double b0 = detail::binomial_pmf(n, k, o.p0, o.p0c);
        const double b1 = detail::binomial_pmf(n, k, o.p1, o.p1c);
        const double pk = 0.5 * (b0 + b1);
        st.b0[k] = b0;
        st.b1[k] = b1;
        st.pk[k] = pk;
        st.ps0[k] = pk > 0.0 ? 0.5 * b0 / pk : 0.5;
        st.ps1[k] = pk > 0.0 ? 0.5 * b1 / pk : 0.5;
        const double mix = 4.0 * st.ps0[k] * st.ps1[k];
        st.dk[k] = detail::gap_from_det(mix * (1.0 - detail::ipow(st.g_abs * st.g_abs, k)));
        st.dkc[k] = detail::gap_from_det(mix * (1.0 - detail::ipow(st.gc_abs * st.gc_abs, n - k)));
    }
    return st;
}

/// |D_tot| = |<phi0|phi1>|^n for a Fock probe.
inline double fock_total_decoherence(const FragmentOverlap& o, int n) {
    return std::min(1.0, detail::ipow(std::abs(o.a_tot()), n));
}

/// I_{n,k}(S,F) for each k.
inline std::vector<double> fock_conditional_mi(const FockPhotonStats& st, double abs_dtot) {
    const double hs = binary_entropy(std::clamp(abs_dtot, 0.0, 1.0));
    std::vector<double> out(st.pk.size());
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = hs + binary_entropy(st.dk[k]) - binary_entropy(st.dkc[k]);
    return out;
}

inline double fock_mutual_info(const FockPhotonStats& st, double abs_dtot) {
    const auto ik = fock_conditional_mi(st, abs_dtot);
    double mi = 0.0;
    for (std::size_t k = 0; k < ik.size(); ++k) mi += st.pk[k] * ik[k];
    return mi;
}

inline double fock_mutual_info(const FragmentOverlap& o, int n) {
    return fock_mutual_info(fock_photon_stats(o, n), fock_total_decoherence(o, n));
}

// ---------------------------------------------------------------------------------------------
// probe-generic

/// S(S) in bits.
inline double system_entropy(const FragmentOverlap& o, const ProbeSpec& probe) {
    if (probe.is_fock()) return binary_entropy(fock_total_decoherence(o, probe.photons()));
    return binary_entropy_log(o.coherent_tot(probe.nbar()).log_abs);
}

inline double mutual_info(const FragmentOverlap& o, const ProbeSpec& probe) {
    if (probe.is_fock()) return fock_mutual_info(o, probe.photons());
    return coherent_mutual_info(o, probe.nbar());
}

// ---------------------------------------------------------------------------------------------
// Holevo information for a projective measurement of S along n(theta, phi)
//
// The measured basis is |+n> = cos(theta/2) e^{-i phi/2} |0> + sin(theta/2) e^{i phi/2} |1>;
// the -n outcome is obtained by theta -> theta + pi.

/// Coherent probe; angle-independent pieces are cached.
class CoherentHolevo {
public:
    CoherentHolevo(const FragmentOverlap& o, double nbar)
        : dF_(o.coherent(nbar)), dFc_(o.coherent_c(nbar)), dtot_(o.coherent_tot(nbar)) {
        const double mF = 1.0 - std::exp(2.0 * std::min(dF_.log_abs, 0.0));
        const double mFc = 1.0 - std::exp(2.0 * std::min(dFc_.log_abs, 0.0));
        mix_ = mF * mFc;
        sF_ = binary_entropy_log(dF_.log_abs);
    }

    double chi(double theta, double phi) const {
        const double st = std::sin(theta);
        const double re = (std::exp(cplx{0.0, -phi}) * dtot_.value()).real();
        double cond = 0.0;
        for (int sign : {+1, -1}) {
            const double twice_p = 1.0 + sign * st * re;
            const double p = 0.5 * twice_p;
            if (!(p > 0.0)) continue;
            const double r = st / twice_p;
            cond += p * binary_entropy(detail::gap_from_det(r * r * mix_));
        }
        return sF_ - cond;
    }

    double entropy_F() const { return sF_; }

private:
    Decoherence dF_, dFc_, dtot_;
    double mix_{0.0};
    double sF_{0.0};
};

/// Fock probe; the per-k terms that do not depend on the angles are cached.
class FockHolevo {
public:
    FockHolevo(const FragmentOverlap& o, int n) : n_(n), st_(fock_photon_stats(o, n)) {
        dtot_ = detail::cpow(std::conj(o.a_tot()), n);
        const auto m = static_cast<std::size_t>(n + 1);
        cross_.resize(m);
        purity_.resize(m);
        const double g2 = st_.g_abs * st_.g_abs;
        const double gc2 = st_.gc_abs * st_.gc_abs;
        for (int k = 0; k <= n; ++k) {
            // C(n,k) a_F^k a_Fc^(n-k), built in log-space
            const cplx ak = detail::cpow(o.a, k);
            const cplx akc = detail::cpow(o.ac, n - k);
            cross_[k] = std::exp(detail::log_choose(n, k)) * ak * akc;
            purity_[k] = (1.0 - detail::ipow(g2, k)) * (1.0 - detail::ipow(gc2, n - k));
        }
        sF_ = shannon_entropy(st_.pk);
        for (int k = 0; k <= n; ++k) sF_ += st_.pk[k] * binary_entropy(st_.dk[k]);
    }

    double chi(double theta, double phi) const {
        double cond = 0.0;
        for (int sign : {+1, -1}) {
            const auto [p, s] = branch(sign > 0 ? theta : theta + kPi, phi);
            cond += p * s;
        }
        return sF_ - cond;
    }

    /// (p(+n), S[rho_F(+n)]) for the given angles.
    std::pair<double, double> branch(double theta, double phi) const {
        const double st = std::sin(theta);
        const double c2 = std::cos(0.5 * theta) * std::cos(0.5 * theta);
        const double s2 = 1.0 - c2;
        const double twice_p = 1.0 + st * (std::exp(cplx{0.0, -phi}) * dtot_).real();
        const double p = 0.5 * twice_p;
        if (!(p > 1e-300)) return {0.0, 0.0};
        const cplx eip = std::exp(cplx{0.0, phi});
        std::vector<double> pk(static_cast<std::size_t>(n_ + 1));
        for (int k = 0; k <= n_; ++k) {
            const double num = c2 * st_.b0[k] + s2 * st_.b1[k] + st * (eip * cross_[k]).real();
            pk[k] = std::max(num, 0.0) / twice_p;
        }
        double s = shannon_entropy(pk);
        for (int k = 0; k <= n_; ++k) {
            if (!(pk[k] > 0.0)) continue;
            const double joint = p * pk[k];
            const double four_det = 0.25 * st * st * st_.b0[k] * st_.b1[k] / (joint * joint) * purity_[k];
            s += pk[k] * binary_entropy(detail::gap_from_det(four_det));
        }
        return {p, s};
    }

    double entropy_F() const { return sF_; }
    const FockPhotonStats& stats() const { return st_; }

private:
    int n_;
    FockPhotonStats st_;
    cplx dtot_{};
    std::vector<cplx> cross_;
    std::vector<double> purity_;
    double sF_{0.0};
};

inline double holevo_coherent(const FragmentOverlap& o, double nbar, double theta, double phi) {
    return CoherentHolevo(o, nbar).chi(theta, phi);
}

inline double holevo_fock(const FragmentOverlap& o, int n, double theta, double phi) {
    return FockHolevo(o, n).chi(theta, phi);
}

// ---------------------------------------------------------------------------------------------
// optimal Holevo information and discord

struct InfoBreakdown {
    double mi{0.0};
    double holevo{0.0};
    std::optional<double> cond_mi;  // I(S,F|N_F), Fock only
    double discord{0.0};
    double theta{0.0};
    double phi{0.0};
};

namespace detail {

/// Downhill simplex maximization in two variables.
template <class F>
std::pair<std::array<double, 2>, double> nelder_mead_max(F&& f, std::array<double, 2> x0, double step, double tol,
                                                        int max_iter = 400) {
    using P = std::array<double, 2>;
    std::array<P, 3> x{x0, P{x0[0] + step, x0[1]}, P{x0[0], x0[1] + step}};
    std::array<double, 3> v{f(x[0]), f(x[1]), f(x[2])};
    auto lerp = [](const P& a, const P& b, double t) { return P{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])}; };
    for (int it = 0; it < max_iter; ++it) {
        std::array<int, 3> o{0, 1, 2};
        std::sort(o.begin(), o.end(), [&](int a, int b) { return v[a] > v[b]; });
        const P& best = x[o[0]];
        const double size = std::max(std::hypot(x[o[1]][0] - best[0], x[o[1]][1] - best[1]),
                                     std::hypot(x[o[2]][0] - best[0], x[o[2]][1] - best[1]));
        if (size < tol) break;
        const P mid = lerp(x[o[0]], x[o[1]], 0.5);
        const P refl = lerp(x[o[2]], mid, 2.0);
        const double vr = f(refl);
        if (vr > v[o[0]]) {
            const P ext = lerp(x[o[2]], mid, 3.0);
            const double ve = f(ext);
            if (ve > vr) x[o[2]] = ext, v[o[2]] = ve;
            else x[o[2]] = refl, v[o[2]] = vr;
        } else if (vr > v[o[1]]) {
            x[o[2]] = refl, v[o[2]] = vr;
        } else {
            const P con = lerp(x[o[2]], mid, vr > v[o[2]] ? 1.5 : 0.5);
            const double vc = f(con);
            if (vc > std::max(vr, v[o[2]])) {
                x[o[2]] = con, v[o[2]] = vc;
            } else {
                for (int j : {o[1], o[2]}) {
                    x[j] = lerp(x[o[0]], x[j], 0.5);
                    v[j] = f(x[j]);
                }
            }
        }
    }
    const auto i = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
    return {x[i], v[i]};
}

}  // namespace detail

struct AngleSearch {
    int theta_points{33};
    int phi_points{65};
    double tol{1e-7};   // simplex size at which local refinement stops
    int starts{4};      // best grid points used as refinement seeds
};

/// Maximizes chi(theta, phi) on a grid, then refines the best grid points by a simplex search
/// in polar coordinates around the nearer pole. A refinement is kept only if it improves on the
/// grid optimum by more than rounding noise, so ties resolve to the first grid point.
template <class Chi>
InfoBreakdown maximize_angles(Chi&& chi, const AngleSearch& search = {}) {
    struct Sample {
        double v, theta, phi;
    };
    std::vector<Sample> grid;
    const int nt = search.theta_points, np = search.phi_points;
    for (int i = 0; i < nt; ++i) {
        const double th = kPi * i / (nt - 1);
        for (int j = 0; j < np; ++j) {
            const double ph = kTwoPi * j / (np - 1);
            grid.push_back({chi(th, ph), th, ph});
        }
    }
    std::stable_sort(grid.begin(), grid.end(), [](const Sample& a, const Sample& b) { return a.v > b.v; });
    InfoBreakdown out;
    double best = grid.front().v;
    out.theta = grid.front().theta;
    out.phi = grid.front().phi;
    const double step = kPi / (nt - 1);
    const int starts = std::min<int>(search.starts, static_cast<int>(grid.size()));
    for (int s = 0; s < starts; ++s) {
        const bool north = grid[s].theta <= 0.5 * kPi;
        auto angles = [north](const std::array<double, 2>& x) {
            const double r = std::min(std::hypot(x[0], x[1]), kPi);
            const double ph = std::fmod(std::atan2(x[1], x[0]) + kTwoPi, kTwoPi);
            return std::pair{north ? r : kPi - r, ph};
        };
        const double r0 = north ? grid[s].theta : kPi - grid[s].theta;
        const std::array<double, 2> x0{r0 * std::cos(grid[s].phi), r0 * std::sin(grid[s].phi)};
        auto [x, v] = detail::nelder_mead_max(
            [&](const std::array<double, 2>& y) {
                const auto [t, p] = angles(y);
                return chi(t, p);
            },
            x0, step, search.tol);
        if (v > best + 1e-14) {
            best = v;
            std::tie(out.theta, out.phi) = angles(x);
        }
    }
    out.holevo = std::max(best, 0.0);
    return out;
}

/// chi(S, N_F) and I(S,F|N_F) for a Fock probe; they sum to I(S,F).
struct NfDecomposition {
    double holevo_nf{0.0};
    double cond_mi{0.0};
};

inline NfDecomposition discord_decomposition(const FragmentOverlap& o, int n) {
    const auto st = fock_photon_stats(o, n);
    const double s_sys = binary_entropy(fock_total_decoherence(o, n));
    const double pp = std::sqrt(o.p0 * o.p1);
    NfDecomposition out;
    double avg_s = 0.0;
    double cond = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double pk = st.pk[k];
        if (!(pk > 0.0)) continue;
        const double d0 = 0.5 * st.b0[k], d1 = 0.5 * st.b1[k];
        const double c = 0.5 * std::exp(detail::log_choose(n, k));
        const double os = c * detail::ipow(std::abs(o.a), k) * detail::ipow(std::abs(o.ac), n - k);
        const double osf = c * detail::ipow(pp, k) * detail::ipow(std::abs(o.ac), n - k);
        auto block = [&](double off) {
            const double gap = std::sqrt((d0 - d1) * (d0 - d1) + 4.0 * off * off) / pk;
            return binary_entropy(std::min(gap, 1.0));
        };
        const double ss = block(os);
        const double ssf = block(osf);
        avg_s += pk * ss;
        cond += pk * (ss + binary_entropy(st.dk[k]) - ssf);
    }
    out.holevo_nf = s_sys - avg_s;
    out.cond_mi = cond;
    return out;
}

/// MI, optimal Holevo information, discord, and for Fock probes the N_F decomposition.
inline InfoBreakdown optimize_holevo(const FragmentOverlap& o, const ProbeSpec& probe, const AngleSearch& search = {}) {
    InfoBreakdown out;
    if (probe.is_fock()) {
        const FockHolevo h(o, probe.photons());
        out = maximize_angles([&](double t, double p) { return h.chi(t, p); }, search);
        out.cond_mi = discord_decomposition(o, probe.photons()).cond_mi;
    } else {
        const CoherentHolevo h(o, probe.nbar());
        out = maximize_angles([&](double t, double p) { return h.chi(t, p); }, search);
    }
    out.mi = mutual_info(o, probe);
    out.discord = out.mi - out.holevo;
    return out;
}

}  // namespace qdarwin::info
