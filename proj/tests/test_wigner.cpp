#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "qdarwin/quadrature.hpp"
#include "qdarwin/wigner.hpp"

using namespace qdarwin;
using namespace qdarwin::wigner;

namespace {

const auto kProbe = signal::gaussian_wavepacket(10.0, 1.0);

// int int f(t, omega) dt d omega / 2 pi over the probe support.
template <class F>
double tf_integral(F&& f, double t_lo, double t_hi) {
    auto inner = [&](double w) {
        return quad::integrate([&](double t) { return f(t, w); }, t_lo, t_hi, 1e-13).value;
    };
    return quad::integrate(inner, kProbe.support_lo(), kProbe.support_hi(), 1e-12).value / kTwoPi;
}

}  // namespace

TEST(Wigner, GaussianNormalizationAndPeak) {
    const double norm = tf_integral([](double t, double w) { return wigner_gaussian(kProbe, t, w); }, -12.0, 12.0);
    EXPECT_NEAR(norm, 1.0, 1e-9);
    EXPECT_NEAR(wigner_gaussian(kProbe, 0.0, 10.0), 2.0 * std::sqrt(kPi) / kProbe.norm(), 1e-14);
    EXPECT_NEAR(wigner_gaussian(kProbe, 0.0, 10.0), 2.0, 1e-9);
    EXPECT_LT(wigner_gaussian(kProbe, 3.0, 10.0), wigner_gaussian(kProbe, 0.0, 10.0));
}

TEST(Wigner, MoyalOverlapIsAutocorrelation) {
    for (double dtau : {0.5, 1.0, 2.0}) {
        const double v = tf_integral(
            [&](double t, double w) { return wigner_gaussian(kProbe, t, w) * wigner_gaussian(kProbe, t - dtau, w); },
            -12.0, 12.0 + dtau);
        EXPECT_NEAR(v, std::norm(signal::autocorrelation(kProbe, dtau)), 1e-9);
    }
}

TEST(Wigner, AtomWindowIntegratesToOne) {
    const double T = 0.7;
    const AtomIndex a{2, 1};
    auto inner = [&](double w) {
        return quad::integrate_pieces([&](double t) { return wigner_atom(T, a, t, w); },
                                      {a.l * T - 150.0, a.l * T, a.l * T + 150.0}, 1e-8, 20000)
            .value;
    };
    const double lo = kTwoPi * a.k / T, hi = kTwoPi * (a.k + 1) / T;
    const double total = quad::integrate(inner, lo, hi, 1e-8).value / kTwoPi;
    EXPECT_NEAR(total, 1.0, 5e-3);
    EXPECT_EQ(wigner_atom(T, a, 0.0, lo - 0.1), 0.0);
}

TEST(TimeFrequency, MatchesModeSums) {
    const auto sc = signal::ScatteringModel::centered(6.0);
    for (double T : {0.1, 1.0, 5.0, 100.0}) {
        const auto c = fixtures::lattice(T, 6.0);
        for (std::size_t i = 0; i < c.size(); i += std::max<std::size_t>(1, c.size() / 12)) {
            const auto a = c.atom(i);
            EXPECT_NEAR(coherent_atomic_deco_tf(kProbe, sc, T, a), -0.5 * std::norm(c.raw(0)[i] - c.raw(1)[i]), 1e-8)
                << "T=" << T << " " << to_string(a);
            const auto o = tf_overlap_stats(kProbe, sc, T, {a});
            EXPECT_NEAR(o.p0, std::norm(c.raw(0)[i]), 1e-8);
            EXPECT_NEAR(o.p1, std::norm(c.raw(1)[i]), 1e-8);
            EXPECT_LT(std::abs(o.a - std::conj(c.raw(1)[i]) * c.raw(0)[i]), 1e-8);
        }
    }
}

TEST(TimeFrequency, ToleranceTighteningIsStable) {
    const auto sc = signal::ScatteringModel::centered(6.0);
    const double T = 5.0;
    for (AtomIndex a : {AtomIndex{7, 0}, AtomIndex{8, -1}, AtomIndex{9, 1}}) {
        const double coarse = coherent_atomic_deco_tf(kProbe, sc, T, a, {1e-9, 4000});
        const double fine = coherent_atomic_deco_tf(kProbe, sc, T, a, {1e-13, 20000});
        EXPECT_LT(std::abs(coarse - fine), 1e-6);
    }
}

TEST(TimeFrequency, EqualDelaysDoNotDecohere) {
    const signal::ScatteringModel sc(0.4, 0.4);
    for (AtomIndex a : {AtomIndex{7, 0}, AtomIndex{8, 1}})
        EXPECT_NEAR(coherent_atomic_deco_tf(kProbe, sc, 5.0, a), 0.0, 1e-12);
}

TEST(Limits, TimeResolved) {
    const auto sc = signal::ScatteringModel::centered(6.0);
    const auto c = fixtures::lattice(0.1, 6.0);
    double peak = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const auto a = c.atom(i);
        const double exact = -0.5 * std::norm(c.raw(0)[i] - c.raw(1)[i]);
        if (a.k == 0) {
            EXPECT_NEAR(exact, time_resolved_log_deco(kProbe, sc, 0.1, a.l), 1e-10);
        }
        peak = std::min(peak, exact);
    }
    EXPECT_LT(peak, -1e-2);
}

TEST(Limits, FrequencyResolvedConvergesWithPeriod) {
    const auto sc = signal::ScatteringModel::centered(6.0);
    double previous = 1.0;
    for (double T : {100.0, 400.0}) {
        const auto c = fixtures::lattice(T, 6.0);
        double worst = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) {
            const auto a = c.atom(i);
            if (a.l != 0) continue;
            const double exact = -0.5 * std::norm(c.raw(0)[i] - c.raw(1)[i]);
            worst = std::max(worst, std::abs(exact - frequency_resolved_log_deco(kProbe, sc, T, a.k)));
            scale = std::max(scale, std::abs(exact));
        }
        EXPECT_LT(worst / scale, 0.01) << T;
        EXPECT_LT(worst / scale, previous);
        previous = worst / scale;
    }
}

TEST(AtomicMap, TwoSpikesWhenTimeResolved) {
    const auto c = fixtures::lattice(0.1, 6.0);
    const auto m = atomic_mi_map(c, info::ProbeSpec::coherent(1.0));
    ASSERT_EQ(m.mi_bits.size(), c.size());
    const auto best = std::max_element(m.mi_bits.begin(), m.mi_bits.end()) - m.mi_bits.begin();
    EXPECT_NEAR(std::abs(m.t_center[best]), 3.0, 0.15);
    for (std::size_t i = 0; i < c.size(); ++i)
        if (std::abs(m.t_center[i]) < 1.0) {
            EXPECT_LT(m.mi_bits[i], 0.05 * m.mi_bits[best]);
        }
    double left = 0.0, right = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (m.t_center[i] < 0) left += m.mi_bits[i];
        if (m.t_center[i] > 0) right += m.mi_bits[i];
    }
    EXPECT_NEAR(left, right, 1e-9 * (left + right));
}

TEST(AtomicMap, FrequencyResolvedZeros) {
    const auto c = fixtures::lattice(100.0, 6.0);
    const auto m = atomic_mi_map(c, info::ProbeSpec::coherent(1.0));
    const double peak = *std::max_element(m.mi_bits.begin(), m.mi_bits.end());
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double w = m.omega_center[i];
        const double dist = std::abs(std::remainder(w * 6.0, kTwoPi));
        if (dist < 0.05 && m.atoms[i].l == 0) {
            EXPECT_LT(m.mi_bits[i], 0.01 * peak) << w;
        }
    }
}

TEST(AtomicMap, FockInformationFallsWithPhotonNumber) {
    const auto c = fixtures::lattice(100.0, 6.0);
    double previous = std::numeric_limits<double>::infinity();
    for (int n : {1, 2, 4, 8}) {
        const auto m = atomic_mi_map(c, info::ProbeSpec::fock(n));
        double total = 0.0;
        for (double v : m.mi_bits) total += v;
        EXPECT_LT(total, previous);
        previous = total;
    }
}
