// aggregation.hpp: fragment orderings and mutual-information curves
//
// Three strategies grow a fragment one atom at a time: random permutations, the naive sort by
// single-atom mutual information, and the smart greedy choice of the atom that maximizes
// I(S, F u {X}). Atoms are referred to by their position in a BranchCoefficients table, which is
// lexicographic in (k, l).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdarwin/common.hpp"
#include "qdarwin/fragments.hpp"
#include "qdarwin/info.hpp"

namespace qdarwin::aggregation {

using fragments::FragmentAccumulator;
using info::ProbeSpec;
using signal::BranchCoefficients;

enum class Strategy { Random, Naive, Smart };

inline std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::Random: return "random";
        case Strategy::Naive: return "naive";
        case Strategy::Smart: return "smart";
    }
    return "?";
}

inline Strategy strategy_from_string(const std::string& s) {
    if (s == "random") return Strategy::Random;
    if (s == "naive") return Strategy::Naive;
    if (s == "smart") return Strategy::Smart;
    throw std::invalid_argument("unknown strategy '" + s + "'");
}

using Ordering = std::vector<std::size_t>;

/// Uniform random permutation of the lattice positions.
inline Ordering order_random(std::size_t atom_count, std::uint64_t seed) {
    Ordering o(atom_count);
    std::iota(o.begin(), o.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(o.begin(), o.end(), rng);
    return o;
}

/// I(S, E_{k,l}) for every atom.
inline std::vector<double> per_atom_mi(const BranchCoefficients& c, const ProbeSpec& probe) {
    FragmentAccumulator empty(c);
    std::vector<double> out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = info::mutual_info(empty.overlap_with(i), probe);
    return out;
}

inline constexpr double kTieTolerance = 1e-12;

/// Atoms sorted by decreasing single-atom MI; ties are shuffled with the seed.
inline Ordering order_naive(const BranchCoefficients& c, const ProbeSpec& probe, std::uint64_t seed) {
    const auto mi = per_atom_mi(c, probe);
    Ordering o(c.size());
    std::iota(o.begin(), o.end(), std::size_t{0});
    std::stable_sort(o.begin(), o.end(), [&](std::size_t a, std::size_t b) { return mi[a] > mi[b]; });
    std::mt19937_64 rng(seed);
    std::size_t start = 0;
    while (start < o.size()) {
        std::size_t end = start + 1;
        while (end < o.size() && mi[o[start]] - mi[o[end]] < kTieTolerance) ++end;
        if (end - start > 1) std::shuffle(o.begin() + static_cast<std::ptrdiff_t>(start),
                                          o.begin() + static_cast<std::ptrdiff_t>(end), rng);
        start = end;
    }
    return o;
}

/// Greedy ordering: each step adds the atom X maximizing I(S, F u {X}); ties go to the
/// lexicographically smallest (k, l).
inline Ordering order_smart(const BranchCoefficients& c, const ProbeSpec& probe) {
    const std::size_t n = c.size();
    FragmentAccumulator acc(c);
    Ordering o;
    o.reserve(n);
    std::vector<double> value(n);
    for (std::size_t step = 0; step < n; ++step) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            if (acc.contains(i)) continue;
            value[i] = info::mutual_info(acc.overlap_with(i), probe);
            best = std::max(best, value[i]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!acc.contains(i) && value[i] >= best - kTieTolerance) {
                acc.add(i);
                o.push_back(i);
                break;
            }
        }
    }
    return o;
}

inline Ordering make_ordering(Strategy s, const BranchCoefficients& c, const ProbeSpec& probe, std::uint64_t seed) {
    switch (s) {
        case Strategy::Random: return order_random(c.size(), seed);
        case Strategy::Naive: return order_naive(c, probe, seed);
        case Strategy::Smart: return order_smart(c, probe);
    }
    throw std::invalid_argument("make_ordering: bad strategy");
}

struct CurvePoint {
    std::size_t f{0};
    AtomIndex atom{};
    double mi_bits{0.0};
    double mi_over_ss{0.0};
    std::optional<double> chi_bits;
};

struct CurveMeta {
    double sigma_T{0.0};
    double sigma_dtau{0.0};
    double omega0_over_sigma{0.0};
    std::uint64_t seed{0};
    std::size_t atoms{0};
    int k_min{0}, k_max{0}, l_min{0}, l_max{0};
    double capture0{0.0}, capture1{0.0};
};

struct MICurve {
    ProbeSpec probe;
    Strategy strategy{Strategy::Random};
    double system_entropy{0.0};
    std::vector<CurvePoint> points;
    CurveMeta meta;

    std::vector<double> mi_over_ss() const {
        std::vector<double> out;
        out.reserve(points.size());
        for (const auto& p : points) out.push_back(p.mi_over_ss);
        return out;
    }
};

/// Which curve points carry an optimized Holevo value.
enum class HolevoMode { None, LogSpaced, All };

/// 1-based fragment sizes at which Holevo is evaluated in LogSpaced mode.
inline std::vector<std::size_t> log_spaced_sizes(std::size_t atom_count, std::size_t count = 16) {
    std::vector<std::size_t> out;
    if (atom_count == 0) return out;
    for (std::size_t i = 0; i < count; ++i) {
        const double x = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
        const auto f = static_cast<std::size_t>(std::lround(std::pow(static_cast<double>(atom_count), x)));
        out.push_back(std::clamp<std::size_t>(f, 1, atom_count));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// Grows the fragment along the ordering; points start at f = 1.
inline MICurve build_curve(const BranchCoefficients& c, const ProbeSpec& probe, const Ordering& ordering,
                           HolevoMode holevo = HolevoMode::None) {
    if (ordering.size() != c.size()) throw std::invalid_argument("build_curve: ordering must cover every atom");
    {
        std::vector<char> seen(c.size(), 0);
        for (auto i : ordering) {
            if (i >= c.size() || seen[i]) throw std::invalid_argument("build_curve: ordering is not a permutation");
            seen[i] = 1;
        }
    }
    FragmentAccumulator acc(c);
    MICurve curve;
    curve.probe = probe;
    curve.system_entropy = info::system_entropy(acc.overlap(), probe);
    std::vector<char> want_chi(c.size() + 1, holevo == HolevoMode::All ? 1 : 0);
    if (holevo == HolevoMode::LogSpaced)
        for (auto f : log_spaced_sizes(c.size())) want_chi[f] = 1;
    curve.points.reserve(c.size());
    for (std::size_t f = 1; f <= ordering.size(); ++f) {
        acc.add(ordering[f - 1]);
        const auto o = acc.overlap();
        CurvePoint p;
        p.f = f;
        p.atom = c.atom(ordering[f - 1]);
        p.mi_bits = info::mutual_info(o, probe);
        p.mi_over_ss = curve.system_entropy > 0.0 ? p.mi_bits / curve.system_entropy : 0.0;
        if (want_chi[f]) p.chi_bits = info::optimize_holevo(o, probe).holevo;
        curve.points.push_back(p);
    }
    return curve;
}

/// Mean and standard deviation over random orderings, per fragment size.
struct AveragedCurve {
    std::size_t seeds{0};
    std::vector<double> mean_mi, std_mi;
    std::vector<double> mean_ratio, std_ratio;
    double system_entropy{0.0};
};

inline AveragedCurve average_random_curves(const BranchCoefficients& c, const ProbeSpec& probe, std::uint64_t base_seed,
                                           std::size_t seeds, unsigned workers = 1) {
    if (seeds == 0) throw std::invalid_argument("average_random_curves: need at least one seed");
    std::vector<MICurve> curves(seeds);
    auto run = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t s = lo; s < hi; ++s) curves[s] = build_curve(c, probe, order_random(c.size(), base_seed + s));
    };
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(seeds)));
    std::vector<std::future<void>> jobs;
    const std::size_t chunk = (seeds + workers - 1) / workers;
    for (std::size_t lo = 0; lo < seeds; lo += chunk) jobs.push_back(std::async(std::launch::async, run, lo, std::min(seeds, lo + chunk)));
    for (auto& j : jobs) j.get();

    AveragedCurve out;
    out.seeds = seeds;
    out.system_entropy = curves.front().system_entropy;
    const std::size_t n = c.size();
    out.mean_mi.assign(n, 0.0);
    out.std_mi.assign(n, 0.0);
    out.mean_ratio.assign(n, 0.0);
    out.std_ratio.assign(n, 0.0);
    for (const auto& cv : curves)
        for (std::size_t f = 0; f < n; ++f) {
            out.mean_mi[f] += cv.points[f].mi_bits / static_cast<double>(seeds);
            out.mean_ratio[f] += cv.points[f].mi_over_ss / static_cast<double>(seeds);
        }
    if (seeds > 1) {
        for (const auto& cv : curves)
            for (std::size_t f = 0; f < n; ++f) {
                out.std_mi[f] += std::pow(cv.points[f].mi_bits - out.mean_mi[f], 2);
                out.std_ratio[f] += std::pow(cv.points[f].mi_over_ss - out.mean_ratio[f], 2);
            }
        for (std::size_t f = 0; f < n; ++f) {
            out.std_mi[f] = std::sqrt(out.std_mi[f] / static_cast<double>(seeds - 1));
            out.std_ratio[f] = std::sqrt(out.std_ratio[f] / static_cast<double>(seeds - 1));
        }
    }
    return out;
}

}  // namespace qdarwin::aggregation
