#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "qdarwin/fragments.hpp"
#include "qdarwin/signal.hpp"

namespace fixtures {

using qdarwin::AtomIndex;
using qdarwin::cplx;
using qdarwin::signal::BranchCoefficients;

/// Gaussian probe (omega0 = 10, sigma = 1), centered delays, default grid epsilon for the period.
inline BranchCoefficients lattice(double sigma_T, double sigma_dtau, double eps = -1.0) {
    const auto wp = qdarwin::signal::gaussian_wavepacket(10.0, 1.0);
    const auto sc = qdarwin::signal::ScatteringModel::centered(sigma_dtau);
    if (eps <= 0.0) eps = sigma_T < 1.0 ? 1e-6 : 1e-2;
    return qdarwin::signal::branch_coefficients(qdarwin::signal::build_grid(wp, sc, sigma_T, eps), wp, sc);
}

/// Hand-made table on atoms (0,0), (0,1), ...
inline BranchCoefficients table(std::vector<cplx> b0, std::vector<cplx> b1) {
    std::vector<AtomIndex> atoms;
    for (std::size_t i = 0; i < b0.size(); ++i) atoms.push_back({0, static_cast<int>(i)});
    return {1.0, std::move(atoms), std::move(b0), std::move(b1)};
}

/// Random subset of positions, each kept with probability q.
inline std::vector<std::size_t> random_subset(std::size_t n, double q, std::mt19937_64& rng) {
    std::bernoulli_distribution keep(q);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i)
        if (keep(rng)) out.push_back(i);
    return out;
}

inline qdarwin::fragments::FragmentOverlap overlap_of(const BranchCoefficients& c, const std::vector<std::size_t>& idx) {
    qdarwin::fragments::FragmentAccumulator acc(c);
    for (auto i : idx) acc.add(i);
    return acc.overlap();
}

}  // namespace fixtures
