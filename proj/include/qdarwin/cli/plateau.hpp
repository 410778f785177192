// plateau.hpp: Darwinian plateau detector on I/S(S) curves

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace qdarwin::cli {

struct PlateauParams {
    double delta{0.1};                // |I/S(S) - 1| <= delta on the plateau
    double min_width_fraction{0.25};  // plateau must span this fraction of the atom count
};

struct Plateau {
    bool present{false};
    std::size_t f1{0};  // 1-based fragment sizes, inclusive; zero when no point qualifies
    std::size_t f2{0};
    std::size_t width() const { return f2 >= f1 && f1 > 0 ? f2 - f1 + 1 : 0; }
};

/// ratio[f - 1] = I(S,F)/S(S) at fragment size f. Returns the widest qualifying window.
inline Plateau detect_plateau(const std::vector<double>& ratio, const PlateauParams& params = {}) {
    Plateau best;
    std::size_t run_start = 0;
    bool in_run = false;
    for (std::size_t i = 0; i <= ratio.size(); ++i) {
        const bool ok = i < ratio.size() && std::abs(ratio[i] - 1.0) <= params.delta;
        if (ok && !in_run) {
            run_start = i;
            in_run = true;
        } else if (!ok && in_run) {
            in_run = false;
            const std::size_t width = i - run_start;
            if (width > best.width()) {
                best.f1 = run_start + 1;
                best.f2 = i;
            }
        }
    }
    best.present = best.width() > 0 &&
                   static_cast<double>(best.width()) >= params.min_width_fraction * static_cast<double>(ratio.size());
    return best;
}

}  // namespace qdarwin::cli
