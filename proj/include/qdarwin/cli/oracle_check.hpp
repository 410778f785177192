// oracle_check.hpp: closed forms against the brute-force oracle on reduced lattices

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"

#include "qdarwin/fragments.hpp"
#include "qdarwin/info.hpp"
#include "qdarwin/oracle.hpp"
#include "qdarwin/signal.hpp"

namespace qdarwin::cli {

struct OracleCase {
    std::string name;
    info::ProbeSpec probe;
    std::size_t modes{0};
    double tolerance{0.0};
    double max_residual{1e-4};
};

struct OracleCaseResult {
    OracleCase spec;
    double capture0{0.0}, capture1{0.0};
    std::size_t dimension{0};
    std::size_t fragments{0};
    double max_dev_mi{0.0};
    double max_dev_chi{0.0};
    bool passed{false};
    nlohmann::json worst;  // replayable description of the largest deviation
};

struct OracleSuiteOptions {
    double omega0{3.0 * kPi};
    double tau0{0.0}, tau1{1.0};
    double period{1.0};
    double grid_epsilon{1e-4};
    int angle_points{5};
};

/// Single-photon, two-photon and coherent cases with the acceptance tolerances.
inline std::vector<OracleCase> default_oracle_cases() {
    return {
        {"fock-n1", info::ProbeSpec::fock(1), 6, 1e-8, 1e-4},
        {"fock-n2", info::ProbeSpec::fock(2), 6, 1e-4, 1e-4},
        {"coherent-q0.5", info::ProbeSpec::coherent(0.25), 4, 1e-6, 0.05},
        {"coherent-q1", info::ProbeSpec::coherent(1.0), 4, 1e-6, 0.05},
        {"coherent-q1.5", info::ProbeSpec::coherent(2.25), 4, 1e-6, 0.05},
    };
}

inline OracleCaseResult run_oracle_case(const OracleCase& oc, const OracleSuiteOptions& opt = {}) {
    const auto wp = signal::gaussian_wavepacket(opt.omega0, 1.0);
    const signal::ScatteringModel sc(opt.tau0, opt.tau1);
    const auto grid = signal::build_grid(wp, sc, opt.period, opt.grid_epsilon, 1u << 16);
    const auto full = signal::branch_coefficients(grid, wp, sc);
    const auto c = full.restrict_to(signal::heaviest_atoms(full, oc.modes));

    OracleCaseResult r;
    r.spec = oc;
    r.capture0 = c.capture(0);
    r.capture1 = c.capture(1);
    const auto st = oc.probe.is_fock() ? oracle::build_fock_state(c, oc.probe.photons(), oc.max_residual)
                                       : oracle::build_coherent_state(c, std::sqrt(oc.probe.nbar()), 1e-8,
                                                                      oc.max_residual);
    r.dimension = st.basis.size();
    double worst = -1.0;
    for (const auto& mask : oracle::all_fragments(c.size())) {
        fragments::FragmentAccumulator acc(c);
        for (std::size_t j = 0; j < mask.size(); ++j)
            if (mask[j]) acc.add(j);
        const auto o = acc.overlap();
        const auto part = oracle::partition(st, mask);
        const double mi_exact = oracle::oracle_info(part).mi;
        const double mi_closed = info::mutual_info(o, oc.probe);
        const double dev = std::abs(mi_exact - mi_closed);
        r.max_dev_mi = std::max(r.max_dev_mi, dev);
        double chi_dev = 0.0;
        const int na = opt.angle_points;
        for (int i = 0; i < na; ++i)
            for (int k = 0; k < na; ++k) {
                const double th = kPi * i / (na - 1), ph = kTwoPi * k / na + 0.3;
                const double closed = oc.probe.is_fock() ? info::holevo_fock(o, oc.probe.photons(), th, ph)
                                                         : info::holevo_coherent(o, oc.probe.nbar(), th, ph);
                chi_dev = std::max(chi_dev, std::abs(closed - oracle::oracle_holevo(part, th, ph)));
            }
        r.max_dev_chi = std::max(r.max_dev_chi, chi_dev);
        ++r.fragments;
        if (std::max(dev, chi_dev) > worst) {
            worst = std::max(dev, chi_dev);
            nlohmann::json atoms = nlohmann::json::array();
            for (std::size_t j = 0; j < mask.size(); ++j)
                if (mask[j]) atoms.push_back({c.atom(j).k, c.atom(j).l});
            r.worst = {{"case", oc.name},
                       {"probe", oc.probe.name()},
                       {"intensity", oc.probe.intensity},
                       {"fragment_atoms", atoms},
                       {"mi_closed_form", mi_closed},
                       {"mi_oracle", mi_exact},
                       {"max_chi_deviation", chi_dev}};
        }
    }
    r.passed = r.max_dev_mi < oc.tolerance && r.max_dev_chi < oc.tolerance;
    return r;
}

inline nlohmann::json to_json(const OracleCaseResult& r) {
    nlohmann::json j = {{"case", r.spec.name},
                        {"probe", r.spec.probe.name()},
                        {"intensity", r.spec.probe.intensity},
                        {"modes", r.spec.modes},
                        {"tolerance", r.spec.tolerance},
                        {"capture", {r.capture0, r.capture1}},
                        {"dimension", r.dimension},
                        {"fragments", r.fragments},
                        {"max_abs_dev_mi", r.max_dev_mi},
                        {"max_abs_dev_chi", r.max_dev_chi},
                        {"passed", r.passed}};
    if (!r.passed) j["replay"] = r.worst;
    return j;
}

}  // namespace qdarwin::cli
