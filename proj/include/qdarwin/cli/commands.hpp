// commands.hpp: curve, map, holevo, oracle-check and sweep drivers
//
// Every (probe, intensity, sigma_T, sigma_dtau[, strategy]) cell is computed independently and
// written to its own CSV with a JSON sidecar. Cells run on up to `workers` threads; file contents
// do not depend on the worker count.

#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "qdarwin/aggregation.hpp"
#include "qdarwin/cli/config.hpp"
#include "qdarwin/cli/io.hpp"
#include "qdarwin/cli/oracle_check.hpp"
#include "qdarwin/cli/plateau.hpp"
#include "qdarwin/signal.hpp"
#include "qdarwin/wigner.hpp"

namespace qdarwin::cli {

namespace fs = std::filesystem;

struct RunOptions {
    fs::path out_dir{"out"};
    unsigned workers{1};
};

/// Files written by a command, in a deterministic order.
struct RunReport {
    std::vector<fs::path> files;
    nlohmann::json summary = nlohmann::json::array();
    bool ok{true};
};

/// Parameter cell without the strategy axis.
struct Cell {
    std::string probe_kind;
    double intensity{1.0};
    double sigma_T{1.0};
    double sigma_dtau{1.0};

    info::ProbeSpec probe() const { return SweepConfig::make_probe(probe_kind, intensity); }

    std::string stem() const {
        return probe_kind + "_" + format_label(intensity) + "_sT" + format_label(sigma_T) + "_sdt" +
               format_label(sigma_dtau);
    }
};

inline std::vector<Cell> cells_of(const SweepConfig& cfg) {
    std::vector<Cell> out;
    for (const auto& p : cfg.probes)
        for (double n : cfg.intensities)
            for (double sT : cfg.sigma_T)
                for (double sdt : cfg.sigma_dtau) out.push_back({p, n, sT, sdt});
    return out;
}

/// Branch coefficients of the Gaussian probe for one cell.
inline signal::BranchCoefficients lattice_for(const SweepConfig& cfg, const Cell& cell) {
    const auto wp = signal::gaussian_wavepacket(cfg.omega0_over_sigma, 1.0);
    const auto sc = signal::ScatteringModel::centered(cell.sigma_dtau);
    const auto grid = signal::build_grid(wp, sc, cell.sigma_T, cfg.epsilon_for(cell.sigma_T), cfg.max_atoms);
    return signal::branch_coefficients(grid, wp, sc);
}

inline nlohmann::json cell_meta(const SweepConfig& cfg, const Cell& cell, const signal::BranchCoefficients& c) {
    int kmin = 0, kmax = 0, lmin = 0, lmax = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const auto a = c.atom(i);
        if (i == 0 || a.k < kmin) kmin = a.k;
        if (i == 0 || a.k > kmax) kmax = a.k;
        if (i == 0 || a.l < lmin) lmin = a.l;
        if (i == 0 || a.l > lmax) lmax = a.l;
    }
    return {{"probe", cell.probe_kind},
            {"intensity", cell.intensity},
            {"sigma_T", cell.sigma_T},
            {"sigma_dtau", cell.sigma_dtau},
            {"omega0_over_sigma", cfg.omega0_over_sigma},
            {"grid",
             {{"period", c.period()},
              {"atoms", c.size()},
              {"k_range", {kmin, kmax}},
              {"l_range", {lmin, lmax}},
              {"epsilon", cfg.epsilon_for(cell.sigma_T)},
              {"energy_capture", {c.capture(0), c.capture(1)}}}}};
}

/// Runs jobs on up to `workers` threads; the first failure (by job index) is rethrown.
inline void run_parallel(const std::vector<std::function<void()>>& jobs, unsigned workers) {
    std::vector<std::exception_ptr> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            try {
                jobs[i]();
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(jobs.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

namespace detail {

inline nlohmann::json plateau_json(const Plateau& p, const PlateauParams& params) {
    return {{"present", p.present},
            {"f1", p.f1},
            {"f2", p.f2},
            {"delta", params.delta},
            {"min_width_fraction", params.min_width_fraction}};
}

struct CurveResult {
    std::vector<fs::path> files;
    nlohmann::json summary;
};

inline CurveResult curve_cell(const SweepConfig& cfg, const Cell& cell, aggregation::Strategy strategy,
                              const fs::path& out_dir) {
    using namespace aggregation;
    const auto c = lattice_for(cfg, cell);
    const auto probe = cell.probe();
    const auto ordering = make_ordering(strategy, c, probe, cfg.seed);
    const auto curve = build_curve(c, probe, ordering, cfg.holevo);

    std::vector<std::string> cols{"f", "k", "l", "mi_bits", "mi_over_SS"};
    if (cfg.holevo != HolevoMode::None) cols.push_back("chi_bits");
    CsvTable table(cols);
    for (const auto& p : curve.points) {
        std::vector<CsvTable::Cell> row{static_cast<long long>(p.f), static_cast<long long>(p.atom.k),
                                        static_cast<long long>(p.atom.l), p.mi_bits, p.mi_over_ss};
        if (cfg.holevo != HolevoMode::None) row.push_back(p.chi_bits ? CsvTable::Cell{*p.chi_bits} : CsvTable::Cell{});
        table.add_row(std::move(row));
    }

    const std::string stem = "curve_" + cell.stem() + "_" + to_string(strategy);
    CurveResult res;
    auto meta = sidecar("curve", cols);
    meta.update(cell_meta(cfg, cell, c));
    meta["strategy"] = to_string(strategy);
    meta["seed"] = cfg.seed;
    meta["system_entropy_bits"] = curve.system_entropy;

    std::vector<double> ratio = curve.mi_over_ss();
    if (strategy == Strategy::Random) {
        const auto avg = average_random_curves(c, probe, cfg.seed, cfg.seeds);
        ratio = avg.mean_ratio;
        const std::vector<std::string> acols{"f", "mean_mi_bits", "std_mi_bits", "mean_mi_over_SS", "std_mi_over_SS"};
        CsvTable mean(acols);
        for (std::size_t f = 0; f < c.size(); ++f)
            mean.add_row({static_cast<long long>(f + 1), avg.mean_mi[f], avg.std_mi[f], avg.mean_ratio[f],
                          avg.std_ratio[f]});
        auto ameta = sidecar("curve_mean", acols);
        ameta.update(cell_meta(cfg, cell, c));
        ameta["strategy"] = "random";
        ameta["base_seed"] = cfg.seed;
        ameta["seeds"] = cfg.seeds;
        ameta["system_entropy_bits"] = avg.system_entropy;
        const auto plateau = detect_plateau(ratio, cfg.plateau);
        ameta["plateau"] = plateau_json(plateau, cfg.plateau);
        const fs::path apath = out_dir / (stem + "_mean.csv");
        write_table(apath, mean, ameta);
        res.files.push_back(apath);
        res.files.push_back(fs::path(apath).replace_extension(".json"));
        meta["seeds"] = cfg.seeds;
    }
    const auto plateau = detect_plateau(ratio, cfg.plateau);
    meta["plateau"] = plateau_json(plateau, cfg.plateau);
    meta["plateau_source"] = strategy == Strategy::Random ? "mean over seeds" : "curve";
    const fs::path path = out_dir / (stem + ".csv");
    write_table(path, table, meta);
    res.files.insert(res.files.begin(), {path, fs::path(path).replace_extension(".json")});

    res.summary = {{"probe", cell.probe_kind},     {"intensity", cell.intensity}, {"sigma_T", cell.sigma_T},
                   {"sigma_dtau", cell.sigma_dtau}, {"strategy", to_string(strategy)},
                   {"atoms", c.size()},             {"system_entropy_bits", curve.system_entropy},
                   {"plateau", meta["plateau"]}};
    return res;
}

inline CurveResult map_cell(const SweepConfig& cfg, const Cell& cell, const fs::path& out_dir) {
    const auto c = lattice_for(cfg, cell);
    const auto m = wigner::atomic_mi_map(c, cell.probe());
    const std::vector<std::string> cols{"k", "l", "t_center", "omega_center", "mi_bits"};
    CsvTable table(cols);
    for (std::size_t i = 0; i < m.atoms.size(); ++i)
        table.add_row({static_cast<long long>(m.atoms[i].k), static_cast<long long>(m.atoms[i].l), m.t_center[i],
                       m.omega_center[i], m.mi_bits[i]});
    auto meta = sidecar("map", cols);
    meta.update(cell_meta(cfg, cell, c));
    meta["system_entropy_bits"] = m.system_entropy;
    const fs::path path = out_dir / ("map_" + cell.stem() + ".csv");
    write_table(path, table, meta);
    return {{path, fs::path(path).replace_extension(".json")},
            {{"probe", cell.probe_kind}, {"intensity", cell.intensity}, {"sigma_T", cell.sigma_T},
             {"sigma_dtau", cell.sigma_dtau}, {"atoms", c.size()}}};
}

inline CurveResult holevo_cell(const SweepConfig& cfg, const Cell& cell, aggregation::Strategy strategy,
                               const fs::path& out_dir) {
    using namespace aggregation;
    const auto c = lattice_for(cfg, cell);
    const auto probe = cell.probe();
    const auto ordering = make_ordering(strategy, c, probe, cfg.seed);
    std::vector<char> want(c.size() + 1, cfg.holevo == HolevoMode::All ? 1 : 0);
    if (cfg.holevo != HolevoMode::All)
        for (auto f : log_spaced_sizes(c.size())) want[f] = 1;

    const std::vector<std::string> cols{"f", "k", "l", "mi_bits", "chi_bits", "discord_bits", "cond_mi_bits",
                                        "theta", "phi"};
    CsvTable table(cols);
    fragments::FragmentAccumulator acc(c);
    for (std::size_t f = 1; f <= ordering.size(); ++f) {
        acc.add(ordering[f - 1]);
        if (!want[f]) continue;
        const auto r = info::optimize_holevo(acc.overlap(), probe);
        const auto a = c.atom(ordering[f - 1]);
        table.add_row({static_cast<long long>(f), static_cast<long long>(a.k), static_cast<long long>(a.l), r.mi,
                       r.holevo, r.discord, r.cond_mi ? CsvTable::Cell{*r.cond_mi} : CsvTable::Cell{}, r.theta,
                       r.phi});
    }
    auto meta = sidecar("holevo", cols);
    meta.update(cell_meta(cfg, cell, c));
    meta["strategy"] = to_string(strategy);
    meta["seed"] = cfg.seed;
    meta["system_entropy_bits"] = info::system_entropy(fragments::FragmentAccumulator(c).overlap(), probe);
    const fs::path path = out_dir / ("holevo_" + cell.stem() + "_" + to_string(strategy) + ".csv");
    write_table(path, table, meta);
    return {{path, fs::path(path).replace_extension(".json")},
            {{"probe", cell.probe_kind}, {"intensity", cell.intensity}, {"sigma_T", cell.sigma_T},
             {"sigma_dtau", cell.sigma_dtau}, {"strategy", to_string(strategy)}}};
}

/// Runs one job per item and gathers the results in item order.
inline RunReport gather(std::vector<std::function<CurveResult()>> work, unsigned workers) {
    std::vector<CurveResult> results(work.size());
    std::vector<std::function<void()>> jobs;
    for (std::size_t i = 0; i < work.size(); ++i) jobs.push_back([&, i] { results[i] = work[i](); });
    run_parallel(jobs, workers);
    RunReport rep;
    for (auto& r : results) {
        rep.files.insert(rep.files.end(), r.files.begin(), r.files.end());
        rep.summary.push_back(std::move(r.summary));
    }
    return rep;
}

}  // namespace detail

inline RunReport cmd_curve(const SweepConfig& cfg, const RunOptions& opt) {
    std::vector<std::function<detail::CurveResult()>> work;
    for (const auto& cell : cells_of(cfg))
        for (auto s : cfg.strategies) work.push_back([&, cell, s] { return detail::curve_cell(cfg, cell, s, opt.out_dir); });
    return detail::gather(std::move(work), opt.workers);
}

inline RunReport cmd_map(const SweepConfig& cfg, const RunOptions& opt) {
    std::vector<std::function<detail::CurveResult()>> work;
    for (const auto& cell : cells_of(cfg)) work.push_back([&, cell] { return detail::map_cell(cfg, cell, opt.out_dir); });
    return detail::gather(std::move(work), opt.workers);
}

inline RunReport cmd_holevo(const SweepConfig& cfg, const RunOptions& opt) {
    std::vector<std::function<detail::CurveResult()>> work;
    for (const auto& cell : cells_of(cfg))
        for (auto s : cfg.strategies)
            work.push_back([&, cell, s] { return detail::holevo_cell(cfg, cell, s, opt.out_dir); });
    return detail::gather(std::move(work), opt.workers);
}

/// Curves and maps for every cell, plus a summary table of plateau detections.
inline RunReport cmd_sweep(const SweepConfig& cfg, const RunOptions& opt) {
    auto curves = cmd_curve(cfg, opt);
    auto maps = cmd_map(cfg, opt);
    const std::vector<std::string> cols{"probe",   "intensity",       "sigma_T",    "sigma_dtau",
                                        "strategy", "atoms",          "system_entropy_bits",
                                        "plateau_present", "plateau_f1", "plateau_f2"};
    CsvTable table(cols);
    for (const auto& s : curves.summary)
        table.add_row({s["probe"].get<std::string>(), s["intensity"].get<double>(), s["sigma_T"].get<double>(),
                       s["sigma_dtau"].get<double>(), s["strategy"].get<std::string>(),
                       static_cast<long long>(s["atoms"].get<std::size_t>()), s["system_entropy_bits"].get<double>(),
                       static_cast<long long>(s["plateau"]["present"].get<bool>() ? 1 : 0),
                       static_cast<long long>(s["plateau"]["f1"].get<std::size_t>()),
                       static_cast<long long>(s["plateau"]["f2"].get<std::size_t>())});
    auto meta = sidecar("sweep", cols);
    meta["omega0_over_sigma"] = cfg.omega0_over_sigma;
    meta["seed"] = cfg.seed;
    meta["seeds"] = cfg.seeds;
    meta["curve_files"] = nlohmann::json::array();
    for (const auto& f : curves.files)
        if (f.extension() == ".csv") meta["curve_files"].push_back(f.filename().string());
    meta["map_files"] = nlohmann::json::array();
    for (const auto& f : maps.files)
        if (f.extension() == ".csv") meta["map_files"].push_back(f.filename().string());
    const fs::path path = opt.out_dir / "sweep_summary.csv";
    write_table(path, table, meta);

    RunReport rep;
    rep.files = curves.files;
    rep.files.insert(rep.files.end(), maps.files.begin(), maps.files.end());
    rep.files.push_back(path);
    rep.files.push_back(fs::path(path).replace_extension(".json"));
    rep.summary = curves.summary;
    return rep;
}

/// Oracle-equivalence suite; writes oracle_check.json and a one-line verdict per case.
inline RunReport cmd_oracle_check(const std::vector<OracleCase>& cases, const RunOptions& opt, std::ostream& log) {
    std::vector<OracleCaseResult> results(cases.size());
    std::vector<std::function<void()>> jobs;
    for (std::size_t i = 0; i < cases.size(); ++i) jobs.push_back([&, i] { results[i] = run_oracle_case(cases[i]); });
    run_parallel(jobs, opt.workers);
    RunReport rep;
    nlohmann::json doc = {{"schema_version", kSchemaVersion}, {"kind", "oracle_check"}};
    doc["cases"] = nlohmann::json::array();
    for (const auto& r : results) {
        log << (r.passed ? "PASS " : "FAIL ") << r.spec.name << "  max|dMI|=" << format_double(r.max_dev_mi)
            << "  max|dchi|=" << format_double(r.max_dev_chi) << "  tol=" << format_label(r.spec.tolerance) << "\n";
        doc["cases"].push_back(to_json(r));
        rep.summary.push_back(to_json(r));
        rep.ok = rep.ok && r.passed;
    }
    doc["passed"] = rep.ok;
    const fs::path path = opt.out_dir / "oracle_check.json";
    write_atomic(path, doc.dump(2) + "\n");
    rep.files.push_back(path);
    return rep;
}

}  // namespace qdarwin::cli
