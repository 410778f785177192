#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "qdarwin/cli/commands.hpp"

using namespace qdarwin;
using namespace qdarwin::cli;
namespace fs = std::filesystem;

namespace {

/// Fresh scratch directory in the system temp dir.
fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("qdarwin_test_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string config_error(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

std::vector<double> column(const LoadedTable& t, const std::string& name) {
    const auto it = std::find(t.columns.begin(), t.columns.end(), name);
    EXPECT_NE(it, t.columns.end()) << name;
    const auto j = static_cast<std::size_t>(it - t.columns.begin());
    std::vector<double> out;
    for (const auto& r : t.rows) out.push_back(std::stod(r.at(j)));
    return out;
}

SweepConfig one_cell(const std::string& probe, double n, double sT, double sdt) {
    SweepConfig c;
    c.probes = {probe};
    c.intensities = {n};
    c.sigma_T = {sT};
    c.sigma_dtau = {sdt};
    c.seeds = 8;
    c.holevo = aggregation::HolevoMode::None;
    return c;
}

}  // namespace

TEST(Config, DefaultsWhenEmpty) {
    const auto c = parse_config("{}");
    EXPECT_EQ(c.probes.size(), 2u);
    EXPECT_EQ(c.seeds, 64u);
    EXPECT_DOUBLE_EQ(c.plateau.delta, 0.1);
    EXPECT_DOUBLE_EQ(c.plateau.min_width_fraction, 0.25);
    EXPECT_DOUBLE_EQ(c.epsilon_for(0.1), 1e-6);
    EXPECT_DOUBLE_EQ(c.epsilon_for(5.0), 1e-2);
}

TEST(Config, ParsesEveryField) {
    const auto c = parse_config(R"({
        "probes": ["fock"], "intensities": [1, 3], "sigma_T": [0.5], "sigma_dtau": [0, 2],
        "omega0_over_sigma": 12, "strategies": ["smart"], "seeds": 5, "seed": 9,
        "grid_epsilon": 1e-3, "max_atoms": 300, "holevo": "all",
        "plateau": {"delta": 0.05, "min_width_fraction": 0.5}, "output": "res"})");
    EXPECT_EQ(c.probes, std::vector<std::string>{"fock"});
    EXPECT_EQ(c.intensities, (std::vector<double>{1, 3}));
    EXPECT_EQ(c.sigma_dtau, (std::vector<double>{0, 2}));
    EXPECT_EQ(c.strategies, std::vector<aggregation::Strategy>{aggregation::Strategy::Smart});
    EXPECT_EQ(c.seeds, 5u);
    EXPECT_EQ(c.seed, 9u);
    EXPECT_DOUBLE_EQ(c.epsilon_for(100.0), 1e-3);
    EXPECT_EQ(c.max_atoms, 300u);
    EXPECT_EQ(c.holevo, aggregation::HolevoMode::All);
    EXPECT_DOUBLE_EQ(c.plateau.min_width_fraction, 0.5);
    EXPECT_EQ(c.output, "res");
}

TEST(Config, DiagnosticsNameTheField) {
    EXPECT_EQ(config_error(R"({"sigma_T": [0.1, -1]})"), "config field 'sigma_T[1]': must be positive");
    EXPECT_EQ(config_error(R"({"sigma_T": []})"), "config field 'sigma_T': list must not be empty");
    EXPECT_EQ(config_error(R"({"probes": ["squeezed"]})"), "config field 'probes[0]': unknown probe 'squeezed'");
    EXPECT_EQ(config_error(R"({"probes": ["fock"], "intensities": [2.5]})"),
              "config field 'intensities[0]': Fock photon numbers must be integers");
    EXPECT_EQ(config_error(R"({"colour": 1})"), "config field 'colour': unknown key");
    EXPECT_EQ(config_error(R"({"plateau": {"delta": 0}})"), "config field 'plateau.delta': must be positive");
    EXPECT_EQ(config_error(R"({"seeds": 0})"), "config field 'seeds': must be at least 1");
    EXPECT_EQ(config_error(R"({"omega0_over_sigma": 3})"), "config field 'omega0_over_sigma': must be at least 5");
    EXPECT_EQ(config_error(R"({"strategies": ["greedy"]})").rfind("config field 'strategies[0]'", 0), 0u);
    EXPECT_EQ(config_error("[1]"), "config must be a JSON object");
    // coherent-only configurations may use fractional mean photon numbers
    EXPECT_EQ(config_error(R"({"probes": ["coherent"], "intensities": [2.5]})"), "");
}

TEST(Config, SyntaxErrorsReportLine) {
    const auto msg = config_error("{\n  \"seeds\": 4,\n  \"seed\": ,\n}");
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(Config, MissingFile) { EXPECT_THROW(load_config("/nonexistent/qdarwin.json"), ConfigError); }

TEST(Csv, EscapingAndRoundTrip) {
    EXPECT_EQ(csv_escape("plain"), "plain");
    EXPECT_EQ(csv_escape("a,b"), "\"a,b\"");
    EXPECT_EQ(csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
    CsvTable t({"name", "x", "n", "empty"});
    t.add_row({std::string("a,\"b\"\nc"), 0.1, 42LL, CsvTable::Cell{}});
    t.add_row({std::string("z"), -1e-300, -7LL, 2.5});
    const auto s = t.str();
    EXPECT_EQ(s.substr(0, 18), "name,x,n,empty\r\n\"a");
    const auto rows = parse_csv(s);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[1][0], "a,\"b\"\nc");
    EXPECT_EQ(rows[1][1], "0.10000000000000001");
    EXPECT_EQ(std::stod(rows[1][1]), 0.1);
    EXPECT_EQ(rows[1][3], "");
    EXPECT_EQ(std::stod(rows[2][1]), -1e-300);
    EXPECT_THROW(t.add_row({1LL}), std::invalid_argument);
    EXPECT_THROW(parse_csv("\"open"), IoError);
}

TEST(Csv, SeventeenDigitsRoundTrip) {
    for (double x : {1.0 / 3.0, std::exp(1.0), 1e-17, 123456789.123456789, -0.0})
        EXPECT_EQ(std::stod(format_double(x)), x);
    EXPECT_EQ(format_label(0.1), "0.1");
    EXPECT_EQ(format_label(100), "100");
}

TEST(Io, AtomicWriteReplacesWithoutLeftovers) {
    const auto dir = scratch("atomic");
    const auto p = dir / "sub" / "f.txt";
    write_atomic(p, "one");
    write_atomic(p, "two");
    EXPECT_EQ(read_file(p), "two");
    for (const auto& e : fs::directory_iterator(dir / "sub")) EXPECT_EQ(e.path().filename(), "f.txt");
    EXPECT_THROW(read_file(dir / "missing"), IoError);
}

TEST(Schema, SidecarGatesReaders) {
    const auto dir = scratch("schema");
    CsvTable t({"f", "mi_bits"});
    t.add_row({1LL, 0.5});
    write_table(dir / "c.csv", t, sidecar("curve", t.columns()));
    const auto back = read_table(dir / "c.csv");
    EXPECT_EQ(back.meta["schema_version"], kSchemaVersion);
    EXPECT_EQ(back.meta["units"], "bits");
    EXPECT_EQ(back.meta["rows"], 1);
    EXPECT_EQ(back.columns, t.columns());

    auto meta = back.meta;
    meta["schema_version"] = kSchemaVersion + 1;
    write_atomic(dir / "c.json", meta.dump());
    try {
        read_table(dir / "c.csv");
        FAIL() << "mismatched schema accepted";
    } catch (const IoError& e) {
        EXPECT_EQ(std::string(e.what()), "schema version mismatch: file has " + std::to_string(kSchemaVersion + 1) +
                                             ", reader expects " + std::to_string(kSchemaVersion));
    }
    meta.erase("schema_version");
    write_atomic(dir / "c.json", meta.dump());
    EXPECT_THROW(read_table(dir / "c.csv"), IoError);

    meta = back.meta;
    meta["columns"] = {"f", "chi_bits"};
    write_atomic(dir / "c.json", meta.dump());
    EXPECT_THROW(read_table(dir / "c.csv"), IoError);
}

TEST(Plateau, ConstantAndRamp) {
    const auto flat = detect_plateau(std::vector<double>(50, 1.0));
    EXPECT_TRUE(flat.present);
    EXPECT_EQ(flat.f1, 1u);
    EXPECT_EQ(flat.f2, 50u);
    std::vector<double> ramp(101);
    for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 2.0 * static_cast<double>(i) / 100.0;
    EXPECT_FALSE(detect_plateau(ramp).present);
}

TEST(Parallel, FirstFailureIsRethrown) {
    std::vector<std::function<void()>> jobs;
    std::atomic<int> ran{0};
    for (int i = 0; i < 10; ++i)
        jobs.push_back([i, &ran] {
            ++ran;
            if (i == 3 || i == 7) throw std::runtime_error("job " + std::to_string(i));
        });
    try {
        run_parallel(jobs, 4);
        FAIL();
    } catch (const std::runtime_error& e) {
        EXPECT_STREQ(e.what(), "job 3");
    }
    EXPECT_EQ(ran.load(), 10);
}

TEST(Commands, RerunsAreByteIdenticalAcrossWorkerCounts) {
    SweepConfig cfg;
    cfg.probes = {"fock", "coherent"};
    cfg.intensities = {2};
    cfg.sigma_T = {0.1, 5.0};
    cfg.sigma_dtau = {6.0};
    cfg.seeds = 6;
    cfg.seed = 11;
    const auto a = scratch("det_a"), b = scratch("det_b");
    const auto ra = cmd_sweep(cfg, {a, 1});
    const auto rb = cmd_sweep(cfg, {b, 4});
    ASSERT_EQ(ra.files.size(), rb.files.size());
    for (std::size_t i = 0; i < ra.files.size(); ++i) {
        EXPECT_EQ(ra.files[i].filename(), rb.files[i].filename());
        EXPECT_EQ(read_file(ra.files[i]), read_file(rb.files[i])) << ra.files[i];
    }
    cfg.seed = 12;
    const auto c = scratch("det_c");
    cmd_curve(cfg, {c, 2});
    const std::string f = "curve_fock_2_sT0.1_sdt6_random.csv";
    EXPECT_NE(read_file(a / f), read_file(c / f));
    EXPECT_EQ(read_file(a / "curve_fock_2_sT0.1_sdt6_smart.csv"), read_file(c / "curve_fock_2_sT0.1_sdt6_smart.csv"));
}

TEST(Commands, SweepOutputSchema) {
    auto cfg = one_cell("fock", 4, 5.0, 6.0);
    cfg.holevo = aggregation::HolevoMode::LogSpaced;
    const auto dir = scratch("schema_sweep");
    const auto rep = cmd_sweep(cfg, {dir, 2});
    for (const auto& f : rep.files) {
        EXPECT_TRUE(fs::exists(f)) << f;
        if (f.extension() == ".csv") {
            EXPECT_NO_THROW(read_table(f)) << f;
        }
    }
    const auto curve = read_table(dir / "curve_fock_4_sT5_sdt6_smart.csv");
    EXPECT_EQ(curve.columns, (std::vector<std::string>{"f", "k", "l", "mi_bits", "mi_over_SS", "chi_bits"}));
    EXPECT_EQ(curve.meta["kind"], "curve");
    EXPECT_EQ(curve.meta["strategy"], "smart");
    EXPECT_EQ(curve.meta["grid"]["atoms"], curve.rows.size());
    EXPECT_GT(curve.meta["system_entropy_bits"].get<double>(), 0.0);
    EXPECT_TRUE(curve.meta.contains("plateau"));
    std::size_t chi_rows = 0;
    for (const auto& r : curve.rows) chi_rows += !r.back().empty();
    EXPECT_EQ(chi_rows, aggregation::log_spaced_sizes(curve.rows.size()).size());
    const auto f = column(curve, "f");
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(f[i], static_cast<double>(i + 1));
    const auto ratio = column(curve, "mi_over_SS");
    EXPECT_NEAR(ratio.back(), 2.0, 1e-9);

    const auto mean = read_table(dir / "curve_fock_4_sT5_sdt6_random_mean.csv");
    EXPECT_EQ(mean.columns,
              (std::vector<std::string>{"f", "mean_mi_bits", "std_mi_bits", "mean_mi_over_SS", "std_mi_over_SS"}));
    EXPECT_EQ(mean.meta["seeds"], 8);

    const auto map = read_table(dir / "map_fock_4_sT5_sdt6.csv");
    EXPECT_EQ(map.columns, (std::vector<std::string>{"k", "l", "t_center", "omega_center", "mi_bits"}));
    EXPECT_EQ(map.rows.size(), curve.rows.size());

    const auto sum = read_table(dir / "sweep_summary.csv");
    EXPECT_EQ(sum.rows.size(), 3u);
    EXPECT_EQ(sum.meta["curve_files"].size(), 4u);
    EXPECT_EQ(sum.meta["map_files"].size(), 1u);
}

TEST(Commands, HolevoTable) {
    auto cfg = one_cell("fock", 2, 0.1, 6.0);
    cfg.strategies = {aggregation::Strategy::Naive};
    const auto dir = scratch("holevo");
    cmd_holevo(cfg, {dir, 1});
    const auto t = read_table(dir / "holevo_fock_2_sT0.1_sdt6_naive.csv");
    EXPECT_EQ(t.columns, (std::vector<std::string>{"f", "k", "l", "mi_bits", "chi_bits", "discord_bits",
                                                   "cond_mi_bits", "theta", "phi"}));
    EXPECT_FALSE(t.rows.empty());
    const auto mi = column(t, "mi_bits"), chi = column(t, "chi_bits"), disc = column(t, "discord_bits");
    for (std::size_t i = 0; i < mi.size(); ++i) {
        EXPECT_LE(chi[i], mi[i] + 1e-9);
        EXPECT_GE(chi[i], -1e-12);
        EXPECT_NEAR(chi[i] + disc[i], mi[i], 1e-9);
    }
}

TEST(Commands, FockSmartAndNaiveDifferAtShortPeriod) {
    auto cfg = one_cell("fock", 4, 0.1, 6.0);
    cfg.strategies = {aggregation::Strategy::Naive, aggregation::Strategy::Smart};
    const auto dir = scratch("gap");
    cmd_curve(cfg, {dir, 2});
    const auto naive = column(read_table(dir / "curve_fock_4_sT0.1_sdt6_naive.csv"), "mi_over_SS");
    const auto smart = column(read_table(dir / "curve_fock_4_sT0.1_sdt6_smart.csv"), "mi_over_SS");
    ASSERT_EQ(naive.size(), smart.size());
    double gap = 0.0;
    for (std::size_t i = 0; i < naive.size(); ++i) gap = std::max(gap, std::abs(smart[i] - naive[i]));
    EXPECT_GT(gap, 0.1);
}

TEST(Commands, CoherentEightPhotonsHasPlateau) {
    auto cfg = one_cell("coherent", 8, 0.1, 6.0);
    cfg.strategies = {aggregation::Strategy::Random};
    cfg.seeds = 64;
    const auto dir = scratch("plateau");
    cmd_curve(cfg, {dir, 2});
    const auto t = read_table(dir / "curve_coherent_8_sT0.1_sdt6_random_mean.csv");
    EXPECT_TRUE(t.meta["plateau"]["present"].get<bool>());
    const auto r = detect_plateau(column(t, "mean_mi_over_SS"));
    EXPECT_TRUE(r.present);
    EXPECT_EQ(t.meta["plateau"]["f1"], r.f1);
}

TEST(Commands, MapValuesAreNonNegative) {
    SweepConfig cfg;
    cfg.intensities = {1, 8};
    cfg.sigma_dtau = {1.0, 6.0};
    const auto dir = scratch("map");
    const auto rep = cmd_map(cfg, {dir, 4});
    std::size_t tables = 0;
    for (const auto& f : rep.files) {
        if (f.extension() != ".csv") continue;
        ++tables;
        for (double v : column(read_table(f), "mi_bits")) EXPECT_GE(v, 0.0) << f;
    }
    EXPECT_EQ(tables, 2u * 2u * 3u * 2u);
}

TEST(Commands, OracleCheckReportsAndReplays) {
    const auto dir = scratch("oracle");
    std::ostringstream log;
    std::vector<OracleCase> cases{{"fock-n1", info::ProbeSpec::fock(1), 4, 1e-8, 0.05}};
    const auto ok = cmd_oracle_check(cases, {dir, 1}, log);
    EXPECT_TRUE(ok.ok);
    EXPECT_EQ(log.str().rfind("PASS fock-n1", 0), 0u);
    auto doc = nlohmann::json::parse(read_file(dir / "oracle_check.json"));
    check_schema(doc);
    EXPECT_TRUE(doc["passed"].get<bool>());
    EXPECT_EQ(doc["cases"][0]["fragments"], 16);
    EXPECT_LT(doc["cases"][0]["max_abs_dev_mi"].get<double>(), 1e-8);

    // a zero tolerance cannot be met, so the worst fragment is serialized for replay
    cases[0].tolerance = 0.0;
    const auto bad = cmd_oracle_check(cases, {dir, 1}, log);
    EXPECT_FALSE(bad.ok);
    doc = nlohmann::json::parse(read_file(dir / "oracle_check.json"));
    EXPECT_FALSE(doc["passed"].get<bool>());
    const auto& replay = doc["cases"][0]["replay"];
    EXPECT_EQ(replay["case"], "fock-n1");
    EXPECT_TRUE(replay["fragment_atoms"].is_array());
    EXPECT_TRUE(replay.contains("mi_oracle"));
}
