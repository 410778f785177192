// config.hpp: sweep configuration read from a JSON file

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "qdarwin/aggregation.hpp"
#include "qdarwin/cli/plateau.hpp"
#include "qdarwin/info.hpp"

namespace qdarwin::cli {

/// Invalid configuration; the message names the offending field or position.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SweepConfig {
    std::vector<std::string> probes{"coherent", "fock"};
    std::vector<double> intensities{1, 2, 4, 8, 16};
    std::vector<double> sigma_T{0.1, 5.0, 100.0};
    std::vector<double> sigma_dtau{6.0};
    double omega0_over_sigma{10.0};
    std::vector<aggregation::Strategy> strategies{aggregation::Strategy::Random, aggregation::Strategy::Naive,
                                                  aggregation::Strategy::Smart};
    std::size_t seeds{64};
    std::uint64_t seed{0};
    double grid_epsilon{0.0};  // <= 0: 1e-6 for sigma_T < 1, else 1e-2
    std::size_t max_atoms{4096};
    aggregation::HolevoMode holevo{aggregation::HolevoMode::LogSpaced};
    PlateauParams plateau;
    std::string output{"out"};

    double epsilon_for(double sT) const {
        if (grid_epsilon > 0.0) return grid_epsilon;
        return sT < 1.0 ? 1e-6 : 1e-2;
    }

    /// Probe for a (kind, intensity) pair; Fock intensities must be integers.
    static info::ProbeSpec make_probe(const std::string& kind, double intensity) {
        if (kind == "coherent") return info::ProbeSpec::coherent(intensity);
        return info::ProbeSpec::fock(static_cast<int>(std::lround(intensity)));
    }
};

namespace detail {

inline std::string line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

[[noreturn]] inline void field_error(const std::string& field, const std::string& what) {
    throw ConfigError("config field '" + field + "': " + what);
}

inline double number(const nlohmann::json& v, const std::string& field) {
    if (!v.is_number()) field_error(field, "expected a number, got " + std::string(v.type_name()));
    const double x = v.get<double>();
    if (!std::isfinite(x)) field_error(field, "must be finite");
    return x;
}

inline std::vector<double> positive_list(const nlohmann::json& v, const std::string& field, bool allow_zero = false) {
    if (!v.is_array()) field_error(field, "expected a list");
    if (v.empty()) field_error(field, "list must not be empty");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string f = field + "[" + std::to_string(i) + "]";
        const double x = number(v[i], f);
        if (allow_zero ? x < 0.0 : x <= 0.0) field_error(f, allow_zero ? "must be non-negative" : "must be positive");
        out.push_back(x);
    }
    return out;
}

inline std::size_t count(const nlohmann::json& v, const std::string& field, std::size_t min) {
    if (!v.is_number_integer() && !v.is_number_unsigned()) field_error(field, "expected an integer");
    const auto x = v.get<long long>();
    if (x < static_cast<long long>(min)) field_error(field, "must be at least " + std::to_string(min));
    return static_cast<std::size_t>(x);
}

}  // namespace detail

/// Parses and validates a configuration document. Unknown keys are rejected.
inline SweepConfig parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config is not valid JSON at " + detail::line_col(text, e.byte > 0 ? e.byte - 1 : 0) +
                          ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    SweepConfig c;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        const auto& v = it.value();
        if (key == "probes") {
            if (!v.is_array() || v.empty()) detail::field_error(key, "expected a non-empty list");
            c.probes.clear();
            for (std::size_t i = 0; i < v.size(); ++i) {
                const std::string f = key + "[" + std::to_string(i) + "]";
                if (!v[i].is_string()) detail::field_error(f, "expected a string");
                const auto s = v[i].get<std::string>();
                if (s != "coherent" && s != "fock") detail::field_error(f, "unknown probe '" + s + "'");
                c.probes.push_back(s);
            }
        } else if (key == "intensities") {
            c.intensities = detail::positive_list(v, key);
        } else if (key == "sigma_T") {
            c.sigma_T = detail::positive_list(v, key);
        } else if (key == "sigma_dtau") {
            c.sigma_dtau = detail::positive_list(v, key, true);
        } else if (key == "omega0_over_sigma") {
            c.omega0_over_sigma = detail::number(v, key);
            if (c.omega0_over_sigma < 5.0) detail::field_error(key, "must be at least 5");
        } else if (key == "strategies") {
            if (!v.is_array() || v.empty()) detail::field_error(key, "expected a non-empty list");
            c.strategies.clear();
            for (std::size_t i = 0; i < v.size(); ++i) {
                const std::string f = key + "[" + std::to_string(i) + "]";
                if (!v[i].is_string()) detail::field_error(f, "expected a string");
                try {
                    c.strategies.push_back(aggregation::strategy_from_string(v[i].get<std::string>()));
                } catch (const std::invalid_argument& e) {
                    detail::field_error(f, e.what());
                }
            }
        } else if (key == "seeds") {
            c.seeds = detail::count(v, key, 1);
        } else if (key == "seed") {
            if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
                detail::field_error(key, "expected a non-negative integer");
            c.seed = v.get<std::uint64_t>();
        } else if (key == "grid_epsilon") {
            if (v.is_null()) continue;
            c.grid_epsilon = detail::number(v, key);
            if (!(c.grid_epsilon > 0.0 && c.grid_epsilon < 1.0)) detail::field_error(key, "must lie in (0, 1)");
        } else if (key == "max_atoms") {
            c.max_atoms = detail::count(v, key, 1);
        } else if (key == "holevo") {
            if (!v.is_string()) detail::field_error(key, "expected \"none\", \"log\" or \"all\"");
            const auto s = v.get<std::string>();
            if (s == "none") c.holevo = aggregation::HolevoMode::None;
            else if (s == "log") c.holevo = aggregation::HolevoMode::LogSpaced;
            else if (s == "all") c.holevo = aggregation::HolevoMode::All;
            else detail::field_error(key, "unknown mode '" + s + "'");
        } else if (key == "plateau") {
            if (!v.is_object()) detail::field_error(key, "expected an object");
            for (auto p = v.begin(); p != v.end(); ++p) {
                const std::string f = key + "." + p.key();
                if (p.key() == "delta") {
                    c.plateau.delta = detail::number(p.value(), f);
                    if (c.plateau.delta <= 0.0) detail::field_error(f, "must be positive");
                } else if (p.key() == "min_width_fraction") {
                    c.plateau.min_width_fraction = detail::number(p.value(), f);
                    if (!(c.plateau.min_width_fraction > 0.0 && c.plateau.min_width_fraction <= 1.0))
                        detail::field_error(f, "must lie in (0, 1]");
                } else {
                    detail::field_error(f, "unknown key");
                }
            }
        } else if (key == "output") {
            if (!v.is_string() || v.get<std::string>().empty()) detail::field_error(key, "expected a directory name");
            c.output = v.get<std::string>();
        } else {
            detail::field_error(key, "unknown key");
        }
    }
    const bool has_fock = std::find(c.probes.begin(), c.probes.end(), "fock") != c.probes.end();
    if (has_fock)
        for (std::size_t i = 0; i < c.intensities.size(); ++i)
            if (std::abs(c.intensities[i] - std::round(c.intensities[i])) > 1e-12)
                detail::field_error("intensities[" + std::to_string(i) + "]",
                                    "Fock photon numbers must be integers");
    return c;
}

inline SweepConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace qdarwin::cli
