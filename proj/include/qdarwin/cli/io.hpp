// io.hpp: CSV tables and JSON sidecars
//
// CSV follows RFC 4180: CRLF record separators, a header row, and fields quoted only when they
// hold a comma, quote or line break. Floats are printed with 17 significant digits in the C locale.

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <variant>
#include <vector>

#include "json.hpp"

namespace qdarwin::cli {

inline constexpr int kSchemaVersion = 1;

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Compact label for file names: 0.1 -> "0.1", 100 -> "100".
inline std::string format_label(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

inline std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

/// In-memory CSV table with a fixed header.
class CsvTable {
public:
    using Cell = std::variant<std::monostate, long long, double, std::string>;

    explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    const std::vector<std::string>& columns() const { return columns_; }
    std::size_t rows() const { return rows_.size(); }

    void add_row(std::vector<Cell> row) {
        if (row.size() != columns_.size())
            throw std::invalid_argument("CsvTable: row has " + std::to_string(row.size()) + " cells, expected " +
                                        std::to_string(columns_.size()));
        rows_.push_back(std::move(row));
    }

    std::string str() const {
        std::string out;
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            if (i) out += ',';
            out += csv_escape(columns_[i]);
        }
        out += "\r\n";
        for (const auto& row : rows_) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) out += ',';
                out += render(row[i]);
            }
            out += "\r\n";
        }
        return out;
    }

private:
    static std::string render(const Cell& c) {
        if (std::holds_alternative<long long>(c)) return std::to_string(std::get<long long>(c));
        if (std::holds_alternative<double>(c)) return format_double(std::get<double>(c));
        if (std::holds_alternative<std::string>(c)) return csv_escape(std::get<std::string>(c));
        return {};
    }

    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
};

/// Parses RFC 4180 text into rows of fields.
inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false, any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += ch;
            }
            continue;
        }
        if (ch == '"') {
            quoted = true;
            any = true;
        } else if (ch == ',') {
            row.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (ch == '\r' || ch == '\n') {
            if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
            any = false;
        } else {
            field += ch;
            any = true;
        }
    }
    if (quoted) throw IoError("parse_csv: unterminated quoted field");
    if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Writes a file through a temporary sibling and a rename, so readers never see partial content.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw IoError("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw IoError("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
    }
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Sidecar header shared by every output kind.
inline nlohmann::json sidecar(const std::string& kind, const std::vector<std::string>& columns) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = kind;
    j["columns"] = columns;
    j["units"] = "bits";
    return j;
}

/// Throws unless a sidecar carries the supported schema version.
inline void check_schema(const nlohmann::json& j) {
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer())
        throw IoError("sidecar has no schema_version");
    const int v = j["schema_version"].get<int>();
    if (v != kSchemaVersion)
        throw IoError("schema version mismatch: file has " + std::to_string(v) + ", reader expects " +
                      std::to_string(kSchemaVersion));
}

inline void write_table(const std::filesystem::path& csv_path, const CsvTable& table, nlohmann::json meta) {
    write_atomic(csv_path, table.str());
    meta["csv"] = csv_path.filename().string();
    meta["rows"] = table.rows();
    std::filesystem::path json_path = csv_path;
    json_path.replace_extension(".json");
    write_atomic(json_path, meta.dump(2) + "\n");
}

/// A CSV read back together with its sidecar.
struct LoadedTable {
    nlohmann::json meta;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

/// Reads a table written by write_table; rejects a foreign schema version or a header that disagrees with the sidecar.
inline LoadedTable read_table(const std::filesystem::path& csv_path) {
    std::filesystem::path json_path = csv_path;
    json_path.replace_extension(".json");
    LoadedTable t;
    try {
        t.meta = nlohmann::json::parse(read_file(json_path));
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError("sidecar '" + json_path.string() + "' is not valid JSON: " + e.what());
    }
    check_schema(t.meta);
    auto rows = parse_csv(read_file(csv_path));
    if (rows.empty()) throw IoError("'" + csv_path.string() + "' has no header");
    t.columns = std::move(rows.front());
    rows.erase(rows.begin());
    if (t.meta.contains("columns") && t.meta["columns"] != nlohmann::json(t.columns))
        throw IoError("'" + csv_path.string() + "' header does not match its sidecar");
    t.rows = std::move(rows);
    return t;
}

}  // namespace qdarwin::cli
