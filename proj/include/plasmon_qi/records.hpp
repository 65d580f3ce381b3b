// records.hpp: tabular command results and their CSV / JSON emitters
//
// Numbers are written in the shortest form that round-trips (std::to_chars), so
// the CSV and the JSON mirror carry identical values at full double precision.

#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "plasmon_qi/config.hpp"
#include "plasmon_qi/errors.hpp"

namespace plasmon_qi::records {

using json = nlohmann::json;

struct ResultRecord {
    std::string command;
    std::string config_hash;
    std::string generator = config::kGeneratorVersion;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    json metadata = json::object();

    void add_row(std::vector<double> row) {
        if (row.size() != columns.size()) throw NumericalError("record row width does not match the header");
        rows.push_back(std::move(row));
    }

    std::size_t column(const std::string& name) const {
        for (std::size_t k = 0; k < columns.size(); ++k)
            if (columns[k] == name) return k;
        throw ValidationError("record has no column " + name);
    }
};

inline std::string format_number(double v) {
    if (!std::isfinite(v)) throw NumericalError("non-finite value in result record");
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline void write_csv(std::ostream& out, const ResultRecord& r) {
    for (std::size_t k = 0; k < r.columns.size(); ++k) out << (k ? "," : "") << r.columns[k];
    out << '\n';
    for (const auto& row : r.rows) {
        for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format_number(row[k]);
        out << '\n';
    }
}

inline json to_json(const ResultRecord& r) {
    json j;
    j["command"] = r.command;
    j["config_hash"] = r.config_hash;
    j["generator"] = r.generator;
    j["columns"] = r.columns;
    json rows = json::array();
    for (const auto& row : r.rows) {
        json jr = json::array();
        for (double v : row) {
            format_number(v); // rejects non-finite values
            jr.push_back(v);
        }
        rows.push_back(std::move(jr));
    }
    j["rows"] = std::move(rows);
    j["metadata"] = r.metadata;
    return j;
}

/// Writes <dir>/<command>.csv and/or .json; returns the paths written.
inline std::vector<std::string> write_record(const ResultRecord& r, const std::string& dir,
                                             const config::OutputSpec& spec) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> written;
    const auto base = std::filesystem::path(dir) / r.command;
    if (spec.csv) {
        const auto p = base.string() + ".csv";
        std::ofstream out(p, std::ios::binary);
        if (!out) throw ValidationError("cannot write " + p);
        write_csv(out, r);
        written.push_back(p);
    }
    if (spec.json) {
        const auto p = base.string() + ".json";
        std::ofstream out(p, std::ios::binary);
        if (!out) throw ValidationError("cannot write " + p);
        out << to_json(r).dump(1) << '\n';
        written.push_back(p);
    }
    return written;
}

} // namespace plasmon_qi::records
