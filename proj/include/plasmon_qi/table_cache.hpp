// table_cache.hpp: text container for spectral tables
//
//   plasmon-qi-table 1
//   hash <16 hex digits>
//   canonical <one-line JSON of the table-defining config>
//   built_at <UTC timestamp>
//   count <N>  points <P>  tail <cubic|none>
//   max_error <hexfloat>  cap_hits <int>
//   data
//   <omega> <J_0> ... <J_{N-1}>          (hexfloat, one grid point per line)
//
// Hexfloats round-trip exactly, so a cached table reproduces downstream results
// bit for bit. A file whose hash or canonical text differs is refused.

#pragma once

#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "plasmon_qi/config.hpp"
#include "plasmon_qi/errors.hpp"
#include "plasmon_qi/spectral_matrix.hpp"

namespace plasmon_qi::cache {

inline constexpr const char* kMagic = "plasmon-qi-table";
inline constexpr int kFormatVersion = 1;

namespace detail {

inline std::string hexfloat(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

inline double parse_hexfloat(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw CacheMismatchError("cache: malformed number '" + s + "'");
    return v;
}

inline std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline std::string expect_field(std::istream& in, const std::string& name) {
    std::string line;
    if (!std::getline(in, line)) throw CacheMismatchError("cache: truncated file (expected " + name + ")");
    const auto sp = line.find(' ');
    if (line.substr(0, sp) != name) throw CacheMismatchError("cache: expected field '" + name + "'");
    return sp == std::string::npos ? std::string() : line.substr(sp + 1);
}

} // namespace detail

/// Cache directory: explicit option, else $PLASMON_QI_CACHE, else none.
inline std::string resolve_cache_dir(const std::string& option) {
    if (!option.empty()) return option;
    if (const char* env = std::getenv("PLASMON_QI_CACHE")) return env;
    return {};
}

inline std::filesystem::path table_path(const std::string& dir, const std::string& hash) {
    return std::filesystem::path(dir) / ("table-" + hash + ".txt");
}

inline void write_table(std::ostream& out, const spectral::SpectralTable& t, const std::string& hash,
                        const std::string& canonical) {
    out << kMagic << ' ' << kFormatVersion << '\n';
    out << "hash " << hash << '\n';
    out << "canonical " << canonical << '\n';
    out << "built_at " << (t.built_at.empty() ? detail::utc_now() : t.built_at) << '\n';
    out << "count " << t.count() << '\n';
    out << "points " << t.size() << '\n';
    out << "tail " << (t.tail == LowTail::cubic ? "cubic" : "none") << '\n';
    out << "max_error " << detail::hexfloat(t.max_error_estimate) << '\n';
    out << "cap_hits " << t.order_cap_hits << '\n';
    out << "data\n";
    for (std::size_t i = 0; i < t.size(); ++i) {
        out << detail::hexfloat(t.omega[i]);
        for (int m = 0; m < t.count(); ++m) out << ' ' << detail::hexfloat(t.j[m][i]);
        out << '\n';
    }
}

inline spectral::SpectralTable read_table(std::istream& in, const std::string& hash, const std::string& canonical) {
    std::string line;
    if (!std::getline(in, line) || line != std::string(kMagic) + ' ' + std::to_string(kFormatVersion)) {
        throw CacheMismatchError("cache: not a version-" + std::to_string(kFormatVersion) + " table file");
    }
    if (detail::expect_field(in, "hash") != hash) throw CacheMismatchError("cache: config hash mismatch");
    if (detail::expect_field(in, "canonical") != canonical) {
        throw CacheMismatchError("cache: stored configuration differs from the requested one");
    }
    spectral::SpectralTable t;
    t.built_at = detail::expect_field(in, "built_at");
    const int count = std::stoi(detail::expect_field(in, "count"));
    const long points = std::stol(detail::expect_field(in, "points"));
    const auto tail = detail::expect_field(in, "tail");
    t.tail = tail == "cubic" ? LowTail::cubic : LowTail::none;
    t.max_error_estimate = detail::parse_hexfloat(detail::expect_field(in, "max_error"));
    t.order_cap_hits = std::stol(detail::expect_field(in, "cap_hits"));
    detail::expect_field(in, "data");
    if (count < 1 || points < 2) throw CacheMismatchError("cache: bad table dimensions");
    t.omega.resize(points);
    t.j.assign(count, std::vector<double>(points));
    for (long i = 0; i < points; ++i) {
        if (!std::getline(in, line)) throw CacheMismatchError("cache: truncated data block");
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        t.omega[i] = detail::parse_hexfloat(tok);
        for (int m = 0; m < count; ++m) {
            if (!(ls >> tok)) throw CacheMismatchError("cache: short data row");
            t.j[m][i] = detail::parse_hexfloat(tok);
        }
    }
    t.config_hash = hash;
    try {
        t.finalize();
    } catch (const ValidationError& e) {
        throw CacheMismatchError(std::string("cache: invalid table: ") + e.what());
    }
    return t;
}

/// Load the table for `cfg` from `dir` if present, otherwise build and store it.
/// `from_cache` reports which path was taken.
inline spectral::SpectralTable obtain_table(const config::RunConfig& cfg, const std::string& dir, int threads,
                                            bool* from_cache = nullptr) {
    const std::string hash = config::table_hash(cfg);
    const std::string canonical = config::table_canonical(cfg).dump();
    if (!dir.empty()) {
        const auto path = table_path(dir, hash);
        if (std::filesystem::exists(path)) {
            std::ifstream in(path);
            auto t = read_table(in, hash, canonical);
            if (from_cache != nullptr) *from_cache = true;
            return t;
        }
    }
    auto t = spectral::build_table(cfg.system(), cfg.quadrature, cfg.grid, threads);
    t.config_hash = hash;
    t.quadrature = config::table_canonical(cfg)["quadrature"].dump();
    t.built_at = detail::utc_now();
    if (!dir.empty()) {
        std::filesystem::create_directories(dir);
        const auto path = table_path(dir, hash);
        const auto tmp = path.string() + ".tmp";
        {
            std::ofstream out(tmp);
            if (!out) throw ValidationError("cannot write cache file " + tmp);
            write_table(out, t, hash, canonical);
        }
        std::filesystem::rename(tmp, path);
    }
    if (from_cache != nullptr) *from_cache = false;
    return t;
}

} // namespace plasmon_qi::cache
