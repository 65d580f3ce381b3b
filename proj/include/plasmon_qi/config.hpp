// config.hpp: JSON run configuration (schema, defaults, validation) and the
// stable hash that keys cached spectral tables
//
// Every object rejects keys it does not know. Lengths are either a number in nm or
// {"value": x, "relative_to_lambda0": true} meaning x * lambda_0 with
// lambda_0 = 2 pi hbar c / omega_0.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "plasmon_qi/errors.hpp"
#include "plasmon_qi/green_tensor.hpp"
#include "plasmon_qi/material_geometry.hpp"
#include "plasmon_qi/spectral_matrix.hpp"

namespace plasmon_qi::config {

using json = nlohmann::json;
using cplx = std::complex<double>;

inline constexpr const char* kGeneratorVersion = "plasmon-qi 1.0.0";

struct Length {
    double value = 0.0;
    bool relative_to_lambda0 = false;

    double resolve(double lambda_0) const { return relative_to_lambda0 ? value * lambda_0 : value; }
};

struct SolverSpec {
    double t_max = 200.0;     ///< hbar/eV
    double dt = 0.0;          ///< 0: omega_max * dt <= 0.1
    std::vector<cplx> initial; ///< empty: (1, 0, ..., 0)
    int output_every = 0;     ///< 0: about 1000 output rows
};

struct OutputSpec {
    bool csv = true;
    bool json = true;
};

struct SweepSpec {
    std::string parameter; ///< "r_a" or "d"; empty when no sweep is configured
    std::vector<double> values;
    bool relative_to_lambda0 = false;
    std::string command = "bound-states";
};

struct RunConfig {
    Metal metal{};
    Length radius{0.01, true};
    int count = 2;
    double omega_0 = 2.0;
    double gamma_0 = 1e-4;
    Length r_a{0.012, true};
    Length d{5.0, false};
    spectral::GridSpec grid{};
    green::QuadratureSpec quadrature{};
    SolverSpec solver{};
    OutputSpec outputs{};
    SweepSpec sweep{};

    double lambda_0() const { return units::wavelength(omega_0); }

    green::PhysicalSystem system() const {
        green::PhysicalSystem s;
        s.metal = metal;
        s.wire.radius = radius.resolve(lambda_0());
        s.emitters.count = count;
        s.emitters.omega_0 = omega_0;
        s.emitters.gamma_0 = gamma_0;
        s.emitters.r_a = r_a.resolve(lambda_0());
        s.emitters.d = d.resolve(lambda_0());
        return s;
    }

    std::vector<cplx> initial_amplitudes() const {
        if (!solver.initial.empty()) return solver.initial;
        std::vector<cplx> c(count, cplx(0.0, 0.0));
        c[0] = 1.0;
        return c;
    }

    void validate() const {
        if (!(omega_0 > 0.0)) throw ValidationError("emitters.omega_0 must be > 0");
        system().validate();
        grid.validate();
        quadrature.validate();
        if (!(solver.t_max > 0.0)) throw ValidationError("solver.t_max must be > 0");
        if (solver.dt < 0.0) throw ValidationError("solver.dt must be > 0");
        if (solver.dt > 0.0) {
            const double ratio = solver.t_max / solver.dt;
            if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
                throw ValidationError("solver.dt must divide solver.t_max");
            }
        }
        if (solver.output_every < 0) throw ValidationError("solver.output_every must be >= 0");
        if (!solver.initial.empty()) {
            if (static_cast<int>(solver.initial.size()) != count) {
                throw ValidationError("solver.initial must have emitters.count entries");
            }
            double n2 = 0.0;
            for (const auto& v : solver.initial) n2 += std::norm(v);
            if (n2 > 1.0 + 1e-12) throw ValidationError("solver.initial must satisfy sum |c|^2 <= 1");
        }
        if (!sweep.parameter.empty()) {
            if (sweep.parameter != "r_a" && sweep.parameter != "d") {
                throw ValidationError("sweep.parameter must be \"r_a\" or \"d\"");
            }
            if (sweep.values.empty()) throw ValidationError("sweep.values must not be empty");
            if (sweep.command == "sweep") throw ValidationError("sweep.command cannot be \"sweep\"");
        }
    }
};

namespace detail {

inline void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ValidationError(where + ": expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw ValidationError((where.empty() ? "" : where + ".") + it.key() + ": unknown key");
        }
    }
}

inline double number(const json& obj, const std::string& key, const std::string& where, double fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ValidationError(where + "." + key + ": expected a number");
    return v.get<double>();
}

inline int integer(const json& obj, const std::string& key, const std::string& where, int fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) throw ValidationError(where + "." + key + ": expected an integer");
    return v.get<int>();
}

inline std::string text(const json& obj, const std::string& key, const std::string& where, std::string fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_string()) throw ValidationError(where + "." + key + ": expected a string");
    return v.get<std::string>();
}

inline bool boolean(const json& obj, const std::string& key, const std::string& where, bool fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_boolean()) throw ValidationError(where + "." + key + ": expected true or false");
    return v.get<bool>();
}

inline Length length(const json& obj, const std::string& key, const std::string& where, Length fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    const std::string path = where + "." + key;
    if (v.is_number()) return Length{v.get<double>(), false};
    if (v.is_object()) {
        reject_unknown(v, path, {"value", "relative_to_lambda0"});
        if (!v.contains("value")) throw ValidationError(path + ".value: missing");
        return Length{number(v, "value", path, 0.0), boolean(v, "relative_to_lambda0", path, false)};
    }
    throw ValidationError(path + ": expected a number (nm) or {\"value\", \"relative_to_lambda0\"}");
}

inline cplx amplitude(const json& v, const std::string& path) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
        return {v[0].get<double>(), v[1].get<double>()};
    }
    throw ValidationError(path + ": expected a number or a [re, im] pair");
}

} // namespace detail

/// Parse and validate an already-decoded JSON document.
inline RunConfig parse_config(const json& root) {
    using namespace detail;
    RunConfig c;
    reject_unknown(root, "", {"metal", "geometry", "emitters", "grid", "quadrature", "solver", "outputs", "sweep"});

    if (root.contains("metal")) {
        const auto& m = root.at("metal");
        reject_unknown(m, "metal", {"model", "eps_inf", "omega_p", "gamma_p"});
        const auto model = text(m, "model", "metal", "drude");
        if (model == "drude") c.metal.model = MetalModel::drude;
        else if (model == "vacuum") c.metal.model = MetalModel::vacuum;
        else throw ValidationError("metal.model: expected \"drude\" or \"vacuum\"");
        c.metal.drude.eps_inf = number(m, "eps_inf", "metal", c.metal.drude.eps_inf);
        c.metal.drude.omega_p = number(m, "omega_p", "metal", c.metal.drude.omega_p);
        c.metal.drude.gamma_p = number(m, "gamma_p", "metal", c.metal.drude.gamma_p);
    }
    if (root.contains("geometry")) {
        const auto& g = root.at("geometry");
        reject_unknown(g, "geometry", {"radius"});
        c.radius = length(g, "radius", "geometry", c.radius);
    }
    if (root.contains("emitters")) {
        const auto& e = root.at("emitters");
        reject_unknown(e, "emitters", {"count", "omega_0", "gamma_0", "r_a", "d"});
        c.count = integer(e, "count", "emitters", c.count);
        c.omega_0 = number(e, "omega_0", "emitters", c.omega_0);
        c.gamma_0 = number(e, "gamma_0", "emitters", c.gamma_0);
        c.r_a = length(e, "r_a", "emitters", c.r_a);
        c.d = length(e, "d", "emitters", c.d);
    }
    if (root.contains("grid")) {
        const auto& g = root.at("grid");
        reject_unknown(g, "grid", {"points", "omega_min", "omega_max", "low_tail"});
        c.grid.points = integer(g, "points", "grid", c.grid.points);
        c.grid.omega_min = number(g, "omega_min", "grid", c.grid.omega_min);
        c.grid.omega_max = number(g, "omega_max", "grid", c.grid.omega_max);
        const auto tail = text(g, "low_tail", "grid", "cubic");
        if (tail == "cubic") c.grid.tail = LowTail::cubic;
        else if (tail == "none") c.grid.tail = LowTail::none;
        else throw ValidationError("grid.low_tail: expected \"cubic\" or \"none\"");
    }
    if (root.contains("quadrature")) {
        const auto& q = root.at("quadrature");
        reject_unknown(q, "quadrature", {"cutoff_factor", "tail_exponent", "abs_tol", "rel_tol", "max_subdivisions",
                                         "azimuthal_tol", "max_order", "extra_orders", "peak_scan_points"});
        auto& s = c.quadrature;
        s.cutoff_factor = number(q, "cutoff_factor", "quadrature", s.cutoff_factor);
        s.tail_exponent = number(q, "tail_exponent", "quadrature", s.tail_exponent);
        s.abs_tol = number(q, "abs_tol", "quadrature", s.abs_tol);
        s.rel_tol = number(q, "rel_tol", "quadrature", s.rel_tol);
        s.max_subdivisions = integer(q, "max_subdivisions", "quadrature", s.max_subdivisions);
        s.azimuthal_tol = number(q, "azimuthal_tol", "quadrature", s.azimuthal_tol);
        s.max_order = integer(q, "max_order", "quadrature", s.max_order);
        s.extra_orders = integer(q, "extra_orders", "quadrature", s.extra_orders);
        s.peak_scan_points = integer(q, "peak_scan_points", "quadrature", s.peak_scan_points);
    }
    if (root.contains("solver")) {
        const auto& s = root.at("solver");
        reject_unknown(s, "solver", {"t_max", "dt", "initial", "output_every"});
        c.solver.t_max = number(s, "t_max", "solver", c.solver.t_max);
        c.solver.dt = number(s, "dt", "solver", c.solver.dt);
        c.solver.output_every = integer(s, "output_every", "solver", c.solver.output_every);
        if (s.contains("initial")) {
            const auto& a = s.at("initial");
            if (!a.is_array()) throw ValidationError("solver.initial: expected an array");
            for (std::size_t k = 0; k < a.size(); ++k) {
                c.solver.initial.push_back(amplitude(a[k], "solver.initial[" + std::to_string(k) + "]"));
            }
        }
    }
    if (root.contains("outputs")) {
        const auto& o = root.at("outputs");
        reject_unknown(o, "outputs", {"csv", "json"});
        c.outputs.csv = boolean(o, "csv", "outputs", c.outputs.csv);
        c.outputs.json = boolean(o, "json", "outputs", c.outputs.json);
    }
    if (root.contains("sweep")) {
        const auto& s = root.at("sweep");
        reject_unknown(s, "sweep", {"parameter", "values", "relative_to_lambda0", "command"});
        c.sweep.parameter = text(s, "parameter", "sweep", "");
        c.sweep.relative_to_lambda0 = boolean(s, "relative_to_lambda0", "sweep", false);
        c.sweep.command = text(s, "command", "sweep", c.sweep.command);
        if (s.contains("values")) {
            const auto& v = s.at("values");
            if (!v.is_array()) throw ValidationError("sweep.values: expected an array");
            for (const auto& x : v) {
                if (!x.is_number()) throw ValidationError("sweep.values: expected numbers");
                c.sweep.values.push_back(x.get<double>());
            }
        }
    }
    c.validate();
    return c;
}

inline RunConfig parse_config_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        // report a line number alongside the byte offset
        std::size_t line = 1;
        for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i) line += text[i] == '\n';
        throw ValidationError("config parse error at line " + std::to_string(line) + ": " + e.what());
    }
    return parse_config(root);
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

/// Canonical form of everything that determines a spectral table, with lengths
/// resolved to nm so equivalent absolute and relative inputs hash alike.
inline json table_canonical(const RunConfig& c) {
    const auto s = c.system();
    json j;
    j["metal"] = {{"model", c.metal.model == MetalModel::drude ? "drude" : "vacuum"}};
    if (c.metal.model == MetalModel::drude) {
        j["metal"]["eps_inf"] = c.metal.drude.eps_inf;
        j["metal"]["omega_p"] = c.metal.drude.omega_p;
        j["metal"]["gamma_p"] = c.metal.drude.gamma_p;
    }
    j["geometry"] = {{"radius_nm", s.wire.radius}};
    j["emitters"] = {{"count", s.emitters.count},
                     {"omega_0", s.emitters.omega_0},
                     {"gamma_0", s.emitters.gamma_0},
                     {"r_a_nm", s.emitters.r_a},
                     {"d_nm", s.emitters.d}};
    j["grid"] = {{"points", c.grid.points},
                 {"omega_min", c.grid.omega_min},
                 {"omega_max", c.grid.omega_max},
                 {"low_tail", c.grid.tail == LowTail::cubic ? "cubic" : "none"}};
    const auto& q = c.quadrature;
    j["quadrature"] = {{"cutoff_factor", q.cutoff_factor}, {"tail_exponent", q.tail_exponent},
                       {"abs_tol", q.abs_tol},             {"rel_tol", q.rel_tol},
                       {"max_subdivisions", q.max_subdivisions}, {"azimuthal_tol", q.azimuthal_tol},
                       {"max_order", q.max_order},         {"extra_orders", q.extra_orders},
                       {"peak_scan_points", q.peak_scan_points}};
    j["version"] = kGeneratorVersion;
    return j;
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::string table_hash(const RunConfig& c) { return hex64(fnv1a64(table_canonical(c).dump())); }

/// Hash of the full configuration (tables plus solver and sweep settings).
inline std::string config_hash(const RunConfig& c) {
    json j = table_canonical(c);
    json init = json::array();
    for (const auto& v : c.initial_amplitudes()) init.push_back({v.real(), v.imag()});
    j["solver"] = {{"t_max", c.solver.t_max}, {"dt", c.solver.dt}, {"output_every", c.solver.output_every},
                   {"initial", init}};
    j["sweep"] = {{"parameter", c.sweep.parameter}, {"values", c.sweep.values},
                  {"relative_to_lambda0", c.sweep.relative_to_lambda0}, {"command", c.sweep.command}};
    return hex64(fnv1a64(j.dump()));
}

} // namespace plasmon_qi::config
