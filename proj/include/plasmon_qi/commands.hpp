// commands.hpp: CLI pipelines, each turning a RunConfig into a ResultRecord

#pragma once

#include <algorithm>
#include <complex>
#include <string>
#include <vector>

#include "plasmon_qi/config.hpp"
#include "plasmon_qi/dynamics.hpp"
#include "plasmon_qi/entanglement.hpp"
#include "plasmon_qi/errors.hpp"
#include "plasmon_qi/parallel.hpp"
#include "plasmon_qi/records.hpp"
#include "plasmon_qi/spectral_matrix.hpp"
#include "plasmon_qi/spectrum_analysis.hpp"
#include "plasmon_qi/table_cache.hpp"

namespace plasmon_qi::commands {

using config::RunConfig;
using records::ResultRecord;
using json = nlohmann::json;
using cplx = std::complex<double>;

struct RunOptions {
    std::string cache_dir;
    int threads = 0;
};

inline const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"spectral-density", "bound-states", "dynamics",
                                                "steady-state",     "entanglement", "sweep"};
    return names;
}

/// Residue of the artificial pole above the table window, per eigen-channel; a
/// large value means the window cuts off spectral weight the emitters couple to.
inline json window_diagnostics(const spectral::SpectralTable& t, double omega_0, json& warnings) {
    json out = json::array();
    const auto ch = spectral::eigen_channels(t);
    for (int c = 0; c < ch.count(); ++c) {
        const auto curve = ch.curve(c);
        if (spectrum::identically_zero(curve)) continue;
        try {
            const auto p = spectrum::window_pole(curve, omega_0, c);
            out.push_back({{"channel", c}, {"varpi", p.varpi}, {"residue", p.residue}});
            if (p.residue > 1e-3) {
                warnings.push_back("channel " + std::to_string(c) + ": pole above the spectral window at " +
                                   records::format_number(p.varpi) + " eV carries residue " +
                                   records::format_number(p.residue) + "; raise grid.omega_max");
            }
        } catch (const NumericalError&) {
            // no pole found: nothing to report
        }
    }
    return out;
}

struct Prepared {
    spectral::SpectralTable table;
    bool from_cache = false;
    json warnings = json::array();
};

inline Prepared prepare(const RunConfig& cfg, const RunOptions& opt) {
    Prepared p;
    p.table = cache::obtain_table(cfg, cache::resolve_cache_dir(opt.cache_dir), opt.threads, &p.from_cache);
    if (p.table.order_cap_hits > 0) {
        p.warnings.push_back("azimuthal order cap reached " + std::to_string(p.table.order_cap_hits) +
                             " times while building the table");
    }
    return p;
}

inline ResultRecord make_record(const std::string& command, const RunConfig& cfg) {
    ResultRecord r;
    r.command = command;
    r.config_hash = config::config_hash(cfg);
    return r;
}

inline void attach_table_metadata(ResultRecord& r, const Prepared& p, const RunConfig& cfg) {
    r.metadata["table_hash"] = p.table.config_hash;
    r.metadata["table_points"] = p.table.size();
    r.metadata["omega_min"] = p.table.omega_min();
    r.metadata["omega_max"] = p.table.omega_max();
    r.metadata["max_quadrature_error"] = p.table.max_error_estimate;
    json w = p.warnings;
    r.metadata["window_poles"] = window_diagnostics(p.table, cfg.omega_0, w);
    r.metadata["warnings"] = w;
}

inline ResultRecord spectral_density(const RunConfig& cfg, const RunOptions& opt) {
    const auto p = prepare(cfg, opt);
    auto r = make_record("spectral-density", cfg);
    const int N = p.table.count();
    r.columns.push_back("omega");
    for (int m = 0; m < N; ++m) r.columns.push_back("J_" + std::to_string(m));
    for (int j = 1; j <= N; ++j) r.columns.push_back("D_" + std::to_string(j));
    const auto ch = spectral::eigen_channels(p.table);
    for (std::size_t i = 0; i < p.table.size(); ++i) {
        std::vector<double> row{p.table.omega[i]};
        for (int m = 0; m < N; ++m) row.push_back(p.table.j[m][i]);
        for (double v : ch.sorted_at(i)) row.push_back(v);
        r.add_row(std::move(row));
    }
    attach_table_metadata(r, p, cfg);
    r.metadata["channel_order"] = "descending";
    return r;
}

inline ResultRecord bound_states(const RunConfig& cfg, const RunOptions& opt) {
    const auto p = prepare(cfg, opt);
    auto r = make_record("bound-states", cfg);
    r.columns = {"channel", "varpi", "residue", "M"};
    const auto states = spectrum::find_bound_states(spectral::eigen_channels(p.table), cfg.omega_0);
    for (const auto& s : states) {
        r.add_row({static_cast<double>(s.channel), s.varpi, s.residue, static_cast<double>(states.size())});
    }
    attach_table_metadata(r, p, cfg);
    r.metadata["M"] = states.size();
    r.metadata["channel_order"] = cfg.count == 2   ? "J0+J1, J0-J1"
                                  : cfg.count == 3 ? "J0-J2, (2J0+J2-s)/2, (2J0+J2+s)/2 with s=sqrt(8J1^2+J2^2)"
                                                   : "descending";
    return r;
}

struct TimeGrid {
    std::size_t steps = 0;
    std::size_t every = 1;
    double dt = 0.0;

    std::vector<std::size_t> samples() const {
        std::vector<std::size_t> out;
        for (std::size_t n = 0; n <= steps; n += every) out.push_back(n);
        if (out.back() != steps) out.push_back(steps);
        return out;
    }
};

inline TimeGrid time_grid(const RunConfig& cfg, double omega_max) {
    TimeGrid g;
    g.steps = cfg.solver.dt > 0.0 ? static_cast<std::size_t>(std::llround(cfg.solver.t_max / cfg.solver.dt))
                                  : dynamics::default_steps(omega_max, cfg.solver.t_max);
    g.dt = cfg.solver.t_max / static_cast<double>(g.steps);
    g.every = cfg.solver.output_every > 0 ? static_cast<std::size_t>(cfg.solver.output_every)
                                          : std::max<std::size_t>(1, g.steps / 1000);
    return g;
}

inline dynamics::Trajectory run_dynamics(const RunConfig& cfg, const Prepared& p, TimeGrid& grid, json& warnings) {
    grid = time_grid(cfg, p.table.omega_max());
    std::vector<std::string> w;
    auto tr = dynamics::evolve(p.table, cfg.omega_0, cfg.initial_amplitudes(), cfg.solver.t_max, grid.steps, &w);
    for (auto& s : w) warnings.push_back(s);
    return tr;
}

inline ResultRecord dynamics_record(const RunConfig& cfg, const RunOptions& opt) {
    auto p = prepare(cfg, opt);
    auto r = make_record("dynamics", cfg);
    TimeGrid grid;
    const auto tr = run_dynamics(cfg, p, grid, p.warnings);
    r.columns.push_back("t");
    for (int l = 1; l <= cfg.count; ++l) {
        r.columns.push_back("re_c" + std::to_string(l));
        r.columns.push_back("im_c" + std::to_string(l));
    }
    r.columns.push_back("norm");
    for (auto n : grid.samples()) {
        std::vector<double> row{tr.time(n)};
        for (const auto& v : tr.c[n]) {
            row.push_back(v.real());
            row.push_back(v.imag());
        }
        row.push_back(tr.norm2(n));
        r.add_row(std::move(row));
    }
    attach_table_metadata(r, p, cfg);
    r.metadata["dt"] = grid.dt;
    r.metadata["steps"] = grid.steps;
    return r;
}

inline ResultRecord entanglement_record(const RunConfig& cfg, const RunOptions& opt) {
    if (cfg.count < 2) throw ValidationError("entanglement needs emitters.count >= 2");
    auto p = prepare(cfg, opt);
    auto r = make_record("entanglement", cfg);
    TimeGrid grid;
    const auto tr = run_dynamics(cfg, p, grid, p.warnings);
    r.columns.push_back("t");
    if (cfg.count == 2) {
        r.columns.push_back("C2");
    } else {
        for (int l = 1; l <= cfg.count; ++l)
            for (int j = l + 1; j <= cfg.count; ++j) r.columns.push_back("C" + std::to_string(l) + std::to_string(j));
        if (cfg.count == 3) r.columns.push_back("C3");
    }
    for (auto n : grid.samples()) {
        const auto& c = tr.c[n];
        std::vector<double> row{tr.time(n)};
        for (int l = 0; l < cfg.count; ++l)
            for (int j = l + 1; j < cfg.count; ++j) row.push_back(entanglement::pairwise_concurrence(c, l, j));
        if (cfg.count == 3) row.push_back(entanglement::tripartite_c3(c));
        r.add_row(std::move(row));
    }
    attach_table_metadata(r, p, cfg);
    r.metadata["so4_basis"] = "L_pq = E_pq - E_qp, (p,q) = (1,2),(1,3),(1,4),(2,3),(2,4),(3,4); singleton factor i*sigma_y";
    return r;
}

inline ResultRecord steady_state_record(const RunConfig& cfg, const RunOptions& opt) {
    const auto c0 = cfg.initial_amplitudes();
    auto p = prepare(cfg, opt);
    auto r = make_record("steady-state", cfg);
    const auto grid = time_grid(cfg, p.table.omega_max());
    if (cfg.count == 2) {
        spectrum::require_initial_n2(c0);
        const auto states = spectrum::find_bound_states(spectral::eigen_channels(p.table), cfg.omega_0);
        r.columns = {"t", "re_Z1", "im_Z1", "re_Z2", "im_Z2", "C2_residues", "C2_amplitudes"};
        for (auto n : grid.samples()) {
            const double t = grid.dt * static_cast<double>(n);
            const auto z = spectrum::steady_state_n2(states, t);
            r.add_row({t, z[0].real(), z[0].imag(), z[1].real(), z[1].imag(),
                       spectrum::steady_concurrence_n2(states, t), spectrum::amplitude_concurrence_n2(states, t)});
        }
        json bs = json::array();
        for (const auto& s : states) bs.push_back({{"channel", s.channel}, {"varpi", s.varpi}, {"residue", s.residue}});
        r.metadata["bound_states"] = bs;
        r.metadata["M"] = states.size();
        if (states.size() == 2 &&
            std::abs(states[0].varpi - states[1].varpi) < spectrum::kDegenerateGap * cfg.omega_0) {
            p.warnings.push_back("near-degenerate bound states");
        }
    } else if (cfg.count == 3) {
        if (c0[0] != cplx(1.0, 0.0) || c0[1] != cplx(0.0, 0.0) || c0[2] != cplx(0.0, 0.0)) {
            throw ValidationError("the closed-form steady state needs the initial amplitudes (1, 0, 0)");
        }
        const auto ss = spectrum::steady_state_n3(p.table, cfg.omega_0);
        r.columns = {"t", "re_Z1", "im_Z1", "re_Z2", "im_Z2", "re_Z3", "im_Z3", "C3"};
        for (auto n : grid.samples()) {
            const double t = grid.dt * static_cast<double>(n);
            const auto z = ss(t);
            r.add_row({t, z[0].real(), z[0].imag(), z[1].real(), z[1].imag(), z[2].real(), z[2].imag(),
                       entanglement::tripartite_c3({z[0], z[1], z[2]})});
        }
        json sym = json::array(), anti = json::array();
        for (const auto& q : ss.symmetric) sym.push_back({{"varpi", q.varpi}, {"derivative", q.derivative}});
        for (const auto& q : ss.antisymmetric) anti.push_back({{"varpi", q.varpi}, {"derivative", q.derivative}});
        r.metadata["symmetric_poles"] = sym;
        r.metadata["antisymmetric_poles"] = anti;
        r.metadata["M"] = ss.bound_state_count();
        for (const auto& w : ss.warnings) p.warnings.push_back(w);
    } else {
        throw ValidationError("steady-state is available for emitters.count = 2 or 3");
    }
    attach_table_metadata(r, p, cfg);
    return r;
}

ResultRecord run_command(const std::string& name, const RunConfig& cfg, const RunOptions& opt);

namespace detail {

// rethrow with the sweep coordinate, keeping the error category
[[noreturn]] inline void rethrow_with(const std::string& where) {
    try {
        throw;
    } catch (const ValidationError& e) {
        throw ValidationError(where + ": " + e.what());
    } catch (const DomainError& e) {
        throw DomainError(where + ": " + e.what());
    } catch (const CacheMismatchError& e) {
        throw CacheMismatchError(where + ": " + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(where + ": " + e.what());
    } catch (const std::exception& e) {
        throw NumericalError(where + ": " + e.what());
    }
}

} // namespace detail

inline ResultRecord sweep(const RunConfig& cfg, const RunOptions& opt) {
    if (cfg.sweep.parameter.empty()) throw ValidationError("sweep: no sweep section in the config");
    const auto& values = cfg.sweep.values;
    std::vector<ResultRecord> parts(values.size());
    const int workers = std::min<int>(resolve_threads(opt.threads), static_cast<int>(values.size()));
    RunOptions inner = opt;
    inner.threads = workers > 1 ? 1 : opt.threads;
    parallel_for(values.size(), workers, [&](std::size_t k) {
        RunConfig point = cfg;
        const config::Length len{values[k], cfg.sweep.relative_to_lambda0};
        if (cfg.sweep.parameter == "r_a") point.r_a = len;
        else point.d = len;
        point.sweep = {};
        const std::string where = "sweep point " + std::to_string(k) + " (" + cfg.sweep.parameter + " = " +
                                  records::format_number(values[k]) + ")";
        try {
            point.validate();
            parts[k] = run_command(cfg.sweep.command, point, inner);
        } catch (...) {
            detail::rethrow_with(where);
        }
    });
    auto r = make_record("sweep", cfg);
    r.columns = {"sweep_index", cfg.sweep.parameter};
    for (const auto& c : parts.front().columns) r.columns.push_back(c);
    json points = json::array();
    for (std::size_t k = 0; k < parts.size(); ++k) {
        for (const auto& row : parts[k].rows) {
            std::vector<double> full{static_cast<double>(k), values[k]};
            full.insert(full.end(), row.begin(), row.end());
            r.add_row(std::move(full));
        }
        points.push_back({{"index", k}, {"value", values[k]}, {"metadata", parts[k].metadata}});
    }
    r.metadata["command"] = cfg.sweep.command;
    r.metadata["relative_to_lambda0"] = cfg.sweep.relative_to_lambda0;
    r.metadata["points"] = points;
    return r;
}

inline ResultRecord run_command(const std::string& name, const RunConfig& cfg, const RunOptions& opt) {
    if (name == "spectral-density") return spectral_density(cfg, opt);
    if (name == "bound-states") return bound_states(cfg, opt);
    if (name == "dynamics") return dynamics_record(cfg, opt);
    if (name == "steady-state") return steady_state_record(cfg, opt);
    if (name == "entanglement") return entanglement_record(cfg, opt);
    if (name == "sweep") return sweep(cfg, opt);
    throw ValidationError("unknown command '" + name + "'");
}

/// Process exit code for an exception: 1 for invalid input, 2 for numerical failure.
inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const NumericalError*>(&e) != nullptr) return 2;
    if (dynamic_cast<const Error*>(&e) != nullptr) return 1;
    return 2;
}

} // namespace plasmon_qi::commands
