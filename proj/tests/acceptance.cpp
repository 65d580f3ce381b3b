// acceptance: one PASS/FAIL line per criterion, tolerances fixed below.
//
//   acceptance [--cache DIR] [--only 1,4,8] [--threads k]
//
// Wire tables go through the table cache, so a second run only redoes the
// dynamics. Exit status is the number of failed criteria (capped at 100).

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "plasmon_qi/commands.hpp"

using namespace plasmon_qi;
using cplx = std::complex<double>;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}
std::string fmt(const char* f, double a, double b) {
    char buf[192];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}
std::string fmt(const char* f, double a, double b, double c) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

std::string g_cache;
int g_threads = 0;

commands::Prepared table_for(const config::RunConfig& cfg) { return commands::prepare(cfg, {g_cache, g_threads}); }

config::RunConfig wire_config(int count, double ra_rel, double d, double t_max) {
    auto c = config::parse_config_text("{}");
    c.count = count;
    c.r_a = config::Length{ra_rel, true};
    c.d = config::Length{d, false};
    c.grid.points = 400;
    c.grid.omega_max = 12.0;
    c.solver.t_max = t_max;
    c.solver.initial.assign(count, cplx{});
    c.solver.initial[0] = 1.0;
    c.validate();
    return c;
}

// ---------------------------------------------------------------- 1

Outcome wronskian() {
    constexpr double kTol = 1e-9;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> re(-1e4, 1e4), im(0.0, 100.0), small(-60.0, 60.0);
    std::uniform_int_distribution<int> order(0, 40);
    int checked = 0, skipped = 0;
    double worst = 0.0;
    while (checked < 1000) {
        const int k = checked + skipped;
        const cplx z = k % 2 == 0 ? cplx(re(rng), im(rng)) : cplx(small(rng), 0.5 * im(rng));
        const int n = order(rng);
        if (std::abs(z) > 1e4 || std::abs(z) < 1e-3) {
            ++skipped;
            continue;
        }
        const auto a = special::cylinder_arrays(z, n + 1, true);
        if (a.h_valid < n + 1) { // H_n beyond double range
            ++skipped;
            continue;
        }
        const cplx w =
            a.j[n] * a.derivative(special::CylinderKind::H1, n) - a.derivative(special::CylinderKind::J, n) * a.h[n];
        const cplx expect = cplx(0.0, 2.0) / (std::numbers::pi * z);
        worst = std::max(worst, std::abs(w - expect) / std::abs(expect));
        ++checked;
    }
    return {worst <= kTol, fmt("max rel error %.2e over 1000 points, n <= 40, 0 <= Im z <= 100 (tol %.0e)", worst, kTol) +
                               ", " + std::to_string(skipped) + " overflow/out-of-domain draws skipped"};
}

// ---------------------------------------------------------------- 2

Outcome free_space() {
    constexpr double kTol = 5e-3;
    green::PhysicalSystem s;
    s.metal.model = MetalModel::vacuum;
    s.wire.radius = 0.01 * units::wavelength(2.0);
    s.emitters.count = 1;
    s.emitters.r_a = 0.0115 * units::wavelength(2.0);
    const green::SpectralDensity density(s);
    const double g0 = s.emitters.gamma_0, w0 = s.emitters.omega_0;
    const double at_w0 = 2.0 * std::numbers::pi * density.evaluate(w0).j[0] / g0;
    double worst = std::abs(at_w0 - 1.0);
    for (int i = 0; i <= 30; ++i) {
        const double w = w0 * (0.5 + 1.5 * i / 30.0);
        const double r = density.evaluate(w).j[0] * 2.0 * std::numbers::pi * std::pow(w0, 3) / (g0 * std::pow(w, 3));
        worst = std::max(worst, std::abs(r - 1.0));
    }
    return {worst <= kTol, fmt("2 pi J0(w0)/g0 = %.10f; max |ratio - 1| on [w0/2, 2 w0] = %.2e (tol %.1e)", at_w0, worst, kTol)};
}

// ---------------------------------------------------------------- 3

Outcome passivity() {
    constexpr double kTol = 1e-8;
    auto c = config::parse_config_text("{}");
    c.r_a = config::Length{0.0115, true};
    c.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const auto p = table_for(c);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.table.size(); ++i) {
        const auto e = spectral::numeric_channels(p.table.matrix(i));
        worst = std::min(worst, e.back() / e.front());
    }
    std::string d = fmt("%.0f grid points, min eigenvalue / max = %.2e (tol -%.0e)", double(p.table.size()), worst, kTol);
    d += p.from_cache ? ", table from cache" : fmt(", table built in %.0f s", secs);
    return {worst >= -kTol, d};
}

// ---------------------------------------------------------------- 4

struct Lorentzian {
    double w0 = 2.0, wc = 2.2, W = 0.3, g = 0.1;
    cplx a() const { return {W, wc}; }
    std::pair<cplx, cplx> roots() const {
        const cplx B = cplx(0.0, w0) + a(), C = cplx(0.0, w0) * a() + g / 2.0;
        const cplx disc = std::sqrt(B * B - 4.0 * C);
        return {(-B + disc) / 2.0, (-B - disc) / 2.0};
    }
    cplx exact(double t) const {
        const auto [s1, s2] = roots();
        return (s1 + a()) / (s1 - s2) * std::exp(s1 * t) + (s2 + a()) / (s2 - s1) * std::exp(s2 * t);
    }
    double lifetime() const {
        const auto [s1, s2] = roots();
        return 1.0 / std::min(-s1.real(), -s2.real());
    }
    double max_error(std::size_t steps, double T) const {
        const double dt = T / steps;
        std::vector<cplx> k(steps + 1);
        for (std::size_t n = 0; n <= steps; ++n) k[n] = 0.5 * g * std::exp(-a() * (dt * n));
        const auto tr = dynamics::evolve(dynamics::MemoryKernel::from_samples(dt, {k}), w0, {1.0}, steps);
        double e = 0.0;
        for (std::size_t n = 0; n <= steps; ++n) e = std::max(e, std::abs(tr.c[n][0] - exact(tr.time(n))));
        return e;
    }
};

Outcome volterra() {
    constexpr double kTol = 1e-4, kLo = 3.6, kHi = 4.4;
    const Lorentzian L;
    const double e10 = L.max_error(32000, 10.0 * L.lifetime());
    const double T = 3.0 * L.lifetime();
    const double e1 = L.max_error(1500, T), e2 = L.max_error(3000, T), e3 = L.max_error(6000, T);
    const double r1 = e1 / e2, r2 = e2 / e3;
    const bool ok = e10 <= kTol && r1 > kLo && r1 < kHi && r2 > kLo && r2 < kHi;
    return {ok, fmt("max error over 10 lifetimes %.2e (tol %.0e); ", e10, kTol) +
                    fmt("halving ratios %.3f, %.3f (band 3.6-4.4)", r1, r2)};
}

// ---------------------------------------------------------------- 5

Outcome flat_band() {
    constexpr double kRootTol = 1e-8, kResTol = 1e-6;
    const double eta = 0.3, w0 = 2.0;
    std::vector<double> x, y;
    for (int i = 0; i <= 40; ++i) {
        x.push_back(1.0 + 2.0 * std::pow(i / 40.0, 1.4));
        y.push_back(eta);
    }
    const HermiteCurve d(x, y, LowTail::none);
    const auto states = spectrum::channel_bound_state(d, w0, 0);
    if (states.size() != 1) return {false, "expected one bound state, found " + std::to_string(states.size())};
    // exhaustive oracle: uniform sign scan then bisection on the closed-form self-energy
    auto f = [&](double v) { return w0 - eta * std::log((3.0 - v) / (1.0 - v)) - v; };
    double a = -10.0, b = a;
    for (int i = 1; i <= 200000; ++i) {
        b = std::min(-10.0 + 11.0 * i / 200000.0, 1.0 - 1e-15);
        if (f(b) <= 0.0) break;
        a = b;
    }
    for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        (f(m) > 0.0 ? a : b) = m;
    }
    const double oracle = 0.5 * (a + b);
    const double droot = std::abs(states[0].varpi - oracle) / w0;
    const double dres = std::abs(states[0].residue - spectrum::residue_finite_difference(d, states[0].varpi, 1e-6));
    return {droot <= kRootTol && dres <= kResTol,
            fmt("|varpi - oracle| / w0 = %.2e (tol %.0e), ", droot, kRootTol) +
                fmt("|K - K_fd| = %.2e (tol %.0e)", dres, kResTol)};
}

// ---------------------------------------------------------------- 6

struct Run {
    commands::Prepared p;
    dynamics::Trajectory tr;
};

Run dynamics_run(const config::RunConfig& c) {
    Run r{table_for(c), {}};
    commands::TimeGrid grid;
    nlohmann::json w = nlohmann::json::array();
    r.tr = commands::run_dynamics(c, r.p, grid, w);
    return r;
}

// angular frequency of the oscillation of f about its mean on [t0, t1], from mean crossings
double beat_frequency(const dynamics::Trajectory& tr, std::size_t n0, const std::function<double(std::size_t)>& f) {
    const std::size_t n1 = tr.steps();
    double mean = 0.0;
    for (std::size_t n = n0; n <= n1; ++n) mean += f(n);
    mean /= static_cast<double>(n1 - n0 + 1);
    std::vector<double> cross;
    double prev = f(n0) - mean;
    for (std::size_t n = n0 + 1; n <= n1; ++n) {
        const double cur = f(n) - mean;
        if ((prev < 0.0) != (cur < 0.0)) cross.push_back(tr.time(n - 1) + tr.dt * prev / (prev - cur));
        prev = cur;
    }
    if (cross.size() < 3) return 0.0;
    return std::numbers::pi * static_cast<double>(cross.size() - 1) / (cross.back() - cross.front());
}

Outcome residues_vs_dynamics() {
    constexpr double kAmpTol = 0.02, kBeatTol = 0.01, kLeak = 1e-4;
    constexpr std::size_t kFeasibleSteps = 200000; // O(steps^2) history sum
    std::string d;
    bool ok = true;

    const double g0 = config::parse_config_text("{}").gamma_0;
    const double required = 50.0 / g0;
    const std::size_t needed = dynamics::default_steps(12.0, required);
    const bool horizon_ok = needed <= kFeasibleSteps;
    if (!horizon_ok) {
        ok = false;
        d += fmt("t_end >= 50/g0 = %.0f needs %.1e steps (limit %.0e): not run; ", required, double(needed),
                 double(kFeasibleSteps));
    }

    {   // M = 1, d = 1 nm
        const auto c = wire_config(2, 0.0118, 1.0, horizon_ok ? required : 600.0);
        const auto r = dynamics_run(c);
        const auto states = spectrum::find_bound_states(spectral::eigen_channels(r.p.table), c.omega_0);
        const double T = r.tr.time(r.tr.steps());
        const auto z = spectrum::steady_state_n2(states, T);
        double worst = 0.0;
        for (int l = 0; l < 2; ++l) {
            const double a = std::abs(r.tr.c.back()[l]), b = std::abs(z[l]);
            worst = std::max(worst, std::abs(a - b) / b);
        }
        const bool pass = states.size() == 1 && worst <= kAmpTol;
        ok = ok && pass;
        d += fmt("M=1 point (r_a 0.0118 l0, d 1 nm): M = %.0f, max | |c| - |Z| | / |Z| = %.2e at t = %.0f", double(states.size()),
                 worst, T);
        d += pass ? " ok; " : " FAIL; ";
    }
    {   // M = 2, d = 5 nm
        const auto c = wire_config(2, 0.0115, 5.0, 1500.0);
        const auto r = dynamics_run(c);
        const auto states = spectrum::find_bound_states(spectral::eigen_channels(r.p.table), c.omega_0);
        double rel = 1.0, expect = 0.0, got = 0.0;
        if (states.size() == 2) {
            expect = std::abs(states[0].varpi - states[1].varpi);
            got = beat_frequency(r.tr, r.tr.steps() / 2, [&](std::size_t n) { return std::norm(r.tr.c[n][0]); });
            rel = std::abs(got - expect) / expect;
        }
        const bool pass = states.size() == 2 && rel <= kBeatTol;
        ok = ok && pass;
        d += fmt("M=2 point (r_a 0.0115 l0, d 5 nm): beat %.6f vs |dvarpi| %.6f, rel %.1e", got, expect, rel);
        d += pass ? " ok; " : " FAIL; ";
    }
    {   // M = 0, d = 5 nm
        const auto c = wire_config(2, 0.013, 5.0, 600.0);
        const auto r = dynamics_run(c);
        const auto states = spectrum::find_bound_states(spectral::eigen_channels(r.p.table), c.omega_0);
        const double left = r.tr.norm2(r.tr.steps());
        const bool pass = states.empty() && left < kLeak;
        ok = ok && pass;
        d += fmt("M=0 point (r_a 0.013 l0, d 5 nm): M = %.0f, sum |c|^2 = %.2e at t = %.0f", double(states.size()), left,
                 r.tr.time(r.tr.steps()));
        d += pass ? " ok" : " FAIL";
    }
    return {ok, d};
}

// ---------------------------------------------------------------- 7

enum class Behaviour { decay, constant, oscillating };

const char* name(Behaviour b) {
    return b == Behaviour::decay ? "decay" : b == Behaviour::constant ? "constant" : "oscillating";
}

// over the second half of the run
Behaviour classify(const std::vector<double>& tail) {
    double lo = tail.front(), hi = tail.front();
    for (double v : tail) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi < 1e-2) return Behaviour::decay;
    return (hi - lo) / hi < 0.05 ? Behaviour::constant : Behaviour::oscillating;
}

Behaviour expected(int bound_states) {
    return bound_states == 0 ? Behaviour::decay : bound_states == 1 ? Behaviour::constant : Behaviour::oscillating;
}

Outcome three_emitters() {
    constexpr double kAmpTol = 0.02;
    std::string d;
    bool ok = true;
    for (double ra : {0.0115, 0.013}) {
        const auto c = wire_config(3, ra, 5.0, 600.0);
        const auto r = dynamics_run(c);
        const auto ss = spectrum::steady_state_n3(r.p.table, c.omega_0);
        const int M = ss.bound_state_count();
        const double T = r.tr.time(r.tr.steps());
        std::vector<double> c3;
        for (std::size_t n = r.tr.steps() / 2; n <= r.tr.steps(); n += 10) c3.push_back(entanglement::tripartite_c3(r.tr.c[n]));
        const auto seen = classify(c3), want = expected(M);
        bool pass = seen == want;
        d += fmt("r_a %.4f l0: M = %.0f, C3 tail ", ra, double(M)) + name(seen) + " (expected " + name(want) + ")";
        if (M >= 1) {
            const auto z = ss(T);
            double worst = 0.0;
            for (int l = 0; l < 3; ++l) {
                const double b = std::abs(z[l]);
                if (b < 1e-3) continue; // amplitudes that vanish in the limit
                worst = std::max(worst, std::abs(std::abs(r.tr.c.back()[l]) - b) / b);
            }
            pass = pass && worst <= kAmpTol;
            d += fmt(", max | |c| - |Z| | / |Z| = %.2e at t = %.0f", worst, T);
        }
        d += pass ? " ok; " : " FAIL; ";
        ok = ok && pass;
    }
    d.resize(d.size() - 2);
    return {ok, d};
}

// ---------------------------------------------------------------- 8

Outcome entanglement_checks() {
    constexpr double kTol = 1e-10;
    constexpr double kExact = 1e-15; // a few ulp: 1/sqrt(2) squared is not 0.5 in binary
    const double bell = std::sqrt(0.5);
    const double c_bell = entanglement::pairwise_concurrence({bell, bell}, 0, 1);
    std::mt19937_64 rng(77);
    std::normal_distribution<double> gauss;
    auto random_state = [&](int n) {
        std::vector<cplx> c(n);
        double s = 0.0;
        for (auto& v : c) {
            v = {gauss(rng), gauss(rng)};
            s += std::norm(v);
        }
        const double scale = std::uniform_real_distribution<double>(0.0, 1.0)(rng) / std::sqrt(s);
        for (auto& v : c) v *= scale;
        return c;
    };
    double pair_err = 0.0, dual_err = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const auto c = random_state(2);
        pair_err = std::max(pair_err,
                            std::abs(entanglement::pairwise_concurrence(c, 0, 1) - 2.0 * std::abs(c[0] * std::conj(c[1]))));
    }
    for (int k = 0; k < 1000; ++k) {
        const auto c = random_state(3);
        dual_err = std::max(dual_err, std::abs(entanglement::tripartite_c3(c) - entanglement::tripartite_c3_rank2(c)));
    }
    const bool ok = std::abs(c_bell - 1.0) <= kExact && pair_err <= kTol && dual_err <= kTol;
    return {ok, fmt("Bell C2 - 1 = %.1e; max |C2 - 2|c_l c_j*|| = %.1e; max C3 route difference = %.1e", c_bell - 1.0,
                    pair_err, dual_err)};
}

// ---------------------------------------------------------------- 9

Outcome ra_sweep() {
    const std::vector<double> values{0.0115, 0.012, 0.0125, 0.013};
    std::string d = "M(r_a/l0):";
    std::vector<std::size_t> counts;
    for (double ra : values) {
        const auto c = wire_config(2, ra, 5.0, 600.0);
        const auto p = table_for(c);
        counts.push_back(spectrum::find_bound_states(spectral::eigen_channels(p.table), c.omega_0).size());
        d += fmt(" %.4f->%.0f", ra, double(counts.back()));
    }
    return {counts.front() >= 1 && counts.back() == 0 && counts.front() <= 2, d};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance checks"};
    std::vector<int> only;
    app.add_option("--cache", g_cache, "table cache directory");
    app.add_option("--only", only, "criteria to run")->delimiter(',');
    app.add_option("--threads", g_threads, "worker threads for table builds, 0 = hardware");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
        {1, wronskian},        {2, free_space},     {3, passivity},           {4, volterra},  {5, flat_band},
        {6, residues_vs_dynamics}, {7, three_emitters}, {8, entanglement_checks}, {9, ra_sweep},
    };
    const std::set<int> chosen(only.begin(), only.end());
    int failed = 0;
    for (const auto& [id, run] : criteria) {
        if (!chosen.empty() && !chosen.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %d: %s  %s  [%.1f s]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    return std::min(failed, 100);
}
