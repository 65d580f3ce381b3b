// spectral_matrix.hpp: tabulated J_m(omega), the N x N spectral matrix and its
// eigen-channels D_j(omega)

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "plasmon_qi/errors.hpp"
#include "plasmon_qi/green_tensor.hpp"
#include "plasmon_qi/interpolation.hpp"
#include "plasmon_qi/parallel.hpp"

namespace plasmon_qi::spectral {

struct GridSpec {
    int points = 2000;
    double omega_min = 0.0; ///< eV; 0 selects 1e-3 omega_0
    double omega_max = 0.0; ///< eV; 0 selects max(3 omega_0, 1.2 omega_sp)
    LowTail tail = LowTail::cubic;

    void validate() const {
        if (points < 4) throw ValidationError("grid.points must be >= 4");
        if (omega_min < 0.0) throw ValidationError("grid.omega_min must be > 0");
        if (omega_max < 0.0) throw ValidationError("grid.omega_max must be > 0");
        if (omega_min > 0.0 && omega_max > 0.0 && !(omega_max > omega_min)) {
            throw ValidationError("grid.omega_max must exceed grid.omega_min");
        }
    }
};

inline double default_omega_max(const green::PhysicalSystem& sys) {
    double w = 3.0 * sys.emitters.omega_0;
    if (sys.metal.model == MetalModel::drude) w = std::max(w, 1.2 * sys.metal.drude.surface_plasmon_frequency());
    return w;
}

/// Sample positions: logarithmic crowding towards omega_min, a uniform background,
/// and extra density around omega_0 and the surface-plasmon frequency.
inline std::vector<double> make_grid(const green::PhysicalSystem& sys, const GridSpec& spec) {
    spec.validate();
    const double w0 = sys.emitters.omega_0;
    const double lo = spec.omega_min > 0.0 ? spec.omega_min : 1e-3 * w0;
    const double hi = spec.omega_max > 0.0 ? spec.omega_max : default_omega_max(sys);
    if (!(hi > lo)) throw ValidationError("grid: omega_max must exceed omega_min");

    const bool spp = sys.metal.model == MetalModel::drude;
    const double wsp = spp ? sys.metal.drude.surface_plasmon_frequency() : 0.0;
    const double wsp_width = spp ? std::max(sys.metal.drude.gamma_p, 0.01 * w0) : 1.0;
    const double sigma0 = 0.05 * w0;
    const double wc = 0.05 * w0;

    // Each density component is normalised to unit mass on [lo, hi].
    const double log_mass = std::log((hi + wc) / (lo + wc));
    const double gauss_mass = std::sqrt(std::numbers::pi / 2.0) * sigma0 *
                              (std::erf((hi - w0) / (std::sqrt(2.0) * sigma0)) -
                               std::erf((lo - w0) / (std::sqrt(2.0) * sigma0)));
    const double lor_mass = spp ? wsp_width * (std::atan((hi - wsp) / wsp_width) - std::atan((lo - wsp) / wsp_width))
                                : 1.0;
    const bool use_sp = spp && wsp > lo && wsp < hi;
    const double f_log = 0.25, f_gauss = 0.10, f_sp = use_sp ? 0.30 : 0.0;
    const double f_uni = 1.0 - f_log - f_gauss - f_sp;
    auto density = [&](double w) {
        double r = f_log / ((w + wc) * log_mass) + f_uni / (hi - lo);
        if (gauss_mass > 0.0) r += f_gauss * std::exp(-0.5 * std::pow((w - w0) / sigma0, 2)) / gauss_mass;
        if (use_sp) r += f_sp * wsp_width / ((w - wsp) * (w - wsp) + wsp_width * wsp_width) / lor_mass;
        return r;
    };

    // Cumulative mass on a fine log-spaced mesh, inverted by linear interpolation.
    const int fine = 200 * spec.points;
    std::vector<double> wf(fine + 1), cf(fine + 1, 0.0);
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int k = 0; k <= fine; ++k) wf[k] = std::exp(llo + (lhi - llo) * k / fine);
    wf.front() = lo;
    wf.back() = hi;
    for (int k = 1; k <= fine; ++k) cf[k] = cf[k - 1] + 0.5 * (density(wf[k - 1]) + density(wf[k])) * (wf[k] - wf[k - 1]);
    const double total = cf.back();

    std::vector<double> grid(spec.points);
    grid.front() = lo;
    grid.back() = hi;
    int k = 0;
    for (int i = 1; i + 1 < spec.points; ++i) {
        const double target = total * i / (spec.points - 1);
        while (k < fine && cf[k + 1] < target) ++k;
        const double t = (target - cf[k]) / (cf[k + 1] - cf[k]);
        grid[i] = wf[k] + t * (wf[k + 1] - wf[k]);
    }
    for (int i = 1; i < spec.points; ++i) {
        if (!(grid[i] > grid[i - 1])) throw NumericalError("grid construction produced a non-increasing grid");
    }
    return grid;
}

struct SpectralTable {
    std::vector<double> omega;
    std::vector<std::vector<double>> j; ///< j[m][i] = J_m(omega_i), eV
    LowTail tail = LowTail::cubic;

    // metadata, not part of the payload
    std::string config_hash;
    std::string quadrature;
    std::string built_at;
    double max_error_estimate = 0.0;
    long order_cap_hits = 0;

    int count() const { return static_cast<int>(j.size()); }
    std::size_t size() const { return omega.size(); }
    double omega_min() const { return omega.front(); }
    double omega_max() const { return omega.back(); }

    static SpectralTable from_samples(std::vector<double> omega, std::vector<std::vector<double>> entries,
                                      LowTail tail = LowTail::none) {
        SpectralTable t;
        t.omega = std::move(omega);
        t.j = std::move(entries);
        t.tail = tail;
        t.finalize();
        return t;
    }

    void validate() const {
        if (omega.size() < 2) throw ValidationError("spectral table needs at least two grid points");
        if (j.empty()) throw ValidationError("spectral table has no entries");
        if (!(omega.front() > 0.0)) throw ValidationError("spectral table grid must start above zero");
        for (std::size_t i = 0; i + 1 < omega.size(); ++i) {
            if (!(omega[i + 1] > omega[i])) throw ValidationError("spectral table grid must be strictly increasing");
        }
        for (const auto& row : j) {
            if (row.size() != omega.size()) throw ValidationError("spectral table entry length mismatch");
            for (double v : row) {
                if (!std::isfinite(v)) throw ValidationError("spectral table contains a non-finite entry");
            }
        }
    }

    void finalize() {
        validate();
        curves_.clear();
        for (const auto& row : j) curves_.emplace_back(omega, row, tail);
    }

    const HermiteCurve& curve(int m) const { return curves_.at(m); }

    /// The symmetric Toeplitz matrix [J_{|l-j|}] at grid node i.
    Eigen::MatrixXd matrix(std::size_t i) const {
        const int N = count();
        Eigen::MatrixXd M(N, N);
        for (int l = 0; l < N; ++l)
            for (int c = 0; c < N; ++c) M(l, c) = j[std::abs(l - c)][i];
        return M;
    }

private:
    std::vector<HermiteCurve> curves_;
};

/// J_m(omega) for all m by cubic Hermite interpolation.
inline std::vector<double> interpolate(const SpectralTable& table, double omega) {
    std::vector<double> out(table.count());
    for (int m = 0; m < table.count(); ++m) out[m] = table.curve(m)(omega);
    return out;
}

struct BuildReport {
    double max_error_estimate = 0.0;
    long order_cap_hits = 0;
    long evaluations = 0;
};

/// Tabulate J_m on the grid, in parallel over omega. Deterministic for fixed inputs.
inline SpectralTable build_table(const green::PhysicalSystem& sys, const green::QuadratureSpec& quad,
                                 const GridSpec& grid_spec, int threads = 0, BuildReport* report = nullptr) {
    const auto grid = make_grid(sys, grid_spec);
    const green::SpectralDensity density(sys, quad);
    const int N = sys.emitters.count;
    std::vector<green::SpectralDensityResult> results(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        try {
            results[i] = density.evaluate(grid[i]);
        } catch (const ConvergenceError& e) {
            throw ConvergenceError(std::string("table build failed at omega = ") + std::to_string(grid[i]) +
                                       " eV: " + e.what(),
                                   e.achieved_error());
        } catch (const NumericalError& e) {
            throw NumericalError(std::string("table build failed at omega = ") + std::to_string(grid[i]) +
                                 " eV: " + e.what());
        }
    });
    SpectralTable t;
    t.omega = grid;
    t.j.assign(N, std::vector<double>(grid.size()));
    t.tail = grid_spec.tail;
    BuildReport rep;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (int m = 0; m < N; ++m) t.j[m][i] = results[i].j[m];
        rep.max_error_estimate = std::max(rep.max_error_estimate, results[i].error_estimate);
        rep.order_cap_hits += results[i].order_cap_hits;
        rep.evaluations += results[i].evaluations;
    }
    t.max_error_estimate = rep.max_error_estimate;
    t.order_cap_hits = rep.order_cap_hits;
    t.finalize();
    if (report != nullptr) *report = rep;
    return t;
}

/// Eigenvalues of the symmetric Toeplitz matrix built from (J_0, ..., J_{N-1}).
/// N <= 3 uses closed forms in a fixed branch order:
///   N = 2: (J0 + J1, J0 - J1)
///   N = 3: (J0 - J2, [2J0 + J2 - s]/2, [2J0 + J2 + s]/2), s = sqrt(8 J1^2 + J2^2)
/// N > 3: numeric, descending.
inline std::vector<double> analytic_channels(const std::vector<double>& jm) {
    const std::size_t N = jm.size();
    if (N == 1) return {jm[0]};
    if (N == 2) return {jm[0] + jm[1], jm[0] - jm[1]};
    if (N == 3) {
        const double s = std::sqrt(8.0 * jm[1] * jm[1] + jm[2] * jm[2]);
        return {jm[0] - jm[2], 0.5 * (2.0 * jm[0] + jm[2] - s), 0.5 * (2.0 * jm[0] + jm[2] + s)};
    }
    Eigen::MatrixXd M(N, N);
    for (std::size_t l = 0; l < N; ++l)
        for (std::size_t c = 0; c < N; ++c) M(l, c) = jm[l > c ? l - c : c - l];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    std::vector<double> out(es.eigenvalues().data(), es.eigenvalues().data() + N);
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

inline std::vector<double> numeric_channels(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    std::vector<double> out(es.eigenvalues().data(), es.eigenvalues().data() + M.rows());
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

struct EigenChannels {
    std::vector<double> omega;
    std::vector<std::vector<double>> d; ///< d[j][i], closed-form branch order (see analytic_channels)
    LowTail tail = LowTail::none;

    int count() const { return static_cast<int>(d.size()); }

    /// D_j(omega_i) sorted descending.
    std::vector<double> sorted_at(std::size_t i) const {
        std::vector<double> v(d.size());
        for (std::size_t c = 0; c < d.size(); ++c) v[c] = d[c][i];
        std::sort(v.begin(), v.end(), std::greater<>());
        return v;
    }

    HermiteCurve curve(int c) const { return HermiteCurve(omega, d.at(c), tail); }
};

inline EigenChannels eigen_channels(const SpectralTable& table) {
    table.validate();
    EigenChannels ch;
    ch.omega = table.omega;
    ch.tail = table.tail;
    const int N = table.count();
    ch.d.assign(N, std::vector<double>(table.size()));
    std::vector<double> jm(N);
    for (std::size_t i = 0; i < table.size(); ++i) {
        for (int m = 0; m < N; ++m) jm[m] = table.j[m][i];
        const auto v = analytic_channels(jm);
        for (int c = 0; c < N; ++c) ch.d[c][i] = v[c];
    }
    return ch;
}

} // namespace plasmon_qi::spectral
