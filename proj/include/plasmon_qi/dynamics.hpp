// dynamics.hpp: memory kernel K(t) = int dw e^{-iwt} J(w) from a spectral table and
// a second-order Volterra stepper for
//     dc/dt = -i w0 c - int_0^t K(t - s) c(s) ds
//
// Time is in hbar/eV, energies in eV.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "plasmon_qi/errors.hpp"
#include "plasmon_qi/spectral_matrix.hpp"

namespace plasmon_qi::dynamics {

using cplx = std::complex<double>;

namespace detail {

// mu_k(theta) = int_0^1 s^k e^{-i theta s} ds, k = 0..3
inline std::array<cplx, 4> oscillatory_moments(double theta) {
    std::array<cplx, 4> mu{};
    if (std::abs(theta) < 1.0) {
        // sum_j (-i theta)^j / (j! (k + j + 1))
        cplx p(1.0, 0.0);
        const cplx step(0.0, -theta);
        for (int j = 0; j < 40; ++j) {
            for (int k = 0; k < 4; ++k) mu[k] += p / static_cast<double>(k + j + 1);
            p *= step / static_cast<double>(j + 1);
            if (std::abs(p) < 1e-18) break;
        }
        return mu;
    }
    // integration by parts; stable upwards for |theta| >= 1 and k <= 3
    const cplx e = std::polar(1.0, -theta);
    const cplx inv(0.0, 1.0 / theta); // 1 / (-i theta) = i / theta
    mu[0] = (1.0 - e) * cplx(0.0, -1.0 / theta);
    for (int k = 1; k < 4; ++k) mu[k] = e * inv + static_cast<double>(k) * cplx(0.0, -1.0 / theta) * mu[k - 1];
    return mu;
}

} // namespace detail

/// Samples K_m(n dt), m = 0..N-1, n = 0..steps. The matrix kernel is K_{lj} = K_{|l-j|}.
struct MemoryKernel {
    double dt = 0.0;
    std::vector<std::vector<double>> re; ///< re[m][n]
    std::vector<std::vector<double>> im; ///< im[m][n]
    double tail_bound = 0.0;             ///< bound on |K| from spectral weight outside the table window
    std::vector<std::string> warnings;

    int count() const { return static_cast<int>(re.size()); }
    std::size_t steps() const { return re.empty() ? 0 : re.front().size() - 1; }
    cplx at(int m, std::size_t n) const { return {re[m][n], im[m][n]}; }

    /// Kernel from explicit samples, e.g. a closed-form Lorentzian.
    static MemoryKernel from_samples(double dt, const std::vector<std::vector<cplx>>& samples) {
        if (!(dt > 0.0)) throw ValidationError("kernel dt must be > 0");
        if (samples.empty() || samples.front().empty()) throw ValidationError("kernel needs samples");
        MemoryKernel k;
        k.dt = dt;
        for (const auto& s : samples) {
            if (s.size() != samples.front().size()) throw ValidationError("kernel sample length mismatch");
            std::vector<double> r(s.size()), i(s.size());
            for (std::size_t n = 0; n < s.size(); ++n) {
                r[n] = s[n].real();
                i[n] = s[n].imag();
            }
            k.re.push_back(std::move(r));
            k.im.push_back(std::move(i));
        }
        return k;
    }
};

/// Kernel on t_n = n dt, n = 0..steps, by exact integration of each cubic
/// interpolation piece against e^{-iwt} (plus the w^3 low tail when the table has one).
inline MemoryKernel memory_kernel(const spectral::SpectralTable& table, double dt, std::size_t steps) {
    table.validate();
    if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
    const int N = table.count();
    const std::size_t nint = table.size() - 1;
    MemoryKernel k;
    k.dt = dt;
    k.re.assign(N, std::vector<double>(steps + 1, 0.0));
    k.im.assign(N, std::vector<double>(steps + 1, 0.0));

    // per-interval coefficients, already multiplied by the interval width
    std::vector<std::array<double, 4>> coef(static_cast<std::size_t>(N) * nint);
    for (int m = 0; m < N; ++m) {
        const auto& c = table.curve(m);
        for (std::size_t i = 0; i < nint; ++i) {
            auto a = c.coefficients(i);
            const double h = table.omega[i + 1] - table.omega[i];
            for (auto& v : a) v *= h;
            coef[m * nint + i] = a;
        }
    }
    const bool tail = table.tail == LowTail::cubic;
    const double w_lo = table.omega.front();

    std::vector<cplx> acc(N);
    for (std::size_t n = 0; n <= steps; ++n) {
        const double t = dt * static_cast<double>(n);
        std::fill(acc.begin(), acc.end(), cplx(0.0, 0.0));
        for (std::size_t i = 0; i < nint; ++i) {
            const double h = table.omega[i + 1] - table.omega[i];
            const auto mu = detail::oscillatory_moments(h * t);
            const cplx phase = std::polar(1.0, -table.omega[i] * t);
            for (int m = 0; m < N; ++m) {
                const auto& a = coef[m * nint + i];
                acc[m] += phase * (a[0] * mu[0] + a[1] * mu[1] + a[2] * mu[2] + a[3] * mu[3]);
            }
        }
        if (tail) {
            const auto mu = detail::oscillatory_moments(w_lo * t);
            for (int m = 0; m < N; ++m) acc[m] += table.j[m].front() * w_lo * mu[3];
        }
        for (int m = 0; m < N; ++m) {
            k.re[m][n] = acc[m].real();
            k.im[m][n] = acc[m].imag();
        }
    }

    // Spectral weight outside the window, bounded with an w^3 envelope: below the
    // grid (if no tail is attached) and a decaying (w_max / w)^3 continuation above.
    double bound = 0.0;
    for (int m = 0; m < N; ++m) {
        double b = std::abs(table.j[m].back()) * table.omega.back() / 2.0;
        if (!tail) b += std::abs(table.j[m].front()) * w_lo / 4.0;
        bound = std::max(bound, b);
    }
    k.tail_bound = bound;
    const double w_max = table.omega.back();
    if (w_max * dt > 0.1) {
        k.warnings.push_back("time step too coarse for the spectral window: omega_max * dt = " +
                             std::to_string(w_max * dt) + " > 0.1");
    }
    return k;
}

struct Trajectory {
    double dt = 0.0;
    std::vector<std::vector<cplx>> c; ///< c[n][l]
    std::string config_hash;

    std::size_t steps() const { return c.empty() ? 0 : c.size() - 1; }
    double time(std::size_t n) const { return dt * static_cast<double>(n); }
    double norm2(std::size_t n) const {
        double s = 0.0;
        for (const auto& v : c[n]) s += std::norm(v);
        return s;
    }
};

inline constexpr double kNormViolation = 1e-3;

/// Implicit trapezoid for the ODE part combined with the trapezoidal history sum;
/// O(dt^2) globally, O(steps^2) work. The kernel must cover `steps` samples.
inline Trajectory evolve(const MemoryKernel& kernel, double omega_0, const std::vector<cplx>& c0,
                         std::size_t steps) {
    const int N = static_cast<int>(c0.size());
    if (N < 1) throw ValidationError("initial amplitudes must not be empty");
    if (kernel.count() != N) throw ValidationError("kernel size does not match the number of emitters");
    if (kernel.steps() < steps) throw ValidationError("kernel is shorter than the requested trajectory");
    double n0 = 0.0;
    for (const auto& v : c0) n0 += std::norm(v);
    if (n0 > 1.0 + 1e-12) throw ValidationError("initial amplitudes must satisfy sum |c|^2 <= 1");
    const double dt = kernel.dt;

    // history stored split into real/imaginary parts so the O(n) sum vectorises
    std::vector<std::vector<double>> hr(N, std::vector<double>(steps + 1, 0.0));
    std::vector<std::vector<double>> hi(N, std::vector<double>(steps + 1, 0.0));
    for (int l = 0; l < N; ++l) {
        hr[l][0] = c0[l].real();
        hi[l][0] = c0[l].imag();
    }

    auto kmat = [&](std::size_t n) {
        Eigen::MatrixXcd M(N, N);
        for (int l = 0; l < N; ++l)
            for (int j = 0; j < N; ++j) M(l, j) = kernel.at(std::abs(l - j), n);
        return M;
    };
    const cplx iw0(0.0, omega_0);
    const Eigen::MatrixXcd K0 = kmat(0);
    const Eigen::MatrixXcd lhs =
        Eigen::MatrixXcd::Identity(N, N) + 0.5 * dt * (iw0 * Eigen::MatrixXcd::Identity(N, N) + 0.5 * dt * K0);
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(lhs);

    Trajectory out;
    out.dt = dt;
    out.c.assign(steps + 1, std::vector<cplx>(N));
    out.c[0] = c0;

    Eigen::VectorXcd cn(N), fn(N), hist(N), rhs(N);
    for (int l = 0; l < N; ++l) cn(l) = c0[l];
    fn = -iw0 * cn; // no memory at t = 0

    // sum_{k=1}^{n} K_{n+1-k} c_k for each output row, via K_{|l-j|}
    std::vector<double> sr(N), si(N);
    for (std::size_t n = 0; n < steps; ++n) {
        for (int l = 0; l < N; ++l) {
            double accr = 0.0, acci = 0.0;
            for (int j = 0; j < N; ++j) {
                const int m = std::abs(l - j);
                const double* kr = kernel.re[m].data();
                const double* ki = kernel.im[m].data();
                const double* cr = hr[j].data();
                const double* ci = hi[j].data();
                for (std::size_t k = 1; k <= n; ++k) {
                    const std::size_t q = n + 1 - k;
                    accr += kr[q] * cr[k] - ki[q] * ci[k];
                    acci += kr[q] * ci[k] + ki[q] * cr[k];
                }
            }
            sr[l] = accr;
            si[l] = acci;
        }
        const Eigen::MatrixXcd Kn1 = kmat(n + 1);
        Eigen::VectorXcd c0v(N);
        for (int l = 0; l < N; ++l) c0v(l) = c0[l];
        for (int l = 0; l < N; ++l) hist(l) = cplx(sr[l], si[l]);
        hist += 0.5 * (Kn1 * c0v);
        rhs = cn + 0.5 * dt * fn - 0.5 * dt * dt * hist;
        const Eigen::VectorXcd next = lu.solve(rhs);

        // f_{n+1} = -i w0 c_{n+1} - dt (hist + K_0 c_{n+1} / 2)
        fn = -iw0 * next - dt * (hist + 0.5 * (K0 * next));
        cn = next;
        double norm = 0.0;
        for (int l = 0; l < N; ++l) {
            hr[l][n + 1] = cn(l).real();
            hi[l][n + 1] = cn(l).imag();
            out.c[n + 1][l] = cn(l);
            norm += std::norm(cn(l));
        }
        if (!(norm <= 1.0 + kNormViolation)) {
            throw NormViolationError("norm violation: sum |c|^2 = " + std::to_string(norm) + " at t = " +
                                     std::to_string(dt * static_cast<double>(n + 1)) +
                                     " (check the spectral table and time step)");
        }
    }
    return out;
}

/// Default step: omega_max * dt <= 0.1, rounded so that dt divides t_max.
inline std::size_t default_steps(double omega_max, double t_max) {
    if (!(t_max > 0.0)) throw ValidationError("t_max must be > 0");
    return static_cast<std::size_t>(std::ceil(t_max * omega_max / 0.1));
}

/// Table-driven trajectory on [0, t_max] with `steps` uniform steps.
inline Trajectory evolve(const spectral::SpectralTable& table, double omega_0, const std::vector<cplx>& c0,
                         double t_max, std::size_t steps, std::vector<std::string>* warnings = nullptr) {
    if (!(t_max > 0.0)) throw ValidationError("t_max must be > 0");
    if (steps == 0) throw ValidationError("steps must be > 0");
    if (static_cast<int>(c0.size()) != table.count()) {
        throw ValidationError("initial amplitudes must have one entry per emitter");
    }
    const double dt = t_max / static_cast<double>(steps);
    const MemoryKernel k = memory_kernel(table, dt, steps);
    if (warnings != nullptr) warnings->insert(warnings->end(), k.warnings.begin(), k.warnings.end());
    auto tr = evolve(k, omega_0, c0, steps);
    tr.config_hash = table.config_hash;
    return tr;
}

} // namespace plasmon_qi::dynamics
