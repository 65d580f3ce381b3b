// green_tensor.hpp: nanowire scattering coefficients, radial kernel xi_n and the
// spectral-density entries J_m(omega) for radial dipoles
//
// Conventions
//   k0 = omega / hbar c, k1 = sqrt(eps) k0, k_r = sqrt(k^2 - kz^2) with Im k_r >= 0.
//   Vector harmonics M = curl[f_n(k_r r) {cos, sin}(n phi) e^{i kz z} z_hat], N = curl M / k.
//   Unknowns of the (M_o, N_e) family at r = R, columns of the 4x4 system:
//     [outgoing M (H_n), outgoing N (H_n), inner M (J_n), inner N (J_n)]
//   Rows: E_z, E_phi, (curl E)_z, (curl E)_phi; outside minus inside equals minus
//   the incident (regular) wave. An incident M gives (A, B), an incident N gives (D, C).
//
//   xi_n = n^2 H (J + A H) / x^2 + (kz/k0)^2 H' (J' + C H') + i n kz (B - D) H H' / (k0 x)
//   with everything at x = k_r0 r and primes meaning d/dx.
//
//   Im G_rr(dz) = (1/4 pi) Re int_0^inf dkz cos(kz dz) sum_n (2 - delta_n0) xi_n
//   J_m(omega)  = 3 gamma_0 (omega/omega_0)^3 Im G_rr(m d) / k0
// which reproduces gamma_0 omega^3 / (2 pi omega_0^3) for the bare vacuum.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "plasmon_qi/errors.hpp"
#include "plasmon_qi/material_geometry.hpp"
#include "plasmon_qi/quadrature.hpp"
#include "plasmon_qi/special_functions.hpp"

namespace plasmon_qi::green {

using special::CylinderArrays;
using special::CylinderKind;

struct QuadratureSpec {
    double cutoff_factor = 40.0;    ///< Lambda: kz_max >= Lambda * max(|k0|, |k1|)
    double tail_exponent = 40.0;    ///< kz_max also satisfies 2 kappa (r_a - R) >= this
    double abs_tol = 0.0;
    double rel_tol = 1e-8;
    int max_subdivisions = 4000;
    double azimuthal_tol = 1e-8;
    int max_order = special::kMaxOrder;
    int extra_orders = 0;           ///< orders summed past the adaptive stop (convergence studies)
    int peak_scan_points = 600;

    void validate() const {
        if (!(cutoff_factor > 0.0)) throw ValidationError("quadrature.cutoff_factor must be > 0");
        if (!(tail_exponent > 0.0)) throw ValidationError("quadrature.tail_exponent must be > 0");
        if (!(abs_tol >= 0.0)) throw ValidationError("quadrature.abs_tol must be >= 0");
        if (!(rel_tol > 0.0)) throw ValidationError("quadrature.rel_tol must be > 0");
        if (abs_tol == 0.0 && rel_tol == 0.0) throw ValidationError("quadrature tolerances must be > 0");
        if (max_subdivisions < 1) throw ValidationError("quadrature.max_subdivisions must be >= 1");
        if (!(azimuthal_tol > 0.0)) throw ValidationError("quadrature.azimuthal_tol must be > 0");
        if (max_order < 1 || max_order > special::kMaxOrder) {
            throw ValidationError("quadrature.max_order must lie in [1, 64]");
        }
        if (extra_orders < 0) throw ValidationError("quadrature.extra_orders must be >= 0");
    }
};

struct PhysicalSystem {
    Metal metal{};
    WireGeometry wire{};
    EmitterArray emitters{};

    void validate() const {
        metal.validate();
        wire.validate();
        emitters.validate(wire);
    }
};

struct ModeCoefficients {
    int n = 0;
    double kz = 0.0;
    double omega = 0.0;
    cplx A, B, C, D;     // reflection
    cplx At, Bt, Ct, Dt; // transmission (inner M, inner N)
    double residual = 0.0;
    double rcond = 1.0;
};

namespace detail {

struct Wave {
    double omega = 0.0;
    double k0 = 0.0;
    cplx eps;
    cplx k1;
    double kz = 0.0;
    cplx kr0;
    cplx kr1;
};

inline Wave make_wave(double omega, const Metal& metal, double kz) {
    Wave w;
    w.omega = omega;
    w.k0 = units::wavenumber(omega);
    w.eps = metal.permittivity(omega);
    w.k1 = std::sqrt(w.eps) * w.k0;
    w.kz = kz;
    w.kr0 = radial_wavenumber(w.k0, kz);
    w.kr1 = radial_wavenumber(w.k1, kz);
    return w;
}

// Coefficients of the normalised system. Columns are built from the scaled arrays
// (e^{s0} H, e^{-s1} J1, incident e^{-s0} J with s = Im(argument)) and each family is
// divided by nu = |f_n| + |f_n'| so that high orders neither under- nor overflow.
// True reflection coefficients are A = A^ (nu_j / nu_h) e^{2 s0}; transmission ones
// At = At^ (nu_j / nu_j1) e^{s0 - s1}.
struct ScaledSolve {
    cplx A, B, C, D, At, Bt, Ct, Dt;
    double nu_h = 1.0;
    double nu_j = 1.0;
    double nu_j1 = 1.0;
    double residual = 0.0;
    double rcond = 1.0;
};

inline ScaledSolve solve_mode(int n, const Wave& w, double radius, const CylinderArrays& out,
                              const CylinderArrays& in, bool check_condition = true) {
    const cplx iu(0.0, 1.0);
    const double nu_h = std::abs(out.h[n]) + std::abs(out.derivative(CylinderKind::H1, n));
    const double nu_j = std::abs(out.j[n]) + std::abs(out.derivative(CylinderKind::J, n));
    const double nu_j1 = std::abs(in.j[n]) + std::abs(in.derivative(CylinderKind::J, n));
    if (!(nu_h > 0.0) || !(nu_j > 0.0) || !(nu_j1 > 0.0) || !std::isfinite(nu_h)) {
        throw SingularSystemError("scattering system has a vanishing basis at n = " + std::to_string(n) +
                                  ", kz = " + std::to_string(w.kz) + " 1/nm, omega = " +
                                  std::to_string(w.omega) + " eV");
    }
    const cplx H = out.h[n] / nu_h;
    const cplx Hp = out.derivative(CylinderKind::H1, n) / nu_h;
    const cplx J = out.j[n] / nu_j;
    const cplx Jp = out.derivative(CylinderKind::J, n) / nu_j;
    const cplx J1 = in.j[n] / nu_j1;
    const cplx J1p = in.derivative(CylinderKind::J, n) / nu_j1;
    const cplx kr0 = w.kr0;
    const cplx kr1 = w.kr1;
    const double k0 = w.k0;
    const cplx k1 = w.k1;
    const double R = radius;
    const cplx nkz = iu * static_cast<double>(n) * w.kz;

    Eigen::Matrix4cd M;
    M << 0.0, kr0 * kr0 * H / k0, 0.0, -kr1 * kr1 * J1 / k1,
        -kr0 * Hp, -nkz * H / (k0 * R), kr1 * J1p, nkz * J1 / (k1 * R),
        kr0 * kr0 * H, 0.0, -kr1 * kr1 * J1, 0.0,
        nkz * H / R, -k0 * kr0 * Hp, -nkz * J1 / R, k1 * kr1 * J1p;

    Eigen::Matrix<cplx, 4, 2> rhs;
    rhs << 0.0, -kr0 * kr0 * J / k0,
        kr0 * Jp, nkz * J / (k0 * R),
        -kr0 * kr0 * J, 0.0,
        -nkz * J / R, k0 * kr0 * Jp;

    // Row then column equilibration.
    Eigen::Vector4d rs, cs;
    for (int r = 0; r < 4; ++r) {
        const double m = M.row(r).cwiseAbs().maxCoeff();
        rs(r) = m > 0.0 ? 1.0 / m : 1.0;
    }
    Eigen::Matrix4cd Ms = rs.asDiagonal() * M;
    for (int c = 0; c < 4; ++c) {
        const double m = Ms.col(c).cwiseAbs().maxCoeff();
        cs(c) = m > 0.0 ? 1.0 / m : 1.0;
    }
    Ms = Ms * cs.asDiagonal();
    const Eigen::Matrix<cplx, 4, 2> rhs_s = rs.asDiagonal() * rhs;

    Eigen::PartialPivLU<Eigen::Matrix4cd> lu(Ms);
    const double rcond = lu.rcond();
    if (check_condition && !(rcond >= 1e-12)) {
        throw SingularSystemError("scattering system near-singular (condition > 1e12) at n = " +
                                  std::to_string(n) + ", kz = " + std::to_string(w.kz) +
                                  " 1/nm, omega = " + std::to_string(w.omega) + " eV");
    }
    const Eigen::Matrix<cplx, 4, 2> ys = lu.solve(rhs_s);
    const Eigen::Matrix<cplx, 4, 2> sol = cs.asDiagonal() * ys;

    const Eigen::Matrix<cplx, 4, 2> res = M * sol - rhs;
    const double scale = M.cwiseAbs().maxCoeff() * sol.cwiseAbs().maxCoeff() + rhs.cwiseAbs().maxCoeff();

    ScaledSolve s;
    s.A = sol(0, 0);
    s.B = sol(1, 0);
    s.At = sol(2, 0);
    s.Bt = sol(3, 0);
    s.D = sol(0, 1);
    s.C = sol(1, 1);
    s.Dt = sol(2, 1);
    s.Ct = sol(3, 1);
    s.nu_h = nu_h;
    s.nu_j = nu_j;
    s.nu_j1 = nu_j1;
    s.residual = scale > 0.0 ? res.cwiseAbs().maxCoeff() / scale : 0.0;
    s.rcond = rcond;
    return s;
}

inline CylinderArrays outer_arrays(const Wave& w, double r, int max_order) {
    return special::scaled_cylinder_arrays(w.kr0 * r, max_order + 1, true);
}

inline CylinderArrays inner_arrays(const Wave& w, double radius, int max_order) {
    return special::scaled_cylinder_arrays(w.kr1 * radius, max_order + 1, false);
}

// One xi_n from scaled pieces; decay = e^{-2(s_a - s_R)} carries the reflected-wave scale.
inline cplx xi_term(int n, const Wave& w, const CylinderArrays& at_r, const ScaledSolve* refl,
                    double decay) {
    const cplx iu(0.0, 1.0);
    const cplx x = at_r.z;
    const cplx H = at_r.h[n];
    const cplx Hp = at_r.derivative(CylinderKind::H1, n);
    const cplx J = at_r.j[n];
    const cplx Jp = at_r.derivative(CylinderKind::J, n);
    const double nn = static_cast<double>(n);
    const double q = w.kz / w.k0;

    cplx first = H * J;
    cplx second = Hp * Jp;
    cplx third = 0.0;
    if (refl != nullptr) {
        // A H^2 = A^ (nu_j H)(H / nu_h) e^{2 s0 - 2 s_a}, grouped to stay in range
        const double nj = refl->nu_j;
        const double nh = refl->nu_h;
        first += refl->A * (nj * H) * (H / nh) * decay;
        second += refl->C * (nj * Hp) * (Hp / nh) * decay;
        third = iu * nn * w.kz * (refl->B - refl->D) * (nj * H) * (Hp / nh) * decay / (w.k0 * x);
    }
    return nn * nn * first / (x * x) + q * q * second + third;
}

} // namespace detail

/// Reflection and transmission coefficients of order n (unscaled).
inline ModeCoefficients scattering_coefficients(int n, double kz, double omega, const Metal& metal,
                                                const WireGeometry& wire) {
    if (!(omega > 0.0)) throw DomainError("scattering_coefficients: omega must be > 0");
    if (n < 0 || n > special::kMaxOrder) throw DomainError("scattering_coefficients: order out of range");
    const auto w = detail::make_wave(omega, metal, kz);
    const auto out = detail::outer_arrays(w, wire.radius, n);
    const auto in = detail::inner_arrays(w, wire.radius, n);
    if (out.h_valid < n + 1) throw DomainError("scattering_coefficients: Hankel overflow at this order");
    const auto s = detail::solve_mode(n, w, wire.radius, out, in);
    const double s0 = out.scale;
    const double s1 = in.scale;
    const double refl = s.nu_j / s.nu_h * std::exp(2.0 * s0);
    const double trans = s.nu_j / s.nu_j1 * std::exp(s0 - s1);
    ModeCoefficients m;
    m.n = n;
    m.kz = kz;
    m.omega = omega;
    m.A = s.A * refl;
    m.B = s.B * refl;
    m.C = s.C * refl;
    m.D = s.D * refl;
    m.At = s.At * trans;
    m.Bt = s.Bt * trans;
    m.Ct = s.Ct * trans;
    m.Dt = s.Dt * trans;
    m.residual = s.residual;
    m.rcond = s.rcond;
    return m;
}

/// xi_n at radius r > R. With include_reflection = false only the free-space
/// J_n H_n combination remains.
inline cplx xi_n(int n, double kz, double omega, double r, const Metal& metal, const WireGeometry& wire,
                 bool include_reflection = true) {
    if (!(omega > 0.0)) throw DomainError("xi_n: omega must be > 0");
    if (!(r > wire.radius)) throw DomainError("xi_n: r must exceed the wire radius");
    if (n < 0 || n > special::kMaxOrder) throw DomainError("xi_n: order out of range");
    const auto w = detail::make_wave(omega, metal, kz);
    const auto at_r = detail::outer_arrays(w, r, n);
    if (at_r.h_valid < n + 1) throw DomainError("xi_n: Hankel overflow at this order");
    if (!include_reflection) return detail::xi_term(n, w, at_r, nullptr, 0.0);
    const auto out = detail::outer_arrays(w, wire.radius, n);
    const auto in = detail::inner_arrays(w, wire.radius, n);
    if (out.h_valid < n + 1) throw DomainError("xi_n: Hankel overflow at this order");
    const auto s = detail::solve_mode(n, w, wire.radius, out, in);
    const double decay = std::exp(-2.0 * (at_r.scale - out.scale));
    return detail::xi_term(n, w, at_r, &s, decay);
}

struct AzimuthalSum {
    cplx value;
    int orders_used = 0;     ///< highest n included
    bool cap_hit = false;    ///< stopped at max_order without meeting the tolerance
    bool overflow_stop = false;
};

/// sum_n (2 - delta_n0) xi_n at (kz, omega, r) with the adaptive order cut.
inline AzimuthalSum xi_sum(double kz, double omega, double r, const Metal& metal, const WireGeometry& wire,
                           const QuadratureSpec& spec = {}, bool include_reflection = true) {
    const auto w = detail::make_wave(omega, metal, kz);
    const int top = spec.max_order;
    const auto at_r = detail::outer_arrays(w, r, top);
    CylinderArrays out;
    CylinderArrays in;
    double decay = 0.0;
    if (include_reflection) {
        out = detail::outer_arrays(w, wire.radius, top);
        in = detail::inner_arrays(w, wire.radius, top);
        decay = std::exp(-2.0 * (at_r.scale - out.scale));
    }

    AzimuthalSum acc;
    int quiet = 0;
    int extra_left = -1;
    for (int n = 0; n <= top; ++n) {
        if (at_r.h_valid < n + 1 || (include_reflection && out.h_valid < n + 1)) {
            acc.overflow_stop = true;
            break;
        }
        cplx term;
        if (include_reflection) {
            const auto s = detail::solve_mode(n, w, wire.radius, out, in);
            term = detail::xi_term(n, w, at_r, &s, decay);
        } else {
            term = detail::xi_term(n, w, at_r, nullptr, 0.0);
        }
        if (n > 0) term *= 2.0;
        acc.value += term;
        acc.orders_used = n;
        if (extra_left >= 0) {
            if (extra_left-- == 0) break;
            continue;
        }
        if (n >= 1 && std::abs(term.real()) <= spec.azimuthal_tol * std::abs(acc.value.real())) {
            ++quiet;
        } else {
            quiet = 0;
        }
        if (quiet >= 3) {
            if (spec.extra_orders == 0) break;
            extra_left = spec.extra_orders - 1;
        }
        if (n == top && quiet < 3) acc.cap_hit = true;
    }
    return acc;
}

struct SpectralDensityResult {
    std::vector<double> j;          ///< J_m(omega), m = 0..N-1, in eV
    double error_estimate = 0.0;    ///< absolute, same units
    int evaluations = 0;
    int max_order_used = 0;
    int order_cap_hits = 0;
    double kz_cutoff = 0.0;         ///< 1/nm
};

/// Evaluates the J_m(omega) entries for one physical system.
class SpectralDensity {
public:
    SpectralDensity(PhysicalSystem system, QuadratureSpec spec = {})
        : sys_(std::move(system)), spec_(spec) {
        sys_.validate();
        spec_.validate();
    }

    const PhysicalSystem& system() const { return sys_; }
    const QuadratureSpec& spec() const { return spec_; }

    double kz_cutoff(double omega) const {
        const double k0 = units::wavenumber(omega);
        const double k1 = std::abs(std::sqrt(sys_.metal.permittivity(omega))) * k0;
        const double gap = sys_.emitters.r_a - sys_.wire.radius;
        return std::max({spec_.cutoff_factor * std::max(k0, k1), 0.5 * spec_.tail_exponent / gap, 2.0 * k0});
    }

    SpectralDensityResult evaluate(double omega) const {
        if (!(omega > 0.0)) throw DomainError("spectral density: omega must be > 0");
        const int N = sys_.emitters.count;
        const double k0 = units::wavenumber(omega);
        const double r_a = sys_.emitters.r_a;
        const double d = sys_.emitters.d;
        const bool scatter = sys_.metal.model != MetalModel::vacuum;

        SpectralDensityResult res;
        int max_order = 0;
        int cap_hits = 0;

        // t in [0, pi/2]: kz = k0 sin t. t in [pi/2, pi/2 + U]: kz = k0 cosh(t - pi/2).
        const double half_pi = 0.5 * std::numbers::pi;
        auto integrand = [&](double t, double* out) {
            // Within 1e-6 (relative) of the branch point the 4x4 system loses
            // 1/|kz/k0 - 1| digits; nodes there reuse the value at the clamp. The
            // integrand is only log-singular and the Jacobian vanishes, so this costs ~1e-8.
            constexpr double branch_clamp = 1e-6;
            double kz;
            double jac;
            if (t <= half_pi) {
                kz = k0 * std::min(std::sin(t), 1.0 - branch_clamp);
                jac = k0 * std::cos(t);
            } else {
                const double u = t - half_pi;
                kz = k0 * std::max(std::cosh(u), 1.0 + branch_clamp);
                jac = k0 * std::sinh(u);
            }
            const auto sum = xi_sum(kz, omega, r_a, sys_.metal, sys_.wire, spec_, scatter);
            max_order = std::max(max_order, sum.orders_used);
            if (sum.cap_hit) ++cap_hits;
            const double f = sum.value.real() * jac;
            for (int m = 0; m < N; ++m) out[m] = f * std::cos(kz * m * d);
        };

        std::vector<double> points = {0.0, half_pi};
        if (scatter) {
            const double kc = kz_cutoff(omega);
            res.kz_cutoff = kc;
            const double U = std::acosh(kc / k0);
            const int base = std::max(4, static_cast<int>(std::ceil(U / 0.5)));
            for (int i = 1; i <= base; ++i) points.push_back(half_pi + U * i / base);
            for (double kp : spp_peaks(omega, kc)) {
                for (double f : {0.9, 0.98, 1.0, 1.02, 1.1}) {
                    const double kk = kp * f;
                    if (kk > k0 && kk < kc) points.push_back(half_pi + std::acosh(kk / k0));
                }
            }
            std::sort(points.begin(), points.end());
            points.erase(std::unique(points.begin(), points.end()), points.end());
        } else {
            res.kz_cutoff = k0;
        }

        quad::AdaptiveOptions opts;
        opts.abs_tol = spec_.abs_tol;
        opts.rel_tol = spec_.rel_tol;
        opts.max_subdivisions = spec_.max_subdivisions;
        const auto q = quad::integrate_adaptive(integrand, N, points, opts);

        const double pref = 3.0 * sys_.emitters.gamma_0 * std::pow(omega / sys_.emitters.omega_0, 3) /
                            (4.0 * std::numbers::pi * k0);
        res.j.resize(N);
        for (int m = 0; m < N; ++m) res.j[m] = pref * q.value[m];
        res.error_estimate = pref * q.error;
        res.evaluations = q.evaluations;
        res.max_order_used = max_order;
        res.order_cap_hits = cap_hits;
        if (!q.converged) {
            throw ConvergenceError("kz quadrature did not converge at omega = " + std::to_string(omega) +
                                       " eV (error estimate " + std::to_string(res.error_estimate) + " eV)",
                                   res.error_estimate);
        }
        return res;
    }

    /// Guided-mode positions in (k0, kc): local maxima of the n = 0, 1 reflection
    /// strength on a logarithmic kz scan.
    std::vector<double> spp_peaks(double omega, double kc) const {
        const double k0 = units::wavenumber(omega);
        const int P = spec_.peak_scan_points;
        std::vector<double> kz(P), mag(P, 0.0);
        const double lo = std::log(k0), hi = std::log(kc);
        for (int i = 0; i < P; ++i) {
            kz[i] = std::exp(lo + (hi - lo) * (i + 0.5) / P);
            try {
                const auto w = detail::make_wave(omega, sys_.metal, kz[i]);
                const auto out = detail::outer_arrays(w, sys_.wire.radius, 1);
                const auto in = detail::inner_arrays(w, sys_.wire.radius, 1);
                if (out.h_valid < 2) continue;
                // reflected amplitude at the wire surface, scale-free
                for (int n = 0; n <= 1; ++n) {
                    const auto s = detail::solve_mode(n, w, sys_.wire.radius, out, in);
                    mag[i] = std::max({mag[i], std::abs(s.A), std::abs(s.C)});
                }
            } catch (const NumericalError&) {
            }
        }
        // a peak must stand 2x above the floor within +-30% in kz on both sides
        const int window = std::max(2, static_cast<int>(std::ceil(0.26 * P / (hi - lo))));
        std::vector<double> peaks;
        for (int i = 1; i + 1 < P; ++i) {
            if (!(mag[i] > mag[i - 1] && mag[i] >= mag[i + 1])) continue;
            double left = mag[i], right = mag[i];
            for (int k = std::max(0, i - window); k < i; ++k) left = std::min(left, mag[k]);
            for (int k = i + 1; k <= std::min(P - 1, i + window); ++k) right = std::min(right, mag[k]);
            if (mag[i] > 2.0 * left && mag[i] > 2.0 * right) peaks.push_back(kz[i]);
        }
        return peaks;
    }

private:
    PhysicalSystem sys_;
    QuadratureSpec spec_;
};

inline double spectral_density_entry(int m, double omega, const PhysicalSystem& system,
                                     const QuadratureSpec& spec = {}) {
    if (m < 0) throw DomainError("spectral_density_entry: m must be >= 0");
    PhysicalSystem s = system;
    s.emitters.count = std::max(s.emitters.count, m + 1);
    return SpectralDensity(s, spec).evaluate(omega).j[m];
}

} // namespace plasmon_qi::green
