// spectrum_analysis.hpp: bound states below the continuum, their residues, and
// the long-time amplitudes Z(t) for N = 2 and N = 3
//
// A channel is a nonnegative spectral function D(w) given as a HermiteCurve. With
//     S(v)  = int dw D(w) / (w - v),     T(v) = dS/dv = int dw D(w) / (w - v)^2,
// a bound state is a root of  w0 - S(v) = v  below the continuum edge, and its
// residue is K = 1 / (1 + T(v)).

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "plasmon_qi/errors.hpp"
#include "plasmon_qi/interpolation.hpp"
#include "plasmon_qi/quadrature.hpp"
#include "plasmon_qi/spectral_matrix.hpp"

namespace plasmon_qi::spectrum {

using cplx = std::complex<double>;

/// Lowest frequency of the continuum: 0 with the w^3 tail, else the first node.
inline double continuum_edge(const HermiteCurve& d) { return d.lower(); }

inline bool identically_zero(const HermiteCurve& d) {
    return std::all_of(d.y().begin(), d.y().end(), [](double v) { return v == 0.0; });
}

namespace detail {

// int_0^1 p(s) / (s - a)^q ds, q = 1 or 2, for a cubic p and a outside [0, 1].
// Close to the interval the Taylor expansion about a is integrated exactly,
// otherwise 10-point Gauss is accurate to rounding.
inline double cubic_over_power(const std::array<double, 4>& c, double a, int q) {
    if (a > -2.0 && a < 3.0) {
        // p(s) = sum_k b_k (s - a)^k
        const double b0 = c[0] + a * (c[1] + a * (c[2] + a * c[3]));
        const double b1 = c[1] + a * (2.0 * c[2] + 3.0 * a * c[3]);
        const double b2 = c[2] + 3.0 * a * c[3];
        const double b3 = c[3];
        const double u0 = -a, u1 = 1.0 - a; // s - a at the ends, same sign
        const double lg = std::log1p(1.0 / u0); // log(u1 / u0)
        const std::array<double, 4> b{b0, b1, b2, b3};
        double sum = 0.0;
        for (int k = 0; k < 4; ++k) {
            const int e = k - q; // integrate (s - a)^e
            if (b[k] == 0.0) continue;
            if (e == -1) {
                sum += b[k] * lg;
            } else if (e == -2) {
                sum += b[k] * (1.0 / u0 - 1.0 / u1);
            } else {
                sum += b[k] * (std::pow(u1, e + 1) - std::pow(u0, e + 1)) / (e + 1);
            }
        }
        return sum;
    }
    return quad::gauss10(
        [&](double s) { return (c[0] + s * (c[1] + s * (c[2] + s * c[3]))) / std::pow(s - a, q); }, 0.0, 1.0);
}

// int dw D(w) / (w - v)^q over the full support of the curve
inline double resolvent_moment(const HermiteCurve& d, double v, int q) {
    const double edge = continuum_edge(d);
    // with the w^3 tail both moments stay finite at the edge itself
    if (!(v < edge || (v == edge && d.tail() == LowTail::cubic) || v > d.upper())) {
        throw DomainError("self-energy requested at v = " + std::to_string(v) +
                          " eV, inside the continuum (edge " + std::to_string(edge) + " eV)");
    }
    double sum = 0.0;
    const auto& x = d.x();
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double h = x[i + 1] - x[i];
        const double a = (v - x[i]) / h;
        sum += cubic_over_power(d.coefficients(i), a, q) / std::pow(h, q - 1);
    }
    if (d.tail() == LowTail::cubic) {
        // y0 (w / x0)^3 on [0, x0]
        const double x0 = x.front();
        const std::array<double, 4> c{0.0, 0.0, 0.0, d.y().front()};
        sum += cubic_over_power(c, v / x0, q) / std::pow(x0, q - 1);
    }
    return sum;
}

} // namespace detail

/// S(v) = int dw D(w) / (w - v), v below the continuum.
inline double self_energy(const HermiteCurve& d, double v) { return detail::resolvent_moment(d, v, 1); }

/// dS/dv = int dw D(w) / (w - v)^2.
inline double self_energy_derivative(const HermiteCurve& d, double v) { return detail::resolvent_moment(d, v, 2); }

struct BoundState {
    int channel = 0;
    double varpi = 0.0;   ///< eV
    double residue = 0.0; ///< K in (0, 1]
    double residual = 0.0;
};

/// y(v) - v with y(v) = w0 - S(v); strictly decreasing below the edge.
inline double pole_function(const HermiteCurve& d, double omega_0, double v) {
    return omega_0 - self_energy(d, v) - v;
}

/// K from a central difference of y, as an independent check on 1 / (1 + T).
inline double residue_finite_difference(const HermiteCurve& d, double v, double h) {
    const double yp = -(self_energy(d, v + h) - self_energy(d, v - h)) / (2.0 * h);
    return 1.0 / (1.0 - yp);
}

struct RootOptions {
    double tolerance = 1e-10; ///< relative to omega_0, on |y(v) - v| and on the bracket
    int monotonicity_samples = 16;
};

/// Root of w0 - S(v) = v below the edge, or nothing when y(edge) >= edge.
/// A channel that vanishes identically yields the free state v = w0, K = 1.
inline std::vector<BoundState> channel_bound_state(const HermiteCurve& d, double omega_0, int channel,
                                                   const RootOptions& opts = {}) {
    if (identically_zero(d)) return {BoundState{channel, omega_0, 1.0, 0.0}};
    // quadrature noise can leave D a hair below zero where two entries nearly cancel
    const auto [ymin, ymax] = std::minmax_element(d.y().begin(), d.y().end());
    if (*ymin < -1e-6 * std::max(std::abs(*ymax), std::abs(*ymin))) {
        throw NumericalError("spectral function of channel " + std::to_string(channel) + " is negative (min " +
                             std::to_string(*ymin) + ")");
    }
    const double edge = continuum_edge(d);
    const double scale = std::max(omega_0, 1.0);

    // At the edge S may diverge logarithmically (no low tail); either way f(edge) < 0
    // is the existence condition.
    double f_edge = -std::numeric_limits<double>::infinity();
    if (d.tail() == LowTail::cubic) f_edge = pole_function(d, omega_0, edge);
    if (d.tail() == LowTail::cubic && !(f_edge < 0.0)) return {};

    double span = 1e-3 * scale;
    double lo = edge - span;
    double f_lo = pole_function(d, omega_0, lo);
    std::vector<std::pair<double, double>> trail{{lo, f_lo}};
    int grow = 0;
    while (!(f_lo > 0.0)) {
        if (++grow > 80) {
            std::string msg = "bound-state bracketing failed in channel " + std::to_string(channel) + "; samples:";
            for (const auto& [v, f] : trail) msg += " (" + std::to_string(v) + ", " + std::to_string(f) + ")";
            throw BracketingError(msg);
        }
        span *= 2.0;
        lo = edge - span;
        f_lo = pole_function(d, omega_0, lo);
        trail.emplace_back(lo, f_lo);
    }
    if (d.tail() != LowTail::cubic && f_lo > 0.0) {
        // without the tail, check that the sign really changes before the edge
        const double near = edge - 1e-12 * scale;
        if (pole_function(d, omega_0, near) > 0.0) return {};
    }

    // bisection to the last representable midpoint; y is monotone so this is safe
    double hi = edge;
    const double tol = opts.tolerance * omega_0;
    double v = 0.5 * (lo + hi);
    double fv = pole_function(d, omega_0, v);
    for (int it = 0; it < 400; ++it) {
        if (fv > 0.0) lo = v;
        else hi = v;
        const double next = 0.5 * (lo + hi);
        if (next == lo || next == hi) break;
        v = next;
        fv = pole_function(d, omega_0, v);
    }
    if (std::abs(fv) > tol) {
        throw ConvergenceError("bound-state root did not reach tolerance in channel " + std::to_string(channel),
                               std::abs(fv));
    }

    // monotonicity check on the bracket (guaranteed for D >= 0)
    const double a = v - 2.0 * std::max(span, 1e-6 * scale);
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= opts.monotonicity_samples; ++k) {
        const double frac = static_cast<double>(k) / (opts.monotonicity_samples + 1);
        const double s = a + (edge - a) * frac;
        const double f = pole_function(d, omega_0, s);
        if (f > prev) {
            throw NumericalError("pole function is not decreasing below the continuum in channel " +
                                 std::to_string(channel) + " (spectral function negative?)");
        }
        prev = f;
    }

    const double K = 1.0 / (1.0 + self_energy_derivative(d, v));
    return {BoundState{channel, v, K, std::abs(fv)}};
}

/// One search per eigen-channel; channels keep the closed-form order of
/// spectral::analytic_channels.
inline std::vector<BoundState> find_bound_states(const spectral::EigenChannels& ch, double omega_0,
                                                 const RootOptions& opts = {}) {
    std::vector<BoundState> out;
    for (int c = 0; c < ch.count(); ++c) {
        auto s = channel_bound_state(ch.curve(c), omega_0, c, opts);
        out.insert(out.end(), s.begin(), s.end());
    }
    return out;
}

/// Pole above a truncated window: w0 - S(v) = v for v > w_max always has a root once
/// D(w) is cut off at w_max. It is an artefact of the truncation; a sizeable residue
/// means the window misses spectral weight the emitter is strongly coupled to.
inline BoundState window_pole(const HermiteCurve& d, double omega_0, int channel) {
    const double top = d.upper();
    const double scale = std::max(omega_0, 1.0);
    auto f = [&](double v) { return pole_function(d, omega_0, v); };
    double span = 1e-3 * scale;
    double hi = top + span;
    while (!(f(hi) < 0.0)) {
        span *= 2.0;
        hi = top + span;
        if (span > 1e8 * scale) throw BracketingError("no pole above the spectral window");
    }
    double lo = top;
    if (d.y().back() == 0.0 || !(f(top + 1e-12 * scale) > 0.0)) lo = top + 1e-12 * scale;
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (f(mid) > 0.0) lo = mid;
        else hi = mid;
    }
    const double v = 0.5 * (lo + hi);
    return BoundState{channel, v, 1.0 / (1.0 + self_energy_derivative(d, v)), std::abs(f(v))};
}

inline constexpr double kDegenerateGap = 1e-6; ///< relative to omega_0

// ---------------------------------------------------------------- N = 2 ----

/// Z(t) for c(0) = (1, 0): channel 0 (J0 + J1) enters as (1, 1), channel 1 as (1, -1).
inline std::array<cplx, 2> steady_state_n2(const std::vector<BoundState>& states, double t) {
    std::array<cplx, 2> z{};
    for (const auto& s : states) {
        if (s.channel < 0 || s.channel > 1) throw ValidationError("N = 2 bound states must use channels 0 and 1");
        const cplx term = 0.5 * s.residue * std::polar(1.0, -s.varpi * t);
        z[0] += term;
        z[1] += s.channel == 0 ? term : -term;
    }
    return z;
}

inline void require_initial_n2(const std::vector<cplx>& c0) {
    if (c0.size() != 2 || c0[0] != cplx(1.0, 0.0) || c0[1] != cplx(0.0, 0.0)) {
        throw ValidationError("the closed-form steady state needs the initial amplitudes (1, 0)");
    }
}

namespace detail {
inline std::pair<const BoundState*, const BoundState*> split_channels(const std::vector<BoundState>& states) {
    const BoundState* a = nullptr;
    const BoundState* b = nullptr;
    for (const auto& s : states) {
        if (s.channel == 0) a = &s;
        else if (s.channel == 1) b = &s;
        else throw ValidationError("N = 2 bound states must use channels 0 and 1");
    }
    return {a, b};
}
} // namespace detail

/// Long-time concurrence from the residues:
///   M = 0: 0;  M = 1: 2 K^2;  M = 2: 2 |K1^2 - K2^2 + 2i K1 K2 sin((v1 - v2) t)|.
inline double steady_concurrence_n2(const std::vector<BoundState>& states, double t) {
    const auto [a, b] = detail::split_channels(states);
    if (a == nullptr && b == nullptr) return 0.0;
    if (a == nullptr || b == nullptr) {
        const double K = (a != nullptr ? a : b)->residue;
        return 2.0 * K * K;
    }
    const double K1 = a->residue, K2 = b->residue;
    const cplx D(0.0, 2.0 * K1 * K2 * std::sin((a->varpi - b->varpi) * t));
    return 2.0 * std::abs(K1 * K1 - K2 * K2 + D);
}

/// Concurrence 2 |Z1 Z2*| of the long-time amplitudes themselves.
inline double amplitude_concurrence_n2(const std::vector<BoundState>& states, double t) {
    const auto z = steady_state_n2(states, t);
    return 2.0 * std::abs(z[0] * std::conj(z[1]));
}

// ---------------------------------------------------------------- N = 3 ----

/// The three entry self-energies S_m and their derivatives T_m at v.
struct EntryResolvents {
    std::array<double, 3> s{};
    std::array<double, 3> t{};
};

inline EntryResolvents entry_resolvents(const spectral::SpectralTable& table, double v) {
    EntryResolvents r;
    for (int m = 0; m < 3; ++m) {
        r.s[m] = self_energy(table.curve(m), v);
        r.t[m] = self_energy_derivative(table.curve(m), v);
    }
    return r;
}

// With a = w0 - v - S0 the pole functions for c(0) = (1, 0, 0) are
//   Y(v)       = -[a (a - S2) - 2 S1^2]      (symmetric sector)
//   k02(v) / i =  a + S2                      (antisymmetric sector, D = J0 - J2)
inline double y_function(double omega_0, double v, const EntryResolvents& r) {
    const double a = omega_0 - v - r.s[0];
    return -(a * (a - r.s[2]) - 2.0 * r.s[1] * r.s[1]);
}

inline double y_derivative(double omega_0, double v, const EntryResolvents& r) {
    const double a = omega_0 - v - r.s[0];
    const double ap = -1.0 - r.t[0];
    return -(ap * (a - r.s[2]) + a * (ap - r.t[2]) - 4.0 * r.s[1] * r.t[1]);
}

struct PoleTerm {
    double varpi = 0.0;
    std::array<cplx, 3> weight{}; ///< Z_l(t) = sum weight_l e^{-i varpi t}
    double derivative = 0.0;      ///< analytic derivative of the pole function
    double derivative_check = 0.0; ///< central-difference value
};

struct SteadyStateN3 {
    std::vector<PoleTerm> symmetric;     ///< roots of Y
    std::vector<PoleTerm> antisymmetric; ///< roots of k02^(2)
    std::vector<std::string> warnings;
    bool free_limit = false;
    double omega_0 = 0.0;

    int bound_state_count() const { return static_cast<int>(symmetric.size() + antisymmetric.size()); }

    std::array<cplx, 3> operator()(double t) const {
        if (free_limit) return {std::polar(1.0, -omega_0 * t), cplx{}, cplx{}};
        std::array<cplx, 3> z{};
        for (const auto* family : {&symmetric, &antisymmetric}) {
            for (const auto& p : *family) {
                const cplx e = std::polar(1.0, -p.varpi * t);
                for (int l = 0; l < 3; ++l) z[l] += p.weight[l] * e;
            }
        }
        return z;
    }
};

namespace detail {

// all sign changes of f on (edge - far, edge), scanned on a geometric mesh
template <class F>
std::vector<double> scan_roots(F&& f, double edge, double near, double far, int points, double tol) {
    std::vector<double> roots;
    const double lnear = std::log(near), lfar = std::log(far);
    double v_prev = edge - far;
    double f_prev = f(v_prev);
    for (int k = points - 1; k >= 0; --k) {
        const double v = edge - std::exp(lnear + (lfar - lnear) * k / (points - 1));
        const double fv = f(v);
        if (f_prev == 0.0) {
            roots.push_back(v_prev);
        } else if ((f_prev > 0.0) != (fv > 0.0) && fv != 0.0) {
            double lo = v_prev, hi = v, flo = f_prev;
            for (int it = 0; it < 200 && hi - lo > tol; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (mid == lo || mid == hi) break;
                const double fm = f(mid);
                if ((fm > 0.0) == (flo > 0.0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push_back(0.5 * (lo + hi));
        }
        v_prev = v;
        f_prev = fv;
    }
    return roots;
}

} // namespace detail

/// Closed-form long-time amplitudes for N = 3 and c(0) = (1, 0, 0).
inline SteadyStateN3 steady_state_n3(const spectral::SpectralTable& table, double omega_0,
                                     int scan_points = 1200) {
    if (table.count() != 3) throw ValidationError("steady_state_n3 needs an N = 3 table");
    SteadyStateN3 out;
    out.omega_0 = omega_0;
    bool zero = true;
    for (int m = 0; m < 3; ++m) zero = zero && identically_zero(table.curve(m));
    if (zero) {
        out.free_limit = true;
        return out;
    }
    const double edge = continuum_edge(table.curve(0));
    const double scale = std::max(omega_0, 1.0);
    const double tol = 1e-13 * scale;

    // Far enough out every self-energy is small and both pole functions are
    // dominated by (w0 - v).
    double far = 4.0 * scale;
    for (int it = 0; it < 80; ++it) {
        const auto r = entry_resolvents(table, edge - far);
        const double smax = std::max({std::abs(r.s[0]), std::abs(r.s[1]), std::abs(r.s[2])});
        if (smax < 0.05 * far && far > 2.0 * (omega_0 - edge)) break;
        far *= 2.0;
    }
    const double near = 1e-10 * scale;

    auto yv = [&](double v) { return y_function(omega_0, v, entry_resolvents(table, v)); };
    auto kv = [&](double v) {
        const auto r = entry_resolvents(table, v);
        return omega_0 - v - r.s[0] + r.s[2];
    };

    const auto y_roots = detail::scan_roots(yv, edge, near, far, scan_points, tol);
    const auto k_roots = detail::scan_roots(kv, edge, near, far, scan_points, tol);

    auto fd = [&](auto& f, double v) {
        // one Richardson step; the root can sit close to the edge where f''' is large
        const double h = std::min(1e-4 * scale, 0.25 * (edge - v));
        const double d1 = (f(v + h) - f(v - h)) / (2.0 * h);
        const double d2 = (f(v + 0.5 * h) - f(v - 0.5 * h)) / h;
        return (4.0 * d2 - d1) / 3.0;
    };

    for (double v : y_roots) {
        const auto r = entry_resolvents(table, v);
        const double a = omega_0 - v - r.s[0];
        PoleTerm p;
        p.varpi = v;
        p.derivative = y_derivative(omega_0, v, r);
        p.derivative_check = fd(yv, v);
        // -i K0 / (2 Y') with K0 = i a; -i (i S1) / Y'
        p.weight[0] = cplx(a / (2.0 * p.derivative), 0.0);
        p.weight[2] = p.weight[0];
        p.weight[1] = cplx(r.s[1] / p.derivative, 0.0);
        out.symmetric.push_back(p);
    }
    for (double v : k_roots) {
        const auto r = entry_resolvents(table, v);
        PoleTerm p;
        p.varpi = v;
        p.derivative = -1.0 - r.t[0] + r.t[2];
        p.derivative_check = fd(kv, v);
        const double w = -1.0 / (2.0 * p.derivative); // = K / 2 with K = 1 / (1 + T0 - T2)
        p.weight = {cplx(w, 0.0), cplx{}, cplx(-w, 0.0)};
        out.antisymmetric.push_back(p);
    }

    std::vector<double> all;
    for (const auto& p : out.symmetric) all.push_back(p.varpi);
    for (const auto& p : out.antisymmetric) all.push_back(p.varpi);
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i + 1 < all.size(); ++i) {
        if (all[i + 1] - all[i] < kDegenerateGap * omega_0) {
            out.warnings.push_back("near-degenerate bound states at " + std::to_string(all[i]) + " eV");
        }
    }
    for (const auto* family : {&out.symmetric, &out.antisymmetric}) {
        for (const auto& p : *family) {
            const double rel = std::abs(p.derivative - p.derivative_check) / std::max(std::abs(p.derivative), 1e-300);
            if (rel > 1e-4) {
                out.warnings.push_back("pole derivative cross-check differs by " + std::to_string(rel) + " at " +
                                       std::to_string(p.varpi) + " eV");
            }
        }
    }
    return out;
}

} // namespace plasmon_qi::spectrum
