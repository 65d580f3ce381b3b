// special_functions.hpp: Bessel J_n and Hankel H_n^(1) of complex argument
//
// Integer orders 0..64 on the strip |z| <= 1e4, |Im z| <= 1e2.
//
//   H_0, H_1   |z| < 2   : ascending (logarithmic) series of K_0, K_1 at w = -iz
//              2..30     : Steed/Temme continued fraction for K_0, K_1 at w = -iz
//              |z| >= 30 : Hankel asymptotic expansion
//   H_n        forward recurrence (dominant direction for Im z >= 0)
//   J_n        |z| <= 4  : ascending power series, order by order
//              |z| > 4   : backward-recurrence ratios J_{n+1}/J_n normalised
//                          through the Wronskian J_{n+1}H_n - J_n H_{n+1} = 2i/(pi z)
//
// H_n is never formed as J_n + iY_n: for large Im z that sum cancels to e^{-2 Im z}.
// Internally everything in the upper half plane carries the exponential scale
// e^{-Im z} (J) and e^{+Im z} (H) factored out; scaled_cylinder_arrays exposes that
// form without the |Im z| limit. The lower half plane is reached by J(conj z) = conj J(z) and
// H^(1)(z) = 2J(z) - conj(H^(1)(conj z)).

#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "plasmon_qi/errors.hpp"

namespace plasmon_qi::special {

using cplx = std::complex<double>;

inline constexpr int kMaxOrder = 64;
inline constexpr double kMaxModulus = 1.0e4;
inline constexpr double kMaxImag = 1.0e2;

/// Magnitude above which a Hankel value is treated as overflowed.
inline constexpr double kHankelOverflow = 1.0e300;

enum class CylinderKind { J, H1 };

namespace detail {

inline constexpr double kEulerGamma = 0.577215664901532860606512090082402431;
inline constexpr int kMaxInternalOrder = kMaxOrder + 1;

inline void check_argument(cplx z, const char* fn) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        throw DomainError(std::string(fn) + ": non-finite argument");
    }
    if (std::abs(z) > kMaxModulus || std::abs(z.imag()) > kMaxImag) {
        throw DomainError(std::string(fn) + ": argument outside |z| <= 1e4, |Im z| <= 1e2");
    }
}

inline void check_order(int n, int max_order, const char* fn) {
    if (n < 0 || n > max_order) {
        throw DomainError(std::string(fn) + ": order " + std::to_string(n) +
                          " outside [0, " + std::to_string(max_order) + "]");
    }
}

inline cplx bessel_j_series(int n, cplx z) {
    const cplx half = 0.5 * z;
    cplx term = 1.0;
    for (int k = 1; k <= n; ++k) term *= half / static_cast<double>(k);
    if (term == 0.0) return 0.0;
    const cplx q = -half * half;
    cplx sum = term;
    for (int k = 1; k < 1000; ++k) {
        term *= q / (static_cast<double>(k) * static_cast<double>(n + k));
        sum += term;
        if (std::abs(term) <= 1.0e-17 * std::abs(sum)) break;
    }
    return sum;
}

// K_0 and K_1 from the logarithmic ascending series; accurate for |w| <= 2.
inline std::pair<cplx, cplx> bessel_k01_series(cplx w) {
    const cplx y = 0.25 * w * w;
    const cplx lg = std::log(0.5 * w);
    cplx i0 = 0.0, i1 = 0.0, s0 = 0.0, s1 = 0.0;
    cplx t0 = 1.0; // y^k / (k!)^2
    cplx t1 = 1.0; // y^k / (k! (k+1)!)
    double hk = 0.0;
    for (int k = 0; k < 200; ++k) {
        const double kp1 = k + 1.0;
        i0 += t0;
        s0 += hk * t0;
        i1 += t1;
        s1 += (-2.0 * kEulerGamma + 2.0 * hk + 1.0 / kp1) * t1;
        if (std::abs(t0) < 1.0e-18 * std::abs(i0) && k > 2) break;
        hk += 1.0 / kp1;
        t0 *= y / (kp1 * kp1);
        t1 *= y / (kp1 * (kp1 + 1.0));
    }
    const cplx bi1 = 0.5 * w * i1;
    const cplx k0 = -(lg + kEulerGamma) * i0 + s0;
    const cplx k1 = 1.0 / w + lg * bi1 - 0.25 * w * s1;
    return {k0, k1};
}

// K_0 and K_1 by Steed's algorithm for the second continued fraction
// (Temme's normalisation). Valid for Re w >= 0, |w| >= 2.
inline std::pair<cplx, cplx> bessel_k01_cf2(cplx w) {
    constexpr double eps = 1.0e-16;
    constexpr int max_iter = 20000;
    const double a1 = 0.25;
    cplx b = 2.0 * (1.0 + w);
    cplx d = 1.0 / b;
    cplx h = d;
    cplx delh = d;
    cplx q1 = 0.0;
    cplx q2 = 1.0;
    double c = a1;
    cplx q = a1;
    double a = -a1;
    cplx s = 1.0 + q * delh;
    int i = 1;
    for (; i < max_iter; ++i) {
        a -= 2.0 * i;
        c = -a * c / (i + 1.0);
        const cplx qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const cplx dels = q * delh;
        s += dels;
        if (std::abs(dels) < eps * std::abs(s) && std::abs(delh) < eps * std::abs(h)) break;
    }
    if (i >= max_iter) {
        throw ConvergenceError("bessel_k01_cf2: continued fraction did not converge", std::abs(delh));
    }
    h *= a1;
    // exp(-w) without its real decay e^{-Re w}; the caller keeps that scale
    const cplx k0 = std::sqrt(std::numbers::pi / (2.0 * w)) * std::exp(cplx(0.0, -w.imag())) / s;
    const cplx k1 = k0 * (w + 0.5 - h) / w;
    return {k0, k1};
}

inline std::pair<cplx, cplx> hankel01_asymptotic(cplx z) {
    const cplx iu(0.0, 1.0);
    const cplx pref = std::sqrt(2.0 / (std::numbers::pi * z));
    std::pair<cplx, cplx> out;
    for (int nu = 0; nu <= 1; ++nu) {
        const double mu = 4.0 * nu * nu;
        cplx term = 1.0;
        cplx sum = 1.0;
        double last = 1.0;
        for (int k = 1; k < 200; ++k) {
            const double odd = 2.0 * k - 1.0;
            term *= iu * (mu - odd * odd) / (8.0 * k * z);
            const double mag = std::abs(term);
            if (mag > last) break; // past the smallest term of the asymptotic series
            sum += term;
            last = mag;
            if (mag < 1.0e-18 * std::abs(sum)) break;
        }
        // e^{iz} with the e^{-Im z} decay removed
        const cplx phase = std::exp(iu * (z.real() - 0.5 * nu * std::numbers::pi - 0.25 * std::numbers::pi));
        (nu == 0 ? out.first : out.second) = pref * phase * sum;
    }
    return out;
}

// e^{Im z} H_0^(1)(z), e^{Im z} H_1^(1)(z) for Im z >= 0, z != 0.
inline std::pair<cplx, cplx> hankel01_scaled(cplx z) {
    const double r = std::abs(z);
    if (r >= 30.0) return hankel01_asymptotic(z);
    const cplx w(z.imag(), -z.real()); // -i z
    const cplx iu(0.0, 1.0);
    if (r <= 2.0) {
        const auto [k0, k1] = bessel_k01_series(w);
        const double up = std::exp(z.imag());
        return {-2.0 * iu / std::numbers::pi * k0 * up, -2.0 / std::numbers::pi * k1 * up};
    }
    const auto [k0, k1] = bessel_k01_cf2(w);
    return {-2.0 * iu / std::numbers::pi * k0, -2.0 / std::numbers::pi * k1};
}

} // namespace detail

/// J_n and H_n^(1) for all orders 0..max_order at one argument.
/// When scale != 0 the stored values are J_n e^{-scale} and H_n e^{+scale}.
struct CylinderArrays {
    cplx z{};
    double scale = 0.0;
    std::vector<cplx> j;
    std::vector<cplx> h;
    int h_valid = -1; ///< highest order with a representable Hankel value; -1 when none

    int max_order() const { return static_cast<int>(j.size()) - 1; }

    /// d/dz of the requested kind at order n (n < max_order).
    cplx derivative(CylinderKind kind, int n) const {
        const auto& f = kind == CylinderKind::J ? j : h;
        return n == 0 ? -f[1] : 0.5 * (f[n - 1] - f[n + 1]);
    }
};

namespace detail {

// Scaled arrays, Im z >= 0.
inline CylinderArrays cylinder_arrays_upper(cplx z, int max_order, bool with_hankel) {
    CylinderArrays out;
    out.z = z;
    out.scale = z.imag();
    out.j.assign(max_order + 1, cplx(0.0));
    out.h.assign(max_order + 1, cplx(std::nan(""), std::nan("")));

    if (z == 0.0) {
        out.j[0] = 1.0;
        return out;
    }

    const double r = std::abs(z);
    const bool series_j = r <= 4.0;

    // Hankel values up to max_order + 1 (the extra order feeds the Wronskian).
    std::vector<cplx> h;
    int h_valid = -1;
    if (with_hankel || !series_j) {
        const int top = max_order + 1;
        h.assign(top + 1, cplx(std::nan(""), std::nan("")));
        const auto [h0, h1] = hankel01_scaled(z);
        h[0] = h0;
        h[1] = h1;
        h_valid = 1;
        const cplx inv_z = 1.0 / z;
        for (int n = 1; n < top; ++n) {
            const cplx next = 2.0 * n * inv_z * h[n] - h[n - 1];
            if (!std::isfinite(next.real()) || !std::isfinite(next.imag()) ||
                std::abs(next) > kHankelOverflow) {
                break;
            }
            h[n + 1] = next;
            h_valid = n + 1;
        }
        for (int n = 0; n <= std::min(h_valid, max_order); ++n) out.h[n] = h[n];
        out.h_valid = std::min(h_valid, max_order);
    }

    if (series_j) {
        const double down = std::exp(-z.imag());
        for (int n = 0; n <= max_order; ++n) out.j[n] = bessel_j_series(n, z) * down;
        return out;
    }

    // Ratios rho_n = J_n / J_{n-1} by backward recurrence from well above max(n, |z|).
    const int start = std::max(max_order + 1, static_cast<int>(r)) + 30 +
                      static_cast<int>(8.0 * std::cbrt(0.5 * r));
    const cplx inv_z = 1.0 / z;
    std::vector<cplx> rho(max_order + 2, cplx(0.0));
    cplx ratio = 0.0;
    for (int k = start; k >= 1; --k) {
        ratio = 1.0 / (2.0 * k * inv_z - ratio);
        if (k <= max_order + 1) rho[k] = ratio;
    }
    const cplx wronskian = cplx(0.0, 2.0 / std::numbers::pi) * inv_z;
    for (int n = 0; n <= max_order; ++n) {
        out.j[n] = wronskian / (rho[n + 1] * h[n] - h[n + 1]);
    }
    return out;
}

inline void unscale(CylinderArrays& a) {
    if (a.scale == 0.0) return;
    const double up = std::exp(a.scale);
    const double down = 1.0 / up;
    for (auto& v : a.j) v *= up;
    int valid = -1;
    for (int n = 0; n <= a.h_valid; ++n) {
        a.h[n] *= down;
        if (!std::isfinite(a.h[n].real()) || !std::isfinite(a.h[n].imag()) ||
            std::abs(a.h[n]) > kHankelOverflow) {
            break;
        }
        valid = n;
    }
    for (int n = valid + 1; n < static_cast<int>(a.h.size()); ++n) a.h[n] = cplx(std::nan(""), std::nan(""));
    a.h_valid = valid;
    a.scale = 0.0;
}

} // namespace detail

/// Exponentially scaled arrays for Im z >= 0: j[n] = J_n e^{-Im z}, h[n] = H_n e^{Im z}.
/// Only |z| <= 1e4 is enforced, so evanescent arguments far beyond the public strip work.
inline CylinderArrays scaled_cylinder_arrays(cplx z, int max_order, bool with_hankel = true) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || std::abs(z) > kMaxModulus) {
        throw DomainError("scaled_cylinder_arrays: argument outside |z| <= 1e4");
    }
    if (z.imag() < 0.0) throw DomainError("scaled_cylinder_arrays: requires Im z >= 0");
    detail::check_order(max_order, detail::kMaxInternalOrder, "scaled_cylinder_arrays");
    return detail::cylinder_arrays_upper(z, std::max(max_order, 1), with_hankel);
}

/// All orders 0..max_order at z. Hankel values are omitted (h_valid = -1) unless
/// requested; max_order may reach kMaxOrder + 1 so that derivatives up to
/// kMaxOrder are available.
inline CylinderArrays cylinder_arrays(cplx z, int max_order, bool with_hankel = true) {
    detail::check_argument(z, "cylinder_arrays");
    detail::check_order(max_order, detail::kMaxInternalOrder, "cylinder_arrays");
    max_order = std::max(max_order, 1);
    if (z.imag() >= 0.0) {
        CylinderArrays out = detail::cylinder_arrays_upper(z, max_order, with_hankel);
        detail::unscale(out);
        return out;
    }

    const cplx zc = std::conj(z);
    CylinderArrays mirror = detail::cylinder_arrays_upper(zc, max_order, with_hankel);
    detail::unscale(mirror);
    CylinderArrays out;
    out.z = z;
    out.j.resize(mirror.j.size());
    out.h.assign(mirror.h.size(), cplx(std::nan(""), std::nan("")));
    for (std::size_t n = 0; n < mirror.j.size(); ++n) out.j[n] = std::conj(mirror.j[n]);
    if (with_hankel) {
        out.h_valid = -1;
        for (int n = 0; n <= mirror.h_valid; ++n) {
            const cplx value = 2.0 * out.j[n] - std::conj(mirror.h[n]);
            if (!std::isfinite(value.real()) || !std::isfinite(value.imag()) ||
                std::abs(value) > kHankelOverflow) {
                break;
            }
            out.h[n] = value;
            out.h_valid = n;
        }
    }
    return out;
}

inline cplx bessel_j(int n, cplx z) {
    detail::check_order(n, kMaxOrder, "bessel_j");
    detail::check_argument(z, "bessel_j");
    return cylinder_arrays(z, n, false).j[n];
}

inline cplx hankel1(int n, cplx z) {
    detail::check_order(n, kMaxOrder, "hankel1");
    detail::check_argument(z, "hankel1");
    if (z == 0.0) throw DomainError("hankel1: singular at z = 0");
    const auto arrays = cylinder_arrays(z, n, true);
    if (arrays.h_valid < n) {
        throw DomainError("hankel1: H_" + std::to_string(n) + " overflows at this argument");
    }
    return arrays.h[n];
}

/// Derivative with respect to the argument; the chain-rule factor belongs to the caller.
inline cplx radial_derivative(CylinderKind kind, int n, cplx z) {
    detail::check_order(n, kMaxOrder, "radial_derivative");
    detail::check_argument(z, "radial_derivative");
    if (kind == CylinderKind::H1 && z == 0.0) {
        throw DomainError("radial_derivative: H1 singular at z = 0");
    }
    const auto arrays = cylinder_arrays(z, n + 1, kind == CylinderKind::H1);
    if (kind == CylinderKind::H1 && arrays.h_valid < n + 1) {
        throw DomainError("radial_derivative: H1 overflows at this argument");
    }
    return arrays.derivative(kind, n);
}

} // namespace plasmon_qi::special
