#include <cmath>
#include <complex>
#include <numbers>

#include <gtest/gtest.h>

#include "plasmon_qi/dynamics.hpp"

using namespace plasmon_qi;
using cplx = std::complex<double>;

namespace {

// K(t) = (g/2) e^{-(i wc + W) t}: the full-line Lorentzian J = (g W / 2 pi) / ((w - wc)^2 + W^2)
struct Lorentzian {
    double w0 = 2.0, wc = 2.2, W = 0.3, g = 0.1;

    cplx a() const { return {W, wc}; }
    std::pair<cplx, cplx> roots() const {
        const cplx B = cplx(0.0, w0) + a(), C = cplx(0.0, w0) * a() + g / 2.0;
        const cplx disc = std::sqrt(B * B - 4.0 * C);
        return {(-B + disc) / 2.0, (-B - disc) / 2.0};
    }
    // c(t) from the two poles of (s + a) / ((s + i w0)(s + a) + g/2)
    cplx exact(double t) const {
        const auto [s1, s2] = roots();
        return (s1 + a()) / (s1 - s2) * std::exp(s1 * t) + (s2 + a()) / (s2 - s1) * std::exp(s2 * t);
    }
    double horizon(double lifetimes) const {
        const auto [s1, s2] = roots();
        return lifetimes / std::min(-s1.real(), -s2.real());
    }
    dynamics::MemoryKernel kernel(double dt, std::size_t steps) const {
        std::vector<cplx> k(steps + 1);
        for (std::size_t n = 0; n <= steps; ++n) k[n] = 0.5 * g * std::exp(-a() * (dt * n));
        return dynamics::MemoryKernel::from_samples(dt, {k});
    }
    double density(double w) const { return g * W / (2.0 * std::numbers::pi) / ((w - wc) * (w - wc) + W * W); }
};

double max_error(const Lorentzian& L, std::size_t steps, double T) {
    const double dt = T / steps;
    const auto tr = dynamics::evolve(L.kernel(dt, steps), L.w0, {1.0}, steps);
    double e = 0.0;
    for (std::size_t n = 0; n <= steps; ++n) e = std::max(e, std::abs(tr.c[n][0] - L.exact(tr.time(n))));
    return e;
}

} // namespace

TEST(Moments, MatchQuadrature) {
    for (double th : {0.0, 1e-3, 0.7, 0.999, 1.0, 2.5, 40.0, -3.0}) {
        const auto mu = dynamics::detail::oscillatory_moments(th);
        for (int k = 0; k < 4; ++k) {
            cplx ref = 0.0;
            const int M = 4000;
            for (int i = 0; i < M; ++i) {
                // midpoint rule, 4000 panels
                const double s = (i + 0.5) / M;
                ref += std::pow(s, k) * std::polar(1.0, -th * s) / double(M);
            }
            EXPECT_LT(std::abs(mu[k] - ref), 1e-6) << th << " " << k;
        }
    }
}

TEST(Kernel, FlatBandClosedForm) {
    // J = c on [a, b]  ->  K(t) = c (e^{-iat} - e^{-ibt}) / (it)
    const double a = 0.5, b = 3.0, c = 0.02;
    std::vector<double> w, j;
    for (int i = 0; i <= 37; ++i) {
        w.push_back(a + (b - a) * std::pow(i / 37.0, 1.3));
        j.push_back(c);
    }
    const auto t = spectral::SpectralTable::from_samples(w, {j});
    const double dt = 0.05;
    const auto k = dynamics::memory_kernel(t, dt, 400);
    EXPECT_NEAR(k.at(0, 0).real(), c * (b - a), 1e-14);
    EXPECT_EQ(k.at(0, 0).imag(), 0.0);
    for (std::size_t n = 1; n <= 400; n += 7) {
        const double tt = dt * n;
        const cplx expect = c * (std::polar(1.0, -a * tt) - std::polar(1.0, -b * tt)) / cplx(0.0, tt);
        EXPECT_LT(std::abs(k.at(0, n) - expect), 1e-13) << tt;
    }
}

TEST(Kernel, ZeroTableGivesZeroKernel) {
    const auto t = spectral::SpectralTable::from_samples({0.1, 1.0, 2.0}, {{0.0, 0.0, 0.0}}, LowTail::cubic);
    const auto k = dynamics::memory_kernel(t, 0.01, 50);
    for (std::size_t n = 0; n <= 50; ++n) EXPECT_EQ(k.at(0, n), cplx(0.0, 0.0));
}

TEST(Kernel, RealAtTimeZero) {
    std::vector<double> w, j0, j1;
    for (int i = 1; i <= 50; ++i) {
        w.push_back(0.1 * i);
        j0.push_back(std::exp(-w.back()));
        j1.push_back(0.3 * std::sin(w.back()));
    }
    const auto k = dynamics::memory_kernel(spectral::SpectralTable::from_samples(w, {j0, j1}, LowTail::cubic), 0.01, 3);
    EXPECT_EQ(k.at(0, 0).imag(), 0.0);
    EXPECT_EQ(k.at(1, 0).imag(), 0.0);
}

TEST(Kernel, TruncatedLorentzianWithinMissingWeight) {
    // the table only sees [w_lo, w_hi]; the difference from the full-line kernel is
    // bounded by the spectral weight outside the window
    const Lorentzian L;
    const double lo = 0.2, hi = 6.0;
    std::vector<double> w, j;
    for (int i = 0; i < 3000; ++i) {
        w.push_back(lo + (hi - lo) * i / 2999.0);
        j.push_back(L.density(w.back()));
    }
    const auto k = dynamics::memory_kernel(spectral::SpectralTable::from_samples(w, {j}), 0.05, 600);
    const double missing = L.g / (2.0 * std::numbers::pi) *
                           (std::numbers::pi - std::atan((hi - L.wc) / L.W) + std::atan((lo - L.wc) / L.W));
    const auto ref = L.kernel(0.05, 600);
    double worst = 0.0;
    for (std::size_t n = 0; n <= 600; ++n) worst = std::max(worst, std::abs(k.at(0, n) - ref.at(0, n)));
    EXPECT_LE(worst, missing * 1.001);
    EXPECT_GT(worst, 0.5 * missing); // the truncation really shows at t = 0
}

TEST(Evolve, FreeEvolution) {
    const auto t = spectral::SpectralTable::from_samples({0.1, 1.0, 2.0}, {{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}});
    const double T = 10.0;
    const std::size_t steps = 4000;
    const auto tr = dynamics::evolve(t, 2.0, {1.0, 0.0}, T, steps);
    const double dt = T / steps;
    for (std::size_t n = 0; n <= steps; n += 50) {
        EXPECT_NEAR(std::abs(tr.c[n][0]), 1.0, 1e-12);
        EXPECT_EQ(tr.c[n][1], cplx(0.0, 0.0));
        EXPECT_NEAR(tr.norm2(n), 1.0, 1e-12);
        // trapezoid phase error 8 t (w0 dt / 2)^3 / (3 dt)
        EXPECT_LT(std::abs(tr.c[n][0] - std::polar(1.0, -2.0 * tr.time(n))), std::pow(2.0 * dt, 2) * tr.time(n) * 2.0 / 12.0 + 1e-12);
    }
}

TEST(Evolve, LorentzianMatchesClosedForm) {
    const Lorentzian L;
    const double T = L.horizon(10.0);
    EXPECT_LT(max_error(L, 32000, T), 1e-4);
}

TEST(Evolve, SecondOrderConvergence) {
    const Lorentzian L;
    const double T = L.horizon(3.0);
    const double e1 = max_error(L, 1500, T), e2 = max_error(L, 3000, T), e3 = max_error(L, 6000, T);
    EXPECT_GT(e1 / e2, 3.6);
    EXPECT_LT(e1 / e2, 4.4);
    EXPECT_GT(e2 / e3, 3.6);
    EXPECT_LT(e2 / e3, 4.4);
}

TEST(Evolve, NormNeverExceedsOneForPositiveTable) {
    std::vector<double> w, j0, j1;
    for (int i = 1; i <= 200; ++i) {
        w.push_back(0.03 * i);
        const double x = w.back();
        j0.push_back(0.02 * x * x * x / (1.0 + std::pow(x - 2.0, 2) / 0.01) + 1e-4 * x);
        j1.push_back(0.7 * j0.back() * std::cos(3.0 * x));
    }
    // |J1| <= J0 keeps the 2x2 matrix PSD
    const auto t = spectral::SpectralTable::from_samples(w, {j0, j1}, LowTail::cubic);
    const auto tr = dynamics::evolve(t, 2.0, {cplx(0.6, 0.0), cplx(0.0, 0.8)}, 60.0, 6000);
    for (std::size_t n = 0; n <= tr.steps(); ++n) EXPECT_LE(tr.norm2(n), 1.0 + 1e-9);
    EXPECT_LT(tr.norm2(tr.steps()), 0.99);
}

TEST(Evolve, GrowingKernelIsReported) {
    // an active medium (negative coupling) pumps the emitter above unit norm
    const Lorentzian L;
    auto k = L.kernel(0.01, 3000);
    for (auto& v : k.re[0]) v = -v;
    for (auto& v : k.im[0]) v = -v;
    EXPECT_THROW(dynamics::evolve(k, L.w0, {1.0}, 3000), NormViolationError);
}

TEST(Evolve, RejectsBadInput) {
    const auto t = spectral::SpectralTable::from_samples({0.1, 1.0, 2.0}, {{0.0, 0.0, 0.0}});
    EXPECT_THROW(dynamics::evolve(t, 2.0, {1.0, 0.0}, 1.0, 10), ValidationError);
    EXPECT_THROW(dynamics::evolve(t, 2.0, {1.0}, 0.0, 10), ValidationError);
    EXPECT_THROW(dynamics::evolve(t, 2.0, {1.0}, 1.0, 0), ValidationError);
    EXPECT_EQ(dynamics::default_steps(12.0, 600.0), 72000u);
}

TEST(Evolve, CoarseStepWarns) {
    const auto t = spectral::SpectralTable::from_samples({0.1, 1.0, 12.0}, {{0.0, 0.0, 0.0}});
    std::vector<std::string> w;
    dynamics::evolve(t, 2.0, {1.0}, 1.0, 10, &w);
    ASSERT_FALSE(w.empty());
}

namespace {

spectral::SpectralTable three_emitter_table() {
    std::vector<double> w, j0, j1, j2;
    for (int i = 1; i <= 160; ++i) {
        w.push_back(0.04 * i);
        const double x = w.back();
        j0.push_back(0.01 * x * x * x / (1.0 + std::pow(x - 2.1, 2) / 0.02) + 1e-4 * x);
        j1.push_back(0.6 * j0.back() * std::cos(2.0 * x));
        j2.push_back(0.3 * j0.back() * std::cos(4.0 * x));
    }
    return spectral::SpectralTable::from_samples(w, {j0, j1, j2}, LowTail::cubic);
}

} // namespace

TEST(Evolve, MirrorSymmetryOfThreeEmitters) {
    const auto t = three_emitter_table();
    const auto a = dynamics::evolve(t, 2.0, {1.0, 0.0, 0.0}, 40.0, 3000);
    const auto b = dynamics::evolve(t, 2.0, {0.0, 0.0, 1.0}, 40.0, 3000);
    for (std::size_t n = 0; n <= a.steps(); ++n) {
        // same arithmetic up to summation order in the matrix products
        EXPECT_LT(std::abs(a.c[n][0] - b.c[n][2]), 1e-14);
        EXPECT_LT(std::abs(a.c[n][1] - b.c[n][1]), 1e-14);
        EXPECT_LT(std::abs(a.c[n][2] - b.c[n][0]), 1e-14);
    }
}

TEST(Evolve, LinearInInitialAmplitudes) {
    const auto t = three_emitter_table();
    const cplx alpha(0.3, -0.4);
    const auto a = dynamics::evolve(t, 2.0, {0.6, 0.0, cplx(0.0, 0.8)}, 40.0, 3000);
    const auto b = dynamics::evolve(t, 2.0, {alpha * 0.6, 0.0, alpha * cplx(0.0, 0.8)}, 40.0, 3000);
    for (std::size_t n = 0; n <= a.steps(); ++n)
        for (int l = 0; l < 3; ++l) EXPECT_LT(std::abs(alpha * a.c[n][l] - b.c[n][l]), 1e-13);
}
