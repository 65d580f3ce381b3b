#include <cmath>
#include <numbers>
#include <numeric>

#include <gtest/gtest.h>

#include "plasmon_qi/spectral_matrix.hpp"

using namespace plasmon_qi;

namespace {

green::PhysicalSystem wire_system(int count = 2, double d = 5.0) {
    green::PhysicalSystem s;
    s.wire.radius = 0.01 * units::wavelength(2.0);
    s.emitters.count = count;
    s.emitters.r_a = 0.012 * units::wavelength(2.0);
    s.emitters.d = d;
    return s;
}

green::PhysicalSystem vacuum_system(int count = 2) {
    auto s = wire_system(count, 50.0);
    s.metal.model = MetalModel::vacuum;
    return s;
}

} // namespace

TEST(Channels, ClosedForms) {
    const auto two = spectral::analytic_channels({1.0, 0.3});
    EXPECT_DOUBLE_EQ(two[0], 1.3);
    EXPECT_DOUBLE_EQ(two[1], 0.7);
    const auto same = spectral::analytic_channels({0.4, 0.0});
    EXPECT_EQ(same[0], same[1]);

    const auto three = spectral::analytic_channels({1.0, 0.5, 0.2});
    EXPECT_NEAR(three[0], 0.8, 1e-15);
    EXPECT_NEAR(three[1], (2.2 - std::sqrt(2.04)) / 2.0, 1e-15);
    EXPECT_NEAR(three[2], (2.2 + std::sqrt(2.04)) / 2.0, 1e-15);
    EXPECT_NEAR(three[1], 0.385857, 1e-6);
    EXPECT_NEAR(three[2], 1.814143, 1e-6);

    Eigen::Matrix3d M;
    M << 1.0, 0.5, 0.2, 0.5, 1.0, 0.5, 0.2, 0.5, 1.0;
    auto numeric = spectral::numeric_channels(M);
    auto sorted = three;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(numeric[k], sorted[k], 1e-14);
}

TEST(Channels, TraceIdentityForLargerN) {
    const std::vector<double> jm{1.0, 0.6, 0.25, -0.1, 0.05};
    const auto d = spectral::analytic_channels(jm);
    EXPECT_NEAR(std::accumulate(d.begin(), d.end(), 0.0), 5.0, 1e-12);
    for (std::size_t k = 1; k < d.size(); ++k) EXPECT_GE(d[k - 1], d[k]);
}

TEST(Grid, ShapeAndDensity) {
    const auto s = wire_system();
    spectral::GridSpec spec;
    spec.points = 300;
    const auto g = spectral::make_grid(s, spec);
    ASSERT_EQ(g.size(), 300u);
    EXPECT_DOUBLE_EQ(g.front(), 2e-3);
    EXPECT_DOUBLE_EQ(g.back(), spectral::default_omega_max(s));
    EXPECT_DOUBLE_EQ(spectral::default_omega_max(s), 6.0);
    for (std::size_t i = 1; i < g.size(); ++i) EXPECT_GT(g[i], g[i - 1]);
    // spacing near omega_0 and the surface plasmon is finer than the average
    const double avg = (g.back() - g.front()) / (g.size() - 1);
    auto local = [&](double w) {
        const auto it = std::lower_bound(g.begin(), g.end(), w);
        return *it - *(it - 1);
    };
    EXPECT_LT(local(2.0), local(5.5));
    EXPECT_LT(local(s.metal.drude.surface_plasmon_frequency()), 0.5 * avg);

    spec.points = 3;
    EXPECT_THROW(spectral::make_grid(s, spec), ValidationError);
    spec.points = 10;
    spec.omega_min = 5.0;
    spec.omega_max = 4.0;
    EXPECT_THROW(spectral::make_grid(s, spec), ValidationError);
}

TEST(Table, ValidationRejectsBadData) {
    EXPECT_THROW(spectral::SpectralTable::from_samples({1.0, 1.0}, {{0.0, 0.0}}), ValidationError);
    EXPECT_THROW(spectral::SpectralTable::from_samples({1.0, 2.0}, {{0.0}}), ValidationError);
    EXPECT_THROW(spectral::SpectralTable::from_samples({1.0, 2.0}, {{0.0, std::nan("")}}), ValidationError);
    EXPECT_THROW(spectral::SpectralTable::from_samples({0.0, 2.0}, {{0.0, 0.0}}), ValidationError);
}

TEST(Table, Interpolation) {
    const std::vector<double> w{0.5, 1.0, 1.7, 2.0, 3.1};
    std::vector<double> lin, quad;
    for (double x : w) {
        lin.push_back(2.0 * x - 1.0);
        quad.push_back(0.3 * x * x - x + 2.0);
    }
    const auto t = spectral::SpectralTable::from_samples(w, {lin, quad});
    EXPECT_EQ(spectral::interpolate(t, 1.7)[0], lin[2]);
    EXPECT_EQ(spectral::interpolate(t, 1.7)[1], quad[2]);
    const double mid = 0.5 * (1.0 + 1.7);
    EXPECT_NEAR(spectral::interpolate(t, mid)[0], 0.5 * (lin[1] + lin[2]), 1e-14);
    for (double x = 0.5; x <= 3.1; x += 0.037) {
        EXPECT_NEAR(spectral::interpolate(t, x)[1], 0.3 * x * x - x + 2.0, 1e-13);
    }
    EXPECT_THROW(spectral::interpolate(t, 3.5), DomainError);
}

TEST(Table, FreeSpaceTableMatchesOracle) {
    const auto s = vacuum_system(1);
    spectral::GridSpec spec;
    spec.points = 200;
    const auto t = spectral::build_table(s, {}, spec, 1);
    ASSERT_EQ(t.count(), 1);
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double expect = s.emitters.gamma_0 * std::pow(t.omega[i] / 2.0, 3) / (2.0 * std::numbers::pi);
        EXPECT_NEAR(t.j[0][i] / expect, 1.0, 5e-3);
    }
}

TEST(Table, DeterministicAcrossThreadCounts) {
    const auto s = vacuum_system(3);
    spectral::GridSpec spec;
    spec.points = 64;
    const auto a = spectral::build_table(s, {}, spec, 1);
    const auto b = spectral::build_table(s, {}, spec, 3);
    EXPECT_EQ(a.omega, b.omega);
    EXPECT_EQ(a.j, b.j);
}

TEST(Table, WireTableIsPositiveSemidefinite) {
    const auto s = wire_system(3, 5.0);
    spectral::GridSpec spec;
    spec.points = 40;
    const auto t = spectral::build_table(s, {}, spec, 0);
    const auto ch = spectral::eigen_channels(t);
    for (std::size_t i = 0; i < t.size(); ++i) {
        const auto e = spectral::numeric_channels(t.matrix(i));
        EXPECT_GE(e.back(), -1e-8 * e.front()) << t.omega[i];
        const auto d = ch.sorted_at(i);
        double trace = 0.0;
        for (int c = 0; c < 3; ++c) {
            EXPECT_NEAR(d[c], e[c], 1e-12 * e.front());
            trace += d[c];
        }
        EXPECT_NEAR(trace, 3.0 * t.j[0][i], 1e-9 * std::abs(3.0 * t.j[0][i]));
    }
}

TEST(Table, GridRefinementChangesLittle) {
    const auto s = wire_system(2, 5.0);
    spectral::GridSpec coarse;
    coarse.points = 40;
    coarse.omega_min = 1.5;
    coarse.omega_max = 2.5;
    auto fine = coarse;
    fine.points = 79;
    const auto a = spectral::build_table(s, {}, coarse, 0);
    const auto b = spectral::build_table(s, {}, fine, 0);
    for (double w = 1.55; w < 2.45; w += 0.013) {
        const auto ja = spectral::interpolate(a, w);
        const auto jb = spectral::interpolate(b, w);
        for (int m = 0; m < 2; ++m) EXPECT_LT(std::abs(ja[m] - jb[m]), 1e-4 * std::abs(jb[0])) << w << " " << m;
    }
}
