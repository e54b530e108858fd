#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "convexiwave/forward.hpp"
#include "convexiwave/pipeline.hpp"

using namespace convexiwave;

namespace {

MediumProfile unit_medium(const SpaceTimeGrid& g) {
    const UniformAxis axis(g.x_min(), g.x_max(), g.nx());
    return sample_medium(MediumShape{}, axis, {}, 0.0, 3.0);
}

}  // namespace

TEST(Forward, SourceHasUnitMass) {
    const SourceModel s{30.0};
    double mass = 0.0;
    const double h = 1e-4;
    for (double x = -1.0; x <= 1.0; x += h) mass += s(x) * h;
    EXPECT_NEAR(mass, 1.0, 1e-6);
}

TEST(Forward, NullScattererGivesHalfAtTheSource) {
    // For c = 1 the exact solution is H(t - |x|) / 2, so g0 = 1/2 and g1 = 0 once
    // the smoothed source has passed.
    const SpaceTimeGrid g(-5.0, 5.0, 6.0, 3000, 300);
    const Field2D u = correct_near_origin(simulate(unit_medium(g), g), {});
    const BoundaryData d = extract_boundary(u, 0.0, 6.0);
    for (std::size_t j = 0; j < d.g0.size(); ++j) {
        if (d.g0.time(j) < 0.3) continue;
        EXPECT_NEAR(d.g0[j], 0.5, 0.01) << "t = " << d.g0.time(j);
        EXPECT_NEAR(d.g1[j], 0.0, 0.05) << "t = " << d.g0.time(j);
    }
}

TEST(Forward, CorrectionBoxResetsOnlyTheBox) {
    const SpaceTimeGrid g(-1.0, 1.0, 1.0, 300, 100);
    Field2D u(g, 0.25);
    u = correct_near_origin(std::move(u), CorrectionBox{0.0067, 0.26});
    const std::size_t i0 = 150;
    EXPECT_DOUBLE_EQ(u(i0, 0), 0.5);
    EXPECT_DOUBLE_EQ(u(i0 + 1, 26), 0.5);
    EXPECT_DOUBLE_EQ(u(i0 + 1, 27), 0.25);
    EXPECT_DOUBLE_EQ(u(i0 - 1, 0), 0.25);
    EXPECT_DOUBLE_EQ(u(i0 + 3, 0), 0.25);
}

TEST(Forward, BoundaryExtractionErrors) {
    const SpaceTimeGrid g(-1.0, 1.0, 1.0, 10, 10);
    const Field2D u(g, 0.0);
    EXPECT_THROW(extract_boundary(u, 0.05, 1.0), Error);
    try {
        extract_boundary(u, 0.0, 2.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::HorizonTooShort);
    }
    try {
        extract_boundary(u, 0.05, 1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::OffGridObservation);
    }
}

TEST(Forward, OneSidedDerivativeIsExactOnQuadratics) {
    const SpaceTimeGrid g(0.0, 1.0, 1.0, 10, 4);
    const Field2D u = Field2D::sample(g, [](double x, double t) { return x * x + 3.0 * x + t; });
    const BoundaryData d = extract_boundary(u, 0.0, 1.0);
    for (std::size_t j = 0; j < d.g1.size(); ++j) EXPECT_NEAR(d.g1[j], 3.0, 1e-12);
}

TEST(Forward, NoiseIsMultiplicativeDeterministicAndUnbiased) {
    const Signal g(0.0, 0.01, std::vector<double>(100000, 2.0));
    const Signal a = add_noise(g, 0.05, 7, 0), b = add_noise(g, 0.05, 7, 0), c = add_noise(g, 0.05, 8, 0);
    double mean = 0.0, worst = 0.0;
    bool differs = false;
    for (std::size_t k = 0; k < g.size(); ++k) {
        ASSERT_EQ(a[k], b[k]);
        differs = differs || a[k] != c[k];
        mean += a[k];
        worst = std::max(worst, std::abs(a[k] / 2.0 - 1.0));
    }
    mean /= static_cast<double>(g.size());
    EXPECT_TRUE(differs);
    EXPECT_LE(worst, 0.05);
    EXPECT_NEAR(mean, 2.0, 5.0 * 2.0 * 0.05 / std::sqrt(3.0 * g.size()));
    const Signal clean = add_noise(g, 0.0, 7);
    EXPECT_EQ(clean[5], 2.0);
}

TEST(Forward, TikhonovDerivativeOfSmoothSignal) {
    std::vector<double> v(301);
    const double h = 0.02;
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = std::sin(static_cast<double>(k) * h);
    const Signal d = tikhonov_differentiate(Signal(0.0, h, v), 1e-8);
    for (std::size_t k = 10; k + 10 < v.size(); ++k) EXPECT_NEAR(d[k], std::cos(static_cast<double>(k) * h), 5e-3);
}

TEST(Forward, SimulatedDataFollowsTheConfig) {
    RunConfig cfg;
    cfg.forward.nx = 1500;
    cfg.forward.nt = 150;
    cfg.forward.noise_delta = 0.05;
    const SimulatedData a = simulate_data(cfg), b = simulate_data(cfg);
    EXPECT_EQ(a.noisy.g0.size(), 151u);
    EXPECT_EQ(a.noisy.g0[100], b.noisy.g0[100]);
    EXPECT_NE(a.noisy.g0[100], a.clean.g0[100]);
}

TEST(Forward, CorrectedSourceHasNoDerivativeSpikeOnTheDefaultGrid) {
    // The box spans the three nodes of the one-sided stencil at x = 0.
    const SpaceTimeGrid g(-5.0, 5.0, 6.0, 3000, 300);
    const Field2D u = correct_near_origin(simulate(unit_medium(g), g), {});
    EXPECT_NEAR(extract_boundary(u, 0.0, 6.0).g1[0], 0.0, 1e-12);
}
