#include <cmath>
#include <functional>

#include <gtest/gtest.h>

#include "convexiwave/medium.hpp"
#include "convexiwave/transform.hpp"

using namespace convexiwave;

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
               double whole, double tol, int depth) {
    const double m = 0.5 * (a + b), lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) return left + right + (left + right - whole) / 15.0;
    return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return simpson(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50);
}

}  // namespace

TEST(Transform, TravelTimeOfTheSmoothBumpMatchesQuadrature) {
    MediumShape shape;
    shape.pieces.push_back(BumpPiece{0.5, 0.2, 10.0});
    const UniformAxis axis(-5.0, 5.0, 3000);
    const TravelTime tau = travel_time(sample_medium(shape, axis, {}, 0.0, 3.0));
    // Split at the support so the adaptive rule cannot step over the bump.
    auto slowness = [&](double x) { return std::sqrt(shape(x)); };
    const double exact = 0.3 + adaptive_simpson(slowness, 0.3, 0.7, 1e-12) + 2.3;
    EXPECT_NEAR(tau.at(3.0), exact, 1e-5);
    EXPECT_NEAR(tau.at(0.0), 0.0, 1e-14);
    EXPECT_NEAR(tau.at(-1.0), -1.0, 1e-12);
}

TEST(Transform, TravelTimeOfAStepIsPiecewiseLinear) {
    MediumShape shape;
    shape.pieces.push_back(StepPiece{0.6, 0.1, 4.0});
    const UniformAxis axis(0.0, 3.0, 300);
    const TravelTime tau = travel_time(sample_medium(shape, axis, {}, 0.0, 3.0));
    // 0.5 at speed 1, 0.2 at sqrt(c) = 2, the rest at 1; one cell of smearing at each jump.
    EXPECT_NEAR(tau.at(3.0), 0.5 + 0.4 + 2.3, 0.011);
    EXPECT_NEAR(tau.at(0.4), 0.4, 1e-12);
}

TEST(Transform, FloorAndCoefficientRoundTrip) {
    EXPECT_NEAR(q_floor_for(15.0), 1.0 / (2.0 * std::pow(15.0, 0.25)), 1e-15);
    const SpaceTimeGrid g(0.0, 1.0, 1.0, 4, 4);
    Field2D q(g, 0.5);
    const std::vector<double> c{1.0, 2.0, 5.0, 11.0, 15.0};
    for (std::size_t i = 0; i < c.size(); ++i) q(i, 0) = 1.0 / (2.0 * std::pow(c[i], 0.25));
    const MediumProfile back = c_from_q(QField(q, q_floor_for(15.0)));
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(back.values()[i], c[i], 1e-12);
}

TEST(Transform, FloorViolationIsReported) {
    const SpaceTimeGrid g(0.0, 1.0, 1.0, 4, 4);
    Field2D q(g, 0.5);
    q(2, 0) = 0.1;
    try {
        c_from_q(QField(q, q_floor_for(15.0)));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::FloorViolation);
    }
}

TEST(Transform, ShiftedWaveOnTheUnitMedium) {
    // u(x, t) = f(t - x) with tau(x) = x gives q(x, t) = f(t).
    auto f = [](double s) { return s > 0.0 ? 0.5 + 0.1 * std::sin(2.0 * s) : 0.5; };
    const SpaceTimeGrid gu(0.0, 3.0, 8.0, 600, 1600);
    const Field2D u = Field2D::sample(gu, [&](double x, double t) { return f(t - x); });
    const UniformAxis axis(0.0, 3.0, 600);
    const TravelTime tau = travel_time(sample_medium(MediumShape{}, axis, {}, 0.0, 3.0));
    const SpaceTimeGrid gq(0.0, 3.0, 4.0, 30, 40);
    const QField q = q_from_u(u, tau, gq, 15.0);
    for (std::size_t i = 0; i < gq.x_nodes(); ++i)
        for (std::size_t j = 0; j < gq.t_nodes(); ++j) EXPECT_NEAR(q.values(i, j), f(gq.t(j)), 2e-4);
    const SpaceTimeGrid too_long(0.0, 3.0, 6.0, 30, 40);
    EXPECT_THROW(q_from_u(u, tau, too_long, 15.0), Error);
}

TEST(Transform, ResidualVanishesForTheUnitMediumSolution) {
    // q = 1/2 everywhere is the transformed null-scatterer solution.
    const SpaceTimeGrid g(0.0, 3.0, 6.0, 30, 60);
    const QField q(Field2D(g, 0.5), q_floor_for(15.0));
    EXPECT_LT(residual_F(q).max_abs(), 1e-12);
    const FrozenCoefficients fc = frozen_coefficients(q.values, Derivatives(g));
    EXPECT_DOUBLE_EQ(fc.a[3], 2.0);
    EXPECT_DOUBLE_EQ(fc.b[3], 0.0);
}

TEST(Transform, TracesFromDataUseTheShiftedSamples) {
    const double dt = 0.02;
    std::vector<double> g0(401), g1(401);
    for (std::size_t k = 0; k < g0.size(); ++k) {
        const double t = static_cast<double>(k) * dt;
        g0[k] = 0.5 + 0.01 * t * t;
        g1[k] = -0.02 * t;
    }
    const BoundaryData data(Signal(0.0, dt, g0), Signal(0.0, dt, g1), 0.0);
    const SpaceTimeGrid g(0.0, 3.0, 6.0, 30, 60);
    const BoundaryTraces tr = boundary_traces_from_data(data, g, 1e-8);
    for (std::size_t j = 5; j + 5 < g.t_nodes(); ++j) {
        const double t = g.t(j);
        EXPECT_NEAR(tr.q_eps[j], 0.5 + 0.01 * t * t, 1e-12);
        // g1 + g0' = -0.02 t + 0.02 t
        EXPECT_NEAR(tr.qx_eps[j], 0.0, 2e-3);
    }
    const SpaceTimeGrid longer(0.0, 3.0, 9.0, 30, 60);
    EXPECT_THROW(boundary_traces_from_data(data, longer, 1e-8), Error);
}
