#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "convexiwave/grid.hpp"
#include "convexiwave/rng.hpp"

using namespace convexiwave;

namespace {

double max_error(const Field2D& f, const std::function<double(double, double)>& exact) {
    double e = 0.0;
    const auto& g = f.grid();
    for (std::size_t i = 0; i < g.x_nodes(); ++i)
        for (std::size_t j = 0; j < g.t_nodes(); ++j) e = std::max(e, std::abs(f(i, j) - exact(g.x(i), g.t(j))));
    return e;
}

}  // namespace

TEST(Grid, NodeLayoutAndSpacing) {
    const SpaceTimeGrid g(0.0, 3.0, 6.0, 100, 200);
    EXPECT_EQ(g.x_nodes(), 101u);
    EXPECT_EQ(g.t_nodes(), 201u);
    EXPECT_DOUBLE_EQ(g.dx(), 0.03);
    EXPECT_DOUBLE_EQ(g.dt(), 0.03);
    EXPECT_EQ(g.index(2, 3), 2u * 201u + 3u);
    EXPECT_THROW(SpaceTimeGrid(1.0, 0.0, 1.0, 4, 4), Error);
}

TEST(Grid, QuadraticsAreDifferentiatedExactly) {
    // Three-point stencils, including the one-sided boundary rows, are exact on quadratics.
    const SpaceTimeGrid g(0.0, 2.0, 1.0, 8, 6);
    const Derivatives d(g);
    const Field2D f = Field2D::sample(g, [](double x, double t) { return 1.0 + 2.0 * x - t + x * x + 3.0 * x * t - t * t; });
    EXPECT_LT(max_error(d.x(f), [](double x, double t) { return 2.0 + 2.0 * x + 3.0 * t; }), 1e-12);
    EXPECT_LT(max_error(d.t(f), [](double x, double t) { return -1.0 + 3.0 * x - 2.0 * t; }), 1e-12);
    EXPECT_LT(max_error(d.xx(f), [](double, double) { return 2.0; }), 1e-10);
    EXPECT_LT(max_error(d.tt(f), [](double, double) { return -2.0; }), 1e-10);
    EXPECT_LT(max_error(d.xt(f), [](double, double) { return 3.0; }), 1e-10);
}

TEST(Grid, SecondOrderConvergenceByRichardson) {
    auto err = [](std::size_t n) {
        const SpaceTimeGrid g(0.0, 1.0, 1.0, n, n);
        const Field2D f = Field2D::sample(g, [](double x, double t) { return std::sin(3.0 * x) * std::cos(2.0 * t); });
        const Derivatives d(g);
        return std::max(max_error(d.x(f), [](double x, double t) { return 3.0 * std::cos(3.0 * x) * std::cos(2.0 * t); }),
                        max_error(d.xx(f), [](double x, double t) { return -9.0 * std::sin(3.0 * x) * std::cos(2.0 * t); }));
    };
    const double ratio = err(80) / err(160);
    EXPECT_GT(ratio, 3.5);
    EXPECT_LT(ratio, 4.5);
}

TEST(Grid, TransposeStencilsAreAdjoint) {
    const SpaceTimeGrid g(0.0, 1.0, 2.0, 7, 9);
    const Derivatives d(g);
    const CounterRng rng(3);
    Field2D a(g), b(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
        a.values()[k] = rng.symmetric(k);
        b.values()[k] = rng.symmetric(k + g.size());
    }
    Field2D at(g), tt(g), xt(g);
    d.x_transpose_add(b, at);
    d.tt_transpose_add(b, tt);
    d.xt_transpose_add(b, xt);
    EXPECT_NEAR(dot(d.x(a), b), dot(a, at), 1e-10);
    EXPECT_NEAR(dot(d.tt(a), b), dot(a, tt), 1e-8);
    EXPECT_NEAR(dot(d.xt(a), b), dot(a, xt), 1e-9);
}

TEST(Grid, TrapezoidRulesIntegrateLinearExactly) {
    const SpaceTimeGrid g(0.0, 2.0, 3.0, 5, 7);
    const Field2D f = Field2D::sample(g, [](double x, double t) { return 1.0 + x + 2.0 * t; });
    // int_0^2 int_0^3 (1 + x + 2t) dt dx = 6 + 6 + 18
    EXPECT_NEAR(integrate(f), 30.0, 1e-12);
    const std::vector<double> v{0.0, 1.0, 2.0, 3.0};
    const auto cum = cumulative_trapezoid(v, 0.5);
    EXPECT_NEAR(cum.back(), 0.5 * 3.0 * 1.5, 1e-14);
    EXPECT_DOUBLE_EQ(cum.front(), 0.0);
}

TEST(Grid, H2NormGradientMatchesDifferences) {
    const SpaceTimeGrid g(0.0, 1.0, 1.0, 6, 5);
    const Derivatives d(g);
    const CounterRng rng(9);
    Field2D f(g);
    for (std::size_t k = 0; k < g.size(); ++k) f.values()[k] = rng.symmetric(k);
    const Field2D grad = h2_norm_sq_gradient(f, d);
    const double s = 1e-6;
    for (std::size_t k = 0; k < g.size(); k += 3) {
        Field2D p = f, m = f;
        p.values()[k] += s;
        m.values()[k] -= s;
        const double fd = (h2_norm_sq(p, d) - h2_norm_sq(m, d)) / (2.0 * s);
        EXPECT_NEAR(grad.values()[k], fd, 1e-5 * std::max(1.0, std::abs(fd)));
    }
}

TEST(Grid, SignalInterpolatesAndClamps) {
    const Signal s(0.0, 0.5, {0.0, 1.0, 4.0});
    EXPECT_DOUBLE_EQ(s.at(0.25), 0.5);
    EXPECT_DOUBLE_EQ(s.at(0.75), 2.5);
    EXPECT_DOUBLE_EQ(s.at(-1.0), 0.0);
    EXPECT_DOUBLE_EQ(s.at(9.0), 4.0);
    EXPECT_DOUBLE_EQ(s.max_abs(), 4.0);
    EXPECT_THROW(Signal(0.0, 0.0, {1.0}), Error);
    EXPECT_THROW(Signal(0.0, 1.0, {std::nan("")}), Error);
}

TEST(Rng, StreamsAreDeterministicAndUniform) {
    const CounterRng a(42, 0), b(42, 0), c(42, 1);
    EXPECT_EQ(a.bits(17), b.bits(17));
    EXPECT_NE(a.bits(17), c.bits(17));
    const std::size_t n = 200000;
    double mean = 0.0, sq = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double r = a.symmetric(k);
        ASSERT_GE(r, -1.0);
        ASSERT_LT(r, 1.0);
        mean += r;
        sq += r * r;
    }
    mean /= n;
    sq /= n;
    // Uniform on [-1, 1): mean 0, second moment 1/3; 5 standard errors.
    EXPECT_NEAR(mean, 0.0, 5.0 * std::sqrt(1.0 / 3.0 / n));
    EXPECT_NEAR(sq, 1.0 / 3.0, 5.0 * std::sqrt(4.0 / 45.0 / n));
}
