#include <cmath>

#include <gtest/gtest.h>

#include "convexiwave/convexify.hpp"
#include "convexiwave/diagnostics.hpp"

using namespace convexiwave;

TEST(Convexify, WeightDecaysInSpaceAndTime) {
    const SpaceTimeGrid g(0.0, 3.0, 6.0, 10, 10);
    const Field2D w = carleman_weight(g, 2.0, 0.3);
    EXPECT_DOUBLE_EQ(w(0, 0), 1.0);
    EXPECT_NEAR(w(10, 10), std::exp(-4.0 * (3.0 + 1.8)), 1e-18);
    EXPECT_LT(w(5, 3), w(4, 3));
    EXPECT_LT(w(5, 4), w(5, 3));
}

TEST(Convexify, ExactSolutionHasZeroObjectiveApartFromRegularization) {
    const SpaceTimeGrid g(0.0, 3.0, 6.0, 20, 20);
    const ObjectiveContext ctx(g, null_traces(g), ConvexParams{}, q_floor_for(15.0));
    const Field2D q(g, 0.5);
    const ObjectiveTerms t = objective_terms(q, ctx);
    EXPECT_LT(t.pde + t.dirichlet + t.neumann + t.far_neumann, 1e-24);
    EXPECT_GT(t.regularization, 0.0);
}

TEST(Convexify, GradientMatchesFiniteDifferences) {
    GradientCheckConfig cfg;
    cfg.grid = SpaceTimeGrid(0.0, 3.0, 6.0, 10, 12);
    cfg.fields = 3;
    const auto r = gradient_check(cfg);
    EXPECT_EQ(r.fields, 3u);
    EXPECT_LT(r.max_rel_error, 1e-5);
}

TEST(Convexify, FrozenObjectiveIsAConvexQuadratic) {
    // With frozen coefficients J is quadratic, so the divergence is h'Hh / 2:
    // even in h, quadratic under scaling, and nonnegative.
    const SpaceTimeGrid g(0.0, 3.0, 6.0, 12, 12);
    const Field2D base = Field2D(g, 0.5) + 0.05 * random_smooth_field(g, CounterRng(4, 1));
    const ObjectiveContext ctx =
        ObjectiveContext(g, null_traces(g), ConvexParams{}, q_floor_for(15.0)).with_frozen(
            frozen_coefficients(base, Derivatives(g)));
    for (std::uint64_t k = 0; k < 5; ++k) {
        const Field2D h = 0.1 * random_smooth_field(g, CounterRng(20 + k));
        const double d = bregman_divergence(base, h, ctx);
        EXPECT_GE(d, 0.0);
        EXPECT_NEAR(bregman_divergence(base, -1.0 * h, ctx), d, 1e-9 * std::max(1.0, d));
        EXPECT_NEAR(bregman_divergence(base, 2.0 * h, ctx), 4.0 * d, 1e-8 * std::max(1.0, d));
    }
}

TEST(Convexify, InvalidParametersAreRejected) {
    ConvexParams p;
    p.beta = 0.0;
    EXPECT_THROW(p.validate(), Error);
    p = {};
    p.lambda = -1.0;
    EXPECT_THROW(p.validate(), Error);
    const SpaceTimeGrid g(0.0, 3.0, 6.0, 10, 10);
    const SpaceTimeGrid other(0.0, 3.0, 6.0, 10, 12);
    EXPECT_THROW(ObjectiveContext(g, null_traces(other), ConvexParams{}, 0.2), Error);
}
