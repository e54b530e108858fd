#include <cmath>

#include <gtest/gtest.h>

#include "convexiwave/config.hpp"
#include "convexiwave/diagnostics.hpp"
#include "convexiwave/pipeline.hpp"
#include "convexiwave/solver.hpp"

using namespace convexiwave;

TEST(Solver, DescentNeverIncreasesTheObjective) {
    const SpaceTimeGrid g(0.0, 3.0, 6.0, 20, 20);
    const ObjectiveContext ctx(g, null_traces(g), ConvexParams{}, q_floor_for(15.0));
    const QField q0(Field2D(g, 0.5) + 0.05 * random_smooth_field(g, CounterRng(3)), q_floor_for(15.0));
    DescentConfig cfg;
    cfg.max_iters = 60;
    const double j0 = evaluate_J(q0, ctx);
    const DescentResult r = descend(q0, ctx, cfg);
    ASSERT_FALSE(r.history.empty());
    EXPECT_LT(r.history.back().objective, j0);
    EXPECT_EQ(check_monotone(r.history).violations, 0u);
    for (std::size_t i = 0; i < g.x_nodes(); ++i) EXPECT_GE(r.q.values(i, 0), q_floor_for(15.0));
}

TEST(Solver, StartingAtTheMinimizerStopsImmediately) {
    const SpaceTimeGrid g(0.0, 3.0, 6.0, 10, 10);
    ConvexParams p;
    p.beta = 1e-12;
    const ObjectiveContext ctx(g, null_traces(g), p, q_floor_for(15.0));
    DescentConfig cfg;
    cfg.grad_tol = 1e-6;
    const DescentResult r = descend(QField(Field2D(g, 0.5), q_floor_for(15.0)), ctx, cfg);
    EXPECT_EQ(r.exit, DescentExit::GradientTolerance);
    EXPECT_TRUE(r.history.empty());
}

TEST(Solver, CoarseNullScattererIsRecovered) {
    // The correction box is sized for the default wave grid, so only the q grid is coarsened.
    RunConfig cfg;
    cfg.transform.nx = 30;
    cfg.transform.nt = 60;
    cfg.descent.max_corrections = 3;
    const InversionResult r = invert(simulate_data(cfg).noisy, cfg.inversion());
    double dev = 0.0;
    for (double v : r.c_comp.values()) dev = std::max(dev, std::abs(v - 1.0));
    EXPECT_LT(dev, 0.1);
    EXPECT_LE(r.corrections, 3u);
    EXPECT_EQ(check_monotone(r.history).violations, 0u);
}

TEST(Solver, StrictModeReportsNonConvergence) {
    RunConfig cfg;
    cfg.forward.medium.pieces.push_back(BumpPiece{0.5, 0.2, 4.0});
    cfg.transform.nx = 20;
    cfg.transform.nt = 40;
    cfg.descent.max_iters = 2;
    cfg.descent.max_corrections = 1;
    cfg.descent.stop_linf = 1e-12;
    cfg.strict = true;
    try {
        invert(simulate_data(cfg).noisy, cfg.inversion());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NonConvergence);
    }
}

TEST(Solver, InvalidDescentConfigIsRejected) {
    DescentConfig c;
    c.backtrack = 1.0;
    EXPECT_THROW(c.validate(), Error);
    c = {};
    c.correction_relaxation = 0.0;
    EXPECT_THROW(c.validate(), Error);
}

TEST(Solver, MonotonicityIgnoresCorrectionBoundaries) {
    const std::vector<IterationRecord> h{{1, 5.0, 1.0, 0.1, 0}, {2, 4.0, 1.0, 0.1, 0}, {3, 9.0, 1.0, 0.1, 1},
                                         {4, 8.0, 1.0, 0.1, 1}, {5, 8.5, 1.0, 0.1, 1}};
    const auto r = check_monotone(h);
    EXPECT_EQ(r.steps, 5u);
    EXPECT_EQ(r.violations, 1u);
    EXPECT_DOUBLE_EQ(r.worst_increase, 0.5);
}
