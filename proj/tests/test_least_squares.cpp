#include <cmath>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "convexiwave/least_squares.hpp"
#include "convexiwave/quasi_reversibility.hpp"
#include "convexiwave/rng.hpp"

using namespace convexiwave;

namespace {

double bump(double s, double center, double radius) {
    const double z = (s - center) / radius;
    return std::abs(z) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - z * z)) : 0.0;
}

double transport_error(std::size_t n) {
    // Q = phi(2x + t) solves Q_x = 2 Q_t and vanishes at x = M = 3 because phi
    // is supported in (0.6, 5.4).
    const SpaceTimeGrid g(0.0, 3.0, 6.0, n, n);
    std::vector<double> trace(g.t_nodes());
    for (std::size_t j = 0; j < trace.size(); ++j) trace[j] = bump(g.t(j), 3.0, 2.4);
    const QuasiReversibility qr(g);
    double residual = 1.0;
    const Field2D q = qr.solve_transport(trace, 1e-11, &residual);
    EXPECT_LT(residual, 1e-8);
    double err = 0.0, ref = 0.0;
    const Field2D w = quadrature_weights(g);
    for (std::size_t i = 0; i < g.x_nodes(); ++i)
        for (std::size_t j = 0; j < g.t_nodes(); ++j) {
            const double e = bump(2.0 * g.x(i) + g.t(j), 3.0, 2.4);
            err += w(i, j) * (q(i, j) - e) * (q(i, j) - e);
            ref += w(i, j) * e * e;
        }
    return std::sqrt(err / ref);
}

}  // namespace

TEST(LeastSquares, KroneckerActsAlongTheRightAxis) {
    const SpaceTimeGrid g(0.0, 1.0, 2.0, 5, 7);
    const Derivatives d(g);
    const lsq::GridOperators ops(d);
    const Field2D f = Field2D::sample(g, [](double x, double t) { return std::sin(x) * std::exp(0.3 * t); });
    const lsq::Vector v = lsq::to_vector(f.values());
    auto same = [&](const lsq::SparseMatrix& m, const Field2D& expected) {
        const lsq::Vector got = m * v;
        for (std::size_t k = 0; k < g.size(); ++k) EXPECT_NEAR(got(static_cast<Eigen::Index>(k)), expected.values()[k], 1e-12);
    };
    same(ops.dx, d.x(f));
    same(ops.dt, d.t(f));
    same(ops.dxx, d.xx(f));
    same(ops.dtt, d.tt(f));
    same(ops.dxt, d.xt(f));
}

TEST(LeastSquares, SmallSystemMatchesDenseSolution) {
    const Eigen::Index n = 6, m = 15;
    const CounterRng rng(5);
    Eigen::MatrixXd a(m, n);
    Eigen::VectorXd b(m), w(m);
    std::uint64_t k = 0;
    for (Eigen::Index r = 0; r < m; ++r) {
        for (Eigen::Index c = 0; c < n; ++c) a(r, c) = rng.symmetric(k++);
        b(r) = rng.symmetric(k++);
        w(r) = 0.5 + rng.unit(k++);
    }
    lsq::LeastSquares ls(n);
    ls.add(a.sparseView(), w, b);
    const Eigen::VectorXd root = w.cwiseSqrt();
    const Eigen::VectorXd expected = (root.asDiagonal() * a).colPivHouseholderQr().solve(root.cwiseProduct(b));
    for (auto method : {lsq::Method::ExtendedNormalEquations, lsq::Method::NormalEquations, lsq::Method::SparseQR}) {
        const Eigen::VectorXd x = ls.solve(method);
        EXPECT_LT((x - expected).norm(), 1e-10 * expected.norm());
    }
}

TEST(LeastSquares, RankDeficientSystemIsRejected) {
    lsq::LeastSquares ls(3);
    lsq::SparseMatrix a(2, 3);
    a.insert(0, 0) = 1.0;
    a.insert(1, 1) = 1.0;
    ls.add(a, lsq::Vector::Ones(2), lsq::Vector::Ones(2));
    EXPECT_THROW(ls.solve(lsq::Method::NormalEquations), Error);
    EXPECT_THROW(ls.solve(lsq::Method::SparseQR), Error);
}

TEST(LeastSquares, ExtendedPrecisionAgreesWithQrOnTheTransportProblem) {
    const SpaceTimeGrid g(0.0, 3.0, 6.0, 16, 16);
    const Derivatives d(g);
    const lsq::GridOperators ops(d);
    const lsq::Vector quad = lsq::quadrature_vector(g), wt = lsq::time_weights(g);
    lsq::Vector trace(static_cast<Eigen::Index>(g.t_nodes()));
    for (std::size_t j = 0; j < g.t_nodes(); ++j) trace(static_cast<Eigen::Index>(j)) = bump(g.t(j), 3.0, 2.4);
    lsq::LeastSquares ls(static_cast<Eigen::Index>(g.size()));
    ls.add(lsq::SparseMatrix(ops.dx - 2.0 * ops.dt), quad);
    ls.add(lsq::row_selector(g, 0), wt, trace);
    ls.add(lsq::row_selector(g, g.nx()), wt);
    ls.add_h2(ops, quad, 1e-6);
    const lsq::Vector a = ls.solve(lsq::Method::ExtendedNormalEquations);
    const lsq::Vector b = ls.solve(lsq::Method::SparseQR);
    EXPECT_LT((a - b).norm(), 1e-7 * b.norm());
}

TEST(LeastSquares, ManufacturedTransportConverges) {
    const double e25 = transport_error(25), e50 = transport_error(50);
    EXPECT_LT(e50, e25);
    EXPECT_LT(e50, 0.01);
}

TEST(LeastSquares, InvalidBlocksAreRejected) {
    lsq::LeastSquares ls(2);
    lsq::SparseMatrix a(1, 3);
    EXPECT_THROW(ls.add(a, lsq::Vector::Ones(1), lsq::Vector::Ones(1)), Error);
    lsq::SparseMatrix b(1, 2);
    EXPECT_THROW(ls.add(b, -lsq::Vector::Ones(1), lsq::Vector::Ones(1)), Error);
}
