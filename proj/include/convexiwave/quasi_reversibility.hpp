#pragma once

#include <algorithm>
#include <vector>

#include "convexiwave/errors.hpp"
#include "convexiwave/grid.hpp"
#include "convexiwave/least_squares.hpp"
#include "convexiwave/transform.hpp"

namespace convexiwave {

struct QRConfig {

    bool operator==(const QRConfig&) const = default;

    /// Weight of the H^2 regularization in the quasi-reversibility functionals.
    double reg_eta = 1e-11;
    /// Correction step: freeze q_t in the third term of F (true), or keep it
    /// linear in the unknown and freeze only the t = 0 traces (false).
    bool freeze_qt = false;
    /// Set q0(x, 0) = 1/2 after reconstructing the initial guess.
    bool reset_initial_row = true;

    void validate() const { require(reg_eta > 0.0, "quasi-reversibility eta must be positive"); }
};

/// Sparse operators for one grid, reused across quasi-reversibility solves.
class QuasiReversibility {
public:
    explicit QuasiReversibility(const SpaceTimeGrid& grid)
        : grid_(grid),
          derivs_(grid),
          ops_(derivs_),
          quad_(lsq::quadrature_vector(grid)),
          wt_(lsq::time_weights(grid)),
          first_row_(lsq::row_selector(grid, 0)),
          last_row_(lsq::row_selector(grid, grid.nx())) {}

    const SpaceTimeGrid& grid() const { return grid_; }
    const Derivatives& derivatives() const { return derivs_; }
    const lsq::GridOperators& operators() const { return ops_; }

    /// Minimizes int |Q_x - 2 Q_t|^2 + int |Q(eps,t) - trace|^2 + int |Q(M,t)|^2 + eta ||Q||_{H^2}^2.
    Field2D solve_transport(std::span<const double> trace_at_eps, double eta,
                            double* normal_residual = nullptr) const {
        require(trace_at_eps.size() == grid_.t_nodes(), "transport trace must be sampled on t-nodes");
        require(eta > 0.0, "quasi-reversibility eta must be positive");
        lsq::LeastSquares ne(static_cast<Eigen::Index>(grid_.size()));
        const lsq::SparseMatrix transport = ops_.dx - 2.0 * ops_.dt;
        ne.add(transport, quad_);
        ne.add(first_row_, wt_, lsq::to_vector(trace_at_eps));
        ne.add(last_row_, wt_);
        ne.add_h2(ops_, quad_, eta);
        const lsq::Vector x = ne.solve();
        if (normal_residual) *normal_residual = ne.relative_residual(x);
        return to_field(x);
    }

    /// Quasi-reversibility for the linear problem obtained by freezing the nonlocal
    /// coefficients of F at q_tilde, with the boundary conditions at eps and M.
    Field2D solve_frozen(const Field2D& q_tilde, const BoundaryTraces& traces, const QRConfig& cfg,
                         double* normal_residual = nullptr) const {
        require(q_tilde.grid() == grid_, "q grid mismatch");
        const FrozenCoefficients fc = frozen_coefficients(q_tilde, derivs_);
        const auto n = static_cast<Eigen::Index>(grid_.size());
        lsq::Vector a(n), b(n);
        for (std::size_t i = 0; i < grid_.x_nodes(); ++i)
            for (std::size_t j = 0; j < grid_.t_nodes(); ++j) {
                const auto k = static_cast<Eigen::Index>(grid_.index(i, j));
                a(k) = fc.a[i];
                b(k) = fc.b[i];
            }
        lsq::SparseMatrix op = ops_.dxx - lsq::SparseMatrix(a.asDiagonal() * ops_.dxt);
        lsq::Vector target = lsq::Vector::Zero(n);
        if (cfg.freeze_qt) {
            const Field2D qt = derivs_.t(q_tilde);
            target = -b.cwiseProduct(lsq::to_vector(qt.values()));
        } else {
            op += lsq::SparseMatrix(b.asDiagonal() * ops_.dt);
        }
        lsq::LeastSquares ne(n);
        ne.add(op, quad_, target);
        ne.add(first_row_, wt_, lsq::to_vector(traces.q_eps.samples()));
        ne.add(lsq::SparseMatrix(first_row_ * ops_.dx), wt_, lsq::to_vector(traces.qx_eps.samples()));
        ne.add(lsq::SparseMatrix(last_row_ * ops_.dx), wt_);
        ne.add_h2(ops_, quad_, cfg.reg_eta);
        const lsq::Vector x = ne.solve();
        if (normal_residual) *normal_residual = ne.relative_residual(x);
        return to_field(x);
    }

private:
    Field2D to_field(const lsq::Vector& x) const {
        return Field2D(grid_, std::vector<double>(x.data(), x.data() + x.size()));
    }

    SpaceTimeGrid grid_;
    Derivatives derivs_;
    lsq::GridOperators ops_;
    lsq::Vector quad_;
    lsq::Vector wt_;
    lsq::SparseMatrix first_row_;
    lsq::SparseMatrix last_row_;
};

/// Raises q(x, 0) to the floor where it dips below.
inline void clamp_initial_row(Field2D& q, double q_floor) {
    for (std::size_t i = 0; i < q.grid().x_nodes(); ++i) q(i, 0) = std::max(q(i, 0), q_floor);
}

/// Initial guess: Q0 = q0_x from the transport problem by quasi-reversibility, then
/// q0(x, t) = q(eps, t) + int_eps^x Q0(y, t) dy, then (optionally) q0(x, 0) = 1/2.
inline QField initial_guess(const BoundaryTraces& traces, const QuasiReversibility& qr, const QRConfig& cfg,
                            double q_floor) {
    cfg.validate();
    const auto& g = qr.grid();
    const Field2D Q = qr.solve_transport(traces.qx_eps.samples(), cfg.reg_eta);
    Field2D q(g);
    std::vector<double> column(g.x_nodes());
    for (std::size_t j = 0; j < g.t_nodes(); ++j) {
        for (std::size_t i = 0; i < g.x_nodes(); ++i) column[i] = Q(i, j);
        const auto running = cumulative_trapezoid(column, g.dx());
        for (std::size_t i = 0; i < g.x_nodes(); ++i) q(i, j) = traces.q_eps[j] + running[i];
    }
    if (cfg.reset_initial_row)
        for (std::size_t i = 0; i < g.x_nodes(); ++i) q(i, 0) = 0.5;
    clamp_initial_row(q, q_floor);
    return QField(std::move(q), q_floor);
}

/// One correction: solve the frozen-coefficient problem for a new q.
inline QField correction_step(const QField& q_tilde, const BoundaryTraces& traces, const QuasiReversibility& qr,
                              const QRConfig& cfg) {
    cfg.validate();
    check_floor(q_tilde.values, q_tilde.q_floor);
    Field2D q = qr.solve_frozen(q_tilde.values, traces, cfg);
    clamp_initial_row(q, q_tilde.q_floor);
    return QField(std::move(q), q_tilde.q_floor);
}

}  // namespace convexiwave
