#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "convexiwave/errors.hpp"
#include "convexiwave/grid.hpp"
#include "convexiwave/transform.hpp"

namespace convexiwave {

/// Carleman weight exponent lambda, time tilt alpha, H^2 regularization beta,
/// and the initial descent step.
struct ConvexParams {
    bool operator==(const ConvexParams&) const = default;

    double lambda = 2.0;
    double alpha = 0.3;
    double beta = 1e-9;
    double eta_step = 0.1;

    void validate() const {
        require(std::isfinite(lambda) && lambda >= 0.0, "lambda must be finite and nonnegative");
        require(std::isfinite(alpha) && alpha > 0.0, "alpha must be positive");
        require(beta > 0.0 && beta < 1.0, "beta must lie in (0, 1)");
        require(eta_step > 0.0, "descent step must be positive");
    }
};

/// W(x, t) = exp(-2 lambda (x + alpha t)).
inline Field2D carleman_weight(const SpaceTimeGrid& grid, double lambda, double alpha) {
    return Field2D::sample(grid, [&](double x, double t) { return std::exp(-2.0 * lambda * (x + alpha * t)); });
}

/// Everything J needs besides q. When `frozen` is set, the nonlocal
/// coefficients are fixed and J becomes quadratic in q.
class ObjectiveContext {
public:
    ObjectiveContext(const SpaceTimeGrid& grid, BoundaryTraces traces, ConvexParams params, double q_floor,
                     bool penalize_far_boundary = true)
        : grid_(grid),
          derivs_(grid),
          traces_(std::move(traces)),
          params_(params),
          q_floor_(q_floor),
          far_penalty_(penalize_far_boundary),
          weight_(carleman_weight(grid, params.lambda, params.alpha)),
          quad_(quadrature_weights(grid)),
          wt_(trapezoid_weights(grid.nt(), grid.dt())) {
        params_.validate();
        require(traces_.q_eps.size() == grid.t_nodes() && traces_.qx_eps.size() == grid.t_nodes(),
                "boundary traces must be sampled on the grid's t-nodes");
        require(q_floor > 0.0, "q floor must be positive");
    }

    const SpaceTimeGrid& grid() const { return grid_; }
    const Derivatives& derivatives() const { return derivs_; }
    const BoundaryTraces& traces() const { return traces_; }
    const ConvexParams& params() const { return params_; }
    double q_floor() const { return q_floor_; }
    bool penalize_far_boundary() const { return far_penalty_; }
    const Field2D& weight() const { return weight_; }
    const Field2D& quadrature() const { return quad_; }
    const std::vector<double>& time_weights() const { return wt_; }

    /// Replace the weight field, e.g. with W = 1 for comparisons.
    ObjectiveContext with_weight(Field2D w) const {
        require(w.grid() == grid_, "weight grid mismatch");
        ObjectiveContext out = *this;
        out.weight_ = std::move(w);
        return out;
    }

    ObjectiveContext with_frozen(FrozenCoefficients fc) const {
        ObjectiveContext out = *this;
        out.frozen_ = std::move(fc);
        return out;
    }

    const std::optional<FrozenCoefficients>& frozen() const { return frozen_; }

private:
    SpaceTimeGrid grid_;
    Derivatives derivs_;
    BoundaryTraces traces_;
    ConvexParams params_;
    double q_floor_;
    bool far_penalty_;
    Field2D weight_;
    Field2D quad_;
    std::vector<double> wt_;
    std::optional<FrozenCoefficients> frozen_;
};

/// The individual terms of J, for diagnostics.
struct ObjectiveTerms {
    double pde = 0.0;
    double dirichlet = 0.0;
    double neumann = 0.0;
    double far_neumann = 0.0;
    double regularization = 0.0;

    double total() const { return pde + dirichlet + neumann + far_neumann + regularization; }
};

namespace detail {

struct Residuals {
    FrozenCoefficients coef;
    Field2D qt;
    Field2D qx;
    Field2D qxt;
    Field2D f;
};

inline Residuals residuals(const Field2D& q, const ObjectiveContext& ctx) {
    const auto& d = ctx.derivatives();
    FrozenCoefficients coef = ctx.frozen() ? *ctx.frozen() : frozen_coefficients(q, d);
    Field2D qt = d.t(q);
    Field2D qx = d.x(q);
    Field2D qxt = d.x(qt);
    Field2D f = d.xx(q);
    const auto& g = q.grid();
    for (std::size_t i = 0; i < g.x_nodes(); ++i)
        for (std::size_t j = 0; j < g.t_nodes(); ++j) f(i, j) += -coef.a[i] * qxt(i, j) + coef.b[i] * qt(i, j);
    return {std::move(coef), std::move(qt), std::move(qx), std::move(qxt), std::move(f)};
}

inline ObjectiveTerms terms_from(const Field2D& q, const Residuals& r, const ObjectiveContext& ctx) {
    const auto& g = ctx.grid();
    const auto& w = ctx.quadrature();
    const auto& W = ctx.weight();
    const auto& wt = ctx.time_weights();
    const auto& tr = ctx.traces();
    const std::size_t last = g.nx();
    ObjectiveTerms out;
    for (std::size_t i = 0; i < g.x_nodes(); ++i)
        for (std::size_t j = 0; j < g.t_nodes(); ++j) out.pde += w(i, j) * W(i, j) * r.f(i, j) * r.f(i, j);
    for (std::size_t j = 0; j < g.t_nodes(); ++j) {
        const double e0 = q(0, j) - tr.q_eps[j];
        const double e1 = r.qx(0, j) - tr.qx_eps[j];
        out.dirichlet += wt[j] * W(0, j) * e0 * e0;
        out.neumann += wt[j] * W(0, j) * e1 * e1;
        if (ctx.penalize_far_boundary()) out.far_neumann += wt[j] * W(last, j) * r.qx(last, j) * r.qx(last, j);
    }
    out.regularization = ctx.params().beta * h2_norm_sq(q, ctx.derivatives());
    return out;
}

}  // namespace detail

inline ObjectiveTerms objective_terms(const Field2D& q, const ObjectiveContext& ctx) {
    require(q.grid() == ctx.grid(), "q grid does not match objective grid");
    if (!ctx.frozen()) check_floor(q, ctx.q_floor());
    return detail::terms_from(q, detail::residuals(q, ctx), ctx);
}

/// J(q) = int W |F(q)|^2 + int W(eps,t) |q(eps,t) - q_eps|^2 + int W(eps,t) |q_x(eps,t) - qx_eps|^2
///        + int W(M,t) |q_x(M,t)|^2 + beta ||q||_{H^2}^2, all by trapezoidal quadrature.
inline double evaluate_J(const Field2D& q, const ObjectiveContext& ctx) { return objective_terms(q, ctx).total(); }

inline double evaluate_J(const QField& q, const ObjectiveContext& ctx) { return evaluate_J(q.values, ctx); }

struct ValueAndGradient {
    double value;
    Field2D gradient;
};

/// J and its exact gradient with respect to every node value of the discrete q,
/// including the dependence of the coefficients on the t = 0 row.
inline ValueAndGradient value_and_gradient(const Field2D& q, const ObjectiveContext& ctx) {
    require(q.grid() == ctx.grid(), "q grid does not match objective grid");
    if (!ctx.frozen()) check_floor(q, ctx.q_floor());
    const auto& g = ctx.grid();
    const auto& d = ctx.derivatives();
    const auto& w = ctx.quadrature();
    const auto& W = ctx.weight();
    const auto& wt = ctx.time_weights();
    const auto& tr = ctx.traces();
    const std::size_t last = g.nx();

    const detail::Residuals r = detail::residuals(q, ctx);
    const double value = detail::terms_from(q, r, ctx).total();

    // R = dJ/dF node-wise.
    Field2D R(g);
    for (std::size_t i = 0; i < g.x_nodes(); ++i)
        for (std::size_t j = 0; j < g.t_nodes(); ++j) R(i, j) = 2.0 * w(i, j) * W(i, j) * r.f(i, j);

    Field2D grad(g);
    d.xx_transpose_add(R, grad);

    Field2D aR(g), bR(g);
    for (std::size_t i = 0; i < g.x_nodes(); ++i)
        for (std::size_t j = 0; j < g.t_nodes(); ++j) {
            aR(i, j) = -r.coef.a[i] * R(i, j);
            bR(i, j) = r.coef.b[i] * R(i, j);
        }
    d.xt_transpose_add(aR, grad);
    d.t_transpose_add(bR, grad);

    if (!ctx.frozen()) {
        // a = 1/(2 s^2), b = s'/(2 s^3), s = q(., 0), s' = D_x s.
        std::vector<double> ds(g.x_nodes(), 0.0), dsx(g.x_nodes(), 0.0);
        for (std::size_t i = 0; i < g.x_nodes(); ++i) {
            double p = 0.0, m = 0.0;
            for (std::size_t j = 0; j < g.t_nodes(); ++j) {
                p += R(i, j) * r.qxt(i, j);
                m += R(i, j) * r.qt(i, j);
            }
            const double s = r.coef.s[i];
            const double s3 = s * s * s;
            ds[i] = p / s3 - 1.5 * r.coef.s_x[i] * m / (s3 * s);
            dsx[i] = m / (2.0 * s3);
        }
        d.x1().apply_transpose_add(dsx.data(), ds.data(), 1);
        for (std::size_t i = 0; i < g.x_nodes(); ++i) grad(i, 0) += ds[i];
    }

    Field2D E(g);
    for (std::size_t j = 0; j < g.t_nodes(); ++j) {
        grad(0, j) += 2.0 * wt[j] * W(0, j) * (q(0, j) - tr.q_eps[j]);
        E(0, j) = 2.0 * wt[j] * W(0, j) * (r.qx(0, j) - tr.qx_eps[j]);
        if (ctx.penalize_far_boundary()) E(last, j) += 2.0 * wt[j] * W(last, j) * r.qx(last, j);
    }
    d.x_transpose_add(E, grad);

    grad.axpy(ctx.params().beta, h2_norm_sq_gradient(q, d));
    return {value, std::move(grad)};
}

inline Field2D gradient_J(const Field2D& q, const ObjectiveContext& ctx) { return value_and_gradient(q, ctx).gradient; }

inline Field2D gradient_J(const QField& q, const ObjectiveContext& ctx) { return gradient_J(q.values, ctx); }

/// J(q + h) - J(q) - <grad J(q), h>.
inline double bregman_divergence(const Field2D& q, const Field2D& h, const ObjectiveContext& ctx) {
    const auto base = value_and_gradient(q, ctx);
    const double shifted = evaluate_J(q + h, ctx);
    return shifted - base.value - dot(base.gradient, h);
}

inline double bregman_divergence(const QField& q, const Field2D& h, const ObjectiveContext& ctx) {
    return bregman_divergence(q.values, h, ctx);
}

}  // namespace convexiwave
