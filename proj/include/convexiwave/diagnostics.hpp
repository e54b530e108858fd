#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "convexiwave/convexify.hpp"
#include "convexiwave/grid.hpp"
#include "convexiwave/rng.hpp"
#include "convexiwave/transform.hpp"

namespace convexiwave {

/// Smooth random field: a few low Fourier modes with coefficients decaying like
/// 1 / (1 + m + n)^2, scaled to unit max norm.
inline Field2D random_smooth_field(const SpaceTimeGrid& g, const CounterRng& rng, int modes = 4) {
    std::vector<double> coef, phase_x, phase_t;
    std::uint64_t k = 0;
    for (int m = 0; m < modes; ++m)
        for (int n = 0; n < modes; ++n) {
            coef.push_back(rng.symmetric(k++) / ((1.0 + m + n) * (1.0 + m + n)));
            phase_x.push_back(std::numbers::pi * rng.unit(k++));
            phase_t.push_back(std::numbers::pi * rng.unit(k++));
        }
    const double lx = g.x_max() - g.x_min();
    Field2D f = Field2D::sample(g, [&](double x, double t) {
        const double xi = (x - g.x_min()) / lx, tau = t / g.t_max();
        double v = 0.0;
        std::size_t c = 0;
        for (int m = 0; m < modes; ++m)
            for (int n = 0; n < modes; ++n, ++c)
                v += coef[c] * std::cos(std::numbers::pi * m * xi + phase_x[c]) *
                     std::cos(std::numbers::pi * n * tau + phase_t[c]);
        return v;
    });
    const double m = f.max_abs();
    if (m > 0.0) f *= 1.0 / m;
    return f;
}

/// Traces of the null scatterer: q = 1/2, q_x = 0 at x = eps.
inline BoundaryTraces null_traces(const SpaceTimeGrid& g) {
    return {Signal(0.0, g.dt(), std::vector<double>(g.t_nodes(), 0.5)),
            Signal(0.0, g.dt(), std::vector<double>(g.t_nodes(), 0.0))};
}

struct GradientCheckConfig {
    SpaceTimeGrid grid{0.0, 3.0, 6.0, 20, 20};
    std::size_t fields = 50;
    double step = 1e-6;
    std::uint64_t seed = 7;
    ConvexParams params{};
    double c_upper = 15.0;
};

struct GradientCheckReport {
    /// max over fields and nodes of |grad_k - fd_k| / ||fd||_inf for that field.
    double max_rel_error = 0.0;
    double max_abs_error = 0.0;
    std::size_t fields = 0;
    std::size_t components = 0;
};

/// Compares the exact discrete gradient against symmetric differences at random
/// admissible q = 1/2 + 0.1 h with traces perturbed the same way.
inline GradientCheckReport gradient_check(const GradientCheckConfig& cfg) {
    const auto& g = cfg.grid;
    const double floor = q_floor_for(cfg.c_upper);
    GradientCheckReport out;
    for (std::size_t f = 0; f < cfg.fields; ++f) {
        const CounterRng rng(cfg.seed, f);
        BoundaryTraces traces = null_traces(g);
        {
            const Field2D h = random_smooth_field(g, rng.split(1));
            std::vector<double> a(g.t_nodes()), b(g.t_nodes());
            for (std::size_t j = 0; j < g.t_nodes(); ++j) {
                a[j] = 0.5 + 0.05 * h(0, j);
                b[j] = 0.05 * h(1, j);
            }
            traces = {Signal(0.0, g.dt(), std::move(a)), Signal(0.0, g.dt(), std::move(b))};
        }
        const ObjectiveContext ctx(g, traces, cfg.params, floor);
        Field2D q = random_smooth_field(g, rng.split(2));
        q *= 0.1;
        for (double& v : q.values()) v += 0.5;
        const Field2D grad = gradient_J(q, ctx);
        Field2D fd(g);
        for (std::size_t k = 0; k < g.size(); ++k) {
            Field2D plus = q, minus = q;
            plus.values()[k] += cfg.step;
            minus.values()[k] -= cfg.step;
            fd.values()[k] = (evaluate_J(plus, ctx) - evaluate_J(minus, ctx)) / (2.0 * cfg.step);
        }
        const double scale = std::max(fd.max_abs(), std::numeric_limits<double>::min());
        for (std::size_t k = 0; k < g.size(); ++k) {
            const double err = std::abs(grad.values()[k] - fd.values()[k]);
            out.max_abs_error = std::max(out.max_abs_error, err);
            out.max_rel_error = std::max(out.max_rel_error, err / scale);
        }
        out.components += g.size();
        ++out.fields;
    }
    return out;
}

struct ConvexityCheckConfig {
    SpaceTimeGrid grid{0.0, 3.0, 6.0, 100, 200};
    std::vector<double> lambdas{0.0, 1.0, 2.0, 4.0, 8.0};
    std::size_t pairs = 100;
    double radius = 5.0;
    std::uint64_t seed = 11;
    double alpha = 0.3;
    double beta = 1e-9;
    double c_upper = 15.0;
};

struct ConvexityRow {
    double lambda;
    double min_divergence;
    std::size_t negative_pairs;
    /// min of the divergence over the weighted L2 norm squared of q2 - q1; the
    /// weight alone shrinks raw divergences as lambda grows.
    double min_normalized;
};

struct ConvexityReport {
    std::vector<ConvexityRow> rows;
    bool nondecreasing = true;
    /// Largest tested lambda with no negative divergence; NaN if there is none.
    double lambda_emp = std::numeric_limits<double>::quiet_NaN();
    /// Pairs that had to be shrunk to keep q(x, 0) above the floor.
    std::size_t shrunk = 0;
};

/// Random pairs q1, q2 within the H^2 ball of the given radius around the null
/// scatterer q = 1/2, the same pairs for every lambda, and the smallest
/// J(q2) - J(q1) - <grad J(q1), q2 - q1> for each.
inline ConvexityReport convexity_check(const ConvexityCheckConfig& cfg) {
    const auto& g = cfg.grid;
    const double floor = q_floor_for(cfg.c_upper);
    const Derivatives d(g);
    ConvexityReport out;

    auto draw = [&](const CounterRng& rng) {
        Field2D h = random_smooth_field(g, rng);
        const double target = cfg.radius * std::sqrt(rng.unit(1u << 20));
        h *= target / std::sqrt(h2_norm_sq(h, d));
        Field2D q = h;
        for (double& v : q.values()) v += 0.5;
        auto row_min = [](const Field2D& f) {
            const auto r = f.initial_row();
            return *std::min_element(r.begin(), r.end());
        };
        bool shrunk = false;
        while (row_min(q) < floor) {
            h *= 0.9;
            q = h;
            for (double& v : q.values()) v += 0.5;
            shrunk = true;
        }
        if (shrunk) ++out.shrunk;
        return q;
    };
    std::vector<std::pair<Field2D, Field2D>> pairs;
    for (std::size_t p = 0; p < cfg.pairs; ++p) {
        const CounterRng rng(cfg.seed, p);
        Field2D a = draw(rng.split(1));
        Field2D b = draw(rng.split(2));
        pairs.emplace_back(std::move(a), std::move(b));
    }

    for (double lambda : cfg.lambdas) {
        const ConvexParams params{lambda, cfg.alpha, cfg.beta};
        const ObjectiveContext ctx(g, null_traces(g), params, floor);
        const Field2D& w = ctx.weight();
        const Field2D& quad = ctx.quadrature();
        ConvexityRow row{lambda, std::numeric_limits<double>::infinity(), 0, std::numeric_limits<double>::infinity()};
        for (const auto& [q1, q2] : pairs) {
            const Field2D h = q2 - q1;
            const double div = bregman_divergence(q1, h, ctx);
            double wnorm = 0.0;
            for (std::size_t k = 0; k < g.size(); ++k) wnorm += quad.values()[k] * w.values()[k] * h.values()[k] * h.values()[k];
            row.min_divergence = std::min(row.min_divergence, div);
            if (wnorm > 0.0) row.min_normalized = std::min(row.min_normalized, div / wnorm);
            if (div < 0.0) ++row.negative_pairs;
        }
        if (!out.rows.empty() && row.min_divergence < out.rows.back().min_divergence) out.nondecreasing = false;
        if (row.negative_pairs == 0) out.lambda_emp = lambda;
        out.rows.push_back(row);
    }
    return out;
}

}  // namespace convexiwave
