#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "convexiwave/boundary_data.hpp"
#include "convexiwave/convexify.hpp"
#include "convexiwave/errors.hpp"
#include "convexiwave/grid.hpp"
#include "convexiwave/quasi_reversibility.hpp"
#include "convexiwave/transform.hpp"

namespace convexiwave {

struct DescentConfig {

    bool operator==(const DescentConfig&) const = default;

    double eta_step = 0.1;
    std::size_t max_iters = 200;
    double grad_tol = 1e-8;
    double armijo_c1 = 1e-4;
    double backtrack = 0.5;
    /// Steps below this are treated as a stall.
    double min_step = 1e-14;
    /// Each new line search starts at min(eta_step, growth * last accepted step).
    double step_growth = 2.0;
    std::size_t max_corrections = 12;
    double stop_linf = 1e-3;
    /// The next descent starts from q + omega (q_corrected - q); 1 takes the correction as is.
    double correction_relaxation = 0.5;

    void validate() const {
        require(eta_step > 0.0 && max_iters > 0 && grad_tol > 0.0, "descent parameters must be positive");
        require(armijo_c1 > 0.0 && armijo_c1 < 1.0, "Armijo c1 must lie in (0, 1)");
        require(backtrack > 0.0 && backtrack < 1.0, "backtracking factor must lie in (0, 1)");
        require(min_step > 0.0 && step_growth >= 1.0, "invalid step control");
        require(stop_linf > 0.0, "stop_linf must be positive");
        require(correction_relaxation > 0.0 && correction_relaxation <= 1.0, "correction relaxation must lie in (0, 1]");
    }
};

enum class DescentExit { GradientTolerance, MaxIterations, Stalled };

inline std::string_view to_string(DescentExit e) {
    switch (e) {
        case DescentExit::GradientTolerance: return "gradient_tolerance";
        case DescentExit::MaxIterations: return "max_iterations";
        case DescentExit::Stalled: return "stalled";
    }
    return "unknown";
}

/// One accepted descent step.
struct IterationRecord {
    std::size_t iteration;
    double objective;
    double grad_norm;
    double step;
    std::size_t correction_count;
};

struct DescentResult {
    QField q;
    DescentExit exit;
    std::vector<IterationRecord> history;
};

/// Called after every accepted step; used for structured logging.
using IterationObserver = std::function<void(const IterationRecord&)>;

/// Gradient descent q_n = P(q_{n-1} - eta_n grad J(q_{n-1})) where P raises q(x, 0)
/// to the floor and eta_n comes from Armijo backtracking on the projected point.
inline DescentResult descend(const QField& q0, const ObjectiveContext& ctx, const DescentConfig& cfg,
                             std::size_t correction_count = 0, const IterationObserver& observer = {}) {
    cfg.validate();
    require(q0.grid() == ctx.grid(), "initial q does not match the objective grid");
    const double floor = ctx.q_floor();
    Field2D q = q0.values;
    clamp_initial_row(q, floor);

    DescentResult out{QField(q, floor), DescentExit::MaxIterations, {}};
    auto vg = value_and_gradient(q, ctx);
    double step = cfg.eta_step;
    std::size_t increases = 0;
    double prev_value = vg.value;

    for (std::size_t it = 0; it < cfg.max_iters; ++it) {
        const double gnorm = norm2(vg.gradient);
        if (gnorm <= cfg.grad_tol) {
            out.exit = DescentExit::GradientTolerance;
            break;
        }
        bool accepted = false;
        Field2D trial(q.grid());
        double trial_value = 0.0;
        while (step >= cfg.min_step) {
            trial = q;
            trial.axpy(-step, vg.gradient);
            clamp_initial_row(trial, floor);
            trial_value = evaluate_J(trial, ctx);
            Field2D moved = q;
            moved -= trial;
            const double decrease = dot(vg.gradient, moved);
            if (std::isfinite(trial_value) && trial_value <= vg.value - cfg.armijo_c1 * decrease &&
                trial_value <= vg.value) {
                accepted = true;
                break;
            }
            step *= cfg.backtrack;
        }
        if (!accepted) {
            out.exit = DescentExit::Stalled;
            break;
        }
        q = std::move(trial);
        increases = trial_value > prev_value ? increases + 1 : 0;
        if (increases >= 5) throw Error(ErrorKind::DivergedObjective, "objective increased over 5 accepted steps");
        prev_value = trial_value;
        vg = value_and_gradient(q, ctx);
        IterationRecord rec{it + 1, vg.value, norm2(vg.gradient), step, correction_count};
        out.history.push_back(rec);
        if (observer) observer(rec);
        step = std::min(cfg.eta_step, cfg.step_growth * step);
    }
    if (out.exit == DescentExit::MaxIterations && norm2(vg.gradient) <= cfg.grad_tol)
        out.exit = DescentExit::GradientTolerance;
    out.q = QField(std::move(q), floor);
    return out;
}

/// c = 1 / (16 q(x, 0)^4) without the floor check, for comparing iterates.
inline std::vector<double> coefficient_row(const QField& q) {
    std::vector<double> c(q.grid().x_nodes());
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double s = q.values(i, 0);
        c[i] = 1.0 / (16.0 * s * s * s * s);
    }
    return c;
}

inline double max_abs_difference(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

struct InversionSettings {
    SpaceTimeGrid grid{0.0, 3.0, 6.0, 100, 200};
    double c_upper = 15.0;
    /// Tikhonov parameter for g0'.
    double derivative_reg = 1e-6;
    ConvexParams convex{};
    DescentConfig descent{};
    QRConfig qr{};
    /// Throw NonConvergence when the correction budget runs out.
    bool strict = false;
};

struct InversionResult {
    MediumProfile c_comp;
    MediumProfile c_init;
    QField q_comp;
    std::vector<IterationRecord> history;
    std::size_t corrections = 0;
    bool converged = false;
    double last_correction_change = std::numeric_limits<double>::infinity();
    std::vector<DescentExit> descent_exits;
};

/// Initial guess, then alternate descent on J and correction steps until two
/// successive coefficient estimates agree to stop_linf in the max norm.
inline InversionResult invert(const BoundaryData& data, const InversionSettings& s,
                              const IterationObserver& observer = {}) {
    s.convex.validate();
    s.descent.validate();
    s.qr.validate();
    const auto& grid = s.grid;
    require(std::abs(grid.x_min() - data.eps) <= 1e-12, "q grid must start at eps");
    const double floor = q_floor_for(s.c_upper);
    const BoundaryTraces traces = boundary_traces_from_data(data, grid, s.derivative_reg);
    const QuasiReversibility qr(grid);
    const ObjectiveContext ctx(grid, traces, s.convex, floor);

    QField q = initial_guess(traces, qr, s.qr, floor);
    const MediumProfile c_init = c_from_q(q);

    InversionResult result{c_init, c_init, q, {}, 0, false, std::numeric_limits<double>::infinity(), {}};
    DescentConfig dcfg = s.descent;
    dcfg.eta_step = s.convex.eta_step;

    std::size_t offset = 0;
    for (;;) {
        auto run = descend(q, ctx, dcfg, result.corrections, [&](const IterationRecord& r) {
            IterationRecord shifted = r;
            shifted.iteration += offset;
            if (observer) observer(shifted);
        });
        for (auto r : run.history) {
            r.iteration += offset;
            result.history.push_back(r);
        }
        offset += run.history.size();
        result.descent_exits.push_back(run.exit);
        q = std::move(run.q);
        if (run.exit != DescentExit::MaxIterations) {
            result.converged = true;
            break;
        }
        if (result.corrections >= s.descent.max_corrections) break;
        const auto c_tilde = coefficient_row(q);
        QField corrected = correction_step(q, traces, qr, s.qr);
        ++result.corrections;
        result.last_correction_change = max_abs_difference(c_tilde, coefficient_row(corrected));
        if (result.last_correction_change < s.descent.stop_linf) {
            result.converged = true;
            break;
        }
        const double omega = s.descent.correction_relaxation;
        if (omega < 1.0) {
            Field2D blended = q.values;
            blended.axpy(omega, corrected.values - q.values);
            q = QField(std::move(blended), floor);
        } else {
            q = std::move(corrected);
        }
    }
    if (!result.converged && s.strict)
        throw Error(ErrorKind::NonConvergence, "correction budget exhausted; last change " +
                                                   std::to_string(result.last_correction_change));
    result.q_comp = q;
    result.c_comp = c_from_q(q);
    return result;
}

}  // namespace convexiwave
