#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "convexiwave/boundary_data.hpp"
#include "convexiwave/errors.hpp"
#include "convexiwave/forward.hpp"
#include "convexiwave/grid.hpp"
#include "convexiwave/medium.hpp"

namespace convexiwave {

/// tau(x) = integral of sqrt(c) from 0 to x, sampled on the medium's axis.
/// c = 1 off the axis, so tau extends with unit slope there.
class TravelTime {
public:
    TravelTime(UniformAxis axis, std::vector<double> tau) : axis_(axis), tau_(std::move(tau)) {
        require(tau_.size() == axis_.nodes(), "travel time samples do not match axis");
    }

    const UniformAxis& axis() const { return axis_; }
    const std::vector<double>& values() const { return tau_; }

    double at(double x) const {
        if (x < axis_.lo()) return tau_.front() - (axis_.lo() - x);
        if (x > axis_.hi()) return tau_.back() + (x - axis_.hi());
        return interpolate(axis_, tau_, x);
    }

private:
    UniformAxis axis_;
    std::vector<double> tau_;
};

inline TravelTime travel_time(const MediumProfile& medium) {
    const auto& axis = medium.axis();
    std::vector<double> root(axis.nodes());
    for (std::size_t i = 0; i < root.size(); ++i) root[i] = std::sqrt(medium.values()[i]);
    std::vector<double> tau = cumulative_trapezoid(root, axis.step());
    // Shift so that tau(0) = 0.
    double offset = 0.0;
    if (axis.lo() >= 0.0) {
        offset = axis.lo();
    } else if (axis.hi() <= 0.0) {
        offset = -axis.hi() - tau.back();
    } else {
        offset = -interpolate(axis, tau, 0.0);
    }
    for (double& v : tau) v += offset;
    if (axis.lo() < 0.0 && axis.hi() > 0.0) {
        const std::size_t zero = axis.node_index(0.0);
        if (zero < axis.nodes()) tau[zero] = 0.0;
    }
    return TravelTime(axis, std::move(tau));
}

/// q(x, t) = u(x, t + tau(x)) on [eps, M] x [0, T], with the admissible floor
/// q(x, 0) >= q_floor = 1 / (2 c_upper^(1/4)).
struct QField {
    Field2D values;
    double q_floor;

    QField(Field2D v, double floor) : values(std::move(v)), q_floor(floor) {
        require(q_floor > 0.0, "q floor must be positive");
    }

    const SpaceTimeGrid& grid() const { return values.grid(); }
};

inline double q_floor_for(double c_upper) {
    require(c_upper > 0.0, "c_upper must be positive");
    return 1.0 / (2.0 * std::pow(c_upper, 0.25));
}

/// Throws FloorViolation if any q(x, 0) is below the floor.
inline void check_floor(const Field2D& q, double q_floor) {
    for (std::size_t i = 0; i < q.grid().x_nodes(); ++i) {
        const double v = q(i, 0);
        if (!(v >= q_floor * (1.0 - 1e-12)))
            throw Error(ErrorKind::FloorViolation, "q(x,0) below the admissible floor at x = " +
                                                       std::to_string(q.grid().x(i)));
    }
}

namespace detail {

inline double bilinear(const Field2D& u, double x, double t) {
    const auto& g = u.grid();
    double sx = (x - g.x_min()) / g.dx();
    double st = t / g.dt();
    sx = std::clamp(sx, 0.0, static_cast<double>(g.nx()));
    st = std::clamp(st, 0.0, static_cast<double>(g.nt()));
    auto i = std::min(static_cast<std::size_t>(std::floor(sx)), g.nx() - 1);
    auto j = std::min(static_cast<std::size_t>(std::floor(st)), g.nt() - 1);
    double wx = sx - static_cast<double>(i);
    double wt = st - static_cast<double>(j);
    // Snap to the node when x lies on it, so the interpolation is purely in t.
    if (wx < 1e-9) wx = 0.0;
    if (wx > 1.0 - 1e-9) wx = 1.0;
    return (1.0 - wx) * ((1.0 - wt) * u(i, j) + wt * u(i, j + 1)) +
           wx * ((1.0 - wt) * u(i + 1, j) + wt * u(i + 1, j + 1));
}

}  // namespace detail

inline QField q_from_u(const Field2D& u, const TravelTime& tau, const SpaceTimeGrid& grid_q, double c_upper) {
    const auto& gu = u.grid();
    require(grid_q.x_min() >= gu.x_min() - 1e-12 && grid_q.x_max() <= gu.x_max() + 1e-12,
            "q grid must lie inside the wave grid");
    Field2D q(grid_q);
    for (std::size_t i = 0; i < grid_q.x_nodes(); ++i) {
        const double x = grid_q.x(i);
        const double shift = tau.at(x);
        if (grid_q.t_max() + shift > gu.t_max() * (1.0 + 1e-12))
            throw Error(ErrorKind::HorizonTooShort, "wave field does not cover t + tau(x)");
        for (std::size_t j = 0; j < grid_q.t_nodes(); ++j) q(i, j) = detail::bilinear(u, x, grid_q.t(j) + shift);
    }
    return QField(std::move(q), q_floor_for(c_upper));
}

/// c(x) = 1 / (16 q(x, 0)^4) on the q grid's x-nodes.
inline MediumProfile c_from_q(const QField& q) {
    check_floor(q.values, q.q_floor);
    const auto& g = q.grid();
    std::vector<double> c(g.x_nodes());
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double s = q.values(i, 0);
        c[i] = 1.0 / (16.0 * s * s * s * s);
    }
    const double c_upper = 1.0 / (16.0 * std::pow(q.q_floor, 4));
    const double c_min = *std::min_element(c.begin(), c.end());
    MediumProfile::Bounds bounds{std::min(c_min, 0.1), std::max(c_upper, c_min)};
    return MediumProfile(UniformAxis(g.x_min(), g.x_max(), g.nx()), std::move(c), bounds, g.x_min(), g.x_max());
}

/// Nonlocal coefficients of F read from the t = 0 row:
/// a(x) = 1 / (2 s^2), b(x) = s' / (2 s^3) with s = q(x, 0).
struct FrozenCoefficients {
    std::vector<double> s;
    std::vector<double> s_x;
    std::vector<double> a;
    std::vector<double> b;
};

inline FrozenCoefficients frozen_coefficients(const Field2D& q, const Derivatives& d) {
    FrozenCoefficients fc;
    fc.s = q.initial_row();
    fc.s_x = d.x1().apply(fc.s);
    fc.a.resize(fc.s.size());
    fc.b.resize(fc.s.size());
    for (std::size_t i = 0; i < fc.s.size(); ++i) {
        const double s = fc.s[i];
        fc.a[i] = 1.0 / (2.0 * s * s);
        fc.b[i] = fc.s_x[i] / (2.0 * s * s * s);
    }
    return fc;
}

/// F(q) = q_xx - q_xt / (2 q(x,0)^2) + q_t q_x(x,0) / (2 q(x,0)^3).
inline Field2D residual_F(const Field2D& q, const Derivatives& d) {
    const FrozenCoefficients fc = frozen_coefficients(q, d);
    const Field2D qt = d.t(q);
    const Field2D qxt = d.x(qt);
    Field2D f = d.xx(q);
    const auto& g = q.grid();
    for (std::size_t i = 0; i < g.x_nodes(); ++i)
        for (std::size_t j = 0; j < g.t_nodes(); ++j) f(i, j) += -fc.a[i] * qxt(i, j) + fc.b[i] * qt(i, j);
    return f;
}

inline Field2D residual_F(const QField& q) {
    check_floor(q.values, q.q_floor);
    return residual_F(q.values, Derivatives(q.grid()));
}

/// Dirichlet and Neumann traces of q at x = eps on the q grid's t-nodes.
struct BoundaryTraces {
    Signal q_eps;
    Signal qx_eps;
};

/// q(eps, t) = g0(t + eps), q_x(eps, t) = g1(t + eps) + g0'(t + eps), with g0'
/// from Tikhonov differentiation.
inline BoundaryTraces boundary_traces_from_data(const BoundaryData& data, const SpaceTimeGrid& grid_q,
                                                double derivative_reg) {
    const double needed = grid_q.t_max() + data.eps;
    if (data.g0.end_time() < needed - 1e-9 * std::max(1.0, needed) || data.g0.t0() > 1e-12)
        throw Error(ErrorKind::HorizonTooShort, "boundary data must cover [0, T + eps]");
    const Signal g0_prime = tikhonov_differentiate(data.g0, derivative_reg);
    std::vector<double> q_eps(grid_q.t_nodes()), qx_eps(grid_q.t_nodes());
    for (std::size_t j = 0; j < grid_q.t_nodes(); ++j) {
        const double t = grid_q.t(j) + data.eps;
        q_eps[j] = data.g0.at(t);
        qx_eps[j] = data.g1.at(t) + g0_prime.at(t);
    }
    return {Signal(0.0, grid_q.dt(), std::move(q_eps)), Signal(0.0, grid_q.dt(), std::move(qx_eps))};
}

}  // namespace convexiwave
