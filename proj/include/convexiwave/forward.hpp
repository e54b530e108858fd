#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "convexiwave/boundary_data.hpp"
#include "convexiwave/errors.hpp"
#include "convexiwave/grid.hpp"
#include "convexiwave/medium.hpp"
#include "convexiwave/rng.hpp"

namespace convexiwave {

/// Smoothed Dirac (k / sqrt(2 pi)) exp(-(k x)^2 / 2).
struct SourceModel {
    bool operator==(const SourceModel&) const = default;

    double k = 30.0;

    double operator()(double x) const {
        return k / std::sqrt(2.0 * std::numbers::pi) * std::exp(-0.5 * (k * x) * (k * x));
    }
};

/// Region [0, x_hi] x [0, t_hi] where the computed wave is reset to 1/2.
struct CorrectionBox {
    bool operator==(const CorrectionBox&) const = default;

    double x_hi = 0.0067;
    double t_hi = 0.26;
};

namespace detail {

/// Tridiagonal system with a constant matrix, factored once (Thomas algorithm).
class TridiagonalFactor {
public:
    TridiagonalFactor(std::vector<double> lower, std::vector<double> diag, std::vector<double> upper)
        : lower_(std::move(lower)), upper_(std::move(upper)), inv_pivot_(diag.size()), c_prime_(diag.size()) {
        const std::size_t n = diag.size();
        double pivot = diag[0];
        for (std::size_t i = 0; i < n; ++i) {
            if (i > 0) pivot = diag[i] - lower_[i] * c_prime_[i - 1];
            if (!(std::abs(pivot) > 1e-300) || !std::isfinite(pivot))
                throw Error(ErrorKind::SingularSystem, "zero pivot in tridiagonal solve");
            inv_pivot_[i] = 1.0 / pivot;
            c_prime_[i] = i + 1 < n ? upper_[i] * inv_pivot_[i] : 0.0;
        }
    }

    void solve(std::vector<double>& rhs) const {
        const std::size_t n = rhs.size();
        rhs[0] *= inv_pivot_[0];
        for (std::size_t i = 1; i < n; ++i) rhs[i] = (rhs[i] - lower_[i] * rhs[i - 1]) * inv_pivot_[i];
        for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c_prime_[i] * rhs[i + 1];
    }

private:
    std::vector<double> lower_;
    std::vector<double> upper_;
    std::vector<double> inv_pivot_;
    std::vector<double> c_prime_;
};

}  // namespace detail

/// Solves c u_tt = u_xx on [-a, a] x [0, T] with u(.,0) = 0, u_t(.,0) = smoothed Dirac
/// and first-order absorbing conditions u_t - u_x = 0 at -a, u_t + u_x = 0 at a.
/// u_xx is taken at the new time level, so each step is one tridiagonal solve.
inline Field2D simulate(const MediumProfile& medium, const SpaceTimeGrid& grid, const SourceModel& source = {}) {
    require(source.k > 0.0, "source k must be positive");
    require(medium.axis() == UniformAxis(grid.x_min(), grid.x_max(), grid.nx()),
            "medium must be sampled on the simulation x-nodes");
    const std::size_t n = grid.x_nodes();
    const double dx = grid.dx();
    const double dt = grid.dt();
    const double r = (dt * dt) / (dx * dx);
    const double damp = dt / dx;
    const auto& c = medium.values();

    std::vector<double> lower(n, -r), diag(n), upper(n, -r);
    for (std::size_t i = 0; i < n; ++i) diag[i] = c[i] + 2.0 * r;
    // Ghost nodes eliminated through the absorbing conditions.
    upper[0] = -2.0 * r;
    diag[0] += damp;
    lower[n - 1] = -2.0 * r;
    diag[n - 1] += damp;
    lower[0] = 0.0;
    upper[n - 1] = 0.0;
    const detail::TridiagonalFactor factor(lower, diag, upper);

    Field2D u(grid);
    // u^1 = u^0 + dt u_t + dt^2/2 u_xx/c with u^0 = 0.
    for (std::size_t i = 0; i < n; ++i) u(i, 1) = dt * source(grid.x(i));

    std::vector<double> rhs(n);
    for (std::size_t j = 1; j < grid.nt(); ++j) {
        for (std::size_t i = 0; i < n; ++i) rhs[i] = c[i] * (2.0 * u(i, j) - u(i, j - 1));
        rhs[0] += damp * u(0, j - 1);
        rhs[n - 1] += damp * u(n - 1, j - 1);
        factor.solve(rhs);
        for (std::size_t i = 0; i < n; ++i) u(i, j + 1) = rhs[i];
    }
    if (!u.all_finite()) throw Error(ErrorKind::SingularSystem, "forward solution is not finite");
    return u;
}

/// Resets u to 1/2 on the box next to the source, where the smoothed source
/// spoils the step-function behavior of the exact solution.
inline Field2D correct_near_origin(Field2D u, const CorrectionBox& box) {
    require(box.x_hi >= 0.0 && box.t_hi >= 0.0, "correction box must be nonnegative");
    const auto& g = u.grid();
    const double tol = 1e-9;
    for (std::size_t i = 0; i < g.x_nodes(); ++i) {
        const double x = g.x(i);
        if (x < -tol * g.dx() || x > box.x_hi + tol * g.dx()) continue;
        for (std::size_t j = 0; j < g.t_nodes(); ++j) {
            if (g.t(j) > box.t_hi + tol * g.dt()) break;
            u(i, j) = 0.5;
        }
    }
    return u;
}

/// g0(t) = u(x_obs, t) and g1(t) = u_x(x_obs, t) by the second-order one-sided stencil.
inline BoundaryData extract_boundary(const Field2D& u, double x_obs, double horizon) {
    const auto& g = u.grid();
    const UniformAxis axis(g.x_min(), g.x_max(), g.nx());
    const std::size_t i = axis.node_index(x_obs);
    if (i >= axis.nodes()) throw Error(ErrorKind::OffGridObservation, "observation point is not a grid node");
    require(horizon > 0.0, "horizon must be positive");
    if (horizon > g.t_max() * (1.0 + 1e-12)) throw Error(ErrorKind::HorizonTooShort, "horizon exceeds simulation time");
    const auto count = static_cast<std::size_t>(std::floor(horizon / g.dt() + 1e-9)) + 1;
    const double dx = g.dx();
    std::vector<double> g0(count), g1(count);
    for (std::size_t j = 0; j < count; ++j) {
        g0[j] = u(i, j);
        if (i + 2 < g.x_nodes())
            g1[j] = (-3.0 * u(i, j) + 4.0 * u(i + 1, j) - u(i + 2, j)) / (2.0 * dx);
        else
            g1[j] = (3.0 * u(i, j) - 4.0 * u(i - 1, j) + u(i - 2, j)) / (2.0 * dx);
    }
    return BoundaryData(Signal(0.0, g.dt(), std::move(g0)), Signal(0.0, g.dt(), std::move(g1)), x_obs);
}

/// Multiplicative noise g_k (1 + delta r_k), r_k uniform on [-1, 1) from a
/// counter-based stream keyed by (seed, stream).
inline Signal add_noise(const Signal& g, double delta, std::uint64_t seed, std::uint64_t stream = 0) {
    require(delta >= 0.0, "noise level must be nonnegative");
    if (delta == 0.0) return g;
    const CounterRng rng(seed, stream);
    std::vector<double> out(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) out[k] = g[k] * (1.0 + delta * rng.symmetric(k));
    return Signal(g.t0(), g.dt(), std::move(out));
}

/// Regularized derivative: argmin_d ||K d - (g - g(t0))||^2 + reg ||d'||^2 with K the
/// cumulative trapezoid. Both norms are dt-weighted sums.
inline Signal tikhonov_differentiate(const Signal& g, double reg) {
    require(reg > 0.0, "Tikhonov parameter must be positive");
    const std::size_t n = g.size();
    require(n >= 3, "differentiation needs at least 3 samples");
    const double h = g.dt();

    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t k = 1; k < n; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        K(kk, 0) = 0.5 * h;
        for (std::size_t m = 1; m < k; ++m) K(kk, static_cast<Eigen::Index>(m)) = h;
        K(kk, kk) += 0.5 * h;
    }
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) y(static_cast<Eigen::Index>(k)) = g[k] - g[0];

    Eigen::MatrixXd A = K.transpose() * K;
    const double s = reg / (h * h);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const auto a = static_cast<Eigen::Index>(k);
        A(a, a) += s;
        A(a + 1, a + 1) += s;
        A(a, a + 1) -= s;
        A(a + 1, a) -= s;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorKind::SingularSystem, "Tikhonov normal matrix is not positive definite");
    const Eigen::VectorXd d = llt.solve(K.transpose() * y);
    if (!d.allFinite()) throw Error(ErrorKind::SingularSystem, "Tikhonov solution is not finite");
    return Signal(g.t0(), h, std::vector<double>(d.data(), d.data() + d.size()));
}

}  // namespace convexiwave
