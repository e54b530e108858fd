#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "convexiwave/errors.hpp"

namespace convexiwave {

/// Uniform partition of [x_min, x_max] x [0, t_max] into nx by nt intervals.
/// Node (i, j) sits at (x_min + i*dx, j*dt).
class SpaceTimeGrid {
public:
    SpaceTimeGrid(double x_min, double x_max, double t_max, std::size_t nx, std::size_t nt)
        : x_min_(x_min), x_max_(x_max), t_max_(t_max), nx_(nx), nt_(nt) {
        require(nx >= 2 && nt >= 2, "grid needs at least 2 intervals per direction");
        require(std::isfinite(x_min) && std::isfinite(x_max) && std::isfinite(t_max),
                "grid bounds must be finite");
        require(x_max > x_min, "grid requires x_max > x_min");
        require(t_max > 0.0, "grid requires t_max > 0");
    }

    double x_min() const { return x_min_; }
    double x_max() const { return x_max_; }
    double t_max() const { return t_max_; }
    std::size_t nx() const { return nx_; }
    std::size_t nt() const { return nt_; }

    double dx() const { return (x_max_ - x_min_) / static_cast<double>(nx_); }
    double dt() const { return t_max_ / static_cast<double>(nt_); }
    double x(std::size_t i) const { return x_min_ + static_cast<double>(i) * dx(); }
    double t(std::size_t j) const { return static_cast<double>(j) * dt(); }

    std::size_t x_nodes() const { return nx_ + 1; }
    std::size_t t_nodes() const { return nt_ + 1; }
    std::size_t size() const { return x_nodes() * t_nodes(); }
    std::size_t index(std::size_t i, std::size_t j) const { return i * t_nodes() + j; }

    double area() const { return (x_max_ - x_min_) * t_max_; }

    bool operator==(const SpaceTimeGrid&) const = default;

private:
    double x_min_;
    double x_max_;
    double t_max_;
    std::size_t nx_;
    std::size_t nt_;
};

/// Dense row-major samples on a SpaceTimeGrid: one row per x-node, columns over t.
class Field2D {
public:
    explicit Field2D(const SpaceTimeGrid& grid, double fill = 0.0)
        : grid_(grid), values_(grid.size(), fill) {}

    Field2D(const SpaceTimeGrid& grid, std::vector<double> values)
        : grid_(grid), values_(std::move(values)) {
        require(values_.size() == grid_.size(), "field size does not match grid");
    }

    template <typename Fn>
    static Field2D sample(const SpaceTimeGrid& grid, Fn&& fn) {
        Field2D f(grid);
        for (std::size_t i = 0; i < grid.x_nodes(); ++i)
            for (std::size_t j = 0; j < grid.t_nodes(); ++j) f(i, j) = fn(grid.x(i), grid.t(j));
        return f;
    }

    const SpaceTimeGrid& grid() const { return grid_; }

    double& operator()(std::size_t i, std::size_t j) { return values_[grid_.index(i, j)]; }
    double operator()(std::size_t i, std::size_t j) const { return values_[grid_.index(i, j)]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    std::span<double> row(std::size_t i) {
        return std::span<double>(values_).subspan(i * grid_.t_nodes(), grid_.t_nodes());
    }
    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(values_).subspan(i * grid_.t_nodes(), grid_.t_nodes());
    }

    /// Values at t = 0 for every x-node.
    std::vector<double> initial_row() const {
        std::vector<double> out(grid_.x_nodes());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*this)(i, 0);
        return out;
    }

    std::vector<double> column(std::size_t j) const {
        std::vector<double> out(grid_.x_nodes());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*this)(i, j);
        return out;
    }

    bool all_finite() const {
        return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

    Field2D& operator+=(const Field2D& other) {
        require(grid_ == other.grid_, "field grids differ");
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
        return *this;
    }
    Field2D& operator-=(const Field2D& other) {
        require(grid_ == other.grid_, "field grids differ");
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
        return *this;
    }
    Field2D& operator*=(double s) {
        for (double& v : values_) v *= s;
        return *this;
    }

    /// this += s * other
    Field2D& axpy(double s, const Field2D& other) {
        require(grid_ == other.grid_, "field grids differ");
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += s * other.values_[k];
        return *this;
    }

    friend Field2D operator+(Field2D a, const Field2D& b) { return a += b; }
    friend Field2D operator-(Field2D a, const Field2D& b) { return a -= b; }
    friend Field2D operator*(double s, Field2D a) { return a *= s; }

private:
    SpaceTimeGrid grid_;
    std::vector<double> values_;
};

/// Euclidean inner product of node values, summed in index order.
inline double dot(const Field2D& a, const Field2D& b) {
    require(a.grid() == b.grid(), "field grids differ");
    auto va = a.values();
    auto vb = b.values();
    double s = 0.0;
    for (std::size_t k = 0; k < va.size(); ++k) s += va[k] * vb[k];
    return s;
}

inline double norm2(const Field2D& a) { return std::sqrt(dot(a, a)); }

/// Uniformly sampled time series starting at t0.
class Signal {
public:
    Signal(double t0, double dt, std::vector<double> samples)
        : t0_(t0), dt_(dt), samples_(std::move(samples)) {
        require(dt > 0.0 && std::isfinite(dt), "signal dt must be positive");
        require(!samples_.empty(), "signal must be non-empty");
        require(std::all_of(samples_.begin(), samples_.end(), [](double v) { return std::isfinite(v); }),
                "signal samples must be finite");
    }

    double t0() const { return t0_; }
    double dt() const { return dt_; }
    std::size_t size() const { return samples_.size(); }
    double time(std::size_t k) const { return t0_ + static_cast<double>(k) * dt_; }
    double end_time() const { return time(samples_.size() - 1); }
    std::span<const double> samples() const { return samples_; }
    double operator[](std::size_t k) const { return samples_[k]; }

    /// Linear interpolation; clamps to the end samples outside the sampled range.
    double at(double t) const {
        const double s = (t - t0_) / dt_;
        if (s <= 0.0) return samples_.front();
        const auto last = static_cast<double>(samples_.size() - 1);
        if (s >= last) return samples_.back();
        const auto k = static_cast<std::size_t>(std::floor(s));
        const double w = s - static_cast<double>(k);
        return (1.0 - w) * samples_[k] + w * samples_[k + 1];
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : samples_) m = std::max(m, std::abs(v));
        return m;
    }

    bool operator==(const Signal&) const = default;

private:
    double t0_;
    double dt_;
    std::vector<double> samples_;
};

enum class Axis { X, T };

/// One-dimensional finite-difference operator on n+1 uniformly spaced nodes.
/// Every row holds at most four consecutive coefficients starting at `start`.
class Stencil1D {
public:
    struct Row {
        std::size_t start = 0;
        std::size_t count = 0;
        std::array<double, 4> coef{};
    };

    /// Central differences inside, second-order one-sided at both ends.
    static Stencil1D first_derivative(std::size_t intervals, double h) {
        require(intervals >= 2, "first derivative stencil needs at least 2 intervals");
        Stencil1D s(intervals);
        const double c = 1.0 / (2.0 * h);
        const std::size_t n = intervals;
        s.rows_[0] = Row{0, 3, {-3.0 * c, 4.0 * c, -1.0 * c, 0.0}};
        for (std::size_t k = 1; k < n; ++k) s.rows_[k] = Row{k - 1, 3, {-c, 0.0, c, 0.0}};
        s.rows_[n] = Row{n - 2, 3, {1.0 * c, -4.0 * c, 3.0 * c, 0.0}};
        return s;
    }

    /// Three-point central differences inside. The end rows use the four-point
    /// second-order closure when there are enough nodes, else the three-point one.
    static Stencil1D second_derivative(std::size_t intervals, double h) {
        require(intervals >= 2, "second derivative stencil needs at least 2 intervals");
        Stencil1D s(intervals);
        const double c = 1.0 / (h * h);
        const std::size_t n = intervals;
        for (std::size_t k = 1; k < n; ++k) s.rows_[k] = Row{k - 1, 3, {c, -2.0 * c, c, 0.0}};
        if (n >= 3) {
            s.rows_[0] = Row{0, 4, {2.0 * c, -5.0 * c, 4.0 * c, -1.0 * c}};
            s.rows_[n] = Row{n - 3, 4, {-1.0 * c, 4.0 * c, -5.0 * c, 2.0 * c}};
        } else {
            s.rows_[0] = Row{0, 3, {c, -2.0 * c, c, 0.0}};
            s.rows_[n] = Row{n - 2, 3, {c, -2.0 * c, c, 0.0}};
        }
        return s;
    }

    std::size_t nodes() const { return rows_.size(); }
    const Row& row(std::size_t k) const { return rows_[k]; }

    /// out[k] = sum_m coef[m] * in[(start + m) * stride]
    void apply(const double* in, double* out, std::size_t stride) const {
        for (std::size_t k = 0; k < rows_.size(); ++k) {
            const Row& r = rows_[k];
            double acc = 0.0;
            for (std::size_t m = 0; m < r.count; ++m) acc += r.coef[m] * in[(r.start + m) * stride];
            out[k * stride] = acc;
        }
    }

    /// Transposed application, accumulated into out.
    void apply_transpose_add(const double* in, double* out, std::size_t stride) const {
        for (std::size_t k = 0; k < rows_.size(); ++k) {
            const Row& r = rows_[k];
            const double v = in[k * stride];
            for (std::size_t m = 0; m < r.count; ++m) out[(r.start + m) * stride] += r.coef[m] * v;
        }
    }

    std::vector<double> apply(std::span<const double> in) const {
        require(in.size() == nodes(), "stencil size mismatch");
        std::vector<double> out(nodes());
        apply(in.data(), out.data(), 1);
        return out;
    }

private:
    explicit Stencil1D(std::size_t intervals) : rows_(intervals + 1) {}
    std::vector<Row> rows_;
};

namespace detail {

inline Stencil1D axis_stencil(const SpaceTimeGrid& g, Axis axis, int order) {
    const std::size_t n = axis == Axis::X ? g.nx() : g.nt();
    const double h = axis == Axis::X ? g.dx() : g.dt();
    return order == 1 ? Stencil1D::first_derivative(n, h) : Stencil1D::second_derivative(n, h);
}

inline Field2D apply_along(const Stencil1D& s, const Field2D& f, Axis axis) {
    const auto& g = f.grid();
    Field2D out(g);
    const double* in = f.values().data();
    double* o = out.values().data();
    if (axis == Axis::T) {
        for (std::size_t i = 0; i < g.x_nodes(); ++i)
            s.apply(in + i * g.t_nodes(), o + i * g.t_nodes(), 1);
    } else {
        for (std::size_t j = 0; j < g.t_nodes(); ++j) s.apply(in + j, o + j, g.t_nodes());
    }
    return out;
}

inline void apply_transpose_along_add(const Stencil1D& s, const Field2D& f, Axis axis, Field2D& out) {
    const auto& g = f.grid();
    const double* in = f.values().data();
    double* o = out.values().data();
    if (axis == Axis::T) {
        for (std::size_t i = 0; i < g.x_nodes(); ++i)
            s.apply_transpose_add(in + i * g.t_nodes(), o + i * g.t_nodes(), 1);
    } else {
        for (std::size_t j = 0; j < g.t_nodes(); ++j) s.apply_transpose_add(in + j, o + j, g.t_nodes());
    }
}

}  // namespace detail

/// The five difference operators used throughout, prebuilt for one grid.
/// Each has a transpose so gradients of discrete functionals are exact.
class Derivatives {
public:
    explicit Derivatives(const SpaceTimeGrid& grid)
        : grid_(grid),
          dx_(detail::axis_stencil(grid, Axis::X, 1)),
          dt_(detail::axis_stencil(grid, Axis::T, 1)),
          dxx_(detail::axis_stencil(grid, Axis::X, 2)),
          dtt_(detail::axis_stencil(grid, Axis::T, 2)) {}

    const SpaceTimeGrid& grid() const { return grid_; }
    const Stencil1D& x1() const { return dx_; }
    const Stencil1D& t1() const { return dt_; }
    const Stencil1D& x2() const { return dxx_; }
    const Stencil1D& t2() const { return dtt_; }

    Field2D x(const Field2D& f) const { return detail::apply_along(dx_, f, Axis::X); }
    Field2D t(const Field2D& f) const { return detail::apply_along(dt_, f, Axis::T); }
    Field2D xx(const Field2D& f) const { return detail::apply_along(dxx_, f, Axis::X); }
    Field2D tt(const Field2D& f) const { return detail::apply_along(dtt_, f, Axis::T); }
    Field2D xt(const Field2D& f) const { return x(t(f)); }

    void x_transpose_add(const Field2D& f, Field2D& out) const {
        detail::apply_transpose_along_add(dx_, f, Axis::X, out);
    }
    void t_transpose_add(const Field2D& f, Field2D& out) const {
        detail::apply_transpose_along_add(dt_, f, Axis::T, out);
    }
    void xx_transpose_add(const Field2D& f, Field2D& out) const {
        detail::apply_transpose_along_add(dxx_, f, Axis::X, out);
    }
    void tt_transpose_add(const Field2D& f, Field2D& out) const {
        detail::apply_transpose_along_add(dtt_, f, Axis::T, out);
    }
    void xt_transpose_add(const Field2D& f, Field2D& out) const {
        Field2D tmp(grid_);
        x_transpose_add(f, tmp);
        t_transpose_add(tmp, out);
    }

private:
    SpaceTimeGrid grid_;
    Stencil1D dx_;
    Stencil1D dt_;
    Stencil1D dxx_;
    Stencil1D dtt_;
};

inline Field2D diff_x(const Field2D& f) { return Derivatives(f.grid()).x(f); }
inline Field2D diff_t(const Field2D& f) { return Derivatives(f.grid()).t(f); }
inline Field2D diff_xx(const Field2D& f) { return Derivatives(f.grid()).xx(f); }
inline Field2D diff_tt(const Field2D& f) { return Derivatives(f.grid()).tt(f); }
inline Field2D diff_xt(const Field2D& f) { return Derivatives(f.grid()).xt(f); }

/// Composite trapezoidal weights on n+1 nodes with spacing h.
inline std::vector<double> trapezoid_weights(std::size_t intervals, double h) {
    std::vector<double> w(intervals + 1, h);
    w.front() = 0.5 * h;
    w.back() = 0.5 * h;
    return w;
}

/// Tensor-product trapezoidal weight of every node, laid out like a Field2D.
inline Field2D quadrature_weights(const SpaceTimeGrid& g) {
    const auto wx = trapezoid_weights(g.nx(), g.dx());
    const auto wt = trapezoid_weights(g.nt(), g.dt());
    Field2D w(g);
    for (std::size_t i = 0; i < g.x_nodes(); ++i)
        for (std::size_t j = 0; j < g.t_nodes(); ++j) w(i, j) = wx[i] * wt[j];
    return w;
}

inline double integrate(const Field2D& f) {
    const auto& g = f.grid();
    const auto wx = trapezoid_weights(g.nx(), g.dx());
    const auto wt = trapezoid_weights(g.nt(), g.dt());
    double total = 0.0;
    for (std::size_t i = 0; i < g.x_nodes(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < g.t_nodes(); ++j) row += wt[j] * f(i, j);
        total += wx[i] * row;
    }
    return total;
}

/// Trapezoidal integral of samples with uniform spacing h.
inline double integrate_1d(std::span<const double> v, double h) {
    if (v.size() < 2) return 0.0;
    double s = 0.5 * (v.front() + v.back());
    for (std::size_t k = 1; k + 1 < v.size(); ++k) s += v[k];
    return s * h;
}

/// Running trapezoidal integral, out[0] = 0.
inline std::vector<double> cumulative_trapezoid(std::span<const double> v, double h) {
    std::vector<double> out(v.size(), 0.0);
    for (std::size_t k = 1; k < v.size(); ++k) out[k] = out[k - 1] + 0.5 * h * (v[k - 1] + v[k]);
    return out;
}

namespace detail {
inline double integrate_square(const Field2D& f) {
    Field2D sq = f;
    for (double& v : sq.values()) v *= v;
    return integrate(sq);
}
}  // namespace detail

/// Discrete H^2 norm squared: integrals of f^2 and of every derivative up to order two.
inline double h2_norm_sq(const Field2D& f, const Derivatives& d) {
    const Field2D ft = d.t(f);
    return detail::integrate_square(f) + detail::integrate_square(d.x(f)) + detail::integrate_square(ft) +
           detail::integrate_square(d.xx(f)) + detail::integrate_square(d.x(ft)) +
           detail::integrate_square(d.tt(f));
}

inline double h2_norm_sq(const Field2D& f) { return h2_norm_sq(f, Derivatives(f.grid())); }

/// Gradient of h2_norm_sq with respect to node values.
inline Field2D h2_norm_sq_gradient(const Field2D& f, const Derivatives& d) {
    const auto& g = f.grid();
    const Field2D w = quadrature_weights(g);
    auto weighted = [&](Field2D v) {
        auto vv = v.values();
        auto ww = w.values();
        for (std::size_t k = 0; k < vv.size(); ++k) vv[k] *= 2.0 * ww[k];
        return v;
    };
    Field2D grad = weighted(f);
    const Field2D ft = d.t(f);
    d.x_transpose_add(weighted(d.x(f)), grad);
    d.t_transpose_add(weighted(ft), grad);
    d.xx_transpose_add(weighted(d.xx(f)), grad);
    d.xt_transpose_add(weighted(d.x(ft)), grad);
    d.tt_transpose_add(weighted(d.tt(f)), grad);
    return grad;
}

}  // namespace convexiwave
