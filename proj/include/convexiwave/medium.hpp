#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <variant>
#include <vector>

#include "convexiwave/errors.hpp"

namespace convexiwave {

/// Uniform 1D partition of [lo, hi] into n intervals.
class UniformAxis {
public:
    UniformAxis(double lo, double hi, std::size_t intervals) : lo_(lo), hi_(hi), n_(intervals) {
        require(intervals >= 1, "axis needs at least one interval");
        require(hi > lo, "axis requires hi > lo");
    }

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    std::size_t intervals() const { return n_; }
    std::size_t nodes() const { return n_ + 1; }
    double step() const { return (hi_ - lo_) / static_cast<double>(n_); }
    double operator[](std::size_t i) const { return lo_ + static_cast<double>(i) * step(); }

    /// Index of the node at x, or nodes() if x is not a node (relative tolerance 1e-9 of a step).
    std::size_t node_index(double x) const {
        const double s = (x - lo_) / step();
        const double r = std::round(s);
        if (r < 0.0 || r > static_cast<double>(n_) || std::abs(s - r) > 1e-9) return nodes();
        return static_cast<std::size_t>(r);
    }

    bool operator==(const UniformAxis&) const = default;

private:
    double lo_;
    double hi_;
    std::size_t n_;
};

/// Linear interpolation of node samples; clamps at the ends.
inline double interpolate(const UniformAxis& axis, const std::vector<double>& v, double x) {
    const double s = (x - axis.lo()) / axis.step();
    if (s <= 0.0) return v.front();
    if (s >= static_cast<double>(axis.intervals())) return v.back();
    const auto k = static_cast<std::size_t>(std::floor(s));
    const double w = s - static_cast<double>(k);
    return (1.0 - w) * v[k] + w * v[k + 1];
}

/// c(x) sampled on nodes. c = 1 outside [eps, M]; c_lower <= c <= c_upper inside.
class MediumProfile {
public:
    struct Bounds {
        bool operator==(const Bounds&) const = default;

        double c_lower = 0.1;
        double c_upper = 15.0;
    };

    MediumProfile(UniformAxis axis, std::vector<double> c, Bounds bounds, double eps, double big_m)
        : axis_(axis), c_(std::move(c)), bounds_(bounds), eps_(eps), m_(big_m) {
        require(c_.size() == axis_.nodes(), "medium samples do not match axis");
        require(bounds_.c_lower > 0.0 && bounds_.c_upper >= bounds_.c_lower, "invalid medium bounds");
        require(big_m > eps, "medium support requires M > eps");
        constexpr double tol = 1e-9;
        for (std::size_t i = 0; i < c_.size(); ++i) {
            const double x = axis_[i];
            const double v = c_[i];
            require(std::isfinite(v) && v > 0.0, "medium values must be positive and finite");
            const bool inside = x >= eps_ - tol && x <= m_ + tol;
            if (inside) {
                require(v >= bounds_.c_lower * (1.0 - tol) && v <= bounds_.c_upper * (1.0 + tol),
                        "medium value outside [c_lower, c_upper]");
            } else {
                require(std::abs(v - 1.0) <= tol, "medium must equal 1 outside [eps, M]");
            }
        }
    }

    const UniformAxis& axis() const { return axis_; }
    const std::vector<double>& values() const { return c_; }
    const Bounds& bounds() const { return bounds_; }
    double eps() const { return eps_; }
    double big_m() const { return m_; }

    /// Interpolated value; 1 outside the sampled axis.
    double at(double x) const {
        if (x < axis_.lo() || x > axis_.hi()) return 1.0;
        return interpolate(axis_, c_, x);
    }

    double max_value() const { return *std::max_element(c_.begin(), c_.end()); }

private:
    UniformAxis axis_;
    std::vector<double> c_;
    Bounds bounds_;
    double eps_;
    double m_;
};

// Analytic shapes for the simulated tests. Each piece overrides the unit
// background where it is active; later pieces win on overlap.

/// 1 + amplitude * exp(d^2 / (d^2 - r^2)) for d = |x - center| < r.
struct BumpPiece {
    bool operator==(const BumpPiece&) const = default;

    double center = 0.5;
    double radius = 0.2;
    double amplitude = 10.0;
};

/// Constant value on |x - center| < half_width.
struct StepPiece {
    bool operator==(const StepPiece&) const = default;

    double center = 0.6;
    double half_width = 0.1;
    double value = 6.0;
};

/// base + amplitude * sin(frequency * (x - shift)) on |x - center| < half_width.
struct SinePiece {
    bool operator==(const SinePiece&) const = default;

    double center = 0.8;
    double half_width = 0.6;
    double base = 3.0;
    double amplitude = 0.3;
    double frequency = std::numbers::pi;
    double shift = 1.25;
};

/// Tabulated samples, linearly interpolated on [x.front(), x.back()].
struct TablePiece {
    bool operator==(const TablePiece&) const = default;

    std::vector<double> x;
    std::vector<double> c;
};

using MediumPiece = std::variant<BumpPiece, StepPiece, SinePiece, TablePiece>;

struct MediumShape {

    bool operator==(const MediumShape&) const = default;

    std::vector<MediumPiece> pieces;

    double operator()(double x) const {
        double c = 1.0;
        for (const auto& piece : pieces) {
            std::visit(
                [&](const auto& p) {
                    using P = std::decay_t<decltype(p)>;
                    if constexpr (std::is_same_v<P, BumpPiece>) {
                        const double d = x - p.center;
                        if (std::abs(d) < p.radius)
                            c = 1.0 + p.amplitude * std::exp(d * d / (d * d - p.radius * p.radius));
                    } else if constexpr (std::is_same_v<P, StepPiece>) {
                        if (std::abs(x - p.center) < p.half_width) c = p.value;
                    } else if constexpr (std::is_same_v<P, SinePiece>) {
                        if (std::abs(x - p.center) < p.half_width)
                            c = p.base + p.amplitude * std::sin(p.frequency * (x - p.shift));
                    } else {
                        if (p.x.size() >= 2 && x >= p.x.front() && x <= p.x.back()) {
                            auto it = std::upper_bound(p.x.begin(), p.x.end(), x);
                            std::size_t k = static_cast<std::size_t>(it - p.x.begin());
                            if (k >= p.x.size()) k = p.x.size() - 1;
                            const std::size_t k0 = k - 1;
                            const double w = (x - p.x[k0]) / (p.x[k] - p.x[k0]);
                            c = (1.0 - w) * p.c[k0] + w * p.c[k];
                        }
                    }
                },
                piece);
        }
        return c;
    }
};

inline MediumProfile sample_medium(const MediumShape& shape, const UniformAxis& axis,
                                   MediumProfile::Bounds bounds, double eps, double big_m) {
    std::vector<double> c(axis.nodes());
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double x = axis[i];
        c[i] = (x < eps || x > big_m) ? 1.0 : shape(x);
    }
    return MediumProfile(axis, std::move(c), bounds, eps, big_m);
}

}  // namespace convexiwave
