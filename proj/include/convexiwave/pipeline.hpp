#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "convexiwave/config.hpp"
#include "convexiwave/forward.hpp"
#include "convexiwave/solver.hpp"
#include "convexiwave/transform.hpp"

namespace convexiwave {

struct SimulatedData {
    BoundaryData clean;
    BoundaryData noisy;
    Field2D wave;
};

inline MediumProfile forward_medium(const ForwardConfig& f, double big_m) {
    const UniformAxis axis(-f.a, f.a, f.nx);
    return sample_medium(f.medium, axis, f.bounds, 0.0, big_m);
}

/// Wave field, the corrected traces at x = 0, and their noisy copies (g0 and g1
/// draw from separate streams of the same seed).
inline SimulatedData simulate_data(const ForwardConfig& f, double big_m) {
    f.validate();
    const SpaceTimeGrid grid(-f.a, f.a, f.t_max, f.nx, f.nt);
    Field2D u = correct_near_origin(simulate(forward_medium(f, big_m), grid, f.source), f.correction);
    BoundaryData clean = extract_boundary(u, 0.0, f.t_max);
    BoundaryData noisy(add_noise(clean.g0, f.noise_delta, f.seed, 0), add_noise(clean.g1, f.noise_delta, f.seed, 1),
                       clean.eps);
    return {std::move(clean), std::move(noisy), std::move(u)};
}

inline SimulatedData simulate_data(const RunConfig& c) { return simulate_data(c.forward, c.transform.big_m); }

/// The true coefficient sampled on the x-nodes of the q grid.
inline std::vector<double> sample_on(const MediumShape& shape, const SpaceTimeGrid& grid) {
    std::vector<double> c(grid.x_nodes());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = shape(grid.x(i));
    return c;
}

/// Largest x in the profile with 2 tau(x) <= t_max: beyond it the reflected
/// signal arrives after the recording ends and the data say nothing about c.
inline double data_reach(const MediumProfile& c, double t_max) {
    const TravelTime tau = travel_time(c);
    const auto& axis = c.axis();
    double reach = axis.lo();
    for (std::size_t i = 0; i < axis.nodes(); ++i) {
        if (2.0 * tau.values()[i] > t_max) break;
        reach = axis[i];
    }
    return reach;
}

/// A connected run of nodes where c exceeds a threshold (or falls below it, for
/// a low-contrast search).
struct Inclusion {
    double x_lo;
    double x_hi;
    double peak_x;
    double peak;
};

inline std::vector<Inclusion> find_inclusions(const MediumProfile& c, double threshold, double x_limit,
                                              bool above = true) {
    const auto& axis = c.axis();
    const auto& v = c.values();
    std::vector<Inclusion> out;
    bool inside = false;
    for (std::size_t i = 0; i < axis.nodes() && axis[i] <= x_limit + 1e-12; ++i) {
        const bool hit = above ? v[i] > threshold : v[i] < threshold;
        if (hit && !inside) out.push_back({axis[i], axis[i], axis[i], v[i]});
        if (hit) {
            auto& inc = out.back();
            inc.x_hi = axis[i];
            if (above ? v[i] > inc.peak : v[i] < inc.peak) {
                inc.peak = v[i];
                inc.peak_x = axis[i];
            }
        }
        inside = hit;
    }
    return out;
}

/// Accepted steps inside each descent run must not raise J. Steps after a
/// correction start a new run, where J is re-evaluated at a different point.
struct MonotonicityReport {
    std::size_t steps = 0;
    std::size_t violations = 0;
    double worst_increase = 0.0;
};

inline MonotonicityReport check_monotone(const std::vector<IterationRecord>& history, double rel_tol = 1e-12) {
    MonotonicityReport r;
    r.steps = history.size();
    for (std::size_t k = 1; k < history.size(); ++k) {
        if (history[k].correction_count != history[k - 1].correction_count) continue;
        const double prev = history[k - 1].objective;
        const double inc = history[k].objective - prev;
        if (inc > rel_tol * std::abs(prev)) {
            ++r.violations;
            r.worst_increase = std::max(r.worst_increase, inc);
        }
    }
    return r;
}

}  // namespace convexiwave
