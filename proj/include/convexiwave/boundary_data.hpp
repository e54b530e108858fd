#pragma once

#include <cmath>

#include "convexiwave/errors.hpp"
#include "convexiwave/grid.hpp"

namespace convexiwave {

/// The measured pair g0 = u(eps, t), g1 = u_x(eps, t) on a shared time sampling.
struct BoundaryData {
    Signal g0;
    Signal g1;
    double eps = 0.0;

    BoundaryData(Signal g0_in, Signal g1_in, double eps_in)
        : g0(std::move(g0_in)), g1(std::move(g1_in)), eps(eps_in) {
        require(g0.size() == g1.size() && std::abs(g0.dt() - g1.dt()) <= 1e-12 * g0.dt() &&
                    std::abs(g0.t0() - g1.t0()) <= 1e-12,
                "g0 and g1 must share their time sampling");
        require(eps >= 0.0, "eps must be nonnegative");
    }
};

}  // namespace convexiwave
