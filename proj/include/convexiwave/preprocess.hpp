#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "convexiwave/boundary_data.hpp"
#include "convexiwave/errors.hpp"
#include "convexiwave/forward.hpp"
#include "convexiwave/grid.hpp"
#include "convexiwave/medium.hpp"

namespace convexiwave {

/// Background of the measured scene: air (c_bckgr = 1) or dry sand.
enum class MediumMode { Air, Ground };

inline std::string_view to_string(MediumMode m) { return m == MediumMode::Air ? "air" : "ground"; }

struct RawTrace {
    Signal signal;
    MediumMode mode = MediumMode::Air;

    RawTrace(Signal s, MediumMode m) : signal(std::move(s)), mode(m) {
        require(signal.size() > 0, "raw trace is empty");
        for (double v : signal.samples()) require(std::isfinite(v), "raw trace has non-finite samples");
    }
};

struct CalibrationResult {
    double mu = 1.0;
    std::string reference_name;

    void validate() const { require(mu > 0.0 && std::isfinite(mu), "calibration factor must be positive"); }
};

/// mu such that mu * ||raw||_inf = ||sim||_inf.
inline CalibrationResult calibrate(const RawTrace& raw_ref, const Signal& sim_ref, std::string reference_name = {}) {
    require(sim_ref.size() > 0, "simulated reference is empty");
    const double raw_peak = raw_ref.signal.max_abs();
    if (raw_peak == 0.0) throw Error(ErrorKind::ZeroSignal, "raw reference trace is identically zero");
    const double sim_peak = sim_ref.max_abs();
    if (sim_peak == 0.0) throw Error(ErrorKind::ZeroSignal, "simulated reference trace is identically zero");
    return {sim_peak / raw_peak, std::move(reference_name)};
}

enum class ExtremumKind { Minimum, Maximum };

struct Extremum {
    std::size_t index;
    double value;
    ExtremumKind kind;
};

/// Interior local extrema where the first difference changes sign strictly.
/// A flat run between a rise and a fall counts once, at its leftmost sample.
inline std::vector<Extremum> local_extrema(std::span<const double> s) {
    std::vector<Extremum> out;
    if (s.size() < 3) return out;
    int prev_dir = 0;
    std::size_t run_start = 0;
    for (std::size_t k = 1; k < s.size(); ++k) {
        const double d = s[k] - s[k - 1];
        const int dir = (d > 0.0) - (d < 0.0);
        if (dir == 0) continue;
        if (prev_dir > 0 && dir < 0) out.push_back({run_start, s[run_start], ExtremumKind::Maximum});
        if (prev_dir < 0 && dir > 0) out.push_back({run_start, s[run_start], ExtremumKind::Minimum});
        prev_dir = dir;
        run_start = k;
    }
    return out;
}

enum class ContrastSign { High, Low };

inline std::string_view to_string(ContrastSign c) { return c == ContrastSign::High ? "high" : "low"; }

/// Among the three local extrema with the largest magnitude, taken in time order,
/// a minimum in the middle means c_target > c_bckgr.
inline ContrastSign detect_contrast_sign(const Signal& s) {
    auto ext = local_extrema(s.samples());
    if (ext.size() < 3) throw Error(ErrorKind::AmbiguousExtrema, "fewer than three local extrema");
    std::stable_sort(ext.begin(), ext.end(),
                     [](const Extremum& a, const Extremum& b) { return std::abs(a.value) > std::abs(b.value); });
    ext.resize(3);
    std::sort(ext.begin(), ext.end(), [](const Extremum& a, const Extremum& b) { return a.index < b.index; });
    const Extremum& mid = ext[1];
    if (mid.value == ext[0].value || mid.value == ext[2].value)
        throw Error(ErrorKind::AmbiguousExtrema, "middle extremum is level with a neighbour");
    return mid.kind == ExtremumKind::Minimum ? ContrastSign::High : ContrastSign::Low;
}

enum class EnvelopeSide { Lower, Upper };

enum class EnvelopeMethod {
    /// Linear interpolation through the local extrema of the chosen kind and the
    /// endpoints, then the pointwise min (Lower) or max (Upper) with the signal.
    ExtremaInterpolation,
    /// Running min (Lower) or max (Upper) taken from each end toward the global
    /// extremum; the result is monotone on either side of it.
    CumulativeExtremum,
};

namespace detail {

inline std::vector<double> lower_by_interpolation(std::span<const double> s) {
    const std::size_t n = s.size();
    std::vector<std::size_t> knots{0};
    for (const auto& e : local_extrema(s))
        if (e.kind == ExtremumKind::Minimum) knots.push_back(e.index);
    if (n > 1) knots.push_back(n - 1);
    std::vector<double> out(s.begin(), s.end());
    for (std::size_t m = 0; m + 1 < knots.size(); ++m) {
        const std::size_t a = knots[m], b = knots[m + 1];
        for (std::size_t k = a; k <= b; ++k) {
            const double w = b == a ? 0.0 : static_cast<double>(k - a) / static_cast<double>(b - a);
            out[k] = std::min(s[k], (1.0 - w) * s[a] + w * s[b]);
        }
    }
    return out;
}

inline std::vector<double> lower_by_running_min(std::span<const double> s) {
    const std::size_t n = s.size();
    std::vector<double> out(s.begin(), s.end());
    if (n == 0) return out;
    const auto k_min = static_cast<std::size_t>(std::min_element(s.begin(), s.end()) - s.begin());
    for (std::size_t k = 1; k <= k_min; ++k) out[k] = std::min(out[k - 1], s[k]);
    for (std::size_t k = n - 1; k-- > k_min;) out[k] = std::min(out[k + 1], s[k]);
    return out;
}

}  // namespace detail

/// Lower envelope lies below the signal and touches it at the selected minima;
/// Upper is the mirror image.
inline Signal envelope(const Signal& s, EnvelopeSide side, EnvelopeMethod method = EnvelopeMethod::ExtremaInterpolation) {
    std::vector<double> v(s.samples().begin(), s.samples().end());
    const double sign = side == EnvelopeSide::Lower ? 1.0 : -1.0;
    for (double& x : v) x *= sign;
    std::vector<double> env = method == EnvelopeMethod::ExtremaInterpolation ? detail::lower_by_interpolation(v)
                                                                             : detail::lower_by_running_min(v);
    for (double& x : env) x *= sign;
    return Signal(s.t0(), s.dt(), std::move(env));
}

/// Zero every sample farther than half_width_steps from the anchor index.
inline Signal truncate_around(const Signal& s, std::size_t anchor, std::size_t half_width_steps) {
    std::vector<double> v(s.samples().begin(), s.samples().end());
    for (std::size_t k = 0; k < v.size(); ++k) {
        const std::size_t dist = k > anchor ? k - anchor : anchor - k;
        if (dist > half_width_steps) v[k] = 0.0;
    }
    return Signal(s.t0(), s.dt(), std::move(v));
}

/// Keep only t_ext +- half_width_steps dt around the global minimizer (Lower) or
/// maximizer (Upper).
inline Signal truncate_window(const Signal& s, std::size_t half_width_steps, EnvelopeSide side) {
    if (s.size() == 0) return s;
    const auto& v = s.samples();
    const auto it = side == EnvelopeSide::Lower ? std::min_element(v.begin(), v.end())
                                                : std::max_element(v.begin(), v.end());
    return truncate_around(s, static_cast<std::size_t>(it - v.begin()), half_width_steps);
}

/// Same window around the largest |s|.
inline Signal truncate_window(const Signal& s, std::size_t half_width_steps = 10) {
    if (s.size() == 0) return s;
    const auto& v = s.samples();
    const auto it = std::max_element(v.begin(), v.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
    return truncate_around(s, static_cast<std::size_t>(it - v.begin()), half_width_steps);
}

struct PreprocessConfig {

    bool operator==(const PreprocessConfig&) const = default;

    std::size_t half_width_steps = 10;
    EnvelopeMethod envelope_method = EnvelopeMethod::ExtremaInterpolation;
    /// Tikhonov parameter for g1 = g0'.
    double derivative_reg = 1e-6;
};

struct PreprocessResult {
    BoundaryData data;
    EnvelopeSide side;
    /// Set in ground mode only.
    std::optional<ContrastSign> contrast;
    Signal scaled;
    Signal enveloped;
    Signal scattered;
};

/// Scale, pick the envelope side, envelope, truncate, then g0 = scattered + 1/2 and
/// g1 = g0' (outgoing-wave relation at the detector).
inline PreprocessResult preprocess_pipeline(const RawTrace& raw, const CalibrationResult& cal,
                                            const PreprocessConfig& cfg = {}) {
    cal.validate();
    std::vector<double> scaled_v(raw.signal.samples().begin(), raw.signal.samples().end());
    for (double& v : scaled_v) v *= cal.mu;
    Signal scaled(raw.signal.t0(), raw.signal.dt(), std::move(scaled_v));

    std::optional<ContrastSign> contrast;
    EnvelopeSide side = EnvelopeSide::Lower;
    if (raw.mode == MediumMode::Ground) {
        contrast = detect_contrast_sign(scaled);
        side = *contrast == ContrastSign::High ? EnvelopeSide::Lower : EnvelopeSide::Upper;
    }
    Signal env = envelope(scaled, side, cfg.envelope_method);
    Signal scattered = truncate_window(env, cfg.half_width_steps, side);

    std::vector<double> g0v(scattered.samples().begin(), scattered.samples().end());
    for (double& v : g0v) v += 0.5;
    Signal g0(scattered.t0(), scattered.dt(), std::move(g0v));
    Signal g1 = tikhonov_differentiate(g0, cfg.derivative_reg);
    return {BoundaryData{std::move(g0), std::move(g1), 0.0}, side, contrast, std::move(scaled), std::move(env),
            std::move(scattered)};
}

/// c_rel read off a reconstruction: its maximum for a high-contrast target, its
/// minimum for a low-contrast one.
inline double relative_contrast(const MediumProfile& c_comp, EnvelopeSide side) {
    const auto& v = c_comp.values();
    return side == EnvelopeSide::Lower ? *std::max_element(v.begin(), v.end()) : *std::min_element(v.begin(), v.end());
}

struct Interval {

    bool operator==(const Interval&) const = default;

    double lo;
    double hi;
};

/// c_target = c_rel * c_bckgr for a background known only to lie in [lo, hi].
inline Interval target_interval(double c_rel, Interval c_bckgr = {3.0, 5.0}) {
    require(c_rel > 0.0 && c_bckgr.lo > 0.0 && c_bckgr.hi >= c_bckgr.lo, "invalid contrast or background interval");
    return {c_rel * c_bckgr.lo, c_rel * c_bckgr.hi};
}

}  // namespace convexiwave
