#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "convexiwave/config.hpp"
#include "convexiwave/errors.hpp"
#include "convexiwave/pipeline.hpp"
#include "convexiwave/preprocess.hpp"
#include "convexiwave/solver.hpp"

namespace convexiwave {

/// An inclusion the reconstruction should show: its peak value within rel_tol and
/// the midpoint of its half-contrast region within center_tol of center.
struct ExpectedPeak {
    double center;
    double half_width;
    double value;
    double rel_tol = 0.25;
    double center_tol = 0.1;
};

struct SimulatedFixture {
    std::string name;
    RunConfig config;
    std::vector<ExpectedPeak> peaks;
    /// Reconstruction values reported for a single noise realization, kept for
    /// comparison in reports only.
    std::vector<double> reported;
};

/// Tikhonov parameter for g0' that keeps 5% multiplicative noise from dominating.
inline constexpr double noisy_derivative_reg = 3e-3;

inline RunConfig simulated_config(std::vector<MediumPiece> pieces, double delta = 0.05, std::uint64_t seed = 1) {
    RunConfig c;
    c.forward.medium.pieces = std::move(pieces);
    c.forward.noise_delta = delta;
    c.forward.seed = seed;
    c.transform.derivative_reg = delta > 0.0 ? noisy_derivative_reg : 1e-6;
    return c;
}

inline std::vector<SimulatedFixture> simulated_fixtures() {
    std::vector<SimulatedFixture> out;
    out.push_back({"test1", simulated_config({BumpPiece{0.5, 0.2, 10.0}}), {{0.5, 0.2, 11.0}}, {10.43}});
    out.push_back({"test2",
                   simulated_config({BumpPiece{0.5, 0.2, 3.0}, BumpPiece{1.4, 0.3, 5.0}}),
                   {{0.5, 0.2, 4.0}, {1.4, 0.3, 6.0}},
                   {3.40, 5.16}});
    out.push_back({"test3", simulated_config({StepPiece{0.6, 0.1, 6.0}}), {{0.6, 0.1, 6.0}}, {5.6}});
    out.push_back({"test4",
                   simulated_config({StepPiece{0.3, 0.1, 3.0}, StepPiece{0.8, 0.15, 5.0}, StepPiece{1.5, 0.2, 7.0}}),
                   {{0.3, 0.1, 3.0}, {0.8, 0.15, 5.0}, {1.5, 0.2, 7.0}},
                   {2.8, 4.6, 6.9}});
    out.push_back({"test5",
                   simulated_config({SinePiece{0.8, 0.6, 3.0, 0.3, std::numbers::pi, 1.25}, StepPiece{2.0, 0.3, 7.0}}),
                   {{2.0, 0.3, 7.0}},
                   {6.9}});
    return out;
}

/// Scene and distortion used to synthesize radar-like traces: one target of
/// relative constant c_rel centered at `center`, seen through a positive ringing
/// tail (|sin| burst decaying away from the main peak) and a small DC offset, both
/// relative to the peak and signed with the target's contrast.
struct ExperimentalScene {
    double center = 1.0;
    double half_width = 0.2;
    double ringing = 0.3;
    double ring_frequency = 2.5;
    double ring_decay = 0.5;
    double dc_offset = 2e-4;
};

struct CalibrationReference {
    std::string name;
    double c_rel;
    MediumMode mode;
    double mu;
};

/// Simulated bush in air and metal box in sand with their published factors.
/// The raw traces behind those factors are not available, so the synthetic
/// references are scaled by 1/mu to make the constants reproducible.
inline std::vector<CalibrationReference> calibration_references() {
    return {{"bush", 6.5, MediumMode::Air, 459420.0}, {"metalbox", 4.6, MediumMode::Ground, 189445.0}};
}

inline const CalibrationReference& reference_for(MediumMode mode) {
    static const auto refs = calibration_references();
    return mode == MediumMode::Air ? refs[0] : refs[1];
}

struct ExperimentalFixture {
    std::string name;
    double c_rel;
    MediumMode mode;
    double rel_tol = 0.25;
};

inline std::vector<ExperimentalFixture> experimental_fixtures() {
    return {{"bush", 6.76, MediumMode::Air},
            {"wood", 2.22, MediumMode::Air},
            {"metalbox", 5.2, MediumMode::Ground},
            {"metalcyl", 4.7, MediumMode::Ground},
            {"plastic", 0.37, MediumMode::Ground}};
}

inline RunConfig experimental_config(double c_rel, const ExperimentalScene& scene = {}) {
    RunConfig c;
    c.forward.medium.pieces = {StepPiece{scene.center, scene.half_width, c_rel}};
    return c;
}

/// u(0, t) - 1/2 for the scene, i.e. the backscattered part of the total wave.
inline Signal simulate_scattered(const RunConfig& c) {
    ForwardConfig f = c.forward;
    f.noise_delta = 0.0;
    const SimulatedData sim = simulate_data(f, c.transform.big_m);
    std::vector<double> v(sim.clean.g0.samples().begin(), sim.clean.g0.samples().end());
    for (double& x : v) x -= 0.5;
    return Signal(sim.clean.g0.t0(), sim.clean.g0.dt(), std::move(v));
}

inline Signal distort(const Signal& scattered, double mu, bool high_contrast, const ExperimentalScene& scene = {}) {
    const auto s = scattered.samples();
    const auto k_peak = static_cast<std::size_t>(
        std::max_element(s.begin(), s.end(), [](double a, double b) { return std::abs(a) < std::abs(b); }) -
        s.begin());
    const double peak = std::abs(s[k_peak]);
    const double t_peak = scattered.time(k_peak);
    const double sign = high_contrast ? 1.0 : -1.0;
    std::vector<double> v(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double dt = scattered.time(k) - t_peak;
        const double ring = std::abs(std::sin(2.0 * std::numbers::pi * scene.ring_frequency * dt)) *
                            std::exp(-std::abs(dt) / scene.ring_decay);
        v[k] = (s[k] + sign * peak * (scene.ringing * ring + scene.dc_offset)) / mu;
    }
    return Signal(scattered.t0(), scattered.dt(), std::move(v));
}

inline RawTrace synthesize_raw(double c_rel, MediumMode mode, double mu, const ExperimentalScene& scene = {}) {
    return RawTrace(distort(simulate_scattered(experimental_config(c_rel, scene)), mu, c_rel > 1.0, scene), mode);
}

struct CalibrationCheck {
    CalibrationResult result;
    double stored_mu;
    double rel_error;
};

inline CalibrationCheck calibrate_reference(const CalibrationReference& ref, const ExperimentalScene& scene = {}) {
    const Signal sim = simulate_scattered(experimental_config(ref.c_rel, scene));
    const RawTrace raw(distort(sim, ref.mu, ref.c_rel > 1.0, scene), ref.mode);
    CalibrationResult cal = calibrate(raw, sim, ref.name);
    return {cal, ref.mu, std::abs(cal.mu - ref.mu) / ref.mu};
}

struct Check {
    std::string name;
    bool passed;
    std::string detail;
};

struct FixtureReport {
    std::string name;
    std::vector<Check> checks;
    std::vector<double> x;
    std::vector<double> c_true;
    std::vector<double> c_init;
    std::vector<double> c_comp;
    std::vector<IterationRecord> history;
    MonotonicityReport monotonicity;
    double reach = 0.0;
    std::size_t corrections = 0;
    bool converged = false;
    /// Experimental fixtures only.
    std::optional<double> c_rel;
    std::optional<Interval> c_target;
    std::optional<ContrastSign> contrast;

    bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
    }
};

/// Value and half-contrast midpoint of the largest peak of c inside the expected
/// window and the data reach. The half-contrast run is clipped to the window so
/// that neighbouring inclusions do not merge into it.
struct PeakMeasure {
    bool found = false;
    double value = 0.0;
    double peak_x = 0.0;
    double center = 0.0;
};

inline PeakMeasure measure_peak(const MediumProfile& c, const ExpectedPeak& e, double reach) {
    const auto& axis = c.axis();
    const auto& v = c.values();
    const double lo = e.center - e.half_width - e.center_tol;
    const double hi = std::min(e.center + e.half_width + e.center_tol, reach);
    PeakMeasure m;
    std::size_t k_peak = 0;
    for (std::size_t i = 0; i < axis.nodes(); ++i) {
        if (axis[i] < lo || axis[i] > hi) continue;
        if (!m.found || v[i] > m.value) {
            m = {true, v[i], axis[i], axis[i]};
            k_peak = i;
        }
    }
    if (!m.found) return m;
    const double half = 1.0 + 0.5 * (m.value - 1.0);
    std::size_t a = k_peak, b = k_peak;
    while (a > 0 && axis[a - 1] >= lo && v[a - 1] > half) --a;
    while (b + 1 < axis.nodes() && axis[b + 1] <= hi && v[b + 1] > half) ++b;
    m.center = 0.5 * (axis[a] + axis[b]);
    return m;
}

inline std::string fmt(double v, int digits = 4) {
    std::ostringstream os;
    os.precision(digits);
    os << v;
    return os.str();
}

inline void fill_curves(FixtureReport& r, const InversionResult& inv, const MediumShape& truth) {
    const auto& axis = inv.c_comp.axis();
    for (std::size_t i = 0; i < axis.nodes(); ++i) {
        r.x.push_back(axis[i]);
        r.c_true.push_back(truth(axis[i]));
    }
    r.c_init = inv.c_init.values();
    r.c_comp = inv.c_comp.values();
    r.history = inv.history;
    r.monotonicity = check_monotone(inv.history);
    r.corrections = inv.corrections;
    r.converged = inv.converged;
    r.checks.push_back({"monotone_descent", r.monotonicity.violations == 0,
                        std::to_string(r.monotonicity.violations) + " increases over " +
                            std::to_string(r.monotonicity.steps) + " accepted steps"});
}

/// Simulate, add noise, invert, and compare every expected peak inside the data reach.
inline FixtureReport run_simulated(const SimulatedFixture& fx, const IterationObserver& observer = {}) {
    fx.config.validate();
    const SimulatedData sim = simulate_data(fx.config);
    const InversionResult inv = invert(sim.noisy, fx.config.inversion(), observer);
    FixtureReport r;
    r.name = fx.name;
    r.reach = data_reach(inv.c_comp, fx.config.transform.t_max);
    fill_curves(r, inv, fx.config.forward.medium);
    double prev = -std::numeric_limits<double>::infinity();
    bool ordered = true;
    for (std::size_t k = 0; k < fx.peaks.size(); ++k) {
        const auto& e = fx.peaks[k];
        const PeakMeasure m = measure_peak(inv.c_comp, e, r.reach);
        const std::string tag = "peak@" + fmt(e.center, 3);
        if (!m.found) {
            r.checks.push_back({tag, false, "expected window lies beyond the data reach " + fmt(r.reach, 3)});
            ordered = false;
            continue;
        }
        const bool value_ok = std::abs(m.value - e.value) <= e.rel_tol * e.value;
        const bool center_ok = std::abs(m.center - e.center) <= e.center_tol;
        r.checks.push_back({tag, value_ok && center_ok,
                            "max " + fmt(m.value) + " (true " + fmt(e.value) + ", tol " + fmt(100 * e.rel_tol, 3) +
                                "%), center " + fmt(m.center, 3) + " (true " + fmt(e.center, 3) + ")"});
        const bool rising = fx.peaks.size() < 2 || k == 0 || (e.value > fx.peaks[k - 1].value) == (m.value > prev);
        ordered = ordered && rising;
        prev = m.value;
    }
    if (fx.peaks.size() > 1) r.checks.push_back({"peak_order", ordered, ordered ? "preserved" : "not preserved"});
    return r;
}

inline FixtureReport run_experimental(const ExperimentalFixture& fx, const ExperimentalScene& scene = {},
                                      const IterationObserver& observer = {}) {
    const CalibrationReference& ref = reference_for(fx.mode);
    const CalibrationCheck cal = calibrate_reference(ref, scene);
    const RawTrace raw = synthesize_raw(fx.c_rel, fx.mode, ref.mu, scene);

    RunConfig cfg = experimental_config(fx.c_rel, scene);
    const PreprocessResult pre = preprocess_pipeline(raw, cal.result, cfg.preprocess);
    const InversionResult inv = invert(pre.data, cfg.inversion(), observer);

    FixtureReport r;
    r.name = fx.name;
    r.reach = data_reach(inv.c_comp, cfg.transform.t_max);
    r.contrast = pre.contrast;
    fill_curves(r, inv, cfg.forward.medium);
    const double c_rel = relative_contrast(inv.c_comp, pre.side);
    r.c_rel = c_rel;
    if (fx.mode == MediumMode::Ground) r.c_target = target_interval(c_rel, cfg.c_bckgr);
    r.checks.push_back({"c_rel", std::abs(c_rel - fx.c_rel) <= fx.rel_tol * fx.c_rel,
                        "c_rel " + fmt(c_rel) + " (expected " + fmt(fx.c_rel) + ", tol " +
                            fmt(100 * fx.rel_tol, 3) + "%)"});
    const bool side_ok = (c_rel > 1.0) == (fx.c_rel > 1.0);
    r.checks.push_back({"side", side_ok, std::string(c_rel > 1.0 ? "above" : "below") + " background"});
    return r;
}

inline bool is_simulated(const std::string& name) {
    const auto all = simulated_fixtures();
    return std::any_of(all.begin(), all.end(), [&](const auto& f) { return f.name == name; });
}

inline FixtureReport run_fixture(const std::string& name, const IterationObserver& observer = {}) {
    for (const auto& f : simulated_fixtures())
        if (f.name == name) return run_simulated(f, observer);
    for (const auto& f : experimental_fixtures())
        if (f.name == name) return run_experimental(f, {}, observer);
    throw Error(ErrorKind::FixtureMissing, "no fixture named '" + name + "'");
}

inline std::vector<std::string> fixture_names() {
    std::vector<std::string> out;
    for (const auto& f : simulated_fixtures()) out.push_back(f.name);
    for (const auto& f : experimental_fixtures()) out.push_back(f.name);
    return out;
}

}  // namespace convexiwave
