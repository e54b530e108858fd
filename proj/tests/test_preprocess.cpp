#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "convexiwave/medium.hpp"
#include "convexiwave/preprocess.hpp"

using namespace convexiwave;

namespace {

// Decaying oscillation with its deepest trough in the middle: a high-contrast return.
Signal ringing(double sign = 1.0) {
    std::vector<double> v(400);
    for (std::size_t k = 0; k < v.size(); ++k) {
        const double t = static_cast<double>(k) * 0.01 - 2.0;
        v[k] = -sign * std::cos(2.0 * std::numbers::pi * 1.5 * t) * std::exp(-t * t);
    }
    return Signal(0.0, 0.01, std::move(v));
}

double min_of(const Signal& s) { return *std::min_element(s.samples().begin(), s.samples().end()); }

}  // namespace

TEST(Preprocess, CalibrationMatchesPeakAmplitudes) {
    const RawTrace raw(Signal(0.0, 1.0, {0.0, -2.0, 1.0}), MediumMode::Air);
    const CalibrationResult c = calibrate(raw, Signal(0.0, 1.0, {0.0, 4.0, -1.0}), "ref");
    EXPECT_DOUBLE_EQ(c.mu, 2.0);
    EXPECT_EQ(c.reference_name, "ref");
    try {
        calibrate(RawTrace(Signal(0.0, 1.0, {0.0, 0.0}), MediumMode::Air), Signal(0.0, 1.0, {1.0}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ZeroSignal);
    }
}

TEST(Preprocess, LowerEnvelopeBoundsAndTouchesTheMinima) {
    const Signal s = ringing();
    for (auto method : {EnvelopeMethod::ExtremaInterpolation, EnvelopeMethod::CumulativeExtremum}) {
        const Signal env = envelope(s, EnvelopeSide::Lower, method);
        ASSERT_EQ(env.size(), s.size());
        for (std::size_t k = 0; k < s.size(); ++k) EXPECT_LE(env[k], s[k]);
        for (const auto& e : local_extrema(s.samples())) {
            if (e.kind == ExtremumKind::Minimum && method == EnvelopeMethod::ExtremaInterpolation) {
                EXPECT_DOUBLE_EQ(env[e.index], s[e.index]);
            }
        }
        EXPECT_DOUBLE_EQ(min_of(env), min_of(s));
    }
}

TEST(Preprocess, InterpolatedEnvelopeMatchesBruteForce) {
    const std::vector<double> v{0.0, 2.0, -1.0, 3.0, 1.0, 4.0, -2.0, 0.5};
    // Minima at 2, 4 and 6; knots add both endpoints.
    std::vector<double> expected(v.size());
    const std::vector<std::size_t> knots{0, 2, 4, 6, 7};
    for (std::size_t m = 0; m + 1 < knots.size(); ++m)
        for (std::size_t k = knots[m]; k <= knots[m + 1]; ++k) {
            const double w = static_cast<double>(k - knots[m]) / static_cast<double>(knots[m + 1] - knots[m]);
            expected[k] = std::min(v[k], (1.0 - w) * v[knots[m]] + w * v[knots[m + 1]]);
        }
    const Signal env = envelope(Signal(0.0, 1.0, v), EnvelopeSide::Lower);
    for (std::size_t k = 0; k < v.size(); ++k) EXPECT_DOUBLE_EQ(env[k], expected[k]);
    const Signal cum = envelope(Signal(0.0, 1.0, v), EnvelopeSide::Lower, EnvelopeMethod::CumulativeExtremum);
    const std::vector<double> cummin{0.0, 0.0, -1.0, -1.0, -1.0, -1.0, -2.0, 0.5};
    for (std::size_t k = 0; k < v.size(); ++k) EXPECT_DOUBLE_EQ(cum[k], cummin[k]);
}

TEST(Preprocess, TruncationKeepsTheWindowAroundTheExtremum) {
    const Signal s(0.0, 1.0, {1.0, 2.0, 3.0, -9.0, 3.0, 2.0, 1.0});
    const Signal t = truncate_window(s, 1, EnvelopeSide::Lower);
    const std::vector<double> expected{0.0, 0.0, 3.0, -9.0, 3.0, 0.0, 0.0};
    for (std::size_t k = 0; k < s.size(); ++k) EXPECT_DOUBLE_EQ(t[k], expected[k]);
}

TEST(Preprocess, ContrastSignFollowsTheMiddleExtremum) {
    EXPECT_EQ(detect_contrast_sign(ringing(1.0)), ContrastSign::High);
    EXPECT_EQ(detect_contrast_sign(ringing(-1.0)), ContrastSign::Low);
    try {
        detect_contrast_sign(Signal(0.0, 1.0, {0.0, 1.0, 0.0}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::AmbiguousExtrema);
    }
}

TEST(Preprocess, PipelineIsScaleEquivariantThroughCalibration) {
    const Signal s = ringing();
    std::vector<double> doubled(s.samples().begin(), s.samples().end());
    for (double& v : doubled) v *= 2.0;
    const auto a = preprocess_pipeline(RawTrace(s, MediumMode::Ground), CalibrationResult{1.0, ""});
    const auto b = preprocess_pipeline(RawTrace(Signal(0.0, s.dt(), doubled), MediumMode::Ground), CalibrationResult{0.5, ""});
    ASSERT_TRUE(a.contrast.has_value());
    EXPECT_EQ(*a.contrast, ContrastSign::High);
    EXPECT_EQ(a.side, EnvelopeSide::Lower);
    for (std::size_t k = 0; k < s.size(); ++k) EXPECT_NEAR(a.data.g0[k], b.data.g0[k], 1e-14);
    // Away from the window g0 is exactly the background 1/2.
    EXPECT_DOUBLE_EQ(a.data.g0[0], 0.5);
    EXPECT_LT(min_of(a.data.g0), 0.5);
}

TEST(Preprocess, AirModeAlwaysTakesTheLowerEnvelope) {
    const auto r = preprocess_pipeline(RawTrace(ringing(-1.0), MediumMode::Air), CalibrationResult{1.0, ""});
    EXPECT_FALSE(r.contrast.has_value());
    EXPECT_EQ(r.side, EnvelopeSide::Lower);
}

TEST(Preprocess, ContrastAndTargetInterval) {
    const UniformAxis axis(0.0, 3.0, 3);
    const MediumProfile c(axis, {1.0, 4.0, 0.5, 1.0}, {}, 0.0, 3.0);
    EXPECT_DOUBLE_EQ(relative_contrast(c, EnvelopeSide::Lower), 4.0);
    EXPECT_DOUBLE_EQ(relative_contrast(c, EnvelopeSide::Upper), 0.5);
    EXPECT_EQ(target_interval(2.0), (Interval{6.0, 10.0}));
    EXPECT_THROW(target_interval(-1.0), Error);
}
