// Acceptance gate: one PASS/FAIL line per criterion. Exit status is nonzero when
// any evaluated criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "convexiwave/diagnostics.hpp"
#include "convexiwave/fixtures.hpp"
#include "convexiwave/pipeline.hpp"
#include "convexiwave/quasi_reversibility.hpp"

using namespace convexiwave;

namespace {

struct Outcome {
    bool passed;
    std::string detail;
};

double elapsed_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Global maximum of c on [0, reach] and the midpoint of its half-contrast run.
PeakMeasure global_peak(const MediumProfile& c, double reach) {
    const auto& axis = c.axis();
    return measure_peak(c, ExpectedPeak{0.5 * (axis.lo() + reach), 0.5 * (reach - axis.lo()), 1.0, 0.0, 0.0}, reach);
}

Outcome null_scatterer() {
    const auto t0 = std::chrono::steady_clock::now();
    const RunConfig cfg = simulated_config({}, 0.0);
    const InversionResult r = invert(simulate_data(cfg).noisy, cfg.inversion());
    const double secs = elapsed_since(t0);
    double dev = 0.0;
    for (double v : r.c_comp.values()) dev = std::max(dev, std::abs(v - 1.0));
    return {dev <= 0.05 && secs <= 120.0,
            "max|c_comp - 1| on [0,3] = " + fmt(dev) + " (tol 0.05), runtime " + fmt(secs, 3) + " s (limit 120 s)"};
}

Outcome test1_seeds() {
    bool ok = true;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SimulatedFixture fx = simulated_fixtures()[0];
        fx.config.forward.seed = seed;
        const InversionResult r = invert(simulate_data(fx.config).noisy, fx.config.inversion());
        const double reach = data_reach(r.c_comp, fx.config.transform.t_max);
        const PeakMeasure m = global_peak(r.c_comp, reach);
        const bool seed_ok = m.value >= 8.8 && m.value <= 13.2 && std::abs(m.center - 0.5) <= 0.1;
        ok = ok && seed_ok;
        detail += (seed > 1 ? "; " : "") + std::string("seed ") + std::to_string(seed) + ": max " + fmt(m.value) +
                  " at center " + fmt(m.center, 3);
    }
    return {ok, detail + " (band [8.8, 13.2], center 0.5 +- 0.1)"};
}

Outcome test4_inclusions() {
    const FixtureReport r = run_simulated(simulated_fixtures()[3]);
    std::string detail = "reach " + fmt(r.reach, 3);
    for (const auto& c : r.checks)
        if (c.name != "monotone_descent") detail += "; " + c.name + " " + (c.passed ? "ok" : "FAIL") + ": " + c.detail;
    bool ok = true;
    for (const auto& c : r.checks)
        if (c.name != "monotone_descent") ok = ok && c.passed;
    return {ok, detail};
}

Outcome noiseless_step() {
    const RunConfig cfg = simulated_config({StepPiece{0.6, 0.1, 6.0}}, 0.0);
    const InversionResult r = invert(simulate_data(cfg).noisy, cfg.inversion());
    const double reach = data_reach(r.c_comp, cfg.transform.t_max);
    const PeakMeasure m = global_peak(r.c_comp, reach);
    const bool ok = std::abs(m.value - 6.0) <= 0.6 && std::abs(m.center - 0.6) <= 0.05;
    return {ok, "max " + fmt(m.value) + " (6 +- 10%), center " + fmt(m.center, 3) + " (0.6 +- 0.05)"};
}

Outcome gradient() {
    GradientCheckConfig cfg;
    cfg.grid = SpaceTimeGrid(0.0, 3.0, 6.0, 20, 20);
    cfg.fields = 50;
    cfg.step = 1e-6;
    const auto r = gradient_check(cfg);
    return {r.max_rel_error <= 1e-5, "max relative error " + fmt(r.max_rel_error, 3) + " over " +
                                         std::to_string(r.fields) + " fields on 21x21 nodes (tol 1e-5)"};
}

Outcome convexity() {
    const auto r = convexity_check({});
    std::string detail = "min Bregman divergence per lambda:";
    for (const auto& row : r.rows)
        detail += " " + fmt(row.lambda, 2) + "->" + fmt(row.min_divergence, 4) + " (weighted " +
                  fmt(row.min_normalized, 4) + ", " + std::to_string(row.negative_pairs) + " negative)";
    detail += "; lambda_emp " + (std::isnan(r.lambda_emp) ? std::string("none") : fmt(r.lambda_emp, 2)) +
              "; nondecreasing " + (r.nondecreasing ? "yes" : "no");
    return {r.nondecreasing, detail};
}

Outcome manufactured_transport() {
    const SpaceTimeGrid g(0.0, 3.0, 6.0, 200, 200);
    // Q = phi(2x + t) solves Q_x = 2 Q_t; phi vanishes from 2M on, so Q(M, t) = 0.
    auto phi = [](double s) {
        const double z = (s - 3.0) / 2.4;
        return std::abs(z) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - z * z)) : 0.0;
    };
    std::vector<double> trace(g.t_nodes());
    for (std::size_t j = 0; j < trace.size(); ++j) trace[j] = phi(g.t(j));
    const QuasiReversibility qr(g);
    const Field2D q = qr.solve_transport(trace, 1e-11);
    const Field2D exact = Field2D::sample(g, [&](double x, double t) { return phi(2.0 * x + t); });
    Field2D err = q - exact, ref = exact;
    for (double& v : err.values()) v *= v;
    for (double& v : ref.values()) v *= v;
    const double rel = std::sqrt(integrate(err) / integrate(ref));
    return {rel <= 0.01, "relative L2 error " + fmt(rel, 3) + " at 200x200, eta 1e-11 (tol 1%)"};
}

Outcome calibration() {
    bool ok = true;
    std::string detail;
    for (const auto& ref : calibration_references()) {
        const CalibrationCheck c = calibrate_reference(ref);
        ok = ok && c.rel_error <= 1e-3;
        detail += (detail.empty() ? "" : "; ") + ref.name + " mu " + fmt(c.result.mu, 9) + " vs stored " +
                  fmt(c.stored_mu, 9) + " (rel err " + fmt(c.rel_error, 3) + ", tol 0.1%)";
    }
    return {ok, detail};
}

Outcome experimental() {
    bool ok = true;
    std::string detail;
    for (const auto& f : experimental_fixtures()) {
        const FixtureReport r = run_experimental(f);
        bool fx_ok = true;
        for (const auto& c : r.checks)
            if (c.name != "monotone_descent") fx_ok = fx_ok && c.passed;
        ok = ok && fx_ok;
        detail += (detail.empty() ? "" : "; ") + f.name + " c_rel " + fmt(*r.c_rel) + " (expected " + fmt(f.c_rel) +
                  " +- 25%) " + (fx_ok ? "ok" : "FAIL");
        if (r.c_target) detail += " c_target [" + fmt(r.c_target->lo, 3) + ", " + fmt(r.c_target->hi, 3) + "]";
    }
    return {ok, detail};
}

Outcome monotonicity() {
    bool ok = true;
    std::string detail;
    for (const auto& name : fixture_names()) {
        std::string line;
        try {
            const FixtureReport r = run_fixture(name);
            ok = ok && r.monotonicity.violations == 0;
            line = name + " " + std::to_string(r.monotonicity.violations) + "/" + std::to_string(r.monotonicity.steps);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::DivergedObjective) throw;
            ok = false;
            line = name + " diverged";
        }
        detail += (detail.empty() ? "" : ", ") + line;
    }
    return {ok, "increases/accepted steps: " + detail};
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::vector<int> selected;
    app.add_option("--criterion", selected, "Criteria to run (default: all)")->check(CLI::Range(1, 10));
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> all = {
        {1, "null_scatterer", null_scatterer},
        {2, "test1_five_seeds", test1_seeds},
        {3, "test4_three_inclusions", test4_inclusions},
        {4, "noiseless_step", noiseless_step},
        {5, "gradient_check", gradient},
        {6, "convexity_bregman", convexity},
        {7, "qr_manufactured_transport", manufactured_transport},
        {8, "calibration_constants", calibration},
        {9, "experimental_fixtures", experimental},
        {10, "descent_monotonicity", monotonicity},
    };

    int failures = 0;
    for (const auto& c : all) {
        if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        failures += o.passed ? 0 : 1;
        std::printf("criterion %2d %-28s %s  %s\n", c.id, c.name, o.passed ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
