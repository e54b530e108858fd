#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "convexiwave/config.hpp"
#include "convexiwave/diagnostics.hpp"
#include "convexiwave/errors.hpp"
#include "convexiwave/fixtures.hpp"
#include "convexiwave/io.hpp"
#include "convexiwave/pipeline.hpp"
#include "convexiwave/preprocess.hpp"
#include "convexiwave/quasi_reversibility.hpp"
#include "convexiwave/solver.hpp"

namespace fs = std::filesystem;
using namespace convexiwave;

namespace {

constexpr int exit_error = 1;
constexpr int exit_check_failed = 2;

RunConfig config_or_default(const std::string& path) { return path.empty() ? RunConfig{} : load_config(path); }

std::size_t thread_cap() {
    if (const char* env = std::getenv("CONVEXIWAVE_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// One JSON object per accepted step on stdout.
IterationObserver json_logger(bool enabled, const std::string& tag) {
    if (!enabled) return {};
    return [tag](const IterationRecord& r) {
        Json j = {{"event", "iteration"}, {"run", tag},        {"iteration", r.iteration}, {"J", r.objective},
                  {"grad_norm", r.grad_norm}, {"step", r.step}, {"correction_count", r.correction_count}};
        std::cout << j.dump() << '\n';
    };
}

void write_diag(const std::string& path, const std::vector<IterationRecord>& history) {
    std::vector<double> it, j, g, c;
    for (const auto& r : history) {
        it.push_back(static_cast<double>(r.iteration));
        j.push_back(r.objective);
        g.push_back(r.grad_norm);
        c.push_back(static_cast<double>(r.correction_count));
    }
    io::write_table(path, {"iteration", "J", "grad_norm", "correction_count"}, {it, j, g, c});
}

void write_profile(const std::string& path, const InversionResult& r) {
    const auto& axis = r.c_comp.axis();
    std::vector<double> x(axis.nodes());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = axis[i];
    io::write_table(path, {"x", "c_comp", "c_init"}, {x, r.c_comp.values(), r.c_init.values()});
}

Json report_json(const FixtureReport& r) {
    Json checks = Json::array();
    for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    Json j = {{"fixture", r.name},
              {"passed", r.passed()},
              {"checks", checks},
              {"data_reach", r.reach},
              {"corrections", r.corrections},
              {"converged", r.converged},
              {"accepted_steps", r.monotonicity.steps},
              {"monotonicity_violations", r.monotonicity.violations}};
    if (r.c_rel) j["c_rel"] = *r.c_rel;
    if (r.c_target) j["c_target"] = {r.c_target->lo, r.c_target->hi};
    if (r.contrast) j["contrast"] = std::string(to_string(*r.contrast));
    return j;
}

int cmd_forward(const std::string& config_path, const std::string& out_dir) {
    const RunConfig cfg = config_or_default(config_path);
    fs::create_directories(out_dir);
    const SimulatedData sim = simulate_data(cfg);
    io::write_signal_file((fs::path(out_dir) / "g0.csv").string(), sim.noisy.g0);
    io::write_signal_file((fs::path(out_dir) / "g1.csv").string(), sim.noisy.g1);
    const auto grid = cfg.transform.grid();
    std::vector<double> x(grid.x_nodes());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = grid.x(i);
    io::write_table((fs::path(out_dir) / "c_true.csv").string(), {"x", "c_true"},
                    {x, sample_on(cfg.forward.medium, grid)});
    std::cout << Json{{"event", "forward"}, {"samples", sim.noisy.g0.size()}, {"out_dir", out_dir}}.dump() << '\n';
    return 0;
}

int cmd_invert(const std::string& config_path, const std::string& g0_path, const std::string& g1_path,
               const std::string& out, const std::string& diag, bool json_log) {
    const RunConfig cfg = config_or_default(config_path);
    std::optional<BoundaryData> data;
    if (g0_path.empty() != g1_path.empty()) throw Error(ErrorKind::InvalidArgument, "give both --g0 and --g1, or neither");
    if (!g0_path.empty())
        data.emplace(io::read_signal_file(g0_path), io::read_signal_file(g1_path), cfg.transform.eps);
    else
        data.emplace(simulate_data(cfg).noisy);
    const InversionResult r = invert(*data, cfg.inversion(), json_logger(json_log, "invert"));
    write_profile(out, r);
    if (!diag.empty()) write_diag(diag, r.history);
    const auto mono = check_monotone(r.history);
    std::cout << Json{{"event", "invert"},
                      {"c_max", r.c_comp.max_value()},
                      {"corrections", r.corrections},
                      {"converged", r.converged},
                      {"last_correction_change", r.last_correction_change},
                      {"accepted_steps", r.history.size()},
                      {"monotonicity_violations", mono.violations}}
                     .dump()
              << '\n';
    return 0;
}

int cmd_calibrate(const std::string& raw_path, const std::string& sim_path, const std::string& mode,
                  const std::string& name, const std::string& out) {
    const RawTrace raw(io::read_signal_file(raw_path), mode == "ground" ? MediumMode::Ground : MediumMode::Air);
    const CalibrationResult cal = calibrate(raw, io::read_signal_file(sim_path), name);
    std::ofstream os(out);
    if (!os) throw Error(ErrorKind::Io, "cannot open for writing: " + out);
    os << Json{{"mu", cal.mu}, {"reference_name", cal.reference_name}}.dump(2) << '\n';
    std::cout << Json{{"event", "calibrate"}, {"mu", cal.mu}}.dump() << '\n';
    return 0;
}

int cmd_preprocess(const std::string& config_path, const std::string& raw_path, const std::string& mode,
                   const std::string& cal_path, const std::string& out, const std::string& g1_out) {
    const RunConfig cfg = config_or_default(config_path);
    auto is = io::open_input(cal_path);
    Json cj;
    try {
        is >> cj;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidArgument, "calibration file: " + std::string(e.what()));
    }
    detail::reject_unknown(cj, {"mu", "reference_name"}, "calibration");
    CalibrationResult cal{cj.at("mu").get<double>(), cj.value("reference_name", std::string{})};
    const RawTrace raw(io::read_signal_file(raw_path), mode == "ground" ? MediumMode::Ground : MediumMode::Air);
    const PreprocessResult r = preprocess_pipeline(raw, cal, cfg.preprocess);
    io::write_signal_file(out, r.data.g0);
    io::write_signal_file(g1_out, r.data.g1);
    Json j = {{"event", "preprocess"}, {"side", r.side == EnvelopeSide::Lower ? "lower" : "upper"}};
    if (r.contrast) j["contrast"] = std::string(to_string(*r.contrast));
    std::cout << j.dump() << '\n';
    return 0;
}

int cmd_gradient_check(std::size_t nx, std::size_t nt, std::uint64_t seed, std::size_t fields, double step,
                       double tol) {
    GradientCheckConfig cfg;
    cfg.grid = SpaceTimeGrid(0.0, 3.0, 6.0, nx, nt);
    cfg.seed = seed;
    cfg.fields = fields;
    cfg.step = step;
    const auto r = gradient_check(cfg);
    const bool ok = r.max_rel_error <= tol;
    std::cout << Json{{"event", "gradient_check"}, {"max_rel_error", r.max_rel_error},
                      {"max_abs_error", r.max_abs_error}, {"fields", r.fields},
                      {"components", r.components}, {"tolerance", tol}, {"passed", ok}}
                     .dump()
              << '\n';
    return ok ? 0 : exit_check_failed;
}

int cmd_convexity_check(std::size_t pairs, double radius, std::uint64_t seed, const std::vector<double>& lambdas) {
    ConvexityCheckConfig cfg;
    cfg.pairs = pairs;
    cfg.radius = radius;
    cfg.seed = seed;
    cfg.lambdas = lambdas;
    const auto r = convexity_check(cfg);
    Json rows = Json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"lambda", row.lambda},
                        {"min_divergence", row.min_divergence},
                        {"negative_pairs", row.negative_pairs},
                        {"min_normalized", row.min_normalized}});
    Json j = {{"event", "convexity_check"}, {"rows", rows}, {"nondecreasing", r.nondecreasing}, {"shrunk_pairs", r.shrunk}};
    j["lambda_emp"] = std::isnan(r.lambda_emp) ? Json(nullptr) : Json(r.lambda_emp);
    std::cout << j.dump() << '\n';
    return 0;
}

template <typename Fn>
double seconds(Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_bench(const std::string& config_path) {
    const RunConfig cfg = config_or_default(config_path);
    std::optional<SimulatedData> sim;
    const double t_forward = seconds([&] { sim.emplace(simulate_data(cfg)); });
    const auto grid = cfg.transform.grid();
    std::optional<BoundaryTraces> traces;
    const double t_traces =
        seconds([&] { traces.emplace(boundary_traces_from_data(sim->noisy, grid, cfg.transform.derivative_reg)); });
    const QuasiReversibility qr(grid);
    const double floor = q_floor_for(cfg.transform.c_upper);
    std::optional<QField> q0;
    const double t_qr = seconds([&] { q0.emplace(initial_guess(*traces, qr, cfg.qr, floor)); });
    const ObjectiveContext ctx(grid, *traces, cfg.convex, floor);
    const int reps = 20;
    const double t_grad = seconds([&] {
                              for (int k = 0; k < reps; ++k) (void)value_and_gradient(q0->values, ctx);
                          }) /
                          reps;
    const double t_corr = seconds([&] { (void)correction_step(*q0, *traces, qr, cfg.qr); });
    std::cout << Json{{"event", "bench"},
                      {"forward_s", t_forward},
                      {"traces_s", t_traces},
                      {"initial_guess_s", t_qr},
                      {"value_and_gradient_s", t_grad},
                      {"correction_step_s", t_corr}}
                     .dump()
              << '\n';
    return 0;
}

FixtureReport run_and_write(const std::string& name, const std::string& out_dir, bool json_log) {
    FixtureReport r = run_fixture(name, json_logger(json_log, name));
    const fs::path dir = fs::path(out_dir) / name;
    fs::create_directories(dir);
    io::write_table((dir / "curves.csv").string(), {"x", "c_true", "c_init", "c_comp"},
                    {r.x, r.c_true, r.c_init, r.c_comp});
    write_diag((dir / "diag.csv").string(), r.history);
    std::ofstream((dir / "report.json").string()) << report_json(r).dump(2) << '\n';
    return r;
}

int cmd_run_fixture(const std::string& name, const std::string& out_dir, bool json_log) {
    std::vector<std::string> names = name == "all" ? fixture_names() : std::vector<std::string>{name};
    std::vector<FixtureReport> reports(names.size());
    const std::size_t cap = thread_cap();
    for (std::size_t start = 0; start < names.size(); start += cap) {
        std::vector<std::future<FixtureReport>> batch;
        for (std::size_t k = start; k < std::min(names.size(), start + cap); ++k)
            batch.push_back(std::async(cap > 1 ? std::launch::async : std::launch::deferred, run_and_write,
                                       names[k], out_dir, json_log));
        for (std::size_t k = 0; k < batch.size(); ++k) reports[start + k] = batch[k].get();
    }
    bool all_ok = true;
    for (const auto& r : reports) {
        std::cout << report_json(r).dump() << '\n';
        all_ok = all_ok && r.passed();
    }
    return all_ok ? 0 : exit_check_failed;
}

int cmd_write_config(const std::string& fixture, const std::string& out) {
    RunConfig cfg;
    if (!fixture.empty()) {
        bool found = false;
        for (const auto& f : simulated_fixtures())
            if (f.name == fixture) {
                cfg = f.config;
                found = true;
            }
        for (const auto& f : experimental_fixtures())
            if (f.name == fixture) {
                cfg = experimental_config(f.c_rel);
                found = true;
            }
        if (!found) throw Error(ErrorKind::FixtureMissing, "no fixture named '" + fixture + "'");
    }
    save_config(out, cfg);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coefficient inversion for the 1D wave equation from single-point backscattering data"};
    app.require_subcommand(1);
    int code = 0;

    std::string config;
    auto add_config = [&](CLI::App* sub) { sub->add_option("--config", config, "Run configuration (JSON)"); };

    auto* fwd = app.add_subcommand("forward", "Simulate boundary data g0, g1 at x = 0");
    add_config(fwd);
    std::string out_dir = "out";
    fwd->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
    fwd->callback([&] { code = cmd_forward(config, out_dir); });

    auto* inv = app.add_subcommand("invert", "Reconstruct c(x) from g0, g1 (simulated from the config if omitted)");
    add_config(inv);
    std::string g0, g1, out = "c.csv", diag;
    bool json_log = false;
    inv->add_option("--g0", g0, "CSV t,value");
    inv->add_option("--g1", g1, "CSV t,value");
    inv->add_option("--out", out, "Profile CSV x,c_comp,c_init")->capture_default_str();
    inv->add_option("--diag", diag, "Iteration CSV iteration,J,grad_norm,correction_count");
    inv->add_flag("--json-log", json_log, "Per-iteration JSON lines on stdout");
    inv->callback([&] { code = cmd_invert(config, g0, g1, out, diag, json_log); });

    auto* cal = app.add_subcommand("calibrate", "Scale factor mu from a raw and a simulated reference trace");
    std::string raw, sim, mode = "air", name, cal_out = "cal.json";
    cal->add_option("--raw", raw, "Raw reference CSV")->required();
    cal->add_option("--sim", sim, "Simulated reference CSV")->required();
    cal->add_option("--mode", mode)->check(CLI::IsMember({"air", "ground"}))->capture_default_str();
    cal->add_option("--name", name, "Reference name");
    cal->add_option("--out", cal_out)->capture_default_str();
    cal->callback([&] { code = cmd_calibrate(raw, sim, mode, name, cal_out); });

    auto* pre = app.add_subcommand("preprocess", "Turn a raw trace into g0, g1");
    add_config(pre);
    std::string cal_path, g0_out = "g0.csv", g1_out = "g1.csv";
    pre->add_option("--raw", raw, "Raw trace CSV t,value")->required();
    pre->add_option("--mode", mode)->check(CLI::IsMember({"air", "ground"}))->required();
    pre->add_option("--cal", cal_path, "Calibration JSON {mu, reference_name}")->required();
    pre->add_option("--out", g0_out)->capture_default_str();
    pre->add_option("--g1", g1_out)->capture_default_str();
    pre->callback([&] { code = cmd_preprocess(config, raw, mode, cal_path, g0_out, g1_out); });

    auto* grad = app.add_subcommand("gradient-check", "Exact gradient of J against symmetric differences");
    std::size_t nx = 20, nt = 20, fields = 50;
    std::uint64_t seed = 7;
    double step = 1e-6, tol = 1e-5;
    grad->add_option("--nx", nx)->capture_default_str();
    grad->add_option("--nt", nt)->capture_default_str();
    grad->add_option("--seed", seed)->capture_default_str();
    grad->add_option("--fields", fields)->capture_default_str();
    grad->add_option("--step", step)->capture_default_str();
    grad->add_option("--tol", tol)->capture_default_str();
    grad->callback([&] { code = cmd_gradient_check(nx, nt, seed, fields, step, tol); });

    auto* cvx = app.add_subcommand("convexity-check", "Minimum Bregman divergence of J per lambda");
    std::size_t pairs = 100;
    double radius = 5.0;
    std::uint64_t cvx_seed = 11;
    std::vector<double> lambdas{0.0, 1.0, 2.0, 4.0, 8.0};
    cvx->add_option("--pairs", pairs)->capture_default_str();
    cvx->add_option("--radius", radius)->capture_default_str();
    cvx->add_option("--seed", cvx_seed)->capture_default_str();
    cvx->add_option("--lambdas", lambdas)->delimiter(',')->capture_default_str();
    cvx->callback([&] { code = cmd_convexity_check(pairs, radius, cvx_seed, lambdas); });

    auto* bench = app.add_subcommand("bench", "Time the main stages");
    add_config(bench);
    bench->callback([&] { code = cmd_bench(config); });

    auto* fx = app.add_subcommand("run-fixture", "Run a stored fixture and compare with its expected bands");
    std::string fixture;
    std::string fx_out = "fixtures_out";
    fx->add_option("name", fixture, "test1..test5, bush, wood, metalbox, metalcyl, plastic, or all")->required();
    fx->add_option("--out-dir", fx_out)->capture_default_str();
    fx->add_flag("--json-log", json_log, "Per-iteration JSON lines on stdout");
    fx->callback([&] { code = cmd_run_fixture(fixture, fx_out, json_log); });

    auto* wc = app.add_subcommand("write-config", "Write the default or a fixture's configuration");
    std::string wc_fixture, wc_out = "config.json";
    wc->add_option("--fixture", wc_fixture);
    wc->add_option("--out", wc_out)->capture_default_str();
    wc->callback([&] { code = cmd_write_config(wc_fixture, wc_out); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const Error& e) {
        std::cerr << Json{{"error", std::string(to_string(e.kind()))}, {"message", e.what()}}.dump() << '\n';
        return exit_error;
    } catch (const std::exception& e) {
        std::cerr << Json{{"error", "Internal"}, {"message", e.what()}}.dump() << '\n';
        return exit_error;
    }
    return code;
}
