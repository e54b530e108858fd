#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "convexiwave/convexify.hpp"
#include "convexiwave/errors.hpp"
#include "convexiwave/forward.hpp"
#include "convexiwave/medium.hpp"
#include "convexiwave/preprocess.hpp"
#include "convexiwave/quasi_reversibility.hpp"
#include "convexiwave/solver.hpp"

namespace convexiwave {

using Json = nlohmann::json;

/// Simulation of the measured data: medium, wave grid on [-a, a] x [0, T],
/// source, the near-origin correction, and multiplicative noise.
struct ForwardConfig {
    bool operator==(const ForwardConfig&) const = default;

    MediumShape medium;
    MediumProfile::Bounds bounds{};
    double a = 5.0;
    double t_max = 6.0;
    std::size_t nx = 3000;
    std::size_t nt = 300;
    SourceModel source{};
    CorrectionBox correction{};
    double noise_delta = 0.0;
    std::uint64_t seed = 1;

    void validate() const {
        require(a > 0.0 && t_max > 0.0, "forward grid extents must be positive");
        require(nx >= 2 && nt >= 2, "forward grid needs at least 2 intervals per axis");
        require(source.k > 0.0, "source width k must be positive");
        require(correction.x_hi >= 0.0 && correction.t_hi >= 0.0, "correction box must be nonnegative");
        require(noise_delta >= 0.0 && noise_delta < 1.0, "noise level must lie in [0, 1)");
        require(bounds.c_lower > 0.0 && bounds.c_upper > bounds.c_lower, "invalid medium bounds");
    }
};

/// The q domain [eps, M] x [0, T] and its grid, the admissible bound on c, and
/// the Tikhonov parameter used for g0'.
struct TransformConfig {
    bool operator==(const TransformConfig&) const = default;

    double eps = 0.0;
    double big_m = 3.0;
    double t_max = 6.0;
    std::size_t nx = 100;
    std::size_t nt = 200;
    double c_upper = 15.0;
    double derivative_reg = 1e-6;

    void validate() const {
        require(eps >= 0.0 && big_m > eps && t_max > 0.0, "q domain must satisfy 0 <= eps < M and T > 0");
        require(nx >= 2 && nt >= 2, "q grid needs at least 2 intervals per axis");
        require(c_upper > 1.0, "c_upper must exceed the background value 1");
        require(derivative_reg > 0.0, "derivative_reg must be positive");
    }

    SpaceTimeGrid grid() const { return SpaceTimeGrid(eps, big_m, t_max, nx, nt); }
};

struct RunConfig {
    bool operator==(const RunConfig&) const = default;

    ForwardConfig forward{};
    TransformConfig transform{};
    ConvexParams convex{};
    DescentConfig descent{};
    QRConfig qr{};
    PreprocessConfig preprocess{};
    Interval c_bckgr{3.0, 5.0};
    bool strict = false;

    void validate() const {
        forward.validate();
        transform.validate();
        convex.validate();
        descent.validate();
        qr.validate();
        require(preprocess.derivative_reg > 0.0, "preprocess derivative_reg must be positive");
        require(c_bckgr.lo > 0.0 && c_bckgr.hi >= c_bckgr.lo, "c_bckgr interval is invalid");
    }

    InversionSettings inversion() const {
        InversionSettings s;
        s.grid = transform.grid();
        s.c_upper = transform.c_upper;
        s.derivative_reg = transform.derivative_reg;
        s.convex = convex;
        s.descent = descent;
        s.descent.eta_step = convex.eta_step;
        s.qr = qr;
        s.strict = strict;
        return s;
    }
};

namespace detail {

inline void reject_unknown(const Json& j, std::initializer_list<const char*> keys, const char* where) {
    require(j.is_object(), std::string(where) + " must be a JSON object");
    const std::set<std::string> known(keys.begin(), keys.end());
    for (const auto& item : j.items())
        if (!known.contains(item.key())) throw Error(ErrorKind::InvalidArgument, std::string("unknown key '") + item.key() + "' in " + where);
}

template <typename T>
void read(const Json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

inline void to_json(Json& j, const MediumPiece& piece) {
    std::visit(
        [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, BumpPiece>) {
                j = {{"kind", "bump"}, {"center", p.center}, {"radius", p.radius}, {"amplitude", p.amplitude}};
            } else if constexpr (std::is_same_v<P, StepPiece>) {
                j = {{"kind", "step"}, {"center", p.center}, {"half_width", p.half_width}, {"value", p.value}};
            } else if constexpr (std::is_same_v<P, SinePiece>) {
                j = {{"kind", "sine"},           {"center", p.center}, {"half_width", p.half_width},
                     {"base", p.base},           {"amplitude", p.amplitude}, {"frequency", p.frequency},
                     {"shift", p.shift}};
            } else {
                j = {{"kind", "table"}, {"x", p.x}, {"c", p.c}};
            }
        },
        piece);
}

inline void from_json(const Json& j, MediumPiece& piece) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "bump") {
        detail::reject_unknown(j, {"kind", "center", "radius", "amplitude"}, "bump piece");
        BumpPiece p;
        detail::read(j, "center", p.center);
        detail::read(j, "radius", p.radius);
        detail::read(j, "amplitude", p.amplitude);
        require(p.radius > 0.0, "bump radius must be positive");
        piece = p;
    } else if (kind == "step") {
        detail::reject_unknown(j, {"kind", "center", "half_width", "value"}, "step piece");
        StepPiece p;
        detail::read(j, "center", p.center);
        detail::read(j, "half_width", p.half_width);
        detail::read(j, "value", p.value);
        require(p.half_width > 0.0 && p.value > 0.0, "step piece needs positive half_width and value");
        piece = p;
    } else if (kind == "sine") {
        detail::reject_unknown(j, {"kind", "center", "half_width", "base", "amplitude", "frequency", "shift"},
                               "sine piece");
        SinePiece p;
        detail::read(j, "center", p.center);
        detail::read(j, "half_width", p.half_width);
        detail::read(j, "base", p.base);
        detail::read(j, "amplitude", p.amplitude);
        detail::read(j, "frequency", p.frequency);
        detail::read(j, "shift", p.shift);
        require(p.half_width > 0.0 && p.base > std::abs(p.amplitude), "sine piece must stay positive");
        piece = p;
    } else if (kind == "table") {
        detail::reject_unknown(j, {"kind", "x", "c"}, "table piece");
        TablePiece p;
        detail::read(j, "x", p.x);
        detail::read(j, "c", p.c);
        require(p.x.size() >= 2 && p.x.size() == p.c.size(), "table piece needs matching x and c with >= 2 samples");
        require(std::is_sorted(p.x.begin(), p.x.end()) &&
                    std::adjacent_find(p.x.begin(), p.x.end()) == p.x.end(),
                "table x must be strictly increasing");
        piece = p;
    } else {
        throw Error(ErrorKind::InvalidArgument, "unknown medium piece kind '" + kind + "'");
    }
}

inline void to_json(Json& j, const ForwardConfig& c) {
    j = {{"medium", c.medium.pieces},
         {"bounds", {{"c_lower", c.bounds.c_lower}, {"c_upper", c.bounds.c_upper}}},
         {"grid", {{"a", c.a}, {"T", c.t_max}, {"nx", c.nx}, {"nt", c.nt}}},
         {"source", {{"k", c.source.k}}},
         {"correction", {{"x_hi", c.correction.x_hi}, {"t_hi", c.correction.t_hi}}},
         {"noise", {{"delta", c.noise_delta}, {"seed", c.seed}}}};
}

inline void from_json(const Json& j, ForwardConfig& c) {
    detail::reject_unknown(j, {"medium", "bounds", "grid", "source", "correction", "noise"}, "forward");
    if (j.contains("medium")) c.medium.pieces = j.at("medium").get<std::vector<MediumPiece>>();
    if (j.contains("bounds")) {
        const auto& b = j.at("bounds");
        detail::reject_unknown(b, {"c_lower", "c_upper"}, "forward.bounds");
        detail::read(b, "c_lower", c.bounds.c_lower);
        detail::read(b, "c_upper", c.bounds.c_upper);
    }
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        detail::reject_unknown(g, {"a", "T", "nx", "nt"}, "forward.grid");
        detail::read(g, "a", c.a);
        detail::read(g, "T", c.t_max);
        detail::read(g, "nx", c.nx);
        detail::read(g, "nt", c.nt);
    }
    if (j.contains("source")) {
        detail::reject_unknown(j.at("source"), {"k"}, "forward.source");
        detail::read(j.at("source"), "k", c.source.k);
    }
    if (j.contains("correction")) {
        const auto& b = j.at("correction");
        detail::reject_unknown(b, {"x_hi", "t_hi"}, "forward.correction");
        detail::read(b, "x_hi", c.correction.x_hi);
        detail::read(b, "t_hi", c.correction.t_hi);
    }
    if (j.contains("noise")) {
        const auto& n = j.at("noise");
        detail::reject_unknown(n, {"delta", "seed"}, "forward.noise");
        detail::read(n, "delta", c.noise_delta);
        detail::read(n, "seed", c.seed);
    }
}

inline void to_json(Json& j, const TransformConfig& c) {
    j = {{"eps", c.eps}, {"M", c.big_m},         {"T", c.t_max},
         {"nx", c.nx},   {"nt", c.nt},           {"c_upper", c.c_upper},
         {"derivative_reg", c.derivative_reg}};
}

inline void from_json(const Json& j, TransformConfig& c) {
    detail::reject_unknown(j, {"eps", "M", "T", "nx", "nt", "c_upper", "derivative_reg"}, "transform");
    detail::read(j, "eps", c.eps);
    detail::read(j, "M", c.big_m);
    detail::read(j, "T", c.t_max);
    detail::read(j, "nx", c.nx);
    detail::read(j, "nt", c.nt);
    detail::read(j, "c_upper", c.c_upper);
    detail::read(j, "derivative_reg", c.derivative_reg);
}

inline void to_json(Json& j, const ConvexParams& c) {
    j = {{"lambda", c.lambda}, {"alpha", c.alpha}, {"beta", c.beta}, {"eta_step", c.eta_step}};
}

inline void from_json(const Json& j, ConvexParams& c) {
    detail::reject_unknown(j, {"lambda", "alpha", "beta", "eta_step"}, "convex");
    detail::read(j, "lambda", c.lambda);
    detail::read(j, "alpha", c.alpha);
    detail::read(j, "beta", c.beta);
    detail::read(j, "eta_step", c.eta_step);
}

inline void to_json(Json& j, const DescentConfig& c) {
    j = {{"max_iters", c.max_iters},
         {"grad_tol", c.grad_tol},
         {"armijo", {{"c1", c.armijo_c1}, {"backtrack", c.backtrack}}},
         {"min_step", c.min_step},
         {"step_growth", c.step_growth},
         {"max_corrections", c.max_corrections},
         {"stop_linf", c.stop_linf},
         {"correction_relaxation", c.correction_relaxation}};
}

inline void from_json(const Json& j, DescentConfig& c) {
    detail::reject_unknown(j,
                           {"max_iters", "grad_tol", "armijo", "min_step", "step_growth", "max_corrections",
                            "stop_linf", "correction_relaxation"},
                           "descent");
    detail::read(j, "max_iters", c.max_iters);
    detail::read(j, "grad_tol", c.grad_tol);
    if (j.contains("armijo")) {
        const auto& a = j.at("armijo");
        detail::reject_unknown(a, {"c1", "backtrack"}, "descent.armijo");
        detail::read(a, "c1", c.armijo_c1);
        detail::read(a, "backtrack", c.backtrack);
    }
    detail::read(j, "min_step", c.min_step);
    detail::read(j, "step_growth", c.step_growth);
    detail::read(j, "max_corrections", c.max_corrections);
    detail::read(j, "stop_linf", c.stop_linf);
    detail::read(j, "correction_relaxation", c.correction_relaxation);
}

inline void to_json(Json& j, const QRConfig& c) {
    j = {{"reg_eta", c.reg_eta}, {"freeze_qt", c.freeze_qt}, {"reset_initial_row", c.reset_initial_row}};
}

inline void from_json(const Json& j, QRConfig& c) {
    detail::reject_unknown(j, {"reg_eta", "freeze_qt", "reset_initial_row"}, "qr");
    detail::read(j, "reg_eta", c.reg_eta);
    detail::read(j, "freeze_qt", c.freeze_qt);
    detail::read(j, "reset_initial_row", c.reset_initial_row);
}

inline void to_json(Json& j, const PreprocessConfig& c) {
    j = {{"half_width_steps", c.half_width_steps},
         {"envelope", c.envelope_method == EnvelopeMethod::ExtremaInterpolation ? "extrema" : "cumulative"},
         {"derivative_reg", c.derivative_reg}};
}

inline void from_json(const Json& j, PreprocessConfig& c) {
    detail::reject_unknown(j, {"half_width_steps", "envelope", "derivative_reg"}, "preprocess");
    detail::read(j, "half_width_steps", c.half_width_steps);
    if (j.contains("envelope")) {
        const auto e = j.at("envelope").get<std::string>();
        if (e == "extrema") c.envelope_method = EnvelopeMethod::ExtremaInterpolation;
        else if (e == "cumulative") c.envelope_method = EnvelopeMethod::CumulativeExtremum;
        else throw Error(ErrorKind::InvalidArgument, "preprocess.envelope must be 'extrema' or 'cumulative'");
    }
    detail::read(j, "derivative_reg", c.derivative_reg);
}

inline void to_json(Json& j, const RunConfig& c) {
    j = {{"forward", c.forward},   {"transform", c.transform},
         {"convex", c.convex},     {"descent", c.descent},
         {"qr", c.qr},             {"preprocess", c.preprocess},
         {"c_bckgr", {c.c_bckgr.lo, c.c_bckgr.hi}},
         {"strict", c.strict}};
}

inline void from_json(const Json& j, RunConfig& c) {
    detail::reject_unknown(j, {"forward", "transform", "convex", "descent", "qr", "preprocess", "c_bckgr", "strict"},
                           "config");
    detail::read(j, "forward", c.forward);
    detail::read(j, "transform", c.transform);
    detail::read(j, "convex", c.convex);
    detail::read(j, "descent", c.descent);
    detail::read(j, "qr", c.qr);
    detail::read(j, "preprocess", c.preprocess);
    if (j.contains("c_bckgr")) {
        const auto v = j.at("c_bckgr").get<std::vector<double>>();
        require(v.size() == 2, "c_bckgr must be [lo, hi]");
        c.c_bckgr = {v[0], v[1]};
    }
    detail::read(j, "strict", c.strict);
}

/// Parses and validates; missing keys keep their defaults.
inline RunConfig parse_config(const Json& j) {
    RunConfig c;
    try {
        from_json(j, c);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidArgument, std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open config " + path);
    Json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidArgument, "config " + path + ": " + e.what());
    }
    return parse_config(j);
}

inline void save_config(const std::string& path, const RunConfig& c) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write config " + path);
    out << Json(c).dump(2) << '\n';
}

}  // namespace convexiwave
