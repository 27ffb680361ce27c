#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bergman.hpp"
#include "certificates.hpp"
#include "deflation.hpp"
#include "rank.hpp"
#include "series.hpp"
#include "system.hpp"

NLOHMANN_JSON_NAMESPACE_BEGIN
template <typename T>
struct adl_serializer<std::optional<T>> {
    static void to_json(json& j, const std::optional<T>& v) {
        if (v) j = *v;
        else j = nullptr;
    }
    static void from_json(const json& j, std::optional<T>& v) {
        if (j.is_null()) v.reset();
        else v = j.get<T>();
    }
};

template <>
struct adl_serializer<std::complex<double>> {
    static void to_json(json& j, const std::complex<double>& c) { j = json::array({c.real(), c.imag()}); }
    static void from_json(const json& j, std::complex<double>& c) {
        if (j.is_number()) {
            c = {j.get<double>(), 0.0};
            return;
        }
        if (!j.is_array() || j.size() != 2) throw deflate::ParseError("complex value must be [re, im]");
        c = {j.at(0).get<double>(), j.at(1).get<double>()};
    }
};
NLOHMANN_JSON_NAMESPACE_END

namespace deflate {

using json = nlohmann::json;

inline void to_json(json& j, NormBackend b) { j = to_string(b); }
inline void from_json(const json& j, NormBackend& b) { b = parse_backend(j.get<std::string>()); }

inline void to_json(json& j, GateNorm g) { j = to_string(g); }
inline void from_json(const json& j, GateNorm& g) { g = parse_gate_norm(j.get<std::string>()); }

inline void to_json(json& j, StepKind k) { j = to_string(k); }
inline void from_json(const json& j, StepKind& k) {
    const auto s = j.get<std::string>();
    if (s == "selection") k = StepKind::selection;
    else if (s == "kerneling") k = StepKind::kerneling;
    else if (s == "extraction") k = StepKind::extraction;
    else throw ParseError("unknown step kind '" + s + "'");
}

inline void to_json(json& j, TraceStatus s) { j = to_string(s); }
inline void from_json(const json& j, TraceStatus& s) {
    s = j.get<std::string>() == "deflated" ? TraceStatus::deflated : TraceStatus::gate_failed;
}

inline void to_json(json& j, NewtonStop s) { j = to_string(s); }
inline void from_json(const json& j, NewtonStop& s) {
    const auto v = j.get<std::string>();
    s = v == "stagnation" ? NewtonStop::stagnation : v == "gate_failed" ? NewtonStop::gate_failed : NewtonStop::steps;
}

inline void to_json(json& j, const TruncatedSeries& f) {
    json terms = json::array();
    for (const auto& [e, c] : f.coefficients()) terms.push_back({{"coef", c}, {"exp", e}});
    j = {{"center", f.center()}, {"order", f.order()}, {"terms", terms}};
}

inline void from_json(const json& j, TruncatedSeries& f) {
    CoefficientMap m;
    for (const auto& t : j.at("terms")) m[t.at("exp").get<ExponentVector>()] += t.at("coef").get<Complex>();
    f = TruncatedSeries(j.at("center").get<Point>(), j.at("order").get<int>(), std::move(m));
}

inline void to_json(json& j, const BallContext& b) { j = {{"omega", b.omega}, {"radius", b.radius}}; }
inline void from_json(const json& j, BallContext& b) {
    b.omega = j.at("omega").get<Point>();
    b.radius = j.at("radius").get<double>();
}

inline void to_json(json& j, const AnalyticSystem& s) { j = {{"ball", s.ball}, {"equations", s.equations}}; }
inline void from_json(const json& j, AnalyticSystem& s) {
    s = AnalyticSystem(j.at("equations").get<std::vector<TruncatedSeries>>(), j.at("ball").get<BallContext>());
}

inline void to_json(json& j, const SmallnessGate& g) {
    j = {{"alpha0", g.alpha0}, {"c0", g.c0}, {"eta", g.eta}, {"norm", g.norm}, {"value_norm", g.value_norm},
         {"passed", g.passed}};
}
inline void from_json(const json& j, SmallnessGate& g) {
    g.alpha0 = j.at("alpha0");
    g.c0 = j.at("c0");
    g.eta = j.at("eta");
    g.norm = j.at("norm");
    g.value_norm = j.at("value_norm");
    g.passed = j.at("passed");
}

inline void to_json(json& j, const RankReport& r) {
    j = {{"sigma", r.sigma}, {"s", r.s},   {"b", r.b},           {"g", r.g},
         {"a", r.a},         {"m", r.m},   {"rank", r.rank},     {"epsilon", r.epsilon},
         {"full_rank", r.full_rank}};
}
inline void from_json(const json& j, RankReport& r) {
    r.sigma = j.at("sigma").get<std::vector<double>>();
    r.s = j.at("s").get<std::vector<double>>();
    r.b = j.at("b").get<std::vector<std::optional<double>>>();
    r.g = j.at("g").get<std::vector<std::optional<double>>>();
    r.a = j.at("a").get<std::vector<std::optional<double>>>();
    r.m = j.at("m").get<std::optional<int>>();
    r.rank = j.at("rank");
    r.epsilon = j.at("epsilon");
    r.full_rank = j.at("full_rank");
}

inline void to_json(json& j, const GateRecord& g) {
    j = {{"source", g.source}, {"derivative", g.derivative}, {"depth", g.depth}, {"value", g.value},
         {"eta", g.eta},       {"passed", g.passed},         {"outcome", g.outcome}};
}
inline void from_json(const json& j, GateRecord& g) {
    g.source = j.at("source");
    g.derivative = j.at("derivative").get<ExponentVector>();
    g.depth = j.at("depth");
    g.value = j.at("value");
    g.eta = j.at("eta");
    g.passed = j.at("passed");
    g.outcome = j.at("outcome");
}

inline void to_json(json& j, const Origin& o) {
    j = {{"source", o.source}, {"derivative", o.derivative}, {"valuation", o.valuation}};
}
inline void from_json(const json& j, Origin& o) {
    o.source = j.at("source");
    o.derivative = j.at("derivative").get<ExponentVector>();
    o.valuation = j.at("valuation");
}

inline void to_json(json& j, const Selection& s) {
    j = {{"equations", s.equations}, {"origins", s.origins}, {"records", s.records}, {"max_valuation", s.max_valuation}};
}
inline void from_json(const json& j, Selection& s) {
    s.equations = j.at("equations").get<std::vector<TruncatedSeries>>();
    s.origins = j.at("origins").get<std::vector<Origin>>();
    s.records = j.at("records").get<std::vector<GateRecord>>();
    s.max_valuation = j.at("max_valuation");
}

inline void to_json(json& j, const Pivots& p) { j = {{"rows", p.rows}, {"cols", p.cols}}; }
inline void from_json(const json& j, Pivots& p) {
    p.rows = j.at("rows").get<std::vector<std::size_t>>();
    p.cols = j.at("cols").get<std::vector<std::size_t>>();
}

inline void to_json(json& j, const DeflationStep& s) {
    j = {{"kind", s.kind},   {"gate", s.gate},           {"rank", s.rank},  {"pivots", s.pivots},
         {"system", s.system}, {"selection", s.selection}, {"input", s.input}};
}
inline void from_json(const json& j, DeflationStep& s) {
    s.kind = j.at("kind").get<StepKind>();
    s.gate = j.at("gate").get<SmallnessGate>();
    s.rank = j.at("rank").get<std::optional<RankReport>>();
    s.pivots = j.at("pivots").get<Pivots>();
    s.system = j.at("system").get<AnalyticSystem>();
    s.selection = j.at("selection").get<Selection>();
    s.input = j.at("input").get<AnalyticSystem>();
}

inline void to_json(json& j, const DeflationTrace& t) {
    j = {{"x0", t.x0},
         {"backend", t.backend},
         {"gate_norm", t.gate_norm},
         {"status", t.status},
         {"thickness", t.thickness},
         {"deflated", t.deflated},
         {"deflated_rows", t.deflated_rows},
         {"steps", t.steps}};
}
inline void from_json(const json& j, DeflationTrace& t) {
    t.x0 = j.at("x0").get<Point>();
    t.backend = j.at("backend").get<NormBackend>();
    t.gate_norm = j.at("gate_norm").get<GateNorm>();
    t.status = j.at("status").get<TraceStatus>();
    t.thickness = j.at("thickness");
    t.deflated = j.at("deflated").get<std::optional<AnalyticSystem>>();
    t.deflated_rows = j.at("deflated_rows").get<std::vector<std::size_t>>();
    t.steps = j.at("steps").get<std::vector<DeflationStep>>();
}

inline void to_json(json& j, const PointQuantities& q) {
    j = {{"beta", q.beta}, {"lambda", q.lambda}, {"kappa", q.kappa}, {"mu", q.mu},
         {"gamma", q.gamma}, {"alpha", q.alpha}, {"nu", q.nu}};
}
inline void from_json(const json& j, PointQuantities& q) {
    q.beta = j.at("beta");
    q.lambda = j.at("lambda");
    q.kappa = j.at("kappa");
    q.mu = j.at("mu");
    q.gamma = j.at("gamma");
    q.alpha = j.at("alpha");
    q.nu = j.at("nu");
}

inline void to_json(json& j, const CertificateReport& c) {
    j = {{"quantities", c.quantities}, {"alpha_bound", c.alpha_bound}, {"alpha_ok", c.alpha_ok},
         {"theta_low", c.theta_low},   {"theta_high", c.theta_high},   {"ball_contained", c.ball_contained},
         {"gamma_radius", c.gamma_radius}, {"thickness", c.thickness}, {"notes", c.notes}};
}
inline void from_json(const json& j, CertificateReport& c) {
    c.quantities = j.at("quantities").get<std::optional<PointQuantities>>();
    c.alpha_bound = j.at("alpha_bound").get<std::optional<double>>();
    c.alpha_ok = j.at("alpha_ok");
    c.theta_low = j.at("theta_low").get<std::optional<double>>();
    c.theta_high = j.at("theta_high").get<std::optional<double>>();
    c.ball_contained = j.at("ball_contained");
    c.gamma_radius = j.at("gamma_radius").get<std::optional<double>>();
    c.thickness = j.at("thickness");
    c.notes = j.at("notes").get<std::vector<std::string>>();
}

inline void to_json(json& j, const DeflatedGammaBound& d) {
    j = {{"gamma0", d.gamma0}, {"ell", d.ell},         {"gamma_ell", d.gamma_ell}, {"radius", d.radius},
         {"p", d.p},           {"p0", d.p0},           {"mu_max", d.mu_max},       {"mu_steps", d.mu_steps},
         {"lambda0", d.lambda0}, {"kappa", d.kappa}};
}
inline void from_json(const json& j, DeflatedGammaBound& d) {
    d.gamma0 = j.at("gamma0");
    d.ell = j.at("ell");
    d.gamma_ell = j.at("gamma_ell");
    d.radius = j.at("radius");
    d.p = j.at("p");
    d.p0 = j.at("p0");
    d.mu_max = j.at("mu_max");
    d.mu_steps = j.at("mu_steps").get<std::vector<double>>();
    d.lambda0 = j.at("lambda0");
    d.kappa = j.at("kappa");
}

inline void to_json(json& j, const NewtonRun& r) { j = {{"iterates", r.iterates}, {"stop", r.stop}}; }
inline void from_json(const json& j, NewtonRun& r) {
    r.iterates = j.at("iterates").get<std::vector<Point>>();
    r.stop = j.at("stop").get<NewtonStop>();
}

// Everything the deflate command reports.
struct TraceReport {
    DeflationTrace trace;
    std::optional<CertificateReport> certificate;
    std::optional<NewtonRun> iterates;

    bool operator==(const TraceReport&) const = default;
};

inline void to_json(json& j, const TraceReport& r) {
    j = {{"trace", r.trace}, {"certificate", r.certificate}, {"iterates", r.iterates}};
}
inline void from_json(const json& j, TraceReport& r) {
    r.trace = j.at("trace").get<DeflationTrace>();
    r.certificate = j.at("certificate").get<std::optional<CertificateReport>>();
    r.iterates = j.at("iterates").get<std::optional<NewtonRun>>();
}

}  // namespace deflate
