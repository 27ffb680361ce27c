#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bergman.hpp"
#include "certificates.hpp"
#include "deflation.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "rank.hpp"
#include "system.hpp"

namespace deflate {

struct SystemInput {
    std::vector<std::string> vars;
    std::optional<AnalyticSystem> source;  // polynomial as written, centered at the origin
    std::optional<AnalyticSystem> system;  // recentered at the point and truncated
    Point point;
    int order = 3;
    NormBackend backend = NormBackend::complex_exact;
    GateNorm gate_norm = GateNorm::euclidean;
    bool omega_given = false;
    std::optional<Eigen::MatrixXcd> matrix;
};

struct CommandOptions {
    std::optional<int> order;
    std::optional<NormBackend> backend;
    std::optional<GateNorm> gate_norm;
    std::optional<int> max_iters;
    int steps = 3;
};

struct CommandResult {
    json output;
    int exit_code = 0;
};

namespace detail {

template <typename T>
T field(const json& j, const char* name) {
    if (!j.contains(name)) throw ParseError(std::string("missing field '") + name + "'");
    try {
        return j.at(name).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("field '") + name + "': " + e.what());
    } catch (const ParseError& e) {
        throw ParseError(std::string("field '") + name + "': " + e.what());
    }
}

inline Eigen::MatrixXcd parse_matrix(const json& m) {
    if (!m.is_array() || m.empty()) throw ParseError("field 'matrix': expected a nonempty list of rows");
    const std::size_t cols = m.at(0).size();
    if (cols == 0) throw ParseError("field 'matrix': empty row");
    Eigen::MatrixXcd out(m.size(), cols);
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (!m.at(i).is_array() || m.at(i).size() != cols) throw ParseError("field 'matrix': ragged rows");
        for (std::size_t k = 0; k < cols; ++k) {
            try {
                out(i, k) = m.at(i).at(k).get<Complex>();
            } catch (const std::exception& e) {
                throw ParseError(std::string("field 'matrix': ") + e.what());
            }
        }
    }
    return out;
}

}  // namespace detail

inline SystemInput parse_system_json(const json& j, const CommandOptions& opt = {}) {
    if (!j.is_object()) throw ParseError("input must be a JSON object");
    SystemInput in;
    if (j.contains("matrix")) {
        in.matrix = detail::parse_matrix(j.at("matrix"));
        return in;
    }
    in.vars = detail::field<std::vector<std::string>>(j, "vars");
    const std::size_t n = in.vars.size();
    if (n == 0) throw ParseError("field 'vars': must not be empty");

    const json eqs = detail::field<json>(j, "equations");
    if (!eqs.is_array() || eqs.empty()) throw ParseError("field 'equations': must be a nonempty list");

    in.point = detail::field<Point>(j, "point");
    if (in.point.size() != n) throw ParseError("field 'point': length differs from vars");
    const double radius = detail::field<double>(j, "radius");
    if (!(radius > 0.0)) throw ParseError("field 'radius': must be positive");
    in.order = opt.order.value_or(j.contains("order") ? detail::field<int>(j, "order") : 3);
    if (in.order < 1) throw ParseError("field 'order': must be at least 1");
    in.backend = opt.backend.value_or(j.contains("norm_backend") ? parse_backend(detail::field<std::string>(j, "norm_backend"))
                                                                 : NormBackend::complex_exact);
    in.gate_norm = opt.gate_norm.value_or(j.contains("gate_norm") ? parse_gate_norm(detail::field<std::string>(j, "gate_norm"))
                                                                  : GateNorm::euclidean);
    Point omega = in.point;
    if (j.contains("omega")) {
        omega = detail::field<Point>(j, "omega");
        if (omega.size() != n) throw ParseError("field 'omega': length differs from vars");
        in.omega_given = true;
    }

    std::vector<CoefficientMap> maps;
    int degree = 0;
    for (std::size_t q = 0; q < eqs.size(); ++q) {
        const std::string where = "field 'equations[" + std::to_string(q) + "]'";
        if (!eqs[q].is_array()) throw ParseError(where + ": expected a list of terms");
        CoefficientMap m;
        for (const auto& t : eqs[q]) {
            if (!t.is_object() || !t.contains("coef") || !t.contains("exp"))
                throw ParseError(where + ": each term needs coef and exp");
            ExponentVector e;
            Complex c;
            try {
                e = t.at("exp").get<ExponentVector>();
                c = t.at("coef").get<Complex>();
            } catch (const std::exception& ex) {
                throw ParseError(where + ": " + ex.what());
            }
            if (e.size() != n) throw ParseError(where + ": exponent length differs from vars");
            for (int k : e)
                if (k < 0) throw ParseError(where + ": negative exponent");
            degree = std::max(degree, total_degree(e));
            m[e] += c;
        }
        maps.push_back(std::move(m));
    }

    const BallContext ball{omega, radius};
    if (point_distance(in.point, omega) >= radius) throw ParseError("field 'point': outside the ball");
    const Point origin(n, Complex{});
    const int src_order = std::max(degree, in.order);
    std::vector<TruncatedSeries> src;
    for (auto& m : maps) src.emplace_back(origin, src_order, std::move(m));
    // Only the radius of the source ball is used when iterating; a user ball may exclude the origin.
    const BallContext src_ball = point_distance(origin, omega) < radius ? ball : BallContext{origin, radius};
    in.source = AnalyticSystem(src, src_ball);

    std::vector<TruncatedSeries> rec;
    for (const auto& f : src) rec.push_back(recenter(f, in.point, in.order));
    in.system = AnalyticSystem(std::move(rec), ball);
    return in;
}

inline SystemInput parse_system(const std::string& path, const CommandOptions& opt = {}) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open input file '" + path + "'");
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
    return parse_system_json(j, opt);
}

inline NewtonOptions newton_options(const SystemInput& in, const CommandOptions& opt) {
    NewtonOptions o;
    o.order = in.order;
    if (in.omega_given) o.fixed_ball = in.system->ball;
    o.max_iters = opt.max_iters;
    o.gate_norm = in.gate_norm;
    return o;
}

inline CommandResult cmd_rank(const SystemInput& in) {
    CommandResult r;
    if (in.matrix) {
        r.output = {{"command", "rank"}, {"input", "matrix"}, {"report", numerical_rank(*in.matrix)}};
        return r;
    }
    const AnalyticSystem& F = *in.system;
    const Selection sel = select(F, in.point, in.backend);
    if (sel.equations.empty()) throw RankDeficiencyError("selection produced an empty system");
    const AnalyticSystem S = F.with_equations(sel.equations);
    r.output = {{"command", "rank"},
                {"input", "system"},
                {"jacobian_rows", S.size()},
                {"report", numerical_rank(S.jacobian_at(in.point))}};
    return r;
}

inline CommandResult cmd_deflate(const SystemInput& in, const CommandOptions& opt = {}) {
    if (!in.system) throw ParseError("deflate needs a system input");
    TraceReport rep;
    rep.trace = deflation_sequence(*in.system, in.point, in.backend, opt.max_iters, in.gate_norm);
    if (rep.trace.deflated) rep.certificate = alpha_certificate(*rep.trace.deflated, in.point, in.backend);
    CommandResult r;
    r.output = {{"command", "deflate"}, {"report", rep}};
    r.exit_code = rep.trace.deflated ? 0 : 2;
    return r;
}

inline CommandResult cmd_solve(const SystemInput& in, const CommandOptions& opt = {}) {
    if (!in.source) throw ParseError("solve needs a system input");
    const NewtonRun run = newton_iterate(*in.source, in.point, opt.steps, in.backend, newton_options(in, opt));
    CommandResult r;
    r.output = {{"command", "solve"}, {"iterates", run.iterates}, {"stop", run.stop}};
    r.exit_code = run.stop == NewtonStop::gate_failed ? 2 : 0;
    return r;
}

inline CommandResult cmd_certify(const SystemInput& in, const CommandOptions& opt = {}) {
    if (!in.system) throw ParseError("certify needs a system input");
    CertificateReport cert = singular_alpha_certificate(*in.system, in.point, in.backend, opt.max_iters, in.gate_norm);
    json extra = nullptr;
    json root = nullptr;
    if (cert.quantities) {
        try {
            const DeflationTrace tr = deflation_sequence(*in.system, in.point, in.backend, opt.max_iters, in.gate_norm);
            const AnalyticSystem& d = *tr.deflated;
            // Classical Newton on the deflated system gives the point where the gamma radius is taken.
            Point z = in.point;
            for (int k = 0; k < 64; ++k) {
                const Point next = to_point(to_vector(z) - solve_square(d.jacobian_at(z), d.evaluate(z)));
                const double move = point_distance(next, z);
                z = next;
                if (move <= 1e-15 * (1.0 + point_norm(z))) break;
            }
            root = z;
            cert.gamma_radius = gamma_radius(d, z, in.backend);
            extra = deflated_gamma_bound(tr, z, in.backend);
        } catch (const Error& e) {
            cert.notes.push_back(std::string("gamma radius unavailable: ") + e.what());
        }
    }
    CommandResult r;
    r.output = {{"command", "certify"}, {"certificate", cert}, {"refined_root", root}, {"deflated_gamma_bound", extra}};
    return r;
}

inline int exit_code_for(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::parse: return 1;
        case ErrorKind::extraction: return 2;
        default: return 3;
    }
}

}  // namespace deflate
