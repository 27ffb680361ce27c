#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bergman.hpp"
#include "errors.hpp"
#include "linalg.hpp"
#include "rank.hpp"
#include "series.hpp"
#include "system.hpp"

namespace deflate {

// First positive root of (1 - 4u + 2u^2)^2 - 2u.
inline constexpr double alpha0() { return 0.130716944352002075877; }

// sum_{k>=0} (1/2)^(2^k - 1)
inline double c0() {
    double s = 0.0;
    for (int k = 0; k < 7; ++k) s += std::ldexp(1.0, -((1 << k) - 1));
    return s;
}

inline double eta_threshold(double norm_f, int n, double radius) {
    if (n < 2) throw DomainError("eta threshold needs n >= 2");
    if (!(radius > 0.0)) throw DomainError("eta threshold needs a positive radius");
    if (norm_f < 0.0) throw DomainError("norm must be nonnegative");
    return 2.0 * alpha0() / ((n + 1.0) * (n + 2.0) * (radius + norm_f) * std::pow(radius, n - 2));
}

struct SmallnessGate {
    double alpha0 = deflate::alpha0();
    double c0 = deflate::c0();
    double eta = 0.0;
    double norm = 0.0;        // A2 norm feeding eta
    double value_norm = 0.0;  // |f(x0)|
    bool passed = false;

    bool operator==(const SmallnessGate&) const = default;
};

inline SmallnessGate make_gate(double norm, double value, int n, double radius) {
    SmallnessGate g;
    g.norm = norm;
    g.value_norm = value;
    g.eta = eta_threshold(norm, n, radius);
    g.passed = value <= g.eta;
    return g;
}

inline SmallnessGate is_small(const TruncatedSeries& f, const Point& x0, const BallContext& ball, NormBackend backend) {
    return make_gate(norm_a2(f, ball, backend), std::abs(evaluate(f, x0)), static_cast<int>(f.dim()), ball.radius);
}

// How |F(x0)| is measured for a system; leading keeps only the first n components.
enum class GateNorm { euclidean, leading };

inline const char* to_string(GateNorm g) { return g == GateNorm::euclidean ? "euclidean" : "leading"; }

inline GateNorm parse_gate_norm(const std::string& s) {
    if (s == "euclidean") return GateNorm::euclidean;
    if (s == "leading") return GateNorm::leading;
    throw ParseError("gate_norm: expected euclidean or leading, got '" + s + "'");
}

inline double gate_value(const AnalyticSystem& F, const Point& x0, GateNorm g) {
    const Eigen::VectorXcd v = F.evaluate(x0);
    if (g == GateNorm::leading) return v.head(std::min<Eigen::Index>(v.size(), F.dim())).norm();
    return v.norm();
}

inline SmallnessGate is_small(const AnalyticSystem& F, const Point& x0, NormBackend backend,
                              GateNorm g = GateNorm::euclidean) {
    return make_gate(norm_a2(F, backend), gate_value(F, x0, g), static_cast<int>(F.dim()), F.ball.radius);
}

// ---------------------------------------------------------------------------
// Selection

struct GateRecord {
    std::size_t source = 0;      // index of the input equation
    ExponentVector derivative;   // partial derivative applied to it
    int depth = 0;
    double value = 0.0;
    double eta = 0.0;
    bool passed = false;
    std::string outcome;         // descend | exhausted | retained | already_retained

    bool operator==(const GateRecord&) const = default;
};

struct Origin {
    std::size_t source = 0;
    ExponentVector derivative;
    int valuation = 0;

    bool operator==(const Origin&) const = default;
};

struct Selection {
    std::vector<TruncatedSeries> equations;
    std::vector<Origin> origins;
    std::vector<GateRecord> records;
    int max_valuation = 0;

    bool operator==(const Selection&) const = default;
};

namespace detail {

struct Pending {
    const TruncatedSeries* f;
    std::size_t source;
    ExponentVector derivative;
};

class Selector {
public:
    Selector(const BallContext& ball, const Point& x0, NormBackend backend, double ref)
        : ball_(ball), x0_(x0), backend_(backend), ref_(ref) {}

    // Returns how many gate failures below f led to a retention (new or duplicate).
    int visit(const TruncatedSeries& f, std::size_t source, const ExponentVector& deriv, int depth,
              const Pending& parent) {
        const SmallnessGate gate = is_small(f, x0_, ball_, backend_);
        GateRecord rec{source, deriv, depth, gate.value_norm, gate.eta, gate.passed, {}};
        if (gate.passed) {
            std::vector<TruncatedSeries> kids;
            std::vector<std::size_t> vars;
            for (std::size_t v = 0; v < f.dim(); ++v) {
                TruncatedSeries d = derivative(f, v);
                if (is_zero(d, ref_)) continue;
                kids.push_back(std::move(d));
                vars.push_back(v);
            }
            rec.outcome = kids.empty() ? "exhausted" : "descend";
            out_.records.push_back(rec);
            const Pending self{&f, source, deriv};
            int hits = 0;
            for (std::size_t k = 0; k < kids.size(); ++k) {
                ExponentVector d = deriv;
                d[vars[k]] += 1;
                hits += visit(kids[k], source, d, depth + 1, self);
            }
            return hits;
        }
        const TruncatedSeries& keep = *parent.f;
        const bool dup = std::any_of(out_.equations.begin(), out_.equations.end(),
                                     [&](const TruncatedSeries& g) { return approx_equal(g, keep, 1e-12); });
        rec.outcome = dup ? "already_retained" : "retained";
        out_.records.push_back(rec);
        if (!dup) {
            out_.equations.push_back(keep);
            out_.origins.push_back({parent.source, parent.derivative, depth});
            out_.max_valuation = std::max(out_.max_valuation, depth);
        }
        return 1;
    }

    Selection result() && { return std::move(out_); }

private:
    const BallContext& ball_;
    const Point& x0_;
    NormBackend backend_;
    double ref_;
    Selection out_;
};

inline double max_coefficient(const std::vector<TruncatedSeries>& eqs) {
    double m = 0.0;
    for (const auto& f : eqs) m = std::max(m, f.max_abs_coefficient());
    return m;
}

}  // namespace detail

// Replaces each small equation by its partial derivatives until they stop being small.
inline Selection select(const AnalyticSystem& F, const Point& x0, NormBackend backend) {
    nu(x0, F.ball);
    const double ref = detail::max_coefficient(F.equations);
    detail::Selector sel(F.ball, x0, backend, ref);
    for (std::size_t i = 0; i < F.size(); ++i) {
        const TruncatedSeries& f = F.equations[i];
        if (is_zero(f, ref)) continue;
        const ExponentVector zero(F.dim(), 0);
        if (sel.visit(f, i, zero, 0, detail::Pending{&f, i, zero}) == 0)
            throw TruncationExhaustedError("equation " + std::to_string(i) +
                                           " is small to every available order; raise the truncation order");
    }
    return std::move(sel).result();
}

// ---------------------------------------------------------------------------
// Kerneling

struct Pivots {
    std::vector<std::size_t> rows;
    std::vector<std::size_t> cols;

    bool operator==(const Pivots&) const = default;
};

// Complete pivoting; near ties go to the first entry in column-major order.
inline Pivots pivot_selection(const Eigen::MatrixXcd& j0, int r) {
    if (r < 1 || r > std::min(j0.rows(), j0.cols())) throw StructuralError("pivot count out of range");
    const double scale = spectral_norm(j0);
    Eigen::MatrixXcd a = j0;
    std::vector<bool> used_r(a.rows(), false), used_c(a.cols(), false);
    Pivots p;
    for (int step = 0; step < r; ++step) {
        double best = -1.0;
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            for (Eigen::Index j = 0; j < a.cols(); ++j)
                if (!used_r[i] && !used_c[j]) best = std::max(best, std::abs(a(i, j)));
        if (!(best >= 1e-12 * scale) || best == 0.0)
            throw RankDeficiencyError("pivot block is numerically singular");
        Eigen::Index pi = -1, pj = -1;
        for (Eigen::Index j = 0; j < a.cols() && pi < 0; ++j)
            for (Eigen::Index i = 0; i < a.rows(); ++i)
                if (!used_r[i] && !used_c[j] && std::abs(a(i, j)) >= best * (1.0 - 1e-9)) {
                    pi = i;
                    pj = j;
                    break;
                }
        used_r[pi] = used_c[pj] = true;
        p.rows.push_back(static_cast<std::size_t>(pi));
        p.cols.push_back(static_cast<std::size_t>(pj));
        const Complex piv = a(pi, pj);
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            if (used_r[i]) continue;
            const Complex l = a(i, pj) / piv;
            a.row(i) -= l * a.row(pi);
        }
    }
    return p;
}

// Pivot-row equations followed by the nonzero entries of vec(Schur(DF)).
inline AnalyticSystem kernel_op(const AnalyticSystem& F, const Point& x0, const RankReport& rr,
                                const Pivots& piv, std::optional<int> order = std::nullopt) {
    const int r = rr.rank;
    if (r < 1 || r >= static_cast<int>(F.dim())) throw StructuralError("kerneling needs 1 <= rank < n");
    if (static_cast<int>(piv.rows.size()) != r || static_cast<int>(piv.cols.size()) != r)
        throw StructuralError("pivot lists must have rank length");
    const AnalyticSystem G = F.center() == x0 ? F : recenter(F, x0, F.order());
    const int o = order.value_or(std::max(0, G.order() - 1));
    const SeriesMatrix J = G.jacobian();
    const SeriesMatrix S = schur_complement(J, piv.rows, piv.cols, o);
    double ref = 0.0;
    for (const auto& e : J.entries) ref = std::max(ref, e.max_abs_coefficient());
    std::vector<TruncatedSeries> out;
    for (auto i : piv.rows) out.push_back(truncate(G.equations[i], o));
    for (const auto& e : S.entries)
        if (!is_zero(e, ref)) out.push_back(e);
    return G.with_equations(std::move(out));
}

// ---------------------------------------------------------------------------
// Deflation sequence

enum class StepKind { selection, kerneling, extraction };

inline const char* to_string(StepKind k) {
    switch (k) {
        case StepKind::selection: return "selection";
        case StepKind::kerneling: return "kerneling";
        case StepKind::extraction: return "extraction";
    }
    return "?";
}

struct DeflationStep {
    AnalyticSystem input;      // what selection was applied to
    Selection selection;
    AnalyticSystem system;     // F_k
    SmallnessGate gate;
    std::optional<RankReport> rank;
    Pivots pivots;
    StepKind kind = StepKind::selection;

    bool operator==(const DeflationStep&) const = default;
};

enum class TraceStatus { deflated, gate_failed };

inline const char* to_string(TraceStatus s) { return s == TraceStatus::deflated ? "deflated" : "gate_failed"; }

struct DeflationTrace {
    Point x0;
    NormBackend backend = NormBackend::complex_exact;
    GateNorm gate_norm = GateNorm::euclidean;
    std::vector<DeflationStep> steps;
    int thickness = 0;
    std::optional<AnalyticSystem> deflated;
    std::vector<std::size_t> deflated_rows;
    TraceStatus status = TraceStatus::gate_failed;

    bool operator==(const DeflationTrace&) const = default;
};

namespace detail {

inline Eigen::MatrixXcd rows_of(const Eigen::MatrixXcd& m, const std::vector<std::size_t>& rows) {
    Eigen::MatrixXcd out(rows.size(), m.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) out.row(k) = m.row(rows[k]);
    return out;
}

}  // namespace detail

// Row indices of a square regular subsystem, scanned greedily in order.
inline std::vector<std::size_t> extract_rows(const AnalyticSystem& F, const Point& x0) {
    const std::size_t n = F.dim();
    const Eigen::MatrixXcd J = F.jacobian_at(x0);
    std::vector<std::size_t> acc;
    for (std::size_t i = 0; i < F.size() && acc.size() < n; ++i) {
        acc.push_back(i);
        if (numerical_rank(detail::rows_of(J, acc)).rank != static_cast<int>(acc.size())) acc.pop_back();
    }
    if (acc.size() == n) return acc;
    try {
        auto rows = pivot_selection(J, static_cast<int>(n)).rows;
        std::sort(rows.begin(), rows.end());
        if (numerical_rank(detail::rows_of(J, rows)).rank == static_cast<int>(n)) return rows;
    } catch (const RankDeficiencyError&) {
    } catch (const StructuralError&) {
    }
    throw ExtractionError("no square subsystem of full numerical rank");
}

inline AnalyticSystem extract_square(const AnalyticSystem& F, const Point& x0) {
    std::vector<TruncatedSeries> eqs;
    for (auto i : extract_rows(F, x0)) eqs.push_back(F.equations[i]);
    return F.with_equations(std::move(eqs));
}

inline int default_max_iters(int n, int order) { return std::max(1, n * order * order); }

namespace detail {

inline DeflationTrace run_deflation(const AnalyticSystem& f, const Point& x0, NormBackend backend, int max_iters,
                                    std::optional<int> schedule, GateNorm gate_norm) {
    nu(x0, f.ball);
    const AnalyticSystem f0 = f.center() == x0 ? f : recenter(f, x0, f.order());
    const int n = static_cast<int>(f0.dim());
    DeflationTrace tr;
    tr.x0 = x0;
    tr.backend = backend;
    tr.gate_norm = gate_norm;

    auto selected = [&](const AnalyticSystem& in, int k) {
        DeflationStep st;
        st.input = in;
        st.selection = select(in, x0, backend);
        if (st.selection.equations.empty())
            throw RankDeficiencyError("selection produced an empty system");
        std::vector<TruncatedSeries> eqs = st.selection.equations;
        if (schedule)
            for (auto& e : eqs) e = truncate(e, std::max(0, *schedule - k));
        st.system = in.with_equations(std::move(eqs));
        return st;
    };

    DeflationStep st = selected(f0, 0);
    for (int k = 0;; ++k) {
        const AnalyticSystem& F = st.system;
        st.gate = is_small(F, x0, backend, gate_norm);
        if (!st.gate.passed) {
            st.kind = StepKind::selection;
            tr.steps.push_back(std::move(st));
            tr.status = TraceStatus::gate_failed;
            return tr;
        }
        st.rank = numerical_rank(F.jacobian_at(x0));
        if (st.rank->rank == 0) throw RankDeficiencyError("numerical rank is zero after selection");
        if (st.rank->rank == n) {
            st.kind = StepKind::extraction;
            tr.deflated_rows = extract_rows(F, x0);
            std::vector<TruncatedSeries> eqs;
            for (auto i : tr.deflated_rows) eqs.push_back(F.equations[i]);
            tr.deflated = F.with_equations(std::move(eqs));
            tr.steps.push_back(std::move(st));
            tr.status = TraceStatus::deflated;
            return tr;
        }
        if (k >= max_iters) throw NonTerminationError("deflation did not reach full rank within max_iters");
        st.kind = StepKind::kerneling;
        st.pivots = pivot_selection(F.jacobian_at(x0), st.rank->rank);
        const AnalyticSystem K = kernel_op(F, x0, *st.rank, st.pivots);
        tr.steps.push_back(std::move(st));
        ++tr.thickness;
        st = selected(K, k + 1);
    }
}

}  // namespace detail

inline DeflationTrace deflation_sequence(const AnalyticSystem& f, const Point& x0, NormBackend backend,
                                         std::optional<int> max_iters = std::nullopt,
                                         GateNorm gate_norm = GateNorm::euclidean) {
    const int mi = max_iters.value_or(default_max_iters(static_cast<int>(f.dim()), f.order()));
    return detail::run_deflation(f, x0, backend, mi, std::nullopt, gate_norm);
}

// T_0 = Tr_p(S(f)), T_{k+1} = Tr_{p-k-1}(S(K(T_k))) with p = ell + 1.
inline DeflationTrace truncated_deflation(const AnalyticSystem& f, const Point& x0, int ell, NormBackend backend,
                                          std::optional<int> max_iters = std::nullopt,
                                          GateNorm gate_norm = GateNorm::euclidean) {
    if (ell < 0) throw DomainError("thickness must be nonnegative");
    const int mi = max_iters.value_or(default_max_iters(static_cast<int>(f.dim()), f.order()));
    return detail::run_deflation(f, x0, backend, mi, ell + 1, gate_norm);
}

// ---------------------------------------------------------------------------
// Singular Newton

struct NewtonOptions {
    int order = 3;                   // truncation order of the rebuilt system
    std::optional<BallContext> fixed_ball;  // otherwise B(x_k, R) around each iterate
    std::optional<int> max_iters;
    std::optional<int> ell;          // use truncated deflation with this thickness
    GateNorm gate_norm = GateNorm::euclidean;
};

struct NewtonStep {
    Point next;
    DeflationTrace trace;
};

inline AnalyticSystem rebuild_at(const AnalyticSystem& source, const Point& x, const NewtonOptions& opt) {
    BallContext ball = opt.fixed_ball.value_or(BallContext{x, source.ball.radius});
    std::vector<TruncatedSeries> eqs;
    for (const auto& e : source.equations) eqs.push_back(recenter(e, x, std::min(opt.order, e.order())));
    return AnalyticSystem(std::move(eqs), std::move(ball));
}

inline NewtonStep singular_newton_step(const AnalyticSystem& source, const Point& x0, NormBackend backend,
                                       const NewtonOptions& opt = {}) {
    const AnalyticSystem g = rebuild_at(source, x0, opt);
    NewtonStep out;
    out.trace = opt.ell ? truncated_deflation(g, x0, *opt.ell, backend, opt.max_iters, opt.gate_norm)
                        : deflation_sequence(g, x0, backend, opt.max_iters, opt.gate_norm);
    if (!out.trace.deflated) {
        out.next = x0;
        return out;
    }
    const AnalyticSystem& d = *out.trace.deflated;
    const Eigen::VectorXcd step = solve_square(d.jacobian_at(x0), d.evaluate(x0));
    out.next = to_point(to_vector(x0) - step);
    return out;
}

enum class NewtonStop { steps, stagnation, gate_failed };

inline const char* to_string(NewtonStop s) {
    switch (s) {
        case NewtonStop::steps: return "steps";
        case NewtonStop::stagnation: return "stagnation";
        case NewtonStop::gate_failed: return "gate_failed";
    }
    return "?";
}

struct NewtonRun {
    std::vector<Point> iterates;
    NewtonStop stop = NewtonStop::steps;

    bool operator==(const NewtonRun&) const = default;
};

inline NewtonRun newton_iterate(const AnalyticSystem& source, const Point& x0, int steps, NormBackend backend,
                                const NewtonOptions& opt = {}) {
    if (steps < 1) throw DomainError("steps must be at least 1");
    NewtonRun run;
    run.iterates.push_back(x0);
    for (int k = 0; k < steps; ++k) {
        const Point& x = run.iterates.back();
        NewtonStep st = singular_newton_step(source, x, backend, opt);
        if (!st.trace.deflated) {
            run.stop = NewtonStop::gate_failed;
            return run;
        }
        const double move = point_distance(st.next, x);
        const double xn = point_norm(x);
        run.iterates.push_back(std::move(st.next));
        if (move <= 1e-15 * (1.0 + xn)) {
            run.stop = NewtonStop::stagnation;
            return run;
        }
    }
    return run;
}

}  // namespace deflate
