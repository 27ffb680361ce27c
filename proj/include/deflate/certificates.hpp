#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bergman.hpp"
#include "deflation.hpp"
#include "errors.hpp"
#include "linalg.hpp"
#include "rank.hpp"
#include "system.hpp"

namespace deflate {

struct PointQuantities {
    double beta = 0.0;
    double lambda = 0.0;
    double kappa = 1.0;
    double mu = 0.0;
    double gamma = 1.0;
    double alpha = 0.0;
    double nu = 0.0;

    bool operator==(const PointQuantities&) const = default;
};

struct CertificateReport {
    std::optional<PointQuantities> quantities;
    std::optional<double> alpha_bound;
    bool alpha_ok = false;
    std::optional<double> theta_low;
    std::optional<double> theta_high;
    bool ball_contained = false;
    std::optional<double> gamma_radius;
    int thickness = 0;
    std::vector<std::string> notes;

    bool operator==(const CertificateReport&) const = default;
};

struct DeflatedGammaBound {
    double gamma0 = 0.0;
    int ell = 0;
    double gamma_ell = 0.0;
    double radius = 0.0;
    int p = 1;
    int p0 = 1;
    double mu_max = 0.0;
    std::vector<double> mu_steps;
    double lambda0 = 0.0;
    double kappa = 1.0;

    bool operator==(const DeflatedGammaBound&) const = default;
};

namespace detail {

inline Eigen::MatrixXcd checked_inverse(const Eigen::MatrixXcd& j, const char* what) {
    if (j.rows() != j.cols() || j.rows() == 0) throw CertificateUnavailableError(std::string(what) + " is not square");
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(j);
    const auto& s = svd.singularValues();
    if (s(0) == 0.0 || s(s.size() - 1) <= 1e-12 * s(0))
        throw CertificateUnavailableError(std::string(what) + " is singular");
    return j.inverse();
}

}  // namespace detail

inline PointQuantities point_quantities(const AnalyticSystem& F, const Point& x, NormBackend backend) {
    if (F.size() != F.dim()) throw CertificateUnavailableError("system is not square");
    const Eigen::MatrixXcd inv = detail::checked_inverse(F.jacobian_at(x), "Jacobian");
    PointQuantities q;
    q.nu = nu(x, F.ball);
    q.beta = (inv * F.evaluate(x)).norm();
    q.lambda = lambda_bound(F, x, backend);
    q.kappa = kappa(x, F.ball);
    q.mu = spectral_norm(inv);
    q.gamma = std::max(1.0, q.lambda * q.kappa * q.mu);
    q.alpha = q.beta * q.kappa;
    return q;
}

inline double alpha_bound(double gamma) {
    const double t = 2.0 * gamma + 1.0;
    return t - std::sqrt(t * t - 1.0);
}

inline double gamma_radius(const PointQuantities& q) {
    const double g = q.gamma;
    return (2.0 * g + 1.0 - std::sqrt(4.0 * g * g + 3.0 * g)) / (q.kappa * (g + 1.0));
}

inline double gamma_radius(const AnalyticSystem& F, const Point& zeta, NormBackend backend) {
    return gamma_radius(point_quantities(F, zeta, backend));
}

inline CertificateReport alpha_certificate(const AnalyticSystem& F, const Point& x0, NormBackend backend) {
    CertificateReport rep;
    PointQuantities q;
    try {
        q = point_quantities(F, x0, backend);
    } catch (const CertificateUnavailableError& e) {
        rep.notes.push_back(std::string("quantities unavailable: ") + e.what());
        return rep;
    }
    rep.quantities = q;
    rep.alpha_bound = alpha_bound(q.gamma);
    rep.alpha_ok = q.alpha < *rep.alpha_bound;
    if (!rep.alpha_ok) {
        rep.notes.push_back("alpha test failed");
        return rep;
    }
    const double a = q.alpha, g = q.gamma, k = q.kappa;
    rep.theta_low = (a + 1.0 - std::sqrt((a + 1.0) * (a + 1.0) - 4.0 * a * (g + 1.0))) / (2.0 * k * (g + 1.0));
    rep.theta_high = 1.0 / (k * (g + 1.0));
    rep.ball_contained = point_distance(x0, F.ball.omega) + *rep.theta_low <= F.ball.radius;
    if (!rep.ball_contained) rep.notes.push_back("B(x0, theta) is not inside the ball");
    return rep;
}

// Runs the deflation sequence, checks its hypotheses, then certifies the deflated system.
inline CertificateReport singular_alpha_certificate(const AnalyticSystem& f, const Point& x0, NormBackend backend,
                                                    std::optional<int> max_iters = std::nullopt,
                                                    GateNorm gate_norm = GateNorm::euclidean) {
    CertificateReport rep;
    DeflationTrace tr;
    try {
        tr = deflation_sequence(f, x0, backend, max_iters, gate_norm);
    } catch (const Error& e) {
        rep.notes.push_back(std::string("deflation failed: ") + e.what());
        return rep;
    }
    rep.thickness = tr.thickness;
    const int n = static_cast<int>(f.dim());
    for (std::size_t k = 0; k < tr.steps.size(); ++k) {
        const auto& st = tr.steps[k];
        if (!st.gate.passed) {
            rep.notes.push_back("hypothesis 1.1 failed at k=" + std::to_string(k));
            return rep;
        }
        if (k + 1 < tr.steps.size() && !(st.rank && st.rank->rank < n)) {
            rep.notes.push_back("hypothesis 1.2 failed at k=" + std::to_string(k));
            return rep;
        }
    }
    CertificateReport a = alpha_certificate(*tr.deflated, x0, backend);
    a.thickness = rep.thickness;
    if (!a.alpha_ok) a.notes.push_back("hypothesis 2 failed");
    return a;
}

inline DeflatedGammaBound deflated_gamma_bound(const DeflationTrace& trace, const Point& zeta, NormBackend backend) {
    if (!trace.deflated || trace.steps.empty())
        throw CertificateUnavailableError("trace has no deflated system");
    const AnalyticSystem& f = trace.steps.front().input;
    const int n = static_cast<int>(f.dim());
    DeflatedGammaBound out;
    out.ell = trace.thickness;
    out.p0 = std::max(1, trace.steps.front().selection.max_valuation);
    out.p = out.p0;
    for (std::size_t k = 1; k < trace.steps.size(); ++k)
        out.p = std::max(out.p, trace.steps[k].selection.max_valuation);

    for (const auto& st : trace.steps) {
        if (st.kind != StepKind::kerneling) continue;
        const Eigen::MatrixXcd J = st.system.jacobian_at(zeta);
        Eigen::MatrixXcd A(st.pivots.rows.size(), st.pivots.cols.size());
        for (std::size_t i = 0; i < st.pivots.rows.size(); ++i)
            for (std::size_t j = 0; j < st.pivots.cols.size(); ++j) A(i, j) = J(st.pivots.rows[i], st.pivots.cols[j]);
        out.mu_steps.push_back(spectral_norm(detail::checked_inverse(A, "pivot block")));
    }
    out.mu_steps.push_back(spectral_norm(detail::checked_inverse(trace.deflated->jacobian_at(zeta), "deflated Jacobian")));
    out.mu_max = *std::max_element(out.mu_steps.begin(), out.mu_steps.end());

    out.lambda0 = lambda_bound(f, zeta, backend);
    out.kappa = kappa(zeta, f.ball);
    const double v = nu(zeta, f.ball);
    const double c = std::pow(1.0 - v * v, (n + 1.0) / 2.0);
    const double p0 = out.p0;
    out.gamma0 = 2.0 * p0 / (p0 + 1.0) * out.lambda0 * std::pow(out.kappa, p0) * out.mu_max;
    out.gamma_ell = out.ell + out.gamma0;
    const double g = out.gamma_ell;
    const double u = std::min(1.0 / (out.p + 1.0),
                              c / (6.0 * g * (4.0 * std::pow(out.kappa, out.p) * (1.0 + g) + c)));
    out.radius = u / out.kappa;
    return out;
}

// Radius around zeta on which the epsilon-rank of DF equals the rank of DF(zeta).
inline double rank_stability_radius(const AnalyticSystem& F, const Point& zeta, double epsilon, NormBackend backend) {
    const auto sigma = singular_values(F.jacobian_at(zeta));
    double sr = std::numeric_limits<double>::infinity();
    if (!sigma.empty())
        for (double s : sigma)
            if (s > 1e-12 * sigma.front()) sr = s;
    const double limit = std::min(2.0 - std::sqrt(2.0), sr / 2.0);
    if (!(epsilon >= 0.0) || !(epsilon < limit))
        throw DomainError("epsilon must lie in [0, min(2 - sqrt 2, sigma_r / 2))");
    return epsilon / (2.0 * gamma_bar_bound(F, zeta, backend));
}

}  // namespace deflate
