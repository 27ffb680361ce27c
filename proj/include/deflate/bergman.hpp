#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "errors.hpp"
#include "system.hpp"

namespace deflate {

enum class NormBackend { complex_exact, appendix_slice };

inline const char* to_string(NormBackend b) {
    return b == NormBackend::complex_exact ? "complex" : "appendix";
}

inline NormBackend parse_backend(const std::string& s) {
    if (s == "complex" || s == "complex_exact") return NormBackend::complex_exact;
    if (s == "appendix" || s == "appendix_slice") return NormBackend::appendix_slice;
    throw ParseError("norm_backend: expected complex or appendix, got '" + s + "'");
}

inline double nu(const Point& x, const BallContext& ball) {
    const double v = point_distance(x, ball.omega) / ball.radius;
    if (!(v < 1.0)) throw DomainError("point is not inside the open ball");
    return v;
}

namespace detail {

inline double factorial(int k) { return std::tgamma(k + 1.0); }

// Squared norm of (z - omega)^a for the normalized measure on the complex ball.
inline double monomial_norm2(const ExponentVector& a, double radius) {
    const int n = static_cast<int>(a.size());
    const int d = total_degree(a);
    double afact = 1.0;
    for (int k : a) afact *= factorial(k);
    return factorial(n) * afact / factorial(n + d) * std::pow(radius, 2.0 * d);
}

// Integral of x^g over the real ball of radius R centered at the origin.
inline double real_ball_moment(const ExponentVector& g, double radius) {
    for (int k : g)
        if (k % 2 != 0) return 0.0;
    const int n = static_cast<int>(g.size());
    const int d = total_degree(g);
    double lg = std::log(2.0) - std::lgamma((d + n) / 2.0);
    for (int k : g) lg += std::lgamma((k + 1) / 2.0);
    return std::exp(lg) * std::pow(radius, d + n) / (d + n);
}

inline double equation_norm2(const TruncatedSeries& f, const BallContext& ball, NormBackend backend) {
    const TruncatedSeries g = recenter(f, ball.omega, f.order());
    const double R = ball.radius;
    const int n = static_cast<int>(g.dim());
    double acc = 0.0;
    if (backend == NormBackend::complex_exact) {
        for (const auto& [e, c] : g.coefficients()) acc += std::norm(c) * monomial_norm2(e, R);
        return acc;
    }
    ExponentVector sum(g.dim());
    for (const auto& [ea, ca] : g.coefficients())
        for (const auto& [eb, cb] : g.coefficients()) {
            for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = ea[i] + eb[i];
            acc += (ca * std::conj(cb)).real() * real_ball_moment(sum, R);
        }
    return factorial(n) / std::pow(std::numbers::pi, n) / std::pow(R, 2 * n) * acc;
}

}  // namespace detail

inline double norm_a2(const TruncatedSeries& f, const BallContext& ball, NormBackend backend) {
    return std::sqrt(std::max(0.0, detail::equation_norm2(f, ball, backend)));
}

inline double norm_a2(const AnalyticSystem& F, NormBackend backend) {
    double acc = 0.0;
    for (const auto& f : F.equations) acc += detail::equation_norm2(f, F.ball, backend);
    return std::sqrt(std::max(0.0, acc));
}

inline double kappa(const Point& x, const BallContext& ball) {
    const double v = nu(x, ball);
    const double n = static_cast<double>(ball.dim());
    return std::max(1.0, (n + 1.0) / (ball.radius * (1.0 - v * v)));
}

inline double lambda_bound(const AnalyticSystem& F, const Point& x, NormBackend backend) {
    const double v = nu(x, F.ball);
    const double n = static_cast<double>(F.dim());
    return norm_a2(F, backend) / std::pow(1.0 - v * v, (n + 1.0) / 2.0);
}

inline double derivative_bound(const AnalyticSystem& F, const Point& x, int k, NormBackend backend) {
    if (k < 0) throw DomainError("derivative order must be nonnegative");
    const double v = nu(x, F.ball);
    const double n = static_cast<double>(F.dim());
    double prod = 1.0;
    for (int i = 1; i <= k; ++i) prod *= n + i;
    return norm_a2(F, backend) * prod /
           (std::pow(F.ball.radius, k) * std::pow(1.0 - v * v, (n + 1.0) / 2.0 + k));
}

// sup over k >= 2 of (lambda kappa^k)^(1/(k-1)).
inline double gamma_bar_bound(const AnalyticSystem& F, const Point& zeta, NormBackend backend) {
    const double k = kappa(zeta, F.ball);
    const double l = lambda_bound(F, zeta, backend);
    return k * std::max(1.0, l * k);
}

}  // namespace deflate
