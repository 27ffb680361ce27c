#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "deflate/certificates.hpp"
#include "deflate/deflation.hpp"
#include "oracles.hpp"

namespace th {

using deflate::AnalyticSystem;
using deflate::BallContext;
using deflate::Complex;
using deflate::CoefficientMap;
using deflate::Point;
using deflate::TruncatedSeries;

inline std::string fixture(const std::string& name) { return std::string(DEFLATE_FIXTURE_DIR) + "/" + name; }

inline Point origin(std::size_t n) { return Point(n, Complex{}); }

inline TruncatedSeries series(const oracle::Poly& p, std::size_t n, int order, Point center = {}) {
    if (center.empty()) center = origin(n);
    CoefficientMap m;
    for (const auto& t : p) m[t.exp] += t.coef;
    const TruncatedSeries f(origin(n), order, std::move(m));
    return center == origin(n) ? f : deflate::recenter(f, center, order);
}

// Polynomial system recentered at x and truncated, ball centered at omega.
inline AnalyticSystem system(const oracle::PolySystem& f, std::size_t n, const Point& x, int order,
                             const BallContext& ball) {
    std::vector<TruncatedSeries> eqs;
    for (const auto& p : f) {
        CoefficientMap m;
        for (const auto& t : p) m[t.exp] += t.coef;
        eqs.push_back(deflate::recenter(TruncatedSeries(origin(n), 6, std::move(m)), x, order));
    }
    return AnalyticSystem(std::move(eqs), ball);
}

inline const Point x0_gy2{Complex(-0.0005, 0.0), Complex(0.0006, 0.0)};

inline AnalyticSystem gy2_at(const Point& x, int order = 3) {
    return system(oracle::gy2(), 2, x, order, BallContext{origin(2), 1.0});
}

inline AnalyticSystem gy2_source() { return system(oracle::gy2(), 2, origin(2), 6, BallContext{origin(2), 1.0}); }

inline bool rel(double a, double b, double tol) { return std::abs(a - b) <= tol * std::abs(b); }
inline bool rel(Complex a, Complex b, double tol) { return std::abs(a - b) <= tol * std::abs(b); }

// Coefficient-wise comparison at relative tolerance against the largest coefficient of b.
inline bool coeffs_close(const TruncatedSeries& a, const TruncatedSeries& b, double tol) {
    const double scale = std::max(1e-300, b.max_abs_coefficient());
    for (const auto& [e, c] : a.coefficients())
        if (std::abs(c - b.coefficient(e)) > tol * scale) return false;
    for (const auto& [e, c] : b.coefficients())
        if (std::abs(c - a.coefficient(e)) > tol * scale) return false;
    return true;
}

// Linear series c + a x + b y around the origin.
inline TruncatedSeries lin(Complex c, Complex a, Complex b, const Point& center = origin(2), int order = 1) {
    CoefficientMap m;
    m[{0, 0}] = c;
    m[{1, 0}] = a;
    m[{0, 1}] = b;
    return TruncatedSeries(center, order, std::move(m));
}

// Compares linear parts (constant, x, y) at tolerance relative to each coefficient, absolute floor abs_floor.
inline bool linear_close(const TruncatedSeries& f, Complex c, Complex a, Complex b, double tol, double abs_floor = 0.0) {
    auto ok = [&](Complex got, Complex want) { return std::abs(got - want) <= std::max(tol * std::abs(want), abs_floor); };
    return ok(f.coefficient({0, 0}), c) && ok(f.coefficient({1, 0}), a) && ok(f.coefficient({0, 1}), b);
}

}  // namespace th
