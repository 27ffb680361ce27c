#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "series.hpp"

namespace deflate {

struct BallContext {
    Point omega;
    double radius = 1.0;

    std::size_t dim() const { return omega.size(); }
    bool operator==(const BallContext&) const = default;
};

inline double point_norm(const Point& x) {
    double s = 0.0;
    for (const auto& v : x) s += std::norm(v);
    return std::sqrt(s);
}

inline double point_distance(const Point& a, const Point& b) {
    if (a.size() != b.size()) throw StructuralError("point dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
    return std::sqrt(s);
}

struct AnalyticSystem {
    std::vector<TruncatedSeries> equations;
    BallContext ball;

    AnalyticSystem() = default;
    AnalyticSystem(std::vector<TruncatedSeries> eqs, BallContext b)
        : equations(std::move(eqs)), ball(std::move(b)) {
        if (!(ball.radius > 0.0)) throw StructuralError("ball radius must be positive");
        for (std::size_t k = 0; k < equations.size(); ++k) {
            if (equations[k].dim() != ball.dim()) throw StructuralError("equation dimension differs from ball dimension");
            if (k > 0 && equations[k].center() != equations[0].center())
                throw StructuralError("equations do not share a center");
        }
        if (!equations.empty() && point_distance(center(), ball.omega) >= ball.radius)
            throw DomainError("series center lies outside the ball");
    }

    std::size_t dim() const { return ball.dim(); }
    std::size_t size() const { return equations.size(); }
    const Point& center() const { return equations.front().center(); }

    int order() const {
        int o = 0;
        for (std::size_t k = 0; k < equations.size(); ++k)
            o = k == 0 ? equations[k].order() : std::min(o, equations[k].order());
        return o;
    }

    Eigen::VectorXcd evaluate(const Point& x) const {
        Eigen::VectorXcd v(equations.size());
        for (std::size_t k = 0; k < equations.size(); ++k) v(k) = deflate::evaluate(equations[k], x);
        return v;
    }

    SeriesMatrix jacobian() const { return deflate::jacobian(equations); }
    Eigen::MatrixXcd jacobian_at(const Point& x) const { return jacobian().evaluate(x); }

    AnalyticSystem with_equations(std::vector<TruncatedSeries> eqs) const {
        return AnalyticSystem(std::move(eqs), ball);
    }

    bool operator==(const AnalyticSystem&) const = default;
};

inline AnalyticSystem truncate(const AnalyticSystem& f, int order) {
    std::vector<TruncatedSeries> e;
    for (const auto& q : f.equations) e.push_back(truncate(q, order));
    return f.with_equations(std::move(e));
}

inline AnalyticSystem recenter(const AnalyticSystem& f, const Point& x, int order) {
    std::vector<TruncatedSeries> e;
    for (const auto& q : f.equations) e.push_back(recenter(q, x, order));
    return f.with_equations(std::move(e));
}

}  // namespace deflate
