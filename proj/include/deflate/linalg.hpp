#pragma once

#include <Eigen/Dense>

#include "errors.hpp"
#include "series.hpp"

namespace deflate {

inline Eigen::VectorXcd to_vector(const Point& p) {
    Eigen::VectorXcd v(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) v(i) = p[i];
    return v;
}

inline Point to_point(const Eigen::VectorXcd& v) { return Point(v.data(), v.data() + v.size()); }

inline double spectral_norm(const Eigen::MatrixXcd& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    return svd.singularValues()(0);
}

// Solves a square system, refusing numerically singular matrices.
inline Eigen::VectorXcd solve_square(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& b) {
    if (a.rows() != a.cols() || a.rows() != b.size()) throw LinearSolveError("linear system is not square");
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0 || s(s.size() - 1) <= 1e-12 * s(0))
        throw LinearSolveError("matrix is numerically singular");
    return a.fullPivLu().solve(b);
}

}  // namespace deflate
