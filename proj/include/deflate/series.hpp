#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"

namespace deflate {

using Complex = std::complex<double>;
using Point = std::vector<Complex>;
using ExponentVector = std::vector<int>;

inline int total_degree(const ExponentVector& e) {
    return std::accumulate(e.begin(), e.end(), 0);
}

// Degree ascending, then lexicographically descending so x comes before y.
struct GradedLexLess {
    bool operator()(const ExponentVector& a, const ExponentVector& b) const {
        const int da = total_degree(a), db = total_degree(b);
        if (da != db) return da < db;
        return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
    }
};

using CoefficientMap = std::map<ExponentVector, Complex, GradedLexLess>;

namespace detail {

inline Complex ipow(Complex base, int e) {
    Complex r{1.0, 0.0};
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

inline double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace detail

// Taylor polynomial sum_a c_a (z - center)^a with all |a| <= order.
class TruncatedSeries {
public:
    TruncatedSeries() = default;

    TruncatedSeries(Point center, int order, CoefficientMap coefficients = {})
        : center_(std::move(center)), order_(order) {
        if (order_ < 0) throw StructuralError("series order must be nonnegative");
        for (auto& [e, c] : coefficients) {
            if (e.size() != center_.size())
                throw StructuralError("exponent length does not match dimension");
            for (int k : e)
                if (k < 0) throw StructuralError("negative exponent");
            if (total_degree(e) > order_ || c == Complex{}) continue;
            coefficients_.emplace(e, c);
        }
    }

    static TruncatedSeries constant(const Point& center, int order, Complex value) {
        CoefficientMap m;
        m[ExponentVector(center.size(), 0)] = value;
        return TruncatedSeries(center, order, std::move(m));
    }

    // The affine coordinate z_var, expressed around center.
    static TruncatedSeries coordinate(const Point& center, int order, std::size_t var) {
        if (var >= center.size()) throw StructuralError("coordinate index out of range");
        CoefficientMap m;
        m[ExponentVector(center.size(), 0)] = center[var];
        ExponentVector e(center.size(), 0);
        e[var] = 1;
        m[e] = 1.0;
        return TruncatedSeries(center, order, std::move(m));
    }

    std::size_t dim() const { return center_.size(); }
    const Point& center() const { return center_; }
    int order() const { return order_; }
    const CoefficientMap& coefficients() const { return coefficients_; }

    Complex coefficient(const ExponentVector& e) const {
        auto it = coefficients_.find(e);
        return it == coefficients_.end() ? Complex{} : it->second;
    }

    Complex constant_term() const { return coefficient(ExponentVector(dim(), 0)); }

    double max_abs_coefficient() const {
        double m = 0.0;
        for (const auto& [e, c] : coefficients_) m = std::max(m, std::abs(c));
        return m;
    }

    int degree() const {
        int d = 0;
        for (const auto& [e, c] : coefficients_) d = std::max(d, total_degree(e));
        return d;
    }

    bool operator==(const TruncatedSeries&) const = default;

private:
    Point center_;
    int order_ = 0;
    CoefficientMap coefficients_;
};

namespace detail {

inline void require_compatible(const TruncatedSeries& a, const TruncatedSeries& b) {
    if (a.dim() != b.dim()) throw StructuralError("series dimension mismatch");
    if (a.center() != b.center()) throw StructuralError("series center mismatch");
}

}  // namespace detail

inline TruncatedSeries truncate(const TruncatedSeries& f, int order) {
    const int o = std::min(order, f.order());
    return TruncatedSeries(f.center(), o, f.coefficients());
}

inline TruncatedSeries add(const TruncatedSeries& a, const TruncatedSeries& b) {
    detail::require_compatible(a, b);
    CoefficientMap m = a.coefficients();
    for (const auto& [e, c] : b.coefficients()) m[e] += c;
    return TruncatedSeries(a.center(), std::min(a.order(), b.order()), std::move(m));
}

inline TruncatedSeries scale(const TruncatedSeries& f, Complex s) {
    CoefficientMap m;
    for (const auto& [e, c] : f.coefficients()) m[e] = s * c;
    return TruncatedSeries(f.center(), f.order(), std::move(m));
}

inline TruncatedSeries negate(const TruncatedSeries& f) { return scale(f, -1.0); }

inline TruncatedSeries subtract(const TruncatedSeries& a, const TruncatedSeries& b) {
    return add(a, negate(b));
}

inline TruncatedSeries multiply(const TruncatedSeries& a, const TruncatedSeries& b) {
    detail::require_compatible(a, b);
    const int order = std::min(a.order(), b.order());
    CoefficientMap m;
    ExponentVector e(a.dim());
    for (const auto& [ea, ca] : a.coefficients()) {
        const int da = total_degree(ea);
        for (const auto& [eb, cb] : b.coefficients()) {
            if (da + total_degree(eb) > order) continue;
            for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
            m[e] += ca * cb;
        }
    }
    return TruncatedSeries(a.center(), order, std::move(m));
}

inline TruncatedSeries operator+(const TruncatedSeries& a, const TruncatedSeries& b) { return add(a, b); }
inline TruncatedSeries operator-(const TruncatedSeries& a, const TruncatedSeries& b) { return subtract(a, b); }
inline TruncatedSeries operator*(const TruncatedSeries& a, const TruncatedSeries& b) { return multiply(a, b); }
inline TruncatedSeries operator-(const TruncatedSeries& a) { return negate(a); }

inline TruncatedSeries derivative(const TruncatedSeries& f, std::size_t var) {
    if (var >= f.dim()) throw StructuralError("derivative variable out of range");
    CoefficientMap m;
    for (const auto& [e, c] : f.coefficients()) {
        if (e[var] == 0) continue;
        ExponentVector d = e;
        d[var] -= 1;
        m[d] += c * static_cast<double>(e[var]);
    }
    return TruncatedSeries(f.center(), std::max(0, f.order() - 1), std::move(m));
}

inline Complex evaluate(const TruncatedSeries& f, const Point& x) {
    if (x.size() != f.dim()) throw StructuralError("evaluation point has wrong dimension");
    Point d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - f.center()[i];
    Complex sum{};
    for (const auto& [e, c] : f.coefficients()) {
        Complex term = c;
        for (std::size_t i = 0; i < e.size(); ++i) term *= detail::ipow(d[i], e[i]);
        sum += term;
    }
    return sum;
}

// Exact re-expansion of the stored polynomial around a new center.
inline TruncatedSeries recenter(const TruncatedSeries& f, const Point& new_center, int new_order) {
    if (new_center.size() != f.dim()) throw StructuralError("recenter point has wrong dimension");
    if (new_order > f.order()) throw StructuralError("recenter order exceeds series order");
    const std::size_t n = f.dim();
    Point d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = new_center[i] - f.center()[i];

    CoefficientMap out;
    ExponentVector cur(n, 0);
    for (const auto& [e, c] : f.coefficients()) {
        // Walk the product over variables of sum_j C(e_i, j) d_i^(e_i - j) t_i^j.
        auto rec = [&](auto&& self, std::size_t i, Complex acc, int deg) -> void {
            if (i == n) {
                out[cur] += acc;
                return;
            }
            for (int j = 0; j <= e[i] && deg + j <= new_order; ++j) {
                cur[i] = j;
                self(self, i + 1, acc * detail::binomial(e[i], j) * detail::ipow(d[i], e[i] - j), deg + j);
            }
            cur[i] = 0;
        };
        rec(rec, 0, c, 0);
    }
    return TruncatedSeries(new_center, new_order, std::move(out));
}

inline bool is_zero(const TruncatedSeries& f, double reference_scale = 0.0) {
    return f.max_abs_coefficient() <= 1e-12 * (1.0 + reference_scale);
}

inline bool approx_equal(const TruncatedSeries& a, const TruncatedSeries& b, double rel = 1e-12) {
    if (a.dim() != b.dim() || a.center() != b.center()) return false;
    const double scale = std::max(a.max_abs_coefficient(), b.max_abs_coefficient());
    return (a - b).max_abs_coefficient() <= rel * (1.0 + scale);
}

// 1/f by a truncated Neumann series in h = f - f(center).
inline TruncatedSeries reciprocal(const TruncatedSeries& f, int order) {
    const Complex a0 = f.constant_term();
    if (std::abs(a0) <= 1e-12 * (1.0 + f.max_abs_coefficient()))
        throw SingularPivotError("series has a vanishing constant term");
    const int o = std::min(order, f.order());
    const TruncatedSeries g = truncate(f, o);
    const TruncatedSeries q = scale(g - TruncatedSeries::constant(f.center(), o, a0), -1.0 / a0);
    TruncatedSeries term = TruncatedSeries::constant(f.center(), o, 1.0 / a0);
    TruncatedSeries sum = term;
    for (int k = 1; k <= o; ++k) {
        term = term * q;
        sum = sum + term;
    }
    return sum;
}

// Row-major matrix of series sharing one center.
struct SeriesMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<TruncatedSeries> entries;

    SeriesMatrix() = default;
    SeriesMatrix(std::size_t r, std::size_t c, std::vector<TruncatedSeries> e)
        : rows(r), cols(c), entries(std::move(e)) {
        if (entries.size() != rows * cols) throw StructuralError("series matrix entry count mismatch");
        for (std::size_t k = 1; k < entries.size(); ++k) detail::require_compatible(entries[0], entries[k]);
    }

    const TruncatedSeries& operator()(std::size_t i, std::size_t j) const { return entries[i * cols + j]; }

    Eigen::MatrixXcd evaluate(const Point& x) const {
        Eigen::MatrixXcd m(rows, cols);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) m(i, j) = deflate::evaluate((*this)(i, j), x);
        return m;
    }

    Eigen::MatrixXcd at_center() const {
        Eigen::MatrixXcd m(rows, cols);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) m(i, j) = (*this)(i, j).constant_term();
        return m;
    }

    bool operator==(const SeriesMatrix&) const = default;
};

inline SeriesMatrix jacobian(const std::vector<TruncatedSeries>& equations) {
    if (equations.empty()) return {};
    const std::size_t n = equations.front().dim();
    std::vector<TruncatedSeries> e;
    e.reserve(equations.size() * n);
    for (const auto& f : equations)
        for (std::size_t j = 0; j < n; ++j) e.push_back(derivative(f, j));
    return SeriesMatrix(equations.size(), n, std::move(e));
}

namespace detail {

inline SeriesMatrix submatrix(const SeriesMatrix& m, const std::vector<std::size_t>& r,
                              const std::vector<std::size_t>& c, int order) {
    std::vector<TruncatedSeries> e;
    for (auto i : r)
        for (auto j : c) e.push_back(truncate(m(i, j), order));
    return SeriesMatrix(r.size(), c.size(), std::move(e));
}

inline SeriesMatrix matmul(const SeriesMatrix& a, const SeriesMatrix& b) {
    std::vector<TruncatedSeries> e;
    e.reserve(a.rows * b.cols);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < b.cols; ++j) {
            TruncatedSeries s = a(i, 0) * b(0, j);
            for (std::size_t k = 1; k < a.cols; ++k) s = s + a(i, k) * b(k, j);
            e.push_back(std::move(s));
        }
    return SeriesMatrix(a.rows, b.cols, std::move(e));
}

inline SeriesMatrix constant_matrix(const Eigen::MatrixXcd& m, const Point& center, int order) {
    std::vector<TruncatedSeries> e;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) e.push_back(TruncatedSeries::constant(center, order, m(i, j)));
    return SeriesMatrix(m.rows(), m.cols(), std::move(e));
}

inline std::vector<std::size_t> complement(const std::vector<std::size_t>& idx, std::size_t n) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < n; ++k)
        if (std::find(idx.begin(), idx.end(), k) == idx.end()) out.push_back(k);
    return out;
}

}  // namespace detail

// D - C A^{-1} B, with A^{-1} = sum_{k<=order} (-A0^{-1} H)^k A0^{-1} and H = A - A0.
inline SeriesMatrix schur_complement(const SeriesMatrix& m, const std::vector<std::size_t>& row_idx,
                                     const std::vector<std::size_t>& col_idx, int order) {
    const std::size_t r = row_idx.size();
    if (r == 0 || r != col_idx.size()) throw StructuralError("pivot index lists must be nonempty and equal length");
    for (auto i : row_idx)
        if (i >= m.rows) throw StructuralError("pivot row out of range");
    for (auto j : col_idx)
        if (j >= m.cols) throw StructuralError("pivot column out of range");
    const auto rest_r = detail::complement(row_idx, m.rows);
    const auto rest_c = detail::complement(col_idx, m.cols);
    if (rest_r.empty() || rest_c.empty()) return SeriesMatrix(rest_r.size(), rest_c.size(), {});

    const Point& center = m.entries.front().center();
    const SeriesMatrix A = detail::submatrix(m, row_idx, col_idx, order);
    const SeriesMatrix B = detail::submatrix(m, row_idx, rest_c, order);
    const SeriesMatrix C = detail::submatrix(m, rest_r, col_idx, order);
    const SeriesMatrix D = detail::submatrix(m, rest_r, rest_c, order);
    const int o = A.entries.front().order();

    const Eigen::MatrixXcd A0 = A.at_center();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A0);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 1e-12 * sv(0) || sv(0) == 0.0)
        throw SingularPivotError("pivot block is singular at the center");
    const Eigen::MatrixXcd A0inv = A0.inverse();

    std::vector<TruncatedSeries> h;
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j)
            h.push_back(A(i, j) - TruncatedSeries::constant(center, o, A0(i, j)));
    const SeriesMatrix N = detail::matmul(detail::constant_matrix(-A0inv, center, o), SeriesMatrix(r, r, std::move(h)));

    SeriesMatrix term = detail::constant_matrix(A0inv, center, o);
    SeriesMatrix inv = term;
    for (int k = 1; k <= o; ++k) {
        term = detail::matmul(N, term);
        for (std::size_t q = 0; q < inv.entries.size(); ++q) inv.entries[q] = inv.entries[q] + term.entries[q];
    }

    const SeriesMatrix CAB = detail::matmul(detail::matmul(C, inv), B);
    std::vector<TruncatedSeries> e;
    for (std::size_t q = 0; q < D.entries.size(); ++q) e.push_back(D.entries[q] - CAB.entries[q]);
    return SeriesMatrix(D.rows, D.cols, std::move(e));
}

}  // namespace deflate
