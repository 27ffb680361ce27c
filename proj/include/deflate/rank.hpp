#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace deflate {

struct RankReport {
    std::vector<double> sigma;
    std::vector<double> s;
    std::vector<std::optional<double>> b;
    std::vector<std::optional<double>> g;
    std::vector<std::optional<double>> a;
    std::optional<int> m;
    int rank = 0;
    double epsilon = 0.0;
    bool full_rank = false;

    bool operator==(const RankReport&) const = default;
};

struct RankQuantities {
    std::vector<std::optional<double>> b, g, a;
};

// Nonincreasing singular values; wide matrices are transposed first.
inline std::vector<double> singular_values(const Eigen::MatrixXcd& m) {
    if (m.size() == 0) return {};
    const Eigen::MatrixXcd t = m.rows() < m.cols() ? Eigen::MatrixXcd(m.adjoint()) : m;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(t);
    const auto& v = svd.singularValues();
    return std::vector<double>(v.data(), v.data() + v.size());
}

inline std::vector<double> elementary_symmetric(const std::vector<double>& sigma) {
    std::vector<double> s(sigma.size() + 1, 0.0);
    s[0] = 1.0;
    for (std::size_t i = 0; i < sigma.size(); ++i)
        for (std::size_t k = i + 1; k >= 1; --k) s[k] += sigma[i] * s[k - 1];
    return s;
}

// Index k runs 1..n and is stored at position k-1.
inline RankQuantities rank_quantities(const std::vector<double>& s) {
    const int n = static_cast<int>(s.size()) - 1;
    RankQuantities q;
    for (int k = 1; k <= n; ++k) {
        const double den = s[n - k];
        if (den == 0.0) {
            q.b.emplace_back();
            q.g.emplace_back();
            q.a.emplace_back();
            continue;
        }
        const double b = s[n - k + 1] / den;
        const double g = k < n ? s[n - k - 1] / den : 1.0;
        q.b.emplace_back(b);
        q.g.emplace_back(g);
        q.a.emplace_back(b * g);
    }
    return q;
}

inline RankReport rank_from_singular_values(std::vector<double> sigma) {
    RankReport r;
    r.sigma = std::move(sigma);
    r.s = elementary_symmetric(r.sigma);
    auto q = rank_quantities(r.s);
    r.b = std::move(q.b);
    r.g = std::move(q.g);
    r.a = std::move(q.a);
    const int n = static_cast<int>(r.sigma.size());

    for (int k = 1; k <= n; ++k) {
        const auto& a = r.a[k - 1];
        if (a && *a < 1.0 / 9.0) {
            const double am = *a, gm = *r.g[k - 1];
            r.m = k;
            r.rank = n - k;
            const double t = 3.0 * am + 1.0;
            r.epsilon = (t - std::sqrt(std::max(0.0, t * t - 16.0 * am))) / (4.0 * gm);
            r.full_rank = false;
            return r;
        }
    }
    r.rank = n;
    r.full_rank = true;
    for (int k = 1; k <= n; ++k)
        if (r.s[n - k] != 0.0) {
            r.m = k;
            r.epsilon = 1.0 / (10.0 * *r.g[k - 1]);
            break;
        }
    return r;
}

inline RankReport numerical_rank(const Eigen::MatrixXcd& m) { return rank_from_singular_values(singular_values(m)); }

}  // namespace deflate
