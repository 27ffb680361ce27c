#include <catch_amalgamated.hpp>

#include <random>

#include "helpers.hpp"

using namespace deflate;
using th::origin;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr auto slice = NormBackend::appendix_slice;
constexpr auto cplx = NormBackend::complex_exact;

DeflationTrace gy2_trace() {
    return deflation_sequence(th::gy2_at(th::x0_gy2), th::x0_gy2, slice, std::nullopt, GateNorm::leading);
}

AnalyticSystem linear_root() {
    return AnalyticSystem({th::lin(0.0, 2.0, 2.0), th::lin(0.0, 4.0, -4.0)}, BallContext{origin(2), 1.0});
}

AnalyticSystem scaled(const AnalyticSystem& F, double c) {
    std::vector<TruncatedSeries> e;
    for (const auto& f : F.equations) e.push_back(scale(f, c));
    return F.with_equations(e);
}

// Random square quadratic system vanishing at zeta, on the ball B(zeta, 1).
oracle::PolySystem random_with_root(std::mt19937_64& rng, const oracle::Vec& zeta) {
    oracle::PolySystem f;
    for (int i = 0; i < 2; ++i) {
        auto p = oracle::random_poly(rng, 2, 2, 1.0);
        p.push_back({-oracle::eval(p, zeta), {0, 0}});
        f.push_back(p);
    }
    return f;
}

}  // namespace

TEST_CASE("point quantities of the deflated example", "[certificates]") {
    const auto tr = gy2_trace();
    REQUIRE(tr.deflated);
    const auto q = point_quantities(*tr.deflated, th::x0_gy2, slice);
    CHECK_THAT(q.beta, WithinRel(0.00078147, 1e-3));
    CHECK_THAT(q.kappa, WithinRel(3.0, 1e-4));
    CHECK_THAT(q.gamma, WithinRel(2.6737, 1e-3));
    CHECK_THAT(q.alpha, WithinRel(0.0023444, 1e-3));
    CHECK(q.alpha == q.beta * q.kappa);
    CHECK(q.gamma >= 1.0);

    // beta is the length of the Newton step, computed directly
    const Eigen::MatrixXcd J = tr.deflated->jacobian_at(th::x0_gy2);
    CHECK_THAT(q.beta, WithinRel(J.fullPivLu().solve(tr.deflated->evaluate(th::x0_gy2)).norm(), 1e-12));
    CHECK_THAT(q.mu, WithinRel(oracle::spectral(J.inverse()), 1e-12));

    CHECK_THROWS_AS(point_quantities(tr.steps[0].system, th::x0_gy2, slice), CertificateUnavailableError);
    const AnalyticSystem sing({th::lin(0.0, 1.0, 1.0), th::lin(0.0, 2.0, 2.0)}, BallContext{origin(2), 1.0});
    CHECK_THROWS_AS(point_quantities(sing, origin(2), cplx), CertificateUnavailableError);
}

TEST_CASE("point quantities at a root and under scaling", "[certificates]") {
    const auto q = point_quantities(linear_root(), origin(2), cplx);
    CHECK(q.beta == 0.0);
    CHECK(q.alpha == 0.0);

    const auto tr = gy2_trace();
    const auto& F = *tr.deflated;
    for (double c : {0.25, 3.0}) {
        const auto a = point_quantities(F, th::x0_gy2, cplx);
        const auto b = point_quantities(scaled(F, c), th::x0_gy2, cplx);
        CHECK_THAT(b.beta, WithinRel(a.beta, 1e-12));
        CHECK_THAT(b.lambda, WithinRel(c * a.lambda, 1e-12));
        CHECK_THAT(b.mu, WithinRel(a.mu / c, 1e-12));
        CHECK_THAT(b.lambda * b.mu, WithinRel(a.lambda * a.mu, 1e-12));
        CHECK(alpha_certificate(scaled(F, c), th::x0_gy2, cplx).alpha_ok == alpha_certificate(F, th::x0_gy2, cplx).alpha_ok);
    }
}

TEST_CASE("alpha certificate of the example", "[certificates]") {
    const auto tr = gy2_trace();
    const auto rep = alpha_certificate(*tr.deflated, th::x0_gy2, slice);
    REQUIRE(rep.alpha_ok);
    CHECK_THAT(*rep.alpha_bound, WithinRel(0.079267, 1e-3));
    CHECK_THAT(*rep.theta_low, WithinRel(0.00078644, 1e-3));
    CHECK(*rep.theta_low < *rep.theta_high);
    CHECK(rep.ball_contained);

    // the root of the deflated system lies in the uniqueness ball
    Point z = th::x0_gy2;
    for (int k = 0; k < 20; ++k)
        z = to_point(to_vector(z) - solve_square(tr.deflated->jacobian_at(z), tr.deflated->evaluate(z)));
    CHECK(point_distance(z, th::x0_gy2) < *rep.theta_high);
    CHECK(point_distance(z, th::x0_gy2) <= *rep.theta_low * (1.0 + 1e-9));
}

TEST_CASE("alpha certificate edge cases", "[certificates]") {
    const auto at_root = alpha_certificate(linear_root(), origin(2), cplx);
    REQUIRE(at_root.alpha_ok);
    CHECK(*at_root.theta_low == 0.0);

    // Inflate the constant terms until the alpha test flips.
    const auto F = *gy2_trace().deflated;
    double t = 1.0;
    CertificateReport rep = alpha_certificate(F, th::x0_gy2, slice);
    while (rep.alpha_ok && t < 1e6) {
        t *= 1.5;
        std::vector<TruncatedSeries> e;
        for (const auto& f : F.equations) {
            CoefficientMap m = f.coefficients();
            m[{0, 0}] *= t;
            e.emplace_back(f.center(), f.order(), m);
        }
        rep = alpha_certificate(F.with_equations(e), th::x0_gy2, slice);
    }
    CHECK_FALSE(rep.alpha_ok);
    CHECK(rep.quantities->alpha >= *rep.alpha_bound);
    CHECK_FALSE(rep.theta_low);
    CHECK_FALSE(rep.theta_high);
}

TEST_CASE("gamma radius", "[certificates]") {
    const auto q = point_quantities(linear_root(), origin(2), slice);
    CHECK_THAT(q.gamma, WithinRel(2.6761, 1e-3));
    CHECK(q.kappa == 3.0);
    CHECK_THAT(gamma_radius(linear_root(), origin(2), slice), WithinRel(0.026858, 1e-3));

    PointQuantities one;
    one.gamma = 1.0;
    one.kappa = 2.5;
    CHECK_THAT(gamma_radius(one), WithinRel((3.0 - std::sqrt(7.0)) / (2.0 * 2.5), 1e-14));

    const AnalyticSystem sing({th::lin(0.0, 1.0, 1.0), th::lin(0.0, 2.0, 2.0)}, BallContext{origin(2), 1.0});
    CHECK_THROWS_AS(gamma_radius(sing, origin(2), cplx), CertificateUnavailableError);
}

TEST_CASE("gamma radius convergence envelope", "[certificates][property]") {
    std::mt19937_64 rng(53);
    for (int s = 0; s < 5; ++s) {
        const oracle::Vec zeta = oracle::sample_ball(rng, origin(2), 0.5);
        const auto f = random_with_root(rng, zeta);
        const AnalyticSystem F = th::system(f, 2, zeta, 2, BallContext{zeta, 1.0});
        const double r = gamma_radius(F, zeta, cplx);
        REQUIRE(r > 0.0);
        for (int t = 0; t < 100; ++t) {
            const auto x0 = oracle::sample_ball(rng, zeta, 0.9 * r);
            const auto path = oracle::newton(f, x0, 6);
            const double e0 = oracle::dist(path[0], zeta);
            for (int k = 1; k < static_cast<int>(path.size()); ++k) {
                const double ek = oracle::dist(path[k], zeta);
                CHECK(ek <= std::pow(0.5, std::pow(2.0, k) - 1.0) * e0 + 1e-14);
            }
        }
    }
}

TEST_CASE("deflated gamma bound", "[certificates]") {
    const auto tr = gy2_trace();
    const Point zeta = origin(2);
    const auto d = deflated_gamma_bound(tr, zeta, slice);
    CHECK(d.ell == 1);
    CHECK(d.p0 == 2);
    CHECK(d.p == 2);
    REQUIRE(d.mu_steps.size() == 2);

    const auto& st = tr.steps[0];
    const Eigen::MatrixXcd J = st.system.jacobian_at(zeta);
    CHECK_THAT(d.mu_steps[0], WithinRel(1.0 / std::abs(J(st.pivots.rows[0], st.pivots.cols[0])), 1e-12));
    CHECK_THAT(d.mu_steps[1], WithinRel(oracle::spectral(tr.deflated->jacobian_at(zeta).inverse()), 1e-12));
    CHECK(d.mu_max == std::max(d.mu_steps[0], d.mu_steps[1]));

    const double lambda0 = lambda_bound(st.input, zeta, slice);
    const double kappa0 = kappa(zeta, st.input.ball);
    CHECK(d.lambda0 == lambda0);
    CHECK(kappa0 == 3.0);
    const double g0 = 2.0 * 2.0 / 3.0 * lambda0 * kappa0 * kappa0 * d.mu_max;
    CHECK_THAT(d.gamma0, WithinRel(g0, 1e-14));
    CHECK_THAT(d.gamma_ell, WithinRel(1.0 + g0, 1e-14));
    const double g = 1.0 + g0;
    const double u = std::min(1.0 / 3.0, 1.0 / (6.0 * g * (4.0 * 9.0 * (1.0 + g) + 1.0)));
    CHECK_THAT(d.radius, WithinRel(u / 3.0, 1e-14));
    CHECK(d.radius > 0.0);

    // an upper bound on the measured gamma of the deflated system
    CHECK(d.gamma_ell >= point_quantities(*tr.deflated, zeta, slice).gamma);

    // radius decreases with the thickness
    double prev = std::numeric_limits<double>::infinity();
    for (int ell = 0; ell <= 6; ++ell) {
        DeflationTrace t = tr;
        t.thickness = ell;
        for (auto b : {slice, cplx}) {
            const auto e = deflated_gamma_bound(t, zeta, b);
            CHECK(e.gamma_ell == ell + e.gamma0);
        }
        const double r = deflated_gamma_bound(t, zeta, slice).radius;
        CHECK(r < prev);
        prev = r;
    }

    DeflationTrace none = tr;
    none.deflated.reset();
    CHECK_THROWS_AS(deflated_gamma_bound(none, zeta, slice), CertificateUnavailableError);
}

TEST_CASE("deflated gamma bound of a regular system", "[certificates]") {
    const Point x{Complex(0.5001), Complex(0.4999)};
    const auto F = AnalyticSystem({th::lin(-1.0, 1.0, 1.0), th::lin(0.0, 1.0, -1.0)}, BallContext{origin(2), 2.0});
    const auto tr = deflation_sequence(recenter(F, x, 1), x, cplx);
    const auto d = deflated_gamma_bound(tr, {Complex(0.5), Complex(0.5)}, cplx);
    CHECK(d.ell == 0);
    CHECK(d.gamma_ell == d.gamma0);
}

TEST_CASE("singular alpha certificate", "[certificates]") {
    const auto rep = singular_alpha_certificate(th::gy2_at(th::x0_gy2), th::x0_gy2, slice, std::nullopt, GateNorm::leading);
    REQUIRE(rep.alpha_ok);
    CHECK(rep.thickness == 1);
    CHECK_THAT(*rep.theta_low, WithinRel(0.00078644, 1e-3));

    const Point x{Complex(0.5001), Complex(0.4999)};
    const auto F = recenter(AnalyticSystem({th::lin(-1.0, 1.0, 1.0), th::lin(0.0, 1.0, -1.0)}, BallContext{origin(2), 2.0}), x, 1);
    CHECK(singular_alpha_certificate(F, x, cplx) == alpha_certificate(F, x, cplx));

    const Point far{Complex(0.5), Complex(0.3)};
    const auto bad = singular_alpha_certificate(th::gy2_at(far), far, slice, std::nullopt, GateNorm::leading);
    CHECK_FALSE(bad.alpha_ok);
    REQUIRE(bad.notes.size() == 1);
    CHECK(bad.notes[0] == "hypothesis 1.1 failed at k=0");
}

TEST_CASE("rank stability radius", "[certificates]") {
    const auto fe = th::gy2_at(origin(2), 3);
    const Selection s = select(fe, origin(2), cplx);
    const AnalyticSystem F0 = fe.with_equations(s.equations);
    const Point zeta = origin(2);
    CHECK(rank_stability_radius(F0, zeta, 0.0, cplx) == 0.0);
    CHECK_THROWS_AS(rank_stability_radius(F0, zeta, 2.0 - std::sqrt(2.0), cplx), DomainError);
    CHECK_THROWS_AS(rank_stability_radius(F0, zeta, -0.1, cplx), DomainError);

    const double eps = 0.2;
    const double r = rank_stability_radius(F0, zeta, eps, cplx);
    CHECK_THAT(r, WithinRel(eps / (2.0 * gamma_bar_bound(F0, zeta, cplx)), 1e-15));
    const auto sz = singular_values(F0.jacobian_at(zeta));
    const int rank0 = static_cast<int>(std::count_if(sz.begin(), sz.end(), [&](double v) { return v > 1e-12 * sz[0]; }));
    CHECK(rank0 == 1);
    std::mt19937_64 rng(59);
    for (int t = 0; t < 100; ++t) {
        const auto x = oracle::sample_ball(rng, zeta, r);
        const auto sv = singular_values(F0.jacobian_at(x));
        CHECK(std::count_if(sv.begin(), sv.end(), [&](double v) { return v > eps; }) == rank0);
    }
}
