#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "tobitkf/filter_core.hpp"
#include "tobitkf/gauss_stats.hpp"
#include "tobitkf/random.hpp"

using namespace tobitkf;
using tobitkf::testing::close_rel;
using tobitkf::testing::max_abs_diff;

namespace {

Matrix random_spd(Rng& rng, std::size_t n, double scale) {
    Matrix b(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            b(i, j) = rng.normal();
        }
    }
    return (b * b.transpose() + Matrix::identity(n)) * scale;
}

// Plain textbook Kalman filter, written independently of the Tobit machinery.
struct TextbookKf {
    Vector x;
    Matrix p;

    void step(const Matrix& a, const Matrix& q, const Matrix& c, const Matrix& r,
              const Vector& y) {
        x = a * x;
        p = a * p * a.transpose() + q;
        const Matrix s = c * p * c.transpose() + r;
        const Matrix k = solve(s, c * p).transpose();
        x = x + k * (y - c * x);
        p = (Matrix::identity(x.size()) - k * c) * p;
    }
};

}  // namespace

TEST_SUITE("filter_core") {

TEST_CASE("predict") {
    const FilterState s{Vector{1.0, 2.0}, Matrix{{2, 0.5}, {0.5, 1}}, 0};
    const auto same = predict(s, Matrix::identity(2), Matrix(2, 2));
    CHECK(same.x_pred == s.x_hat);
    CHECK(max_abs_diff(same.psi_pred, s.psi) == 0.0);

    const FilterState scalar{Vector{5.0}, Matrix{{25.0}}, 0};
    CHECK(predict(scalar, Matrix{{1.0}}, Matrix{{0.0}}).psi_pred(0, 0) == 25.0);

    const double w = 0.005 * 2.0 * 3.141592653589793;
    const Matrix rot{{std::cos(w), -std::sin(w)}, {std::sin(w), std::cos(w)}};
    const Matrix q = Matrix::identity(2) * 0.0025;
    const auto p = predict(s, rot, q);
    CHECK(p.psi_pred.trace() == doctest::Approx(s.psi.trace() + q.trace()).epsilon(1e-14));
    CHECK(max_abs_diff(p.psi_pred, p.psi_pred.transpose()) == 0.0);
}

TEST_CASE("censored scalar update matches high-precision values") {
    // x_pred = −1, Ψ = 1, σ = 1, τ = 0, y = 0. References from 60-digit mpmath.
    const auto r = tobit_update(Vector{-1.0}, Matrix{{1.0}}, Vector{0.0}, Matrix{{1.0}},
                                CensorSpec::lower({0.0}), Matrix{{1.0}});
    const auto& d = r.detail;
    CHECK(d.eta[0] == -1.0);
    CHECK(close_rel(d.p_expect(0, 0), 0.15865525393145705, 1e-14));
    CHECK(close_rel(d.y_expect[0], 0.083315470587686298, 1e-12));
    CHECK(close_rel(d.v_mat(0, 0), 0.19909766557034879, 1e-12));
    CHECK(close_rel(d.gain(0, 0), 0.70743234311873077, 1e-12));
    CHECK(close_rel(r.state.x_hat[0], -1.0589400585758866, 1e-12));
    CHECK(close_rel(r.state.psi(0, 0), 0.88776214196317212, 1e-12));
    CHECK(d.y_expect[0] == doctest::Approx(censored_mean(-1.0, 1.0, 0.0)).epsilon(1e-14));
}

TEST_CASE("upper censoring mirrors lower censoring") {
    const auto lo = tobit_update(Vector{-1.0}, Matrix{{2.0}}, Vector{0.3}, Matrix{{1.0}},
                                 CensorSpec::lower({0.0}), Matrix{{0.5}});
    const auto up = tobit_update(Vector{1.0}, Matrix{{2.0}}, Vector{-0.3}, Matrix{{1.0}},
                                 CensorSpec::upper({0.0}), Matrix{{0.5}});
    CHECK(up.state.x_hat[0] == doctest::Approx(-lo.state.x_hat[0]).epsilon(1e-15));
    CHECK(up.state.psi(0, 0) == doctest::Approx(lo.state.psi(0, 0)).epsilon(1e-15));
    CHECK(up.detail.y_expect[0] == doctest::Approx(-lo.detail.y_expect[0]).epsilon(1e-15));
}

TEST_CASE("uncensored update is the standard Kalman update") {
    SUBCASE("scalar with Psi = R halves the variance") {
        const auto r = kf_update(Vector{0.0}, Matrix{{2.0}}, Vector{1.0}, Matrix{{1.0}},
                                 Matrix{{2.0}});
        CHECK(r.x_hat[0] == doctest::Approx(0.5).epsilon(1e-11));
        CHECK(r.psi(0, 0) == doctest::Approx(1.0).epsilon(1e-11));
    }
    SUBCASE("zero innovation keeps the state") {
        const auto r = kf_update(Vector{1.0, 2.0}, Matrix{{1, 0}, {0, 1}}, Vector{1.0},
                                 Matrix{{1, 0}}, Matrix{{1.0}});
        CHECK(r.x_hat == Vector{1.0, 2.0});
        CHECK(r.psi(0, 0) == doctest::Approx(0.5).epsilon(1e-11));
        CHECK(r.psi(1, 1) == 1.0);
    }
}

TEST_CASE("censoring-free runs match a textbook Kalman filter") {
    Rng rng(31);
    const Matrix a{{0.9, 0.2, 0.0}, {-0.1, 0.8, 0.1}, {0.0, 0.05, 0.95}};
    const Matrix c{{1, 0, 0.5}, {0, 1, -1}};
    const Matrix q = random_spd(rng, 3, 0.05);
    const Matrix r{{0.4, 0}, {0, 0.9}};
    const auto sys = DynamicSystem::linear(a, c, q, r, CensorSpec::lower({-1e9, -1e9}));
    const auto traj = simulate(sys, Vector{1.0, -1.0, 0.5}, 1000, 8);

    TextbookKf ref{Vector(3), Matrix::identity(3)};
    FilterState none{Vector(3), Matrix::identity(3), 0};
    FilterState far{Vector(3), Matrix::identity(3), 0};
    for (const auto& rec : traj) {
        ref.step(a, q, c, r, rec.y_observed);
        const auto pn = predict(none, a, q);
        none = kf_update(pn.x_pred, pn.psi_pred, rec.y_observed, c, r);
        const auto pf = predict(far, a, q);
        far = tobit_update(pf.x_pred, pf.psi_pred, rec.y_observed, c, sys.censor_spec(rec.k), r)
                  .state;
        REQUIRE(max_abs_diff(none.x_hat, ref.x) < 1e-9);
        REQUIRE(max_abs_diff(far.x_hat, ref.x) < 1e-9);
        REQUIRE(max_abs_diff(far.psi, ref.p) < 1e-9);
        REQUIRE(min_eigenvalue(far.psi) >= -1e-9);
    }
}

TEST_CASE("deep censoring leaves the prediction untouched") {
    const Matrix psi{{4.0, 1.0}, {1.0, 3.0}};
    const Vector x{-30.0, 2.0};
    const Matrix c{{1, 0}};
    for (double r : {1.0, 1e-2, 1e-6, 1e-9}) {
        CAPTURE(r);
        // η = −30/σ; the measurement sits on the threshold as a censored value would.
        const auto u = tobit_update(x, psi, Vector{0.0}, c, CensorSpec::lower({0.0}),
                                    Matrix{{r}});
        CHECK(std_normal_cdf(u.detail.eta[0]) < 1e-12);
        CHECK((u.state.x_hat - x).norm() < 1e-9);
        CHECK(max_abs_diff(u.state.psi, psi) < 1e-9);
        CHECK(u.detail.p_expect(0, 0) > 0.0);
        CHECK(u.detail.p_expect(0, 0) < 1.0);
        CHECK(u.detail.v_mat(0, 0) > 0.0);
    }
}

TEST_CASE("intermediate invariants") {
    Rng rng(4);
    for (int trial = 0; trial < 300; ++trial) {
        const Matrix psi = random_spd(rng, 2, 0.5);
        const Vector x{3.0 * rng.normal(), 3.0 * rng.normal()};
        const Matrix c{{1, 0}, {0.5, 1}};
        const Vector y{rng.normal(), rng.normal()};
        const CensorSpec spec({{CensorMode::Lower, 0.0}, {CensorMode::Upper, 0.5}});
        const auto u = tobit_update(x, psi, y, c, spec, Matrix{{0.3, 0}, {0, 2.0}});
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(u.detail.p_expect(i, i) > 0.0);
            CHECK(u.detail.p_expect(i, i) < 1.0);
            CHECK(u.detail.v_mat(i, i) >= 0.0);
        }
        CHECK(u.detail.p_expect(0, 1) == 0.0);
        CHECK(max_abs_diff(u.detail.r_yy, u.detail.r_yy.transpose()) == 0.0);
        CHECK(min_eigenvalue(u.state.psi) >= -1e-9);
    }
}

TEST_CASE("innovation covariance is consistent on a censoring-free run") {
    const Matrix a{{0.95}};
    const Matrix q{{0.04}};
    const Matrix r{{1.0}};
    const auto sys = DynamicSystem::linear(a, Matrix{{1}}, q, r, CensorSpec::none(1));
    const auto traj = simulate(sys, Vector{0.0}, 20000, 12);
    FilterState s{Vector{0.0}, Matrix{{1.0}}, 0};
    double sum_sq = 0.0;
    double predicted = 0.0;
    std::size_t count = 0;
    for (const auto& rec : traj) {
        const auto p = predict(s, a, q);
        const auto u = tobit_update(p.x_pred, p.psi_pred, rec.y_observed, Matrix{{1}},
                                    CensorSpec::none(1), r);
        s = u.state;
        if (rec.k > 100) {
            sum_sq += u.detail.innovation[0] * u.detail.innovation[0];
            predicted += p.psi_pred(0, 0) + r(0, 0);
            ++count;
        }
    }
    CHECK(std::abs(sum_sq / count - predicted / count) < 0.1 * predicted / count);
}

TEST_CASE("dimension and variance errors") {
    CHECK_THROWS_AS(tobit_update(Vector{0.0}, Matrix{{1.0}}, Vector{0.0}, Matrix{{1, 0}},
                                 CensorSpec::none(1), Matrix{{1.0}}),
                    DimensionError);
    CHECK_THROWS_AS(tobit_update(Vector{0.0}, Matrix{{1.0}}, Vector{0.0}, Matrix{{1}},
                                 CensorSpec::none(2), Matrix{{1.0}}),
                    DimensionError);
    CHECK_THROWS_AS(tobit_update(Vector{0.0}, Matrix{{1.0}}, Vector{0.0}, Matrix{{1}},
                                 CensorSpec::none(1), Matrix{{0.0}}),
                    DimensionError);
}

}  // TEST_SUITE
