#include <doctest.h>

#include <boost/math/special_functions/bessel.hpp>

#include "lacelab/errors.hpp"
#include "lacelab/green.hpp"

using namespace lacelab;

TEST_CASE("Gaussian constant") {
    CHECK(std::abs(gaussian_constant(3) - 3.0 / (2 * M_PI)) < 1e-14);
    CHECK(std::abs(gaussian_constant(5) - 0.1266515) < 1e-7);
    CHECK_THROWS_AS(gaussian_constant(2), Error);
}

TEST_CASE("heat kernel of the nearest-neighbour walk factorizes into Bessel functions") {
    // 1 - J^ = (1/d) sum_j (1 - cos k_j): I_t(x) = prod_j e^{-t/d} I_{x_j}(t/d)
    for (int d : {1, 3}) {
        auto J = nn_step(d);
        for (double t : {0.5, 3.0, 20.0}) {
            LatticePoint x = d == 1 ? LatticePoint{2} : LatticePoint{1, 0, 2};
            double ref = 1;
            for (int j = 0; j < d; ++j) ref *= std::exp(-t / d) * boost::math::cyl_bessel_i(x[j], t / d);
            CHECK(heat_kernel(J, x, t) == doctest::Approx(ref).epsilon(1e-10));
        }
    }
}

TEST_CASE("three methods agree for the cubic lattice") {
    auto J = nn_step(3);
    auto pts = std::vector<LatticePoint>{{0, 0, 0}, {1, 0, 0}, {2, 1, 0}, {4, 0, 0}};
    auto t = GreenTarget::list(pts);
    QuadratureOptions q;
    q.M = 256;
    auto cq = green_quadrature(J, t, q);
    auto cs = green_series(J, t, 4095);
    auto ch = green_heat_split_field(J, t);
    CHECK(cq.at(pts[0]) == doctest::Approx(1.5163860591).epsilon(1e-6));
    for (const auto& x : pts) {
        CHECK(cs.at(x) == doctest::Approx(cq.at(x)).epsilon(1e-5));
        CHECK(ch.at(x) == doctest::Approx(cq.at(x)).epsilon(1e-5));
    }
}

TEST_CASE("raw series partial sums") {
    auto J = nn_step(3);
    auto t = GreenTarget::list({LatticePoint{0, 0, 0}, LatticePoint{1, 0, 0}});
    SeriesOptions o;
    o.tail = false;
    auto c = green_series(J, t, 2, o);
    // 1 + 0 + 1/6 at the origin; 1/6 at a neighbour
    CHECK(c.at(LatticePoint{0, 0, 0}) == doctest::Approx(1 + 1.0 / 6));
    CHECK(c.at(LatticePoint{1, 0, 0}) == doctest::Approx(1.0 / 6));
}

TEST_CASE("resolvent identity holds within the truncation estimate") {
    auto J = nn_step(3);
    QuadratureOptions q;
    q.M = 128;
    auto C = green_quadrature(J, GreenTarget::box(9), q);
    auto r = resolvent_check(C, J);
    CHECK(r.points > 0);
    CHECK(r.ok);
    auto S = green_series(J, GreenTarget::box(7), 2047);
    CHECK(resolvent_check(S, J).ok);
}

TEST_CASE("heat split pieces add up") {
    auto s = green_heat_split(nn_step(3), LatticePoint{6, 0, 0});
    CHECK(s.total == doctest::Approx(s.C_less + s.C_greater));
    CHECK(s.C_less >= 0);
    CHECK(s.T > 0);
}

TEST_CASE("asymptotics report layout") {
    auto J = nn_step(3);
    QuadratureOptions q;
    q.M = 64;
    auto C = green_quadrature(J, GreenTarget::box(11), q);
    auto a = asymptotics_report(C, J, 2);
    CHECK(a.predicted == doctest::Approx(gaussian_constant(3)));
    REQUIRE(!a.rows.empty());
    for (std::size_t i = 1; i < a.rows.size(); ++i) CHECK(a.rows[i - 1].absx <= a.rows[i].absx);
}

TEST_CASE("two-point function with g = delta reproduces C") {
    auto J = nn_step(3);
    auto t = GreenTarget::list({LatticePoint{2, 0, 0}, LatticePoint{3, 1, 0}});
    QuadratureOptions q;
    q.M = 64;
    auto H = lace_two_point(LatticeField::delta(3, 3), J, t, q);
    auto C = green_quadrature(J, t, q);
    CHECK(H.sum_g == doctest::Approx(1));
    CHECK(H.H.at(LatticePoint{2, 0, 0}) == doctest::Approx(C.at(LatticePoint{2, 0, 0})).epsilon(1e-12));
    LatticeField bad(3, 3);
    bad[LatticePoint{1, 0, 0}] = 1;
    CHECK_THROWS_AS(lace_two_point(bad, J, t, q), Error);
}

TEST_CASE("helper inequalities") {
    CHECK(check_power_exp_bound(2000, 3).failures == 0);
    CHECK(check_gaussian_tail_bound(2000, 4).failures == 0);
    // equality case of the power-exponential bound: y = alpha/beta
    CHECK(power_exp_bound_holds(2.0, 4.0, 2.0));
}

TEST_CASE("heat decay probe stays bounded") {
    std::vector<double> ts{4, 16, 64};
    auto rows = heat_decay_probe(nn_step(3), ts);
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) {
        CHECK(std::isfinite(r.sup0));
        CHECK(r.sup0 < 1);
    }
}
