#include <doctest.h>

#include <sstream>

#include "lacelab/errors.hpp"
#include "lacelab/step.hpp"

using namespace lacelab;

TEST_CASE("nearest-neighbour step") {
    for (int d = 1; d <= 6; ++d) {
        auto J = nn_step(d);
        CHECK(J.mass() == doctest::Approx(1));
        CHECK(J.K1() == doctest::Approx(1));
        CHECK(J.range() == 1);
        CHECK(J.axis_supported());
        CHECK(J.bipartite());
        CHECK(J.nonnegative());
        std::vector<double> k(d, 0.3);
        CHECK(J.jhat(k) == doctest::Approx(std::cos(0.3)));
    }
}

TEST_CASE("spread-out step is uniform on the cube") {
    auto J = spread_out_step(2, 1);
    CHECK(J.support().size() == 8);
    CHECK(J.K1() == doctest::Approx((4 * 1.0 + 4 * 2.0) / 8));
    CHECK_FALSE(J.axis_supported());
    CHECK_FALSE(J.bipartite());
}

TEST_CASE("custom steps are validated") {
    LatticeField f(2, 3);
    f[LatticePoint{1, 0}] = 1.0;
    CHECK_THROWS_AS(custom_step(f), Error);  // orbit incomplete
    LatticeField g(2, 3);
    for (auto p : {LatticePoint{1, 0}, LatticePoint{-1, 0}, LatticePoint{0, 1}, LatticePoint{0, -1}}) g[p] = 0.2;
    CHECK_THROWS_AS(custom_step(g), Error);  // mass 0.8
    for (auto p : {LatticePoint{1, 0}, LatticePoint{-1, 0}, LatticePoint{0, 1}, LatticePoint{0, -1}}) g[p] = 0.25;
    CHECK(custom_step(g).mass() == doctest::Approx(1));
}

TEST_CASE("counterexample step") {
    CounterexampleParams p;
    p.d = 5;
    p.eps = 0.2;
    p.g_kind = CounterexampleParams::GKind::log_power;
    p.g_scale = 0.1;
    p.g_power = 16;
    p.l_list = {12, 24};
    auto J = counterexample_step(p);
    CHECK(J.mass() == doctest::Approx(1).epsilon(1e-12));
    CHECK(J.delta() > 0);
    CHECK(J.delta() < 1);
    CHECK(J.axis_supported());
    CHECK(J.counterexample().has_value());
    CounterexampleParams bad = p;
    bad.d = 4;
    CHECK_THROWS_AS(counterexample_step(bad), Error);
    bad = p;
    bad.l_list = {24, 12};
    CHECK_THROWS_AS(counterexample_step(bad), Error);
}

TEST_CASE("moments of the nearest-neighbour step") {
    auto r = moments(nn_step(3), 2.0);
    CHECK(r.mass == doctest::Approx(1));
    CHECK(r.K1 == doctest::Approx(1));
    CHECK(r.K2 == doctest::Approx(1));
    CHECK(r.K2prime == doctest::Approx(1));
    CHECK(std::isfinite(r.K0));
    CHECK(r.K0 > 0);
}

TEST_CASE("Fourier bounds of the step symbol") {
    auto b = jhat_bounds_check(nn_step(3), FourierGrid(3, 16));
    CHECK(b.ok);
    CHECK(b.nodes == 120);  // sorted tuples in the positive octant
}

TEST_CASE("step serialization writes a header and a field") {
    std::stringstream ss;
    write_step(ss, nn_step(2));
    std::string header;
    std::getline(ss, header);
    CHECK(header.find("\"K1\"") != std::string::npos);
    auto f = read_field(ss);
    CHECK(f.sum() == doctest::Approx(1));
}
