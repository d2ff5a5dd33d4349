#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "lacelab/errors.hpp"
#include "lacelab/perc.hpp"
#include "oracles.hpp"

using namespace lacelab;

TEST_CASE("extreme occupation probabilities") {
    auto e0 = sample_two_point(2, 5, 0.0, 50, 3);
    CHECK(e0.mean(LatticePoint::origin(2)) == 1.0);
    CHECK(e0.mean.sum() == 1.0);
    auto e1 = sample_two_point(3, 3, 1.0, 20, 3);
    for (double v : e1.mean.values()) CHECK(v == 1.0);
    for (double v : e1.stderr_.values()) CHECK(v == 0.0);
}

TEST_CASE("uniforms are deterministic and spread over [0,1)") {
    CHECK(bond_uniform(1, 2, 3) == bond_uniform(1, 2, 3));
    CHECK(bond_uniform(1, 2, 3) != bond_uniform(2, 2, 3));
    double s = 0;
    for (std::uint64_t i = 0; i < 100000; ++i) {
        double u = bond_uniform(7, i / 100, i % 100);
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        s += u;
    }
    CHECK(s / 100000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("sampler agrees with exhaustive enumeration in d=2, L=3") {
    const std::uint64_t n = 20000;
    for (double p : {0.2, 0.5}) {
        auto exact = oracle::exhaustive_connectivity(2, 3, p);
        auto e = sample_two_point(2, 3, p, n, 17);
        for (std::size_t i = 0; i < exact.size(); ++i) {
            double q = std::clamp(exact[i], 0.0, 1.0);
            double sigma = std::sqrt(q * (1 - q) / n);
            if (sigma < 1e-9) {
                CHECK(e.mean[i] == doctest::Approx(q));
                continue;
            }
            CHECK(std::abs(e.mean[i] - exact[i]) <= 3 * sigma);
        }
    }
}

TEST_CASE("runs are byte-identical for a fixed seed") {
    auto a = sample_two_point(2, 7, 0.4, 300, 99);
    auto b = sample_two_point(2, 7, 0.4, 300, 99);
    std::ostringstream sa, sb;
    write_estimate(sa, a);
    write_estimate(sb, b);
    CHECK(sa.str() == sb.str());
    auto c = sample_two_point(2, 7, 0.4, 300, 100);
    std::ostringstream sc;
    write_estimate(sc, c);
    CHECK(sc.str() != sa.str());
}

TEST_CASE("coupled samples are monotone in p") {
    auto lo = sample_two_point(2, 5, 0.3, 2000, 5);
    auto hi = sample_two_point(2, 5, 0.45, 2000, 5);
    for (std::size_t i = 0; i < lo.mean.size(); ++i) CHECK(lo.mean[i] <= hi.mean[i]);
}

TEST_CASE("diagram bridge brackets the mean bars") {
    auto e = sample_two_point(2, 7, 0.3, 2000, 8);
    DiagramOptions o;
    o.wrap_tol = 1;
    o.h_radius = 1;
    std::vector<WeightPair> w{{2, 0}};
    auto b = perc_diagram_bridge(e, w, o);
    CHECK(b.ordered);
    CHECK(b.lower.B <= b.mean.bars.B);
    CHECK(b.mean.bars.B <= b.upper.B);
    CHECK(b.upper.W.count({2, 0}) == 1);
    CHECK_FALSE(b.mean.H.empty());
}

TEST_CASE("argument and budget validation") {
    CHECK_THROWS_AS(sample_two_point(2, 4, 0.5, 10, 1), Error);
    CHECK_THROWS_AS(sample_two_point(2, 5, 1.5, 10, 1), Error);
    CHECK_THROWS_AS(sample_two_point(2, 5, 0.5, 0, 1), Error);
    PercOptions o;
    o.budget = 1000;
    try {
        sample_two_point(3, 9, 0.5, 100, 1, o);
        FAIL("expected budget error");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::budget);
    }
}

TEST_CASE("estimate JSON layout") {
    auto e = sample_two_point(2, 3, 0.5, 10, 2);
    std::ostringstream os;
    write_estimate(os, e);
    auto j = nlohmann::json::parse(os.str());
    CHECK(j["L"] == 3);
    CHECK(j["mean"].size() == 9);
    CHECK(j["seed"] == 2);
}
