#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include "lacelab/errors.hpp"
#include "lacelab/saw.hpp"
#include "oracles.hpp"

using namespace lacelab;

namespace {

using Dense = std::map<std::vector<int>, Int128>;

// Lace coefficients by dense power-series inversion over explicit point maps.
std::vector<Dense> naive_pi(int d, int N) {
    auto c = oracle::naive_saw(d, N);
    std::vector<Dense> G(N + 1), Q(N + 1), Pi(N + 1);
    for (int n = 0; n <= N; ++n)
        for (const auto& [x, v] : c[n]) G[n][x] = v;
    std::vector<int> zero(d, 0);
    Q[0][zero] = 1;
    for (int n = 1; n <= N; ++n)
        for (int k = 1; k <= n; ++k)
            for (const auto& [x, g] : G[k])
                for (const auto& [y, q] : Q[n - k]) {
                    auto z = x;
                    for (int j = 0; j < d; ++j) z[j] += y[j];
                    Q[n][z] -= g * q;
                }
    for (int n = 0; n <= N; ++n) {
        for (const auto& [x, q] : Q[n]) Pi[n][x] -= q;
        if (n == 0) Pi[0][zero] += 1;
        if (n == 1)
            for (int j = 0; j < d; ++j)
                for (int s : {1, -1}) {
                    auto e = zero;
                    e[j] = s;
                    Pi[1][e] -= 1;
                }
    }
    return Pi;
}

}  // namespace

TEST_CASE("orbit table classes and lookup") {
    OrbitTable t(3, 4);
    CHECK(t.rep(0).is_origin());
    std::vector<int> x{-1, 3, 0};
    auto id = t.id_of(x);
    REQUIRE(id != OrbitTable::npos);
    CHECK(t.rep(id) == LatticePoint{3, 1, 0});
    std::vector<int> far{2, 2, 1};
    CHECK(t.id_of(far) == OrbitTable::npos);
    std::size_t brute = 0;
    for (int a = 0; a <= 4; ++a)
        for (int b = 0; b <= a; ++b)
            for (int c = 0; c <= b; ++c)
                if (a + b + c <= 4) ++brute;
    CHECK(t.classes() == brute);
}

TEST_CASE("endpoint table equals the naive enumerator in d=2 up to N=10") {
    auto s = enumerate_saw(2, 10);
    auto ref = oracle::naive_saw(2, 10);
    for (int n = 0; n <= 10; ++n) {
        std::uint64_t tot = 0;
        for (const auto& [x, v] : ref[n]) {
            CHECK(s.at(n, LatticePoint(x)) == v);
            tot += v;
        }
        CHECK(s.total(n) == tot);
    }
    CHECK(s.total(10) == 44100);
}

TEST_CASE("naive enumerator agrees in d=3 and d=4 at small N") {
    for (int d : {3, 4}) {
        auto s = enumerate_saw(d, 5);
        auto ref = oracle::naive_saw(d, 5);
        for (int n = 0; n <= 5; ++n)
            for (const auto& [x, v] : ref[n]) CHECK(s.at(n, LatticePoint(x)) == v);
    }
}

TEST_CASE("first two totals and elementary structure") {
    for (int d = 2; d <= 6; ++d) {
        auto s = enumerate_saw(d, d <= 3 ? 6 : 4);
        CHECK(s.total(0) == 1);
        CHECK(s.total(1) == std::uint64_t(2 * d));
        CHECK(s.total(2) == std::uint64_t(2 * d * (2 * d - 1)));
        std::vector<int> diag(d, 0);
        diag[0] = diag[1] = 1;
        CHECK(s.at(2, LatticePoint(diag)) == 2);
        CHECK(s.at(2, LatticePoint::origin(d)) == 0);
        for (int n = 0; n < s.N; ++n) CHECK(s.total(n + 1) <= std::uint64_t(2 * d - 1) * s.total(n) + (n == 0 ? 1 : 0));
        for (int n = 0; n <= s.N; ++n)
            for (std::size_t id = 0; id < s.orbits.classes(); ++id) {
                const auto& x = s.orbits.rep(id);
                if ((x.l1() + n) % 2 == 1 || x.l1() > n) CHECK(s.counts[n][id] == 0);
            }
    }
}

TEST_CASE("lace coefficients match dense series inversion") {
    const int N = 7;
    auto s = enumerate_saw(2, N);
    auto pi = extract_pi_series(s);
    auto ref = naive_pi(2, N);
    for (int n = 0; n <= N; ++n) {
        Int128 tot = 0;
        for (const auto& [x, v] : ref[n]) {
            CHECK(pi.at(n, LatticePoint(x)) == v);
            tot += v;
        }
        CHECK(pi.total(n) == tot);
    }
    CHECK(pi.total(0) == 0);
    CHECK(pi.total(1) == 0);
}

TEST_CASE("round trip through the lace coefficients is exact") {
    for (int d : {2, 3, 4}) {
        auto s = enumerate_saw(d, d == 2 ? 10 : 7);
        auto pi = extract_pi_series(s);
        CHECK(roundtrip_defect(s, pi) == 0);
        auto back = rebuild_counts(pi);
        for (int n = 0; n <= s.N; ++n)
            for (std::size_t id = 0; id < s.orbits.classes(); ++id) CHECK(back[n][id] == Int128(s.counts[n][id]));
    }
}

TEST_CASE("critical point estimates") {
    auto s = enumerate_saw(3, 8);
    auto e = estimate_pc(extract_pi_series(s));
    CHECK(e.bracketed);
    CHECK(e.band_ok);
    CHECK(6 * e.pc >= 1);
    CHECK(e.pc == doctest::Approx(0.21275).epsilon(1e-3));

    // d=2 has a crossing only at odd truncation order
    auto e2 = estimate_pc(extract_pi_series(enumerate_saw(2, 11)));
    CHECK(e2.bracketed);
    CHECK(4 * e2.pc >= 1);

    PiSeries zero;
    zero.d = 4;
    zero.order = 3;
    zero.orbits = OrbitTable(4, 3);
    zero.pi.assign(4, std::vector<Int128>(zero.orbits.classes(), 0));
    bool ok = false;
    CHECK(pc_root(zero, 0, &ok) == 1.0 / 8);
    CHECK(ok);
}

TEST_CASE("series field and lambda check") {
    auto s = enumerate_saw(3, 6);
    auto f0 = g_series_eval(s, 0.0);
    CHECK(f0.G.side() == 13);
    CHECK(f0.G(LatticePoint::origin(3)) == 1.0);
    CHECK(f0.G.sum() == 1.0);
    auto f = g_series_eval(s, 0.1);
    double direct = 0;
    for (int n = 0; n <= 6; ++n) direct += double(s.at(n, LatticePoint{1, 0, 0})) * std::pow(0.1, n);
    CHECK(f.G(LatticePoint{0, -1, 0}) == doctest::Approx(direct).epsilon(1e-14));
    CHECK(f.last_term == doctest::Approx(double(s.total(6)) * 1e-6));

    auto lc = lambda_check(f0.G);
    CHECK(lc.B_bar == 0.0);
    CHECK(lc.pass);
    CHECK(lc.reference == doctest::Approx(0.493));
    auto hot = lambda_check(g_series_eval(s, 0.2).G);
    CHECK(hot.B_bar > lc.B_bar);
}

TEST_CASE("cache round trip") {
    auto dir = std::filesystem::temp_directory_path() / "lacelab_saw_cache_test";
    std::filesystem::remove_all(dir);
    auto a = enumerate_saw_cached(3, 5, dir);
    CHECK(std::filesystem::exists(dir / series_cache_name(3, 5)));
    auto b = enumerate_saw_cached(3, 5, dir);
    CHECK(a.counts == b.counts);

    std::stringstream ss;
    save_series(ss, a);
    auto c = load_series(ss);
    CHECK(c.d == 3);
    CHECK(c.N == 5);
    CHECK(c.counts == a.counts);

    std::istringstream junk("not a series");
    CHECK_THROWS_AS(load_series(junk), Error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("enumeration guards") {
    CHECK_THROWS_AS(enumerate_saw(0, 3), Error);
    EnumerateOptions o;
    o.node_cap = 10;
    try {
        enumerate_saw(3, 9, o);
        FAIL("expected budget error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::budget);
    }
}
