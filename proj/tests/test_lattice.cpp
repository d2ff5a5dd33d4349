#include <doctest.h>

#include <random>
#include <sstream>

#include "lacelab/errors.hpp"
#include "lacelab/lattice.hpp"

using namespace lacelab;

namespace {

LatticeField random_field(int d, int L, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0, 1);
    LatticeField f(d, L);
    for (auto& v : f.values()) v = u(rng);
    return f;
}

}  // namespace

TEST_CASE("points: norms and orbits") {
    LatticePoint x{3, -4, 0};
    CHECK(x.norm2() == 25);
    CHECK(x.norm() == doctest::Approx(5));
    CHECK(x.l1() == 7);
    CHECK(LatticePoint::origin(3).clamped_norm() == 1.0);
    CHECK(x.canonical() == LatticePoint{4, 3, 0});
    // brute-force orbit size
    for (auto p : {LatticePoint{0, 0, 0}, LatticePoint{1, 0, 0}, LatticePoint{1, 1, 0}, LatticePoint{2, 1, 0},
                   LatticePoint{2, 2, 2}, LatticePoint{3, 2, 1}}) {
        std::int64_t n = 0;
        for (int a = -3; a <= 3; ++a)
            for (int b = -3; b <= 3; ++b)
                for (int c = -3; c <= 3; ++c)
                    if (LatticePoint{a, b, c}.canonical() == p) ++n;
        CHECK(p.orbit_size() == n);
    }
}

TEST_CASE("field: indexing wraps on the torus") {
    LatticeField f(2, 5);
    f[LatticePoint{2, -2}] = 7;
    CHECK(f(LatticePoint{-3, 3}) == 7);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(f.index(f.point(i)) == i);
}

TEST_CASE("convolution: FFT path equals direct sums") {
    auto f = random_field(3, 17, 1), g = random_field(3, 17, 2);
    auto a = convolve(f, g), b = convolve_direct(f, g);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
    CHECK(a.sum() == doctest::Approx(f.sum() * g.sum()).epsilon(1e-12));
}

TEST_CASE("convolution: delta is the identity and powers compose") {
    auto f = random_field(2, 9, 3);
    auto c = convolve(f, LatticeField::delta(2, 9));
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(c[i] == doctest::Approx(f[i]));
    auto p3 = convolution_power(f, 3);
    auto ref = convolve(convolve(f, f), f);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(p3[i] == doctest::Approx(ref[i]).epsilon(1e-12));
    CHECK_THROWS_AS(convolve(f, LatticeField(2, 7)), Error);
}

TEST_CASE("weights and symmetry") {
    LatticeField f(2, 5);
    for (auto& v : f.values()) v = 1;
    auto w = weighted_field(f, 2);
    CHECK(w(LatticePoint{1, 2}) == doctest::Approx(5));
    CHECK(w(LatticePoint{0, 0}) == 0);
    auto wa = weighted_field(f, 1, {WeightMode::axis, 1});
    CHECK(wa(LatticePoint{1, -2}) == doctest::Approx(2));
    auto r = random_field(2, 7, 4);
    CHECK_FALSE(check_symmetry(r));
    auto s = symmetrize(r);
    CHECK(check_symmetry(s));
    CHECK(s.sum() == doctest::Approx(r.sum()));
}

TEST_CASE("boundary diagnostics") {
    auto d = LatticeField::delta(3, 7);
    CHECK(boundary_shell_mass(d) == 0);
    CHECK(outside_radius_mass(d) == 0);
    LatticeField e(1, 5);
    e[LatticePoint{2}] = 1;
    e[LatticePoint{0}] = 1;
    CHECK(boundary_shell_mass(e) == doctest::Approx(0.5));
}

TEST_CASE("fourier_eval of delta and nearest-neighbour step") {
    FourierGrid grid(2, 8);
    auto v = fourier_eval(LatticeField::delta(2, 5), grid);
    for (auto z : v) CHECK(std::abs(z - std::complex<double>(1, 0)) < 1e-14);
    LatticeField D(2, 5);
    for (auto p : {LatticePoint{1, 0}, LatticePoint{-1, 0}, LatticePoint{0, 1}, LatticePoint{0, -1}}) D[p] = 0.25;
    auto w = fourier_eval(D, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        auto k = grid.wavevector(i);
        CHECK(w[i].real() == doctest::Approx((std::cos(k[0]) + std::cos(k[1])) / 2));
    }
}

TEST_CASE("convolve_at with an analytic factor") {
    LatticeField g = LatticeField::delta(2, 3);
    auto f = [](const LatticePoint& y) { return static_cast<double>(y[0] * 10 + y[1]); };
    CHECK(convolve_at(f, g, LatticePoint{3, 4}) == doctest::Approx(34));
}

TEST_CASE("field serialization round trip") {
    auto f = random_field(2, 5, 9);
    std::stringstream ss;
    write_field(ss, f);
    auto g = read_field(ss);
    REQUIRE(g.same_shape(f));
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(g[i] == f[i]);
}
