#include "lacelab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <map>

#include "fft_conv.hpp"
#include "lacelab/errors.hpp"
#include "lacelab/parallel.hpp"

namespace lacelab {

LatticePoint LatticePoint::axis(int d, int j, int length) {
    LatticePoint x = origin(d);
    x[j] = length;
    return x;
}

long long LatticePoint::norm2() const {
    long long s = 0;
    for (int c : c_) s += static_cast<long long>(c) * c;
    return s;
}

double LatticePoint::norm() const { return std::sqrt(static_cast<double>(norm2())); }

double LatticePoint::clamped_norm() const { return std::max(norm(), 1.0); }

int LatticePoint::l1() const {
    int s = 0;
    for (int c : c_) s += std::abs(c);
    return s;
}

bool LatticePoint::is_origin() const {
    return std::all_of(c_.begin(), c_.end(), [](int c) { return c == 0; });
}

LatticePoint LatticePoint::canonical() const {
    std::vector<int> a(c_.size());
    std::transform(c_.begin(), c_.end(), a.begin(), [](int c) { return std::abs(c); });
    std::sort(a.begin(), a.end(), std::greater<>());
    return LatticePoint(std::move(a));
}

std::int64_t LatticePoint::orbit_size() const {
    LatticePoint c = canonical();
    int d = c.dim();
    std::int64_t n = 1;
    for (int i = 2; i <= d; ++i) n *= i;
    int nonzero = 0;
    for (int j = 0; j < d; ++j)
        if (c[j] != 0) ++nonzero;
    n <<= nonzero;
    int j = 0;
    while (j < d) {
        int k = j;
        while (k < d && c[k] == c[j]) ++k;
        for (int m = 2; m <= k - j; ++m) n /= m;
        j = k;
    }
    return n;
}

std::ostream& operator<<(std::ostream& os, const LatticePoint& x) {
    os << '(';
    for (int j = 0; j < x.dim(); ++j) os << (j ? "," : "") << x[j];
    return os << ')';
}

LatticeField::LatticeField(int d, int L, bool symmetric) : d_(d), L_(L), symmetric_(symmetric) {
    require(d >= 1, ErrorCode::shape, "field dimension must be positive");
    require(L >= 1 && L % 2 == 1, ErrorCode::shape, "field side must be odd and positive");
    std::size_t n = 1;
    for (int j = 0; j < d; ++j) {
        if (n > (std::size_t(1) << 40) / static_cast<std::size_t>(L))
            fail(ErrorCode::budget, "field too large");
        n *= static_cast<std::size_t>(L);
    }
    values_.assign(n, 0.0);
}

LatticeField LatticeField::delta(int d, int L) {
    LatticeField f(d, L, true);
    f[LatticePoint::origin(d)] = 1.0;
    return f;
}

int LatticeField::wrap(int c) const {
    int h = half();
    int r = (c + h) % L_;
    if (r < 0) r += L_;
    return r - h;
}

std::size_t LatticeField::index(std::span<const int> x) const {
    require(static_cast<int>(x.size()) == d_, ErrorCode::shape, "point dimension mismatch");
    int h = half();
    std::size_t idx = 0;
    for (int j = 0; j < d_; ++j) {
        int r = (x[j] + h) % L_;
        if (r < 0) r += L_;
        idx = idx * L_ + static_cast<std::size_t>(r);
    }
    return idx;
}

void LatticeField::coords(std::size_t idx, std::span<int> out) const {
    int h = half();
    for (int j = d_ - 1; j >= 0; --j) {
        out[j] = static_cast<int>(idx % L_) - h;
        idx /= L_;
    }
}

LatticePoint LatticeField::point(std::size_t idx) const {
    std::vector<int> c(d_);
    coords(idx, c);
    return LatticePoint(std::move(c));
}

double LatticeField::sum() const {
    KahanSum s;
    for (double v : values_) s.add(v);
    return s.value();
}

double LatticeField::abs_sum() const {
    KahanSum s;
    for (double v : values_) s.add(std::abs(v));
    return s.value();
}

double LatticeField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double LatticeField::max_abs() const {
    double m = 0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

LatticeField& LatticeField::operator+=(const LatticeField& o) {
    require(same_shape(o), ErrorCode::shape, "field shape mismatch");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    symmetric_ = symmetric_ && o.symmetric_;
    return *this;
}

LatticeField& LatticeField::operator-=(const LatticeField& o) {
    require(same_shape(o), ErrorCode::shape, "field shape mismatch");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    symmetric_ = symmetric_ && o.symmetric_;
    return *this;
}

LatticeField& LatticeField::operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
}

LatticeField operator+(LatticeField a, const LatticeField& b) { return a += b; }
LatticeField operator-(LatticeField a, const LatticeField& b) { return a -= b; }
LatticeField operator*(double s, LatticeField a) { return a *= s; }

FourierGrid::FourierGrid(int d, int M) : d_(d), M_(M) {
    require(d >= 1, ErrorCode::shape, "grid dimension must be positive");
    require(M >= 2 && M % 2 == 0, ErrorCode::shape, "grid size must be even and at least 2");
}

std::size_t FourierGrid::size() const {
    std::size_t n = 1;
    for (int j = 0; j < d_; ++j) n *= static_cast<std::size_t>(M_);
    return n;
}

double FourierGrid::node(int m) const { return 2.0 * M_PI * (m + 0.5) / M_ - M_PI; }

std::vector<double> FourierGrid::wavevector(std::size_t idx) const {
    std::vector<double> k(d_);
    for (int j = d_ - 1; j >= 0; --j) {
        k[j] = node(static_cast<int>(idx % M_));
        idx /= M_;
    }
    return k;
}

namespace {

// Reorders a centred field so the origin sits at index 0 on every axis.
std::vector<double> to_origin_layout(const LatticeField& f) {
    std::vector<double> out(f.size());
    int L = f.side(), d = f.dim();
    std::vector<int> x(d);
    for (std::size_t i = 0; i < f.size(); ++i) {
        f.coords(i, x);
        std::size_t j = 0;
        for (int a = 0; a < d; ++a) j = j * L + static_cast<std::size_t>((x[a] + L) % L);
        out[j] = f[i];
    }
    return out;
}

LatticeField from_origin_layout(std::span<const double> a, int d, int L, bool symmetric) {
    LatticeField f(d, L, symmetric);
    std::vector<int> x(d);
    for (std::size_t i = 0; i < f.size(); ++i) {
        f.coords(i, x);
        std::size_t j = 0;
        for (int k = 0; k < d; ++k) j = j * L + static_cast<std::size_t>((x[k] + L) % L);
        f[i] = a[j];
    }
    return f;
}

}  // namespace

LatticeField convolve_direct(const LatticeField& f, const LatticeField& g) {
    require(f.same_shape(g), ErrorCode::shape, "convolve: fields must share d and L");
    int d = f.dim();
    LatticeField out(d, f.side(), f.symmetric() && g.symmetric());
    std::vector<int> x(d), y(d), z(d);
    std::vector<std::size_t> nz;
    for (std::size_t j = 0; j < g.size(); ++j)
        if (g[j] != 0.0) nz.push_back(j);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.coords(i, x);
        KahanSum s;
        for (std::size_t j : nz) {
            g.coords(j, y);
            for (int a = 0; a < d; ++a) z[a] = x[a] - y[a];
            s.add(f[f.index(z)] * g[j]);
        }
        out[i] = s.value();
    }
    return out;
}

LatticeField convolve(const LatticeField& f, const LatticeField& g) {
    require(f.same_shape(g), ErrorCode::shape, "convolve: fields must share d and L");
    if (f.size() < 4096) return convolve_direct(f, g);
    auto a = to_origin_layout(f);
    auto b = to_origin_layout(g);
    auto c = detail::fft_convolve(a, b, f.dim(), f.side());
    return from_origin_layout(c, f.dim(), f.side(), f.symmetric() && g.symmetric());
}

LatticeField convolution_power(const LatticeField& f, int n) {
    require(n >= 0, ErrorCode::domain, "convolution power must be nonnegative");
    LatticeField result = LatticeField::delta(f.dim(), f.side());
    result.set_symmetric(f.symmetric());
    if (n == 0) return result;
    LatticeField base = f;
    bool first = true;
    auto check = [](const LatticeField& h) {
        for (double v : h.values())
            if (!std::isfinite(v) || std::abs(v) > 1e300)
                fail(ErrorCode::overflow, "convolution power overflowed double range");
    };
    while (n > 0) {
        if (n & 1) {
            result = first ? base : convolve(result, base);
            first = false;
            check(result);
        }
        n >>= 1;
        if (n > 0) {
            base = convolve(base, base);
            check(base);
        }
    }
    return result;
}

LatticeField weighted_field(const LatticeField& f, double alpha, WeightMode mode) {
    require(alpha >= 0.0, ErrorCode::domain, "weight exponent must be nonnegative");
    if (mode.kind == WeightMode::axis)
        require(mode.axis_index >= 0 && mode.axis_index < f.dim(), ErrorCode::domain, "axis index out of range");
    LatticeField out = f;
    if (alpha == 0.0) return out;
    std::vector<int> x(f.dim());
    for (std::size_t i = 0; i < f.size(); ++i) {
        f.coords(i, x);
        double r;
        if (mode.kind == WeightMode::full) {
            long long n2 = 0;
            for (int c : x) n2 += static_cast<long long>(c) * c;
            r = std::sqrt(static_cast<double>(n2));
        } else {
            r = std::abs(x[mode.axis_index]);
        }
        out[i] = f[i] * std::pow(r, alpha);
    }
    if (mode.kind == WeightMode::axis) out.set_symmetric(false);
    return out;
}

FourierValues fourier_eval(const LatticeField& f, const FourierGrid& grid) {
    require(grid.dim() == f.dim(), ErrorCode::shape, "fourier_eval: grid dimension mismatch");
    int d = f.dim(), L = f.side(), h = f.half(), M = grid.points();
    // Separable transform: contract one axis at a time, site index -> node index.
    std::vector<std::complex<double>> phase(static_cast<std::size_t>(M) * L);
    for (int m = 0; m < M; ++m)
        for (int x = -h; x <= h; ++x)
            phase[static_cast<std::size_t>(m) * L + (x + h)] = std::polar(1.0, -grid.node(m) * x);
    std::vector<std::complex<double>> cur(f.values().begin(), f.values().end());
    std::vector<std::size_t> ext(d, static_cast<std::size_t>(L));
    for (int axis = 0; axis < d; ++axis) {
        std::size_t outer = 1, inner = 1;
        for (int a = 0; a < axis; ++a) outer *= ext[a];
        for (int a = axis + 1; a < d; ++a) inner *= ext[a];
        std::vector<std::complex<double>> next(outer * M * inner);
        for (std::size_t o = 0; o < outer; ++o)
            for (int m = 0; m < M; ++m) {
                auto* dst = &next[(o * M + m) * inner];
                for (int x = 0; x < L; ++x) {
                    auto ph = phase[static_cast<std::size_t>(m) * L + x];
                    const auto* src = &cur[(o * L + x) * inner];
                    for (std::size_t i = 0; i < inner; ++i) dst[i] += ph * src[i];
                }
            }
        ext[axis] = M;
        cur.swap(next);
    }
    if (f.symmetric())
        for (auto& v : cur) v = {v.real(), 0.0};
    return cur;
}

bool check_symmetry(const LatticeField& f, int samples, std::uint64_t seed, double tol) {
    std::mt19937_64 rng(seed);
    int d = f.dim(), h = f.half();
    std::uniform_int_distribution<int> coord(-h, h);
    std::uniform_int_distribution<int> sign(0, 1);
    double scale = std::max(1.0, f.max_abs());
    std::vector<int> x(d), y(d), perm(d);
    for (int s = 0; s < samples; ++s) {
        for (int j = 0; j < d; ++j) x[j] = coord(rng);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        for (int j = 0; j < d; ++j) y[j] = (sign(rng) ? -1 : 1) * x[perm[j]];
        if (std::abs(f[f.index(x)] - f[f.index(y)]) > tol * scale) return false;
    }
    return true;
}

LatticeField symmetrize(const LatticeField& f) {
    std::map<std::vector<int>, std::pair<double, int>> acc;
    std::vector<int> x(f.dim());
    std::vector<std::vector<int>> keys(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        f.coords(i, x);
        keys[i] = LatticePoint(x).canonical().coords();
        auto& a = acc[keys[i]];
        a.first += f[i];
        a.second += 1;
    }
    LatticeField out(f.dim(), f.side(), true);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto& a = acc[keys[i]];
        out[i] = a.first / a.second;
    }
    return out;
}

double outside_radius_mass(const LatticeField& f) {
    double total = f.abs_sum();
    if (total == 0.0) return 0.0;
    double r2 = static_cast<double>(f.half()) * f.half();
    std::vector<int> x(f.dim());
    KahanSum s;
    for (std::size_t i = 0; i < f.size(); ++i) {
        f.coords(i, x);
        double n2 = 0;
        for (int c : x) n2 += static_cast<double>(c) * c;
        if (n2 > r2) s.add(std::abs(f[i]));
    }
    return s.value() / total;
}

double boundary_shell_mass(const LatticeField& f) {
    double total = f.abs_sum();
    if (total == 0.0) return 0.0;
    int h = f.half();
    std::vector<int> x(f.dim());
    KahanSum s;
    for (std::size_t i = 0; i < f.size(); ++i) {
        f.coords(i, x);
        bool edge = std::any_of(x.begin(), x.end(), [h](int c) { return std::abs(c) == h; });
        if (edge) s.add(std::abs(f[i]));
    }
    return s.value() / total;
}

double convolve_at(const std::function<double(const LatticePoint&)>& f, const LatticeField& g, const LatticePoint& x) {
    require(x.dim() == g.dim(), ErrorCode::shape, "convolve_at: dimension mismatch");
    std::vector<int> y(g.dim()), z(g.dim());
    KahanSum s;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g[i] == 0.0) continue;
        g.coords(i, y);
        for (int j = 0; j < g.dim(); ++j) z[j] = x[j] - y[j];
        s.add(g[i] * f(LatticePoint(z)));
    }
    return s.value();
}

void write_field(std::ostream& os, const LatticeField& f) {
    std::ostringstream buf;
    buf.precision(17);
    buf << "lacefield 1 " << f.dim() << ' ' << f.side() << ' ' << (f.symmetric() ? 1 : 0) << '\n';
    for (std::size_t i = 0; i < f.size(); ++i) buf << f[i] << '\n';
    os << buf.str();
}

LatticeField read_field(std::istream& is) {
    std::string magic;
    int version = 0, d = 0, L = 0, sym = 0;
    is >> magic >> version >> d >> L >> sym;
    if (!is || magic != "lacefield" || version != 1) fail(ErrorCode::io, "not a lacefield stream");
    LatticeField f(d, L, sym != 0);
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!(is >> f[i])) fail(ErrorCode::io, "truncated lacefield stream");
    return f;
}

void write_csv(std::ostream& os, const LatticeField& f) {
    std::ostringstream buf;
    buf.precision(17);
    for (int j = 0; j < f.dim(); ++j) buf << 'x' << j + 1 << ',';
    buf << "value\n";
    std::vector<int> x(f.dim());
    for (std::size_t i = 0; i < f.size(); ++i) {
        f.coords(i, x);
        for (int c : x) buf << c << ',';
        buf << f[i] << '\n';
    }
    os << buf.str();
}

}  // namespace lacelab
