#include "lacelab/frac.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "lacelab/errors.hpp"
#include "lacelab/parallel.hpp"

namespace lacelab {

namespace {

constexpr double two_pi = 2.0 * M_PI;

// Bernoulli numbers B_2, B_4, B_6, B_8.
constexpr double bernoulli[] = {1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30};

double falling(double s, int j) {
    double r = 1;
    for (int i = 0; i < j; ++i) r *= s - i;
    return r;
}

// sum_{n >= N} sum_a c_a (2 pi n + a)^s by Euler-Maclaurin; the combination must decay.
double em_tail(std::span<const std::pair<double, double>> terms, double s, int N) {
    double eps = s + 1.0;
    double integral = 0, half = 0;
    for (auto [c, a] : terms) {
        integral -= c * std::pow(two_pi * N + a, eps) / (two_pi * eps);
        half += c * std::pow(two_pi * N + a, s);
    }
    double total = integral + 0.5 * half;
    double fact = 2;  // (2k)!
    for (int k = 1; k <= 4; ++k) {
        int j = 2 * k - 1;
        double deriv = 0;
        for (auto [c, a] : terms) deriv += c * std::pow(two_pi, j) * falling(s, j) * std::pow(two_pi * N + a, s - j);
        total -= bernoulli[k - 1] / fact * deriv;
        fact *= (2 * k + 1) * (2 * k + 2);
    }
    return total;
}

template <int N>
double gl(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss<double, N>::integrate(f, a, b);
}

double gl_n(int n, const std::function<double(double)>& f, double a, double b) {
    if (n <= 16) return gl<16>(f, a, b);
    if (n <= 24) return gl<24>(f, a, b);
    if (n <= 32) return gl<32>(f, a, b);
    return gl<48>(f, a, b);
}

int next_nodes(int n) { return n <= 16 ? 24 : (n <= 24 ? 32 : 48); }

}  // namespace

double dirichlet_eta(double s) {
    const int K = 48;
    std::vector<double> S(K);
    double acc = 0;
    for (int n = 1; n <= K; ++n) {
        acc += (n % 2 ? 1.0 : -1.0) * std::pow(n, -s);
        S[n - 1] = acc;
    }
    for (int level = 0; level < K - 1; ++level)
        for (int i = 0; i + 1 < K - level; ++i) S[i] = 0.5 * (S[i] + S[i + 1]);
    return S[0];
}

FracKernel::FracKernel(Parity parity, double eps, int series_terms) : parity_(parity), eps_(eps), terms_(series_terms) {
    require(eps > 0 && eps < 1, ErrorCode::domain, "fractional kernel: eps must lie in (0,1)");
    require(series_terms >= 4, ErrorCode::domain, "fractional kernel: need at least 4 explicit series terms");
    double g = boost::math::tgamma(eps);
    if (parity == Parity::odd) {
        c_ = 1.0 / (2.0 * g * std::sin(M_PI * eps / 2));
    } else {
        c_ = 1.0 / (2.0 * g * std::cos(M_PI * eps / 2));
        at_pi_ = -dirichlet_eta(eps) / M_PI;
    }
}

double FracKernel::tail_sum(double p) const {
    double s = eps_ - 1.0;
    double sum = 0;
    if (parity_ == Parity::odd) {
        for (int n = 1; n < terms_; ++n) sum += std::pow(two_pi * n - p, s) - std::pow(two_pi * n + p, s);
        std::pair<double, double> t[] = {{1.0, -p}, {-1.0, p}};
        return sum + em_tail(t, s, terms_);
    }
    for (int n = 1; n < terms_; ++n)
        sum += std::pow(two_pi * n - p, s) + std::pow(two_pi * n + p, s) - std::pow(two_pi * n - M_PI, s) -
               std::pow(two_pi * n + M_PI, s);
    std::pair<double, double> t[] = {{1.0, -p}, {1.0, p}, {-1.0, -M_PI}, {-1.0, M_PI}};
    return sum + em_tail(t, s, terms_);
}

double FracKernel::remainder(double p) const {
    double a = std::abs(p);
    require(a <= M_PI, ErrorCode::domain, "fractional kernel: p must lie in [-pi, pi]");
    if (parity_ == Parity::odd) {
        double r = -c_ * tail_sum(a);
        return p < 0 ? -r : r;
    }
    return c_ * (-std::pow(M_PI, eps_ - 1.0) + tail_sum(a)) + at_pi_;
}

double FracKernel::real_value(double p) const {
    require(p != 0.0, ErrorCode::domain, "fractional kernel: singular at p = 0");
    double a = std::abs(p);
    double sing = c_ * std::pow(a, eps_ - 1.0);
    if (parity_ == Parity::odd) return (p < 0 ? -sing : sing) + remainder(p);
    return sing + remainder(p);
}

std::complex<double> FracKernel::operator()(double p) const {
    double v = real_value(p);
    if (parity_ == Parity::odd) return {0.0, -v};
    return {v, 0.0};
}

double FracKernel::integral_value(double p) const {
    require(p != 0.0, ErrorCode::domain, "fractional kernel: singular at p = 0");
    double a = std::abs(p);
    double inv = 1.0 / eps_;
    double cp = std::cos(a), sp = std::sin(a);
    // t = u^{1/eps} removes the t^{eps-1} factor.
    auto f = [&](double u) {
        double t = std::pow(u, inv);
        if (t > 700) return 0.0;
        if (parity_ == Parity::odd) return sp / (std::cosh(t) - cp);
        // sinh t/(cosh t - cos p) - 1, rewritten in e^{-t} to avoid cancellation
        double em = std::exp(-t);
        double denom = 0.5 * (1.0 + em * em) - cp * em;
        return (em * (cp - em)) / denom;
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    double upper = std::pow(710.0, eps_);
    double knee = std::min(upper, std::pow(a, eps_));
    double v = GK::integrate(f, 0.0, knee, 20, 1e-13) + GK::integrate(f, knee, upper, 20, 1e-13);
    v /= two_pi * boost::math::tgamma(eps_) * eps_;
    return (parity_ == Parity::odd && p < 0) ? -v : v;
}

double FracKernel::weight(int x) const {
    if (x == 0) return 0.0;
    double w = std::pow(std::abs(x), -eps_);
    return (parity_ == Parity::odd && x < 0) ? -w : w;
}

IdentityResult kernel_fourier_identity(const FracKernel& L, int x, int quad_nodes) {
    bool odd = L.parity() == Parity::odd;
    double s = L.eps() - 1.0;
    double c = L.singular_coeff();
    int ax = std::abs(x);
    auto osc = [&](double p) { return odd ? std::sin(p * ax) : std::cos(p * ax); };

    auto evaluate = [&](int nodes) {
        if (ax == 0) {
            if (odd) return 0.0;
            std::function<double(double)> rem = [&](double p) { return L.remainder(p); };
            double r = gl_n(nodes, rem, 0.0, M_PI / 2) + gl_n(nodes, rem, M_PI / 2, M_PI);
            return 2.0 * (c * std::pow(M_PI, L.eps()) / L.eps() + r);
        }
        double a = std::min(M_PI, 1.0 / ax);
        // c int_0^a {sin,cos}(px) p^s dp from the Taylor series of the oscillatory factor.
        double sing = 0, term_coeff = odd ? ax : 1.0;  // x^k / k!
        for (int j = 0; j < 60; ++j) {
            int k = odd ? 2 * j + 1 : 2 * j;
            double term = term_coeff * std::pow(a, s + k + 1) / (s + k + 1);
            sing += (j % 2 ? -term : term);
            if (std::abs(term) < 1e-18 * std::abs(sing)) break;
            term_coeff *= static_cast<double>(ax) * ax / ((k + 1.0) * (k + 2.0));
        }
        sing *= c;
        std::function<double(double)> near = [&](double p) { return osc(p) * L.remainder(p); };
        double part = sing + gl_n(nodes, near, 0.0, a);
        std::function<double(double)> far = [&](double p) { return osc(p) * L.real_value(p); };
        double lo = a;
        double width = std::min(1.0, two_pi / ax / 2);
        while (lo < M_PI) {
            double hi = std::min(M_PI, lo + std::min(lo, width));
            if (M_PI - hi < 1e-3 * width) hi = M_PI;
            part += gl_n(nodes, far, lo, hi);
            lo = hi;
        }
        return 2.0 * part;
    };
    double v1 = evaluate(quad_nodes);
    double v2 = evaluate(next_nodes(quad_nodes));
    IdentityResult r;
    r.value = v2;
    r.target = x == 0 ? 0.0 : (odd && x < 0 ? -1.0 : 1.0) * std::pow(ax, -L.eps());
    if (odd && x < 0) r.value = -r.value;
    r.residual = std::abs(r.value - r.target);
    r.self_error = std::abs(v1 - v2);
    if (!(r.self_error < 1e-8)) {
        std::ostringstream os;
        os << "kernel identity: quadrature self-estimate " << r.self_error << " too large at x = " << x;
        fail(ErrorCode::numerical, os.str());
    }
    return r;
}

KernelBoundReport kernel_bounds_check(const FracKernel& L, std::size_t samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> up(0.0, M_PI);
    KernelBoundReport rep;
    double e = L.eps();
    const bool odd = L.parity() == Parity::odd;
    if (!odd) rep.min_even_value = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < samples; ++i) {
        double p = up(rng);
        if (p == 0.0) continue;
        ++rep.samples;
        double v = L.real_value(p);
        double vm = L.real_value(-p);
        if (odd ? std::abs(v + vm) > 1e-12 * std::abs(v) : std::abs(v - vm) > 1e-12 * std::abs(v)) rep.parity_ok = false;
        double pe = std::pow(p, e - 1.0);
        if (odd) {
            rep.max_abs_ratio = std::max(rep.max_abs_ratio, std::abs(v) / (0.5 * pe));
        } else {
            rep.min_even_value = std::min(rep.min_even_value, v);
            rep.max_upper_ratio = std::max(rep.max_upper_ratio, v / (pe / (M_PI * (1.0 - e))));
        }
        double h = std::min(1e-5, 0.25 * std::min(p, M_PI - p));
        if (h < 1e-12) continue;
        double dv = (L.real_value(p + h) - L.real_value(p - h)) / (2 * h);
        double db = std::pow(p, e - 2.0) * (odd ? 1.0 : 1.0 / M_PI);
        rep.max_deriv_ratio = std::max(rep.max_deriv_ratio, std::abs(dv) / db);
    }
    bool bounds = rep.max_deriv_ratio <= 1.0;
    if (odd)
        bounds = bounds && rep.max_abs_ratio <= 1.0;
    else
        bounds = bounds && rep.min_even_value >= -std::log(2.0) / M_PI && rep.max_upper_ratio <= 1.0;
    rep.ok = rep.parity_ok && bounds;
    return rep;
}

namespace {

FourierValues weighted_transform(const LatticeField& f, const std::function<double(int)>& w1, const FourierGrid& grid) {
    LatticeField g(f.dim(), f.side(), false);
    std::vector<int> x(f.dim());
    std::map<int, double> cache;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f[i] == 0.0) continue;
        f.coords(i, x);
        auto it = cache.find(x[0]);
        if (it == cache.end()) it = cache.emplace(x[0], w1(x[0])).first;
        g[i] = f[i] * it->second;
    }
    return fourier_eval(g, grid);
}

}  // namespace

FourierValues frac_transform(const LatticeField& f, int m, double eps, const FourierGrid& grid) {
    require(m >= 0, ErrorCode::domain, "frac_transform: m must be a positive integer");
    if (m == 0) fail(ErrorCode::domain, "frac_transform: m = 0 is the negative-exponent case; use frac_transform_negative");
    require(grid.dim() == f.dim(), ErrorCode::shape, "frac_transform: grid dimension mismatch");
    FracKernel L(m % 2 ? Parity::odd : Parity::even, eps);
    return weighted_transform(f, [&](int x1) {
        if (x1 == 0) return 0.0;
        return std::pow(static_cast<double>(x1), m) * kernel_fourier_identity(L, x1).value;
    }, grid);
}

FourierValues frac_transform_negative(const LatticeField& f, Parity parity, double eps, const FourierGrid& grid) {
    require(grid.dim() == f.dim(), ErrorCode::shape, "frac_transform: grid dimension mismatch");
    FracKernel L(parity, eps);
    return weighted_transform(f, [&](int x1) { return kernel_fourier_identity(L, x1).value; }, grid);
}

LatticeField inverse_fourier(const FourierValues& v, const FourierGrid& grid, int L) {
    int d = grid.dim(), M = grid.points();
    require(L % 2 == 1 && L <= M, ErrorCode::shape, "inverse_fourier: box side must be odd and at most M");
    require(v.size() == grid.size(), ErrorCode::shape, "inverse_fourier: value count mismatch");
    int h = (L - 1) / 2;
    // Transform one axis at a time: M^d -> L M^{d-1} -> ... -> L^d.
    std::vector<std::complex<double>> cur(v.begin(), v.end());
    std::vector<int> ext(d, M);
    for (int ax = 0; ax < d; ++ax) {
        std::size_t outer = 1, inner = 1;
        for (int j = 0; j < ax; ++j) outer *= ext[j];
        for (int j = ax + 1; j < d; ++j) inner *= ext[j];
        std::vector<std::complex<double>> nxt(outer * L * inner);
        std::vector<std::complex<double>> ph(static_cast<std::size_t>(L) * M);
        for (int xi = 0; xi < L; ++xi)
            for (int m = 0; m < M; ++m) ph[xi * M + m] = std::polar(1.0 / M, grid.node(m) * (xi - h));
        for (std::size_t o = 0; o < outer; ++o)
            for (int xi = 0; xi < L; ++xi)
                for (std::size_t in = 0; in < inner; ++in) {
                    std::complex<double> s = 0;
                    for (int m = 0; m < M; ++m) s += ph[xi * M + m] * cur[(o * M + m) * inner + in];
                    nxt[(o * L + xi) * inner + in] = s;
                }
        cur.swap(nxt);
        ext[ax] = L;
    }
    LatticeField out(d, L, false);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = cur[i].real();
    return out;
}

DerivativeProbe derivative_bound_probe(const StepDistribution& J, const LatticeField& g, int m, const FourierGrid& grid) {
    int d = J.dim();
    require(m >= 0, ErrorCode::domain, "derivative_bound_probe: m must be nonnegative");
    require(g.dim() == d && grid.dim() == d, ErrorCode::shape, "derivative_bound_probe: dimension mismatch");
    int M = grid.points();
    for (int i = 0; i < M; ++i) require(grid.node(i) != 0.0, ErrorCode::domain, "derivative_bound_probe: grid touches k = 0");

    struct Term {
        std::vector<int> x;
        double w;
    };
    std::vector<Term> js, gs;
    for (const auto& e : J.support()) js.push_back({e.x.coords(), e.weight});
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g[i] != 0.0) gs.push_back({g.point(i).coords(), g[i]});

    // d_1^j of sum_x a(x) prod cos(k_l x_l): x_1^j cos(k_1 x_1 + j pi/2) prod_{l>1} cos(k_l x_l).
    auto derivs = [&](const std::vector<Term>& ts, std::span<const double> k, std::vector<double>& out) {
        out.assign(m + 1, 0.0);
        for (const auto& t : ts) {
            double rest = t.w;
            for (int l = 1; l < d; ++l) rest *= std::cos(k[l] * t.x[l]);
            double x1 = t.x[0], pw = 1;
            for (int j = 0; j <= m; ++j) {
                out[j] += rest * pw * std::cos(k[0] * x1 + j * M_PI / 2);
                pw *= x1;
            }
        }
    };
    std::vector<std::vector<double>> binom(m + 1, std::vector<double>(m + 1, 0.0));
    for (int a = 0; a <= m; ++a) {
        binom[a][0] = 1;
        for (int b = 1; b <= a; ++b) binom[a][b] = binom[a - 1][b - 1] + (b <= a - 1 ? binom[a - 1][b] : 0.0);
    }

    DerivativeProbe rep;
    std::size_t total = grid.size();
    std::vector<std::pair<double, std::size_t>> results;
    std::mutex mu;
    parallel_chunks(total, [&](std::size_t i0, std::size_t i1) {
        std::vector<double> jd, gd, Q(m + 1);
        double lb = 0;
        std::size_t la = i0;
        for (std::size_t idx = i0; idx < i1; ++idx) {
            auto k = grid.wavevector(idx);
            derivs(js, k, jd);
            derivs(gs, k, gd);
            double u = 1.0 - jd[0];
            if (!(u > 0)) fail(ErrorCode::numerical, "derivative_bound_probe: 1 - J^(k) <= 0 at a grid node");
            Q[0] = 1.0 / u;
            for (int n = 1; n <= m; ++n) {
                double s = 0;
                for (int p = 0; p < n; ++p) s += binom[n][p] * (-jd[n - p]) * Q[p];
                Q[n] = -s / u;
            }
            double Gm = 0;
            for (int p = 0; p <= m; ++p) Gm += binom[m][p] * gd[m - p] * Q[p];
            double k2 = 0;
            for (double c : k) k2 += c * c;
            double r = std::pow(std::sqrt(k2), 2 + m) * std::abs(Gm);
            if (r > lb) {
                lb = r;
                la = idx;
            }
        }
        std::lock_guard lock(mu);
        results.emplace_back(lb, la);
    });
    std::sort(results.begin(), results.end(), [](auto& a, auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
    if (!results.empty()) {
        rep.sup_ratio = results.front().first;
        rep.witness = grid.wavevector(results.front().second);
    }
    return rep;
}

ConvBoundReport conv_bound_check(double rho, double eps, int M) {
    require(rho > 1, ErrorCode::domain, "conv_bound_check: rho must exceed 1");
    require(eps > 0 && eps < 1, ErrorCode::domain, "conv_bound_check: eps must lie in (0,1)");
    require(M >= 4 && M % 2 == 0, ErrorCode::domain, "conv_bound_check: M must be even and at least 4");
    ConvBoundReport rep;
    rep.rho = rho;
    rep.eps = eps;
    rep.M = M;
    std::vector<double> nodes;
    for (int i = 0; i < M / 2; ++i) nodes.push_back(M_PI * (2 * i + 1) / M);
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    for (double k1 : nodes)
        for (double kv : nodes) {
            auto df = [&](double p) {
                double q = k1 - p;
                if (q >= M_PI) q -= 2 * M_PI;
                if (q < -M_PI) q += 2 * M_PI;
                double r2 = q * q + kv * kv;
                return -rho * q * std::pow(r2, -0.5 * rho - 1.0);
            };
            auto integrand = [&](double p) { return std::pow(std::abs(p), eps - 1.0) * df(p); };
            // On panels ending at p = 0, p = +-v^{1/eps} absorbs the |p|^{eps-1} singularity.
            auto panel = [&](double lo, double hi) {
                if (lo == 0.0)
                    return GK::integrate([&](double v) { return df(std::pow(v, 1.0 / eps)); }, 0.0, std::pow(hi, eps), 20, 1e-11) / eps;
                if (hi == 0.0)
                    return GK::integrate([&](double v) { return df(-std::pow(v, 1.0 / eps)); }, 0.0, std::pow(-lo, eps), 20, 1e-11) / eps;
                return GK::integrate(integrand, lo, hi, 20, 1e-11);
            };
            std::vector<double> cuts = {-M_PI, k1 - M_PI, 0.0, k1 - kv, k1, k1 + kv, M_PI};
            for (auto& c : cuts) c = std::clamp(c, -M_PI, M_PI);
            std::sort(cuts.begin(), cuts.end());
            cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
            double I = 0;
            for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
                if (cuts[i + 1] - cuts[i] > 1e-15) I += panel(cuts[i], cuts[i + 1]);
            double k = std::hypot(k1, kv);
            double a = std::abs(I);
            rep.margin = std::max(rep.margin, a * std::pow(k1, 1 - eps) * std::pow(kv, rho - 1) * k);
            if (k1 <= kv)
                rep.margin_inner = std::max(rep.margin_inner, a / (std::pow(k1, eps - 1) * std::pow(kv, -rho)));
            else
                rep.margin_outer = std::max(rep.margin_outer, a / (std::pow(k1, eps - 2) * std::pow(kv, 1 - rho)));
        }
    return rep;
}

}  // namespace lacelab
