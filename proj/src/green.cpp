#include "lacelab/green.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include "cosine_sum.hpp"
#include "lacelab/errors.hpp"
#include "lacelab/parallel.hpp"
#include "numeric.hpp"

namespace lacelab {

namespace detail {

double gaussian_density(int d, double K1, double r2, double t) {
    return std::pow(d / (2.0 * M_PI * K1 * t), 0.5 * d) * std::exp(-d * r2 / (2.0 * K1 * t));
}

double gaussian_tail_integral(int d, double K1, double r2, double t0) {
    double A = std::pow(d / (2.0 * M_PI * K1), 0.5 * d);
    double a = 0.5 * d - 1.0;
    double beta = d * r2 / (2.0 * K1);
    if (beta == 0.0) return A * std::pow(t0, -a) / a;
    if (t0 == 0.0) return A * std::pow(beta, -a) * boost::math::tgamma(a);
    return A * std::pow(beta, -a) * boost::math::tgamma_lower(a, beta / t0);
}

double richardson(std::span<const double> h, std::span<const double> v, std::span<const double> exponents) {
    auto n = static_cast<Eigen::Index>(v.size());
    require(n >= 1 && h.size() == v.size() && exponents.size() + 1 >= v.size(), ErrorCode::domain,
            "richardson: inconsistent ladder");
    if (n == 1) return v[0];
    Eigen::MatrixXd A(n, n);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        A(i, 0) = 1.0;
        for (Eigen::Index j = 1; j < n; ++j) A(i, j) = std::pow(h[i], exponents[j - 1]);
        b(i) = v[i];
    }
    return A.colPivHouseholderQr().solve(b)(0);
}

}  // namespace detail

double gaussian_constant(int d) {
    require(d >= 3, ErrorCode::domain, "gaussian_constant: d must be at least 3 (Gamma(d/2-1) has a pole at d=2)");
    return d * boost::math::tgamma(0.5 * d - 1.0) / (2.0 * std::pow(M_PI, 0.5 * d));
}

std::string to_string(GreenMethod m) {
    switch (m) {
        case GreenMethod::quadrature: return "quadrature";
        case GreenMethod::heat_split: return "heat-split";
        case GreenMethod::series: return "series";
    }
    return "quadrature";
}

GreenTarget GreenTarget::box(int L) {
    require(L >= 1 && L % 2 == 1, ErrorCode::shape, "green target box side must be odd");
    GreenTarget t;
    t.L = L;
    return t;
}

GreenTarget GreenTarget::list(std::vector<LatticePoint> pts) {
    GreenTarget t;
    t.points = std::move(pts);
    return t;
}

std::vector<std::vector<int>> GreenTarget::canonical(int d) const {
    std::vector<std::vector<int>> out;
    if (dense()) {
        int h = (L - 1) / 2;
        std::vector<int> x(d, 0);
        // Tuples h >= x_0 >= x_1 >= ... >= x_{d-1} >= 0.
        while (true) {
            out.push_back(x);
            int j = d - 1;
            while (j >= 0) {
                int cap = j == 0 ? h : x[j - 1];
                if (x[j] < cap) break;
                --j;
            }
            if (j < 0) break;
            ++x[j];
            for (int t = j + 1; t < d; ++t) x[t] = 0;
        }
        return out;
    }
    std::set<std::vector<int>> s;
    for (const auto& p : points) {
        require(p.dim() == d, ErrorCode::shape, "green target dimension mismatch");
        s.insert(p.canonical().coords());
    }
    return {s.begin(), s.end()};
}

int GreenTarget::radius(int d) const {
    if (dense()) return (L - 1) / 2;
    int r = 0;
    for (const auto& p : points)
        for (int j = 0; j < d; ++j) r = std::max(r, std::abs(p[j]));
    return r;
}

double GreenResult::at(const LatticePoint& x) const {
    auto it = values_.find(x.canonical().coords());
    if (it == values_.end()) {
        std::ostringstream os;
        os << "green result has no value at " << x;
        fail(ErrorCode::domain, os.str());
    }
    return it->second;
}

LatticeField GreenResult::to_field(int L) const {
    LatticeField f(d_, L, true);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = at(f.point(i));
    return f;
}

namespace {

void store(GreenResult& r, const std::vector<std::vector<int>>& pts, const std::vector<double>& v) {
    for (std::size_t i = 0; i < pts.size(); ++i) r.set(LatticePoint(pts[i]), v[i]);
}

}  // namespace

GreenResult green_quadrature(const StepDistribution& J, const GreenTarget& target, const QuadratureOptions& opt) {
    int d = J.dim();
    require(d >= 3, ErrorCode::domain, "green_quadrature: d must be at least 3");
    int levels = opt.levels > 0 ? opt.levels : (d <= 3 ? 3 : 2);
    int Mmin = opt.M >> (levels - 1);
    require(opt.M % 2 == 0 && Mmin >= 2 && Mmin % 2 == 0 && (Mmin << (levels - 1)) == opt.M, ErrorCode::domain,
            "green_quadrature: M must be even at every level of the ladder");
    auto pts = target.canonical(d);
    detail::Symbol sym(J);
    detail::RowKernel inv = [](std::span<const double> u, std::span<double> out) {
        for (std::size_t i = 0; i < u.size(); ++i) {
            if (!(u[i] > 0.0)) fail(ErrorCode::numerical, "green_quadrature: 1 - J^(k) <= 0 at a grid node (J invalid or supercritical)");
            out[i] = 1.0 / u[i];
        }
    };

    std::vector<std::vector<double>> raw;
    std::vector<double> h;
    GreenResult res(d, GreenMethod::quadrature);
    for (int l = levels - 1; l >= 0; --l) {
        int M = opt.M >> l;
        raw.push_back(detail::cosine_sum(detail::midpoint_axis(M), sym, inv, pts));
        h.push_back(1.0 / M);
        res.diagnostics.grids.push_back(M);
    }
    std::vector<double> exps = {double(d - 2), double(d), double(d + 2), double(d + 4)};
    std::vector<double> out(pts.size());
    double err = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        std::vector<double> v;
        for (const auto& r : raw) v.push_back(r[i]);
        out[i] = detail::richardson(h, v, exps);
        err = std::max(err, std::abs(out[i] - v.back()));
    }
    for (const auto& r : raw) res.diagnostics.levels.push_back(r.front());
    res.diagnostics.error_estimate = levels > 1 ? err : std::numeric_limits<double>::infinity();
    store(res, pts, out);
    return res;
}

namespace {

// sum_{n<N} r^n with r = 1 - u.
double partial_geometric(double u, int N) {
    if (u == 0.0) return N;
    double r = 1.0 - u;
    if (r > 0.0 && std::abs(u) < 0.5) return -std::expm1(N * std::log1p(-u)) / u;
    return (1.0 - std::pow(r, N)) / u;
}

int odd_at_least(double v) {
    int n = static_cast<int>(std::ceil(v));
    return n % 2 ? n : n + 1;
}

}  // namespace

GreenResult green_series(const StepDistribution& J, const GreenTarget& target, int n_max, const SeriesOptions& opt) {
    int d = J.dim();
    require(d >= 3, ErrorCode::domain, "green_series: d must be at least 3");
    require(J.nonnegative(), ErrorCode::domain, "green_series: J must be nonnegative");
    require(n_max >= 0, ErrorCode::domain, "green_series: n_max must be nonnegative");
    int N = n_max + 1;
    int ladder = opt.tail ? std::max(1, opt.ladder) : 1;
    if (opt.tail)
        require(N % (1 << ladder) == 0 && (N >> (ladder - 1)) >= 16, ErrorCode::domain,
                "green_series: with the tail, n_max+1 must be divisible by 2^ladder and n_max+1 >> (ladder-1) >= 16");
    auto pts = target.canonical(d);
    int R = target.radius(d);
    double K1 = J.K1();
    detail::Symbol sym(J);
    GreenResult res(d, GreenMethod::series);
    res.diagnostics.truncation_order = n_max;

    std::vector<std::vector<double>> levels;
    std::vector<double> h;
    double wrap = 0;
    for (int l = ladder - 1; l >= 0; --l) {
        int Nl = N >> l;
        double sigma = std::sqrt(Nl * K1 / d);
        int Lw;
        if (opt.torus > 0) {
            require(opt.torus % 2 == 1 && opt.torus >= 2 * R + 1, ErrorCode::shape, "green_series: torus side must be odd and cover the target");
            Lw = opt.torus;
        } else {
            double reach = std::min(static_cast<double>(Nl) * J.range(), std::ceil(10.0 * sigma));
            Lw = odd_at_least(std::max(2.0 * R + 1, R + reach + 1));
        }
        double gap = Lw - R;
        double w = gap > static_cast<double>(Nl) * J.range() ? 0.0 : Nl * 2.0 * d * std::exp(-gap * gap / (2 * sigma * sigma));
        if (w > opt.wrap_tol) {
            std::ostringstream os;
            os << "green_series: wrap contamination " << w << " exceeds tolerance " << opt.wrap_tol
               << " on torus " << Lw << "; use a larger torus";
            fail(ErrorCode::domain, os.str());
        }
        wrap = std::max(wrap, w);
        double nodes = std::pow((Lw + 1) / 2.0, d);
        require(nodes <= 4e9, ErrorCode::budget, "green_series: torus grid exceeds node budget");
        detail::RowKernel F = [Nl](std::span<const double> u, std::span<double> out) {
            for (std::size_t i = 0; i < u.size(); ++i) out[i] = partial_geometric(u[i], Nl);
        };
        auto v = detail::cosine_sum(detail::torus_axis(Lw), sym, F, pts);
        if (opt.tail)
            for (std::size_t i = 0; i < pts.size(); ++i) {
                double r2 = 0;
                for (int c : pts[i]) r2 += double(c) * c;
                v[i] += detail::gaussian_tail_integral(d, K1, r2, Nl);
            }
        levels.push_back(std::move(v));
        h.push_back(1.0 / Nl);
        res.diagnostics.grids.push_back(Lw);
    }
    res.diagnostics.wrap_estimate = wrap;

    std::vector<double> exps;
    for (int j = 0; j < ladder; ++j) exps.push_back(0.5 * d + j);
    std::vector<double> out(pts.size());
    double err = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        std::vector<double> v;
        for (const auto& r : levels) v.push_back(r[i]);
        out[i] = detail::richardson(h, v, exps);
        if (opt.tail) {
            err = std::max(err, std::abs(out[i] - v.back()));
        } else {
            double r2 = 0;
            for (int c : pts[i]) r2 += double(c) * c;
            err = std::max(err, detail::gaussian_tail_integral(d, K1, r2, N));
        }
    }
    for (const auto& r : levels) res.diagnostics.levels.push_back(r.front());
    res.diagnostics.error_estimate = err + wrap;
    store(res, pts, out);
    return res;
}

AsymptoteReport asymptotics_report(const GreenResult& C, const StepDistribution& J, double rho) {
    int d = J.dim();
    require(rho >= 0, ErrorCode::domain, "asymptotics_report: rho must be nonnegative");
    require(std::isfinite(J.K2prime(rho)), ErrorCode::domain, "asymptotics_report: K2'(rho) must be finite");
    AsymptoteReport rep;
    rep.d = d;
    rep.a_d = gaussian_constant(d);
    rep.K1 = J.K1();
    rep.predicted = rep.a_d / rep.K1;
    rep.error_exponent = std::min(rho, 2.0) / d;
    for (const auto& [key, val] : C.values()) {
        LatticePoint x(key);
        if (x.is_origin()) continue;
        int nz = 0;
        bool diag = true;
        for (int j = 0; j < d; ++j) {
            if (key[j] != 0) ++nz;
            diag = diag && key[j] == key[0];
        }
        if (nz != 1 && !diag) continue;
        double r = x.norm();
        double s = std::pow(r, d - 2) * val;
        rep.rows.push_back({x, r, val, s, s / rep.predicted - 1.0});
    }
    std::sort(rep.rows.begin(), rep.rows.end(), [](const AsymptoteRow& a, const AsymptoteRow& b) {
        return a.absx < b.absx || (a.absx == b.absx && a.x < b.x);
    });
    // Least-squares slope of log|dev| against log|x| over axis rows.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& r : rep.rows) {
        int nz = 0;
        for (int j = 0; j < d; ++j) nz += r.x[j] != 0;
        if (nz != 1 || r.deviation == 0) continue;
        double lx = std::log(r.absx), ly = std::log(std::abs(r.deviation));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n >= 2 && n * sxx - sx * sx > 0) rep.fitted_exponent = -(n * sxy - sx * sy) / (n * sxx - sx * sx);
    return rep;
}

TwoPointResult lace_two_point(const LatticeField& g, const StepDistribution& J, const GreenTarget& target,
                              const QuadratureOptions& opt) {
    int d = J.dim();
    require(g.dim() == d, ErrorCode::shape, "lace_two_point: g dimension mismatch");
    require(check_symmetry(g), ErrorCode::domain, "lace_two_point: g must be Z^d-symmetric");
    std::vector<std::pair<LatticePoint, double>> gs;
    KahanSum sg;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g[i] != 0.0) {
            gs.emplace_back(g.point(i), g[i]);
            sg.add(g[i]);
        }
    auto xs = target.canonical(d);
    std::vector<LatticePoint> need;
    for (const auto& xv : xs) {
        LatticePoint x(xv);
        for (const auto& [y, w] : gs) {
            std::vector<int> z(d);
            for (int j = 0; j < d; ++j) z[j] = x[j] - y[j];
            need.emplace_back(std::move(z));
        }
    }
    auto C = green_quadrature(J, GreenTarget::list(std::move(need)), opt);
    TwoPointResult out;
    out.H = GreenResult(d, GreenMethod::quadrature);
    double abs_g = 0;
    for (const auto& [y, w] : gs) abs_g += std::abs(w);
    for (const auto& xv : xs) {
        LatticePoint x(xv);
        KahanSum s;
        for (const auto& [y, w] : gs) {
            std::vector<int> z(d);
            for (int j = 0; j < d; ++j) z[j] = x[j] - y[j];
            s.add(w * C.at(LatticePoint(std::move(z))));
        }
        out.H.set(x, s.value());
    }
    out.H.diagnostics = C.diagnostics;
    out.H.diagnostics.error_estimate = C.diagnostics.error_estimate * abs_g;
    out.sum_g = sg.value();
    out.A = out.sum_g / J.K1();
    return out;
}

ResolventReport resolvent_check(const GreenResult& C, const StepDistribution& J) {
    int d = J.dim();
    ResolventReport rep;
    double absJ = 0;
    for (const auto& e : J.support()) absJ += std::abs(e.weight);
    double scale = 0;
    for (const auto& [key, val] : C.values()) {
        LatticePoint x(key);
        bool ok = true;
        KahanSum s;
        for (const auto& e : J.support()) {
            std::vector<int> z(d);
            for (int j = 0; j < d; ++j) z[j] = x[j] - e.x[j];
            LatticePoint zp(std::move(z));
            if (!C.has(zp)) {
                ok = false;
                break;
            }
            s.add(e.weight * C.at(zp));
        }
        if (!ok) continue;
        double r = val - (x.is_origin() ? 1.0 : 0.0) - s.value();
        rep.max_residual = std::max(rep.max_residual, std::abs(r));
        scale = std::max(scale, std::abs(val));
        ++rep.points;
    }
    // Truncation of C propagates through 1 + sum|J|; the last term covers accumulated roundoff.
    rep.estimate = C.diagnostics.error_estimate * (1.0 + absJ) + 1e-12 * std::max(scale, 1.0);
    rep.ok = rep.points > 0 && rep.max_residual <= rep.estimate;
    return rep;
}

bool power_exp_bound_holds(double y, double alpha, double beta) {
    require(y > 0 && alpha > 0 && beta > 0, ErrorCode::domain, "power_exp_bound: arguments must be positive");
    double lhs = -beta * std::log(y) - alpha / y;
    double rhs = beta * (std::log(beta) - std::log(alpha) - 1.0);
    double tol = 16 * std::numeric_limits<double>::epsilon() * std::max({1.0, std::abs(lhs), std::abs(rhs), alpha / y, beta * std::abs(std::log(y))});
    return lhs <= rhs + tol;
}

bool gaussian_tail_bound_holds(double a, double b, int d) {
    require(a > 0 && b >= 0 && d >= 1, ErrorCode::domain, "gaussian_tail_bound: need a > 0, b >= 0, d >= 1");
    double z = a * b * b;
    double q = boost::math::gamma_q(0.5 * d, z);
    if (q == 0.0) return true;
    double lhs = -0.5 * d * std::log(4 * M_PI * a) + std::log(q);
    double rhs = -0.5 * d * std::log(2 * M_PI * a) - 0.5 * z;
    double tol = 16 * std::numeric_limits<double>::epsilon() * std::max({1.0, std::abs(lhs), std::abs(rhs)});
    return lhs <= rhs + tol;
}

HelperReport check_power_exp_bound(std::size_t draws, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> lu(std::log(1e-3), std::log(1e3));
    HelperReport rep;
    for (std::size_t i = 0; i < draws; ++i) {
        double y = std::exp(lu(rng)), a = std::exp(lu(rng)), b = std::exp(lu(rng));
        ++rep.draws;
        if (!power_exp_bound_holds(y, a, b)) ++rep.failures;
    }
    return rep;
}

HelperReport check_gaussian_tail_bound(std::size_t draws, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> la(std::log(1e-2), std::log(1e2));
    std::uniform_real_distribution<double> ub(0.0, 6.0);
    std::uniform_int_distribution<int> ud(1, 40);
    HelperReport rep;
    for (std::size_t i = 0; i < draws; ++i) {
        double a = std::exp(la(rng));
        double b = ub(rng) / std::sqrt(a);
        int d = ud(rng);
        ++rep.draws;
        if (!gaussian_tail_bound_holds(a, b, d)) ++rep.failures;
    }
    return rep;
}

}  // namespace lacelab
