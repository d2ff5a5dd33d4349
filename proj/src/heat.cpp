#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cosine_sum.hpp"
#include "lacelab/errors.hpp"
#include "lacelab/green.hpp"
#include "numeric.hpp"

namespace lacelab {

namespace {

// One-dimensional factor (1/2pi) int cos(k a) e^{-t psi(k)} dk of a separable heat kernel,
// by the periodic trapezoid rule on enough nodes to make aliasing negligible.
class AxisHeat {
public:
    explicit AxisHeat(const StepDistribution& J) : w_(J.axis_weights()), K1_(J.K1()), d_(J.dim()) {}

    // Values for each requested |a| at time t.
    std::vector<double> eval(double t, std::span<const int> as) const {
        int amax = 0;
        for (int a : as) amax = std::max(amax, std::abs(a));
        int range = static_cast<int>(w_.size()) - 1;
        double sigma = std::sqrt(t * K1_ / d_);
        int M = 2 * (amax + static_cast<int>(std::ceil(12 * sigma)) + 4 * range) + 64;
        M += M % 2;
        std::vector<double> out(as.size(), 0.0);
        int half = M / 2;
        for (int i = 0; i <= half; ++i) {
            double k = 2.0 * M_PI * i / M;
            double psi = 0;
            for (int m = 1; m <= range; ++m)
                if (w_[m] != 0.0) psi += 2.0 * w_[m] * (1.0 - std::cos(m * k));
            double e = std::exp(-t * psi);
            if (e == 0.0) continue;
            double wt = (i == 0 || i == half) ? 1.0 : 2.0;
            for (std::size_t j = 0; j < as.size(); ++j) out[j] += wt * e * std::cos(k * as[j]);
        }
        for (auto& v : out) v /= M;
        return out;
    }

private:
    std::vector<double> w_;
    double K1_;
    int d_;
};

double heat_kernel_general(const StepDistribution& J, const LatticePoint& x, double t, std::size_t budget) {
    int d = J.dim();
    int R = 0;
    for (int j = 0; j < d; ++j) R = std::max(R, std::abs(x[j]));
    double sigma = std::sqrt(t * J.K1() / d);
    int Lw = 2 * (R + static_cast<int>(std::ceil(12 * sigma)) + 4 * J.range()) + 1;
    double nodes = std::pow((Lw + 1) / 2.0, d);
    if (nodes > static_cast<double>(budget)) {
        std::ostringstream os;
        os << "heat kernel: torus of side " << Lw << " exceeds the node budget at t = " << t;
        fail(ErrorCode::budget, os.str());
    }
    detail::Symbol sym(J);
    detail::RowKernel F = [t](std::span<const double> u, std::span<double> out) {
        for (std::size_t i = 0; i < u.size(); ++i) out[i] = std::exp(-t * u[i]);
    };
    std::vector<std::vector<int>> pts{x.canonical().coords()};
    return detail::cosine_sum(detail::torus_axis(Lw), sym, F, pts)[0];
}

// Largest t whose torus still fits the budget.
double budget_t_max(const StepDistribution& J, int R, std::size_t budget) {
    int d = J.dim();
    double half = std::pow(static_cast<double>(budget), 1.0 / d);
    double sigma = ((2 * half - 1 - 1) / 2.0 - R - 4 * J.range()) / 12.0;
    if (sigma <= 0) return 0;
    return sigma * sigma * d / J.K1();
}

struct Integrator {
    const StepDistribution& J;
    LatticePoint x;
    std::size_t budget;
    bool sep;
    AxisHeat axis;
    std::vector<int> as;
    int panels = 0;
    double err = 0;

    Integrator(const StepDistribution& J_, const LatticePoint& x_, std::size_t b)
        : J(J_), x(x_.canonical()), budget(b), sep(J_.axis_supported()), axis(J_), as(x.coords()) {}

    double I(double t) const {
        if (t == 0.0) return x.is_origin() ? 1.0 : 0.0;
        if (!sep) return heat_kernel_general(J, x, t, budget);
        auto v = axis.eval(t, as);
        double p = 1;
        for (double f : v) p *= f;
        return p;
    }

    double integrate(double a, double b, double tol) {
        if (!(b > a)) return 0.0;
        std::vector<double> cuts;
        if (a == 0.0) {
            cuts.push_back(0.0);
            double t0 = std::min(b, 0.0625);
            for (double c = t0; c < b; c *= 2) cuts.push_back(c);
        } else {
            for (double c = a; c < b; c *= 2) cuts.push_back(c);
        }
        cuts.push_back(b);
        double total = 0;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            if (cuts[i + 1] <= cuts[i]) continue;
            double e = 0;
            total += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
                [this](double t) { return I(t); }, cuts[i], cuts[i + 1], 6, tol, &e);
            err += e;
            ++panels;
        }
        return total;
    }
};

double default_t_max(const StepDistribution& J, const LatticePoint& x) {
    double r2 = static_cast<double>(x.norm2());
    double R = J.range();
    return 1e4 * std::max({1.0, r2, R * R});
}

}  // namespace

double heat_kernel(const StepDistribution& J, const LatticePoint& x, double t) {
    require(t >= 0, ErrorCode::domain, "heat_kernel: t must be nonnegative");
    require(x.dim() == J.dim(), ErrorCode::shape, "heat_kernel: point dimension mismatch");
    Integrator in(J, x, HeatOptions{}.torus_budget);
    return in.I(t);
}

HeatSplit heat_split_at(const StepDistribution& J, const LatticePoint& x, double T, const HeatOptions& opt) {
    int d = J.dim();
    require(d >= 3, ErrorCode::domain, "heat split: d must be at least 3");
    require(T >= 0, ErrorCode::domain, "heat split: T must be nonnegative");
    require(x.dim() == d, ErrorCode::shape, "heat split: point dimension mismatch");
    HeatSplit out;
    out.T = T;
    double t_max = opt.t_max > 0 ? opt.t_max : default_t_max(J, x);
    int R = 0;
    for (int j = 0; j < d; ++j) R = std::max(R, std::abs(x[j]));
    if (!J.axis_supported()) {
        double cap = budget_t_max(J, R, opt.torus_budget);
        if (cap < t_max) {
            t_max = cap;
            out.flags.push_back("t_max reduced to fit the torus budget");
        }
        require(t_max > 0, ErrorCode::budget, "heat split: torus budget too small for this point");
    }
    t_max = std::max(t_max, 8 * T);

    Integrator in(J, x, opt.torus_budget);
    double r2 = static_cast<double>(x.norm2());
    double K1 = J.K1();
    double tol = opt.panel_tol;

    out.C_less = in.integrate(0.0, T, tol);
    double body = T > 0 ? in.integrate(T, t_max, tol) : in.integrate(0.0, t_max, tol);
    double lead_tail = detail::gaussian_tail_integral(d, K1, r2, t_max);
    double gap = in.I(t_max) - detail::gaussian_density(d, K1, r2, t_max);
    double b = gap * std::pow(t_max, 0.5 * d + 1);
    double rem = b * std::pow(t_max, -0.5 * d) / (0.5 * d);
    out.C_greater = body + lead_tail + rem;
    out.total = out.C_less + out.C_greater;
    if (T > 0 || r2 > 0)
        out.gaussian_greater = detail::gaussian_tail_integral(d, K1, r2, T);
    else
        out.gaussian_greater = std::numeric_limits<double>::infinity();
    out.panels = in.panels;
    out.error_estimate = in.err + 0.5 * std::abs(rem);
    if (!(in.err <= 1e-7 * std::abs(out.total) + 1e-15)) {
        std::ostringstream os;
        os << "heat split: t-quadrature self-estimate " << in.err << " too large over " << in.panels
           << " panels on [0, " << t_max << "] at x = " << x;
        fail(ErrorCode::numerical, os.str());
    }
    return out;
}

HeatSplit green_heat_split(const StepDistribution& J, const LatticePoint& x, double eps_split, const HeatOptions& opt) {
    require(eps_split > 0, ErrorCode::domain, "heat split: eps must be positive");
    double T = eps_split * static_cast<double>(x.norm2());
    auto s = heat_split_at(J, x, T, opt);
    if (x.norm() < 1.0 / eps_split) {
        s.in_window = false;
        s.flags.push_back("|x| < 1/eps: outside the split's asymptotic window");
    }
    return s;
}

GreenResult green_heat_split_field(const StepDistribution& J, const GreenTarget& target, double eps_split,
                                   const HeatOptions& opt) {
    int d = J.dim();
    GreenResult res(d, GreenMethod::heat_split);
    auto pts = target.canonical(d);
    double err = 0;
    int panels = 0;
    for (const auto& p : pts) {
        LatticePoint x(p);
        auto s = green_heat_split(J, x, eps_split, opt);
        res.set(x, s.total);
        err = std::max(err, s.error_estimate);
        panels = std::max(panels, s.panels);
        for (const auto& f : s.flags)
            if (std::find(res.diagnostics.flags.begin(), res.diagnostics.flags.end(), f) == res.diagnostics.flags.end())
                res.diagnostics.flags.push_back(f);
    }
    res.diagnostics.error_estimate = err;
    res.diagnostics.panels = panels;
    res.diagnostics.split_T = eps_split;
    return res;
}

SplitReport improved_split_probe(const StepDistribution& J, const LatticePoint& x, double rho, const HeatOptions& opt) {
    require(rho >= 0, ErrorCode::domain, "improved split: rho must be nonnegative");
    int d = J.dim();
    SplitReport rep;
    rep.rho = rho;
    double r = x.norm();
    rep.T = std::pow(r, 2.0 - std::min(rho, 2.0) / d);
    rep.split = heat_split_at(J, x, rep.T, opt);
    rep.reference_total = green_heat_split(J, x, 0.05, opt).total;
    return rep;
}

GrowthReport counterexample_experiment(const CounterexampleParams& params, int box) {
    int d = params.d;
    std::vector<int> ls = params.l_list.empty() ? std::vector<int>{12, 24, 48} : params.l_list;
    require(box % 2 == 1, ErrorCode::shape, "counterexample: box side must be odd");
    int lmax = *std::max_element(ls.begin(), ls.end());
    int halo = static_cast<int>(std::floor(params.h(lmax) * lmax)) + 1;
    if ((box - 1) / 2 < lmax + halo) {
        std::ostringstream os;
        os << "counterexample: box " << box << " cannot hold l_max = " << lmax << " plus halo " << halo;
        fail(ErrorCode::infeasible, os.str());
    }
    auto J = counterexample_step(params);
    GrowthReport rep;
    rep.d = d;
    rep.delta = J.delta();
    rep.K1 = J.K1();
    rep.predicted = gaussian_constant(d) / rep.K1;
    if (!J.axis_supported()) rep.flags.push_back("clusters have positive radius: heat kernel on a torus, subject to budget");
    if (params.l_list.empty()) rep.flags.push_back("empty l_list: nearest-neighbour reference rows at l = 12, 24, 48");
    for (int l : ls) {
        auto x = LatticePoint::axis(d, 0, l);
        auto s = heat_split_at(J, x, 0.0);
        rep.rows.push_back({l, s.total, std::pow(l, d - 2) * s.total, 0.0});
    }
    // log r = log c + log(g h^4) - c' g h^d, least squares in (log c, c').
    std::size_t n = rep.rows.size();
    if (n >= 2) {
        double s1 = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (const auto& row : rep.rows) {
            double g = params.g(row.l), h = params.h(row.l);
            double xv = -g * std::pow(h, d);
            double yv = std::log(row.r) - std::log(g * std::pow(h, 4));
            s1 += 1;
            sx += xv;
            sy += yv;
            sxx += xv * xv;
            sxy += xv * yv;
        }
        double det = s1 * sxx - sx * sx;
        if (std::abs(det) > 1e-300) {
            rep.fit_cprime = (s1 * sxy - sx * sy) / det;
            rep.fit_c = std::exp((sy - rep.fit_cprime * sx) / s1);
            for (auto& row : rep.rows) {
                double g = params.g(row.l), h = params.h(row.l);
                row.trend = rep.fit_c * g * std::pow(h, 4) * std::exp(-rep.fit_cprime * g * std::pow(h, d));
            }
        } else {
            rep.flags.push_back("trend fit degenerate");
        }
    }
    rep.increasing = true;
    for (std::size_t i = 1; i < n; ++i) rep.increasing = rep.increasing && rep.rows[i].r > rep.rows[i - 1].r;
    return rep;
}

std::vector<HeatDecayRow> heat_decay_probe(const StepDistribution& J, std::span<const double> ts) {
    int d = J.dim();
    std::vector<HeatDecayRow> out;
    for (double t : ts) {
        require(t > 0, ErrorCode::domain, "heat_decay_probe: t must be positive");
        double sigma = std::sqrt(t * J.K1() / d);
        int rmax = static_cast<int>(std::ceil(8 * sigma)) + 2;
        HeatDecayRow row{t, 0, 0};
        for (int r = 0; r <= rmax; ++r) {
            for (int diag = 0; diag < 2; ++diag) {
                if (diag && r == 0) continue;
                LatticePoint x = diag ? LatticePoint(std::vector<int>(d, r)) : LatticePoint::axis(d, 0, r);
                double v = std::abs(heat_kernel(J, x, t));
                row.sup0 = std::max(row.sup0, v * std::pow(t, 0.5 * d));
                row.supd = std::max(row.supd, v * std::pow(x.clamped_norm(), d));
            }
        }
        out.push_back(row);
    }
    return out;
}

}  // namespace lacelab
