#include "lacelab/step.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "lacelab/errors.hpp"
#include "lacelab/parallel.hpp"

namespace lacelab {

std::string to_string(StepKind k) {
    switch (k) {
        case StepKind::nearest_neighbor: return "nearest-neighbor";
        case StepKind::spread_out: return "spread-out";
        case StepKind::counterexample: return "counterexample";
        case StepKind::custom: return "custom";
    }
    return "custom";
}

double CounterexampleParams::g(double r) const {
    double l = std::log(2.0 + r);
    return g_kind == GKind::log ? g_scale * l : g_scale * std::pow(l, g_power);
}

double CounterexampleParams::h(double r) const { return std::pow(g(r), -(1.0 + eps) / d); }

StepDistribution::StepDistribution(int d, std::vector<StepEntry> support, StepKind kind)
    : d_(d), kind_(kind), support_(std::move(support)) {
    require(d >= 1, ErrorCode::domain, "step distribution dimension must be positive");
    std::sort(support_.begin(), support_.end(), [](const StepEntry& a, const StepEntry& b) { return a.x < b.x; });
    for (std::size_t i = 1; i < support_.size(); ++i)
        require(support_[i].x != support_[i - 1].x, ErrorCode::domain, "duplicate support point");

    std::map<std::vector<int>, std::pair<std::int64_t, double>> orbits;
    KahanSum m, k1, k2;
    for (const auto& e : support_) {
        require(e.x.dim() == d, ErrorCode::shape, "support point dimension mismatch");
        auto key = e.x.canonical().coords();
        auto it = orbits.find(key);
        if (it == orbits.end()) {
            orbits.emplace(key, std::make_pair(std::int64_t{1}, e.weight));
        } else {
            require(std::abs(it->second.second - e.weight) <= 1e-14 * std::max(1.0, std::abs(e.weight)),
                    ErrorCode::domain, "step distribution is not Z^d-symmetric");
            it->second.first += 1;
        }
        double r2 = static_cast<double>(e.x.norm2());
        m.add(e.weight);
        k1.add(r2 * e.weight);
        k2.add(r2 * std::abs(e.weight));
        for (int j = 0; j < d; ++j) range_ = std::max(range_, std::abs(e.x[j]));
    }
    for (const auto& [key, v] : orbits)
        require(v.first == LatticePoint(key).orbit_size(), ErrorCode::domain,
                "step distribution is not Z^d-symmetric (incomplete orbit)");
    mass_ = m.value();
    K1_ = k1.value();
    K2_ = k2.value();
    require(std::abs(mass_ - 1.0) <= 1e-12, ErrorCode::domain, "step distribution must have total mass 1");
}

double StepDistribution::K2prime(double rho) const {
    KahanSum s;
    for (const auto& e : support_) s.add(std::pow(e.x.norm(), 2.0 + rho) * std::abs(e.weight));
    return s.value();
}

bool StepDistribution::nonnegative() const {
    return std::all_of(support_.begin(), support_.end(), [](const StepEntry& e) { return e.weight >= 0; });
}

bool StepDistribution::axis_supported() const {
    for (const auto& e : support_) {
        int nz = 0;
        for (int j = 0; j < d_; ++j)
            if (e.x[j] != 0) ++nz;
        if (nz > 1) return false;
    }
    return true;
}

bool StepDistribution::bipartite() const {
    return std::all_of(support_.begin(), support_.end(), [](const StepEntry& e) { return e.x.l1() % 2 == 1; });
}

double StepDistribution::jhat(std::span<const double> k) const {
    require(static_cast<int>(k.size()) == d_, ErrorCode::shape, "wavevector dimension mismatch");
    KahanSum s;
    for (const auto& e : support_) {
        double p = e.weight;
        for (int j = 0; j < d_; ++j)
            if (e.x[j] != 0) p *= std::cos(k[j] * e.x[j]);
        s.add(p);
    }
    return s.value();
}

std::vector<double> StepDistribution::axis_weights() const {
    std::vector<double> w(range_ + 1, 0.0);
    for (const auto& e : support_)
        if (e.x[0] > 0) {
            bool on_axis = true;
            for (int j = 1; j < d_; ++j) on_axis = on_axis && e.x[j] == 0;
            if (on_axis) w[e.x[0]] = e.weight;
        }
    return w;
}

double StepDistribution::axis_symbol(double q) const {
    auto w = axis_weights();
    double s = 0;
    for (int m = 1; m <= range_; ++m) s += 2.0 * w[m] * (1.0 - std::cos(m * q));
    return s;
}

LatticeField StepDistribution::to_field(int L) const {
    require(2 * range_ + 1 <= L, ErrorCode::shape, "box too small for step support");
    LatticeField f(d_, L, true);
    for (const auto& e : support_) f[e.x] = e.weight;
    return f;
}

StepDistribution nn_step(int d) {
    require(d >= 1, ErrorCode::domain, "nn_step: d must be positive");
    std::vector<StepEntry> s;
    for (int j = 0; j < d; ++j)
        for (int sign : {-1, 1}) s.push_back({LatticePoint::axis(d, j, sign), 1.0 / (2.0 * d)});
    return StepDistribution(d, std::move(s), StepKind::nearest_neighbor);
}

StepDistribution spread_out_step(int d, int R) {
    require(d >= 1 && R >= 1, ErrorCode::domain, "spread_out_step: need d >= 1 and R >= 1");
    std::vector<std::vector<int>> pts;
    std::vector<int> x(d, -R);
    while (true) {
        if (std::any_of(x.begin(), x.end(), [](int c) { return c != 0; })) pts.push_back(x);
        int j = d - 1;
        while (j >= 0 && x[j] == R) x[j--] = -R;
        if (j < 0) break;
        ++x[j];
    }
    double w = 1.0 / static_cast<double>(pts.size());
    std::vector<StepEntry> s;
    for (auto& p : pts) s.push_back({LatticePoint(std::move(p)), w});
    return StepDistribution(d, std::move(s), StepKind::spread_out);
}

StepDistribution counterexample_step(const CounterexampleParams& p) {
    int d = p.d;
    if (d <= 4) fail(ErrorCode::infeasible, "counterexample: requires d > 4");
    if (!(p.eps > 0 && p.eps < (d - 4) / 4.0))
        fail(ErrorCode::infeasible, "counterexample: eps must lie in (0, (d-4)/4)");
    if (!(p.g_scale > 0)) fail(ErrorCode::infeasible, "counterexample: g scale must be positive");
    for (std::size_t i = 0; i < p.l_list.size(); ++i) {
        if (p.l_list[i] < 2) fail(ErrorCode::infeasible, "counterexample: l_n must be at least 2");
        if (i > 0 && p.l_list[i] <= p.l_list[i - 1])
            fail(ErrorCode::infeasible, "counterexample: l_list must be strictly increasing");
    }

    std::map<LatticePoint, double> tail;
    const std::size_t cap = 4'000'000;
    for (int l : p.l_list) {
        double r = p.h(l) * l;
        if (!(r < l)) fail(ErrorCode::infeasible, "counterexample: ball around l e_j reaches the origin (h(x)|x| >= |x|)");
        int ri = static_cast<int>(std::floor(r));
        double r2 = r * r;
        std::vector<int> z(d, -ri);
        std::vector<std::vector<int>> offsets;
        while (true) {
            long long n2 = 0;
            for (int c : z) n2 += static_cast<long long>(c) * c;
            if (n2 <= r2 + 1e-9) offsets.push_back(z);
            int j = d - 1;
            while (j >= 0 && z[j] == ri) z[j--] = -ri;
            if (j < 0) break;
            ++z[j];
        }
        for (int j = 0; j < d; ++j)
            for (int sign : {-1, 1})
                for (const auto& o : offsets) {
                    std::vector<int> y = o;
                    y[j] += sign * l;
                    LatticePoint yp(std::move(y));
                    if (tail.count(yp)) continue;
                    double ny = yp.norm();
                    tail.emplace(yp, p.g(ny) / std::pow(ny, d + 2));
                    if (tail.size() > cap) fail(ErrorCode::budget, "counterexample: support exceeds point budget");
                }
    }
    KahanSum delta_sum;
    for (const auto& [y, w] : tail) delta_sum.add(w);
    double delta = delta_sum.value();
    if (!(delta < 1.0)) fail(ErrorCode::infeasible, "counterexample: J >= 0 violated (delta >= 1, no room for the nearest-neighbour part)");

    std::map<LatticePoint, double> all = tail;
    for (int j = 0; j < d; ++j)
        for (int sign : {-1, 1}) all[LatticePoint::axis(d, j, sign)] += (1.0 - delta) / (2.0 * d);
    std::vector<StepEntry> s;
    s.reserve(all.size());
    for (auto& [y, w] : all) s.push_back({y, w});
    // Rescale the tiny summation residue so the mass check is exact to rounding.
    KahanSum total;
    for (const auto& e : s) total.add(e.weight);
    double fix = 1.0 / total.value();
    for (auto& e : s) e.weight *= fix;
    StepDistribution J(d, std::move(s), StepKind::counterexample);
    if (!std::isfinite(J.K2())) fail(ErrorCode::infeasible, "counterexample: K2 is not finite");
    J.set_counterexample(p, delta);
    return J;
}

StepDistribution custom_step(const LatticeField& f) {
    std::vector<StepEntry> s;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (f[i] != 0.0) s.push_back({f.point(i), f[i]});
    return StepDistribution(f.dim(), std::move(s), StepKind::custom);
}

namespace {

// Visits index tuples i_0 >= i_1 >= ... >= i_{d-1} in [0, n).
template <class F>
void for_each_sorted_tuple(int d, int n, F&& fn) {
    std::vector<int> idx(d, 0);
    while (true) {
        fn(std::span<const int>(idx));
        int j = d - 1;
        while (j >= 0) {
            int cap = j == 0 ? n - 1 : idx[j - 1];
            if (idx[j] < cap) break;
            --j;
        }
        if (j < 0) break;
        ++idx[j];
        for (int t = j + 1; t < d; ++t) idx[t] = 0;
    }
}

int default_grid(int d) { return d <= 3 ? 32 : (d <= 5 ? 16 : 8); }

}  // namespace

MomentReport moments(const StepDistribution& J, double rho, int grid_M) {
    require(rho >= 0, ErrorCode::domain, "moments: rho must be nonnegative");
    int d = J.dim();
    MomentReport r;
    r.rho = rho;
    r.mass = J.mass();
    r.K1 = J.K1();
    r.K2 = J.K2();
    r.K2prime = J.K2prime(rho);
    for (const auto& e : J.support()) {
        double c = e.x.clamped_norm();
        double v = std::pow(c, d + 2) * std::abs(e.weight);
        if (v > r.K3) {
            r.K3 = v;
            r.K3_witness = e.x;
        }
        r.K3prime = std::max(r.K3prime, std::pow(c, d + 2 + rho) * std::abs(e.weight));
    }
    int M = grid_M > 0 ? grid_M : default_grid(d);
    FourierGrid grid(d, M);
    r.K0_grid = M;
    double inf = std::numeric_limits<double>::infinity();
    std::vector<double> k(d);
    for_each_sorted_tuple(d, M / 2, [&](std::span<const int> idx) {
        double k2 = 0;
        for (int j = 0; j < d; ++j) {
            k[j] = grid.node(M / 2 + idx[j]);
            k2 += k[j] * k[j];
        }
        inf = std::min(inf, 2.0 * d * (J.mass() - J.jhat(k)) / k2);
    });
    r.K0 = inf;
    return r;
}

BoundReport jhat_bounds_check(const StepDistribution& J, const FourierGrid& grid) {
    int d = J.dim();
    require(grid.dim() == d, ErrorCode::shape, "jhat_bounds_check: grid dimension mismatch");
    int M = grid.points();
    BoundReport rep;
    double K1 = J.K1(), K2 = J.K2();
    const double h = 1e-4;
    std::vector<double> k(d), kp(d), km(d);
    for_each_sorted_tuple(d, M / 2, [&](std::span<const int> idx) {
        ++rep.nodes;
        double k2 = 0;
        for (int j = 0; j < d; ++j) {
            k[j] = grid.node(M / 2 + idx[j]);
            k2 += k[j] * k[j];
        }
        double one_minus = 1.0 - J.jhat(k);
        double upper = K2 * k2 / (2.0 * d);
        double tol = 1e-12;
        if (rep.ok && (one_minus < -tol || one_minus > upper + tol)) {
            rep.ok = false;
            rep.violated = one_minus < 0 ? "1 - J^(k) >= 0" : "1 - J^(k) <= K2 |k|^2 / 2d";
            rep.witness = k;
        }
        rep.max_ratio = std::max(rep.max_ratio, one_minus / upper);
        if (std::sqrt(k2) <= M_PI / 4)
            rep.max_remainder_ratio = std::max(rep.max_remainder_ratio, std::abs(one_minus - K1 * k2 / (2.0 * d)) / k2);

        // Derivatives along each axis by central differences (the check is per axis by symmetry).
        for (int a = 0; a < d; ++a) {
            kp = k;
            km = k;
            kp[a] += h;
            km[a] -= h;
            double f0 = J.jhat(k), fp = J.jhat(kp), fm = J.jhat(km);
            double d1 = (fp - fm) / (2 * h);
            double d2 = (fp - 2 * f0 + fm) / (h * h);
            double b1 = K2 / d * std::abs(k[a]);
            double b2 = K2 / d;
            rep.max_d1_ratio = std::max(rep.max_d1_ratio, std::abs(d1) / b1);
            rep.max_d2_ratio = std::max(rep.max_d2_ratio, std::abs(d2) / b2);
            if (rep.ok && std::abs(d1) > b1 * (1 + 1e-6) + 1e-9) {
                rep.ok = false;
                rep.violated = "|d1 J^(k)| <= (K2/d)|k_1|";
                rep.witness = k;
            }
            if (rep.ok && std::abs(d2) > b2 * (1 + 1e-6) + 1e-6) {
                rep.ok = false;
                rep.violated = "|d1^2 J^(k)| <= K2/d";
                rep.witness = k;
            }
        }
    });
    return rep;
}

void write_step(std::ostream& os, const StepDistribution& J) {
    nlohmann::json h;
    h["kind"] = to_string(J.kind());
    h["d"] = J.dim();
    h["mass"] = J.mass();
    h["K1"] = J.K1();
    h["K2"] = J.K2();
    h["support_size"] = J.support().size();
    if (J.counterexample()) {
        const auto& p = *J.counterexample();
        h["params"] = {{"eps", p.eps},
                       {"g", p.g_kind == CounterexampleParams::GKind::log ? "log" : "log_power"},
                       {"g_scale", p.g_scale},
                       {"g_power", p.g_power},
                       {"l_list", p.l_list},
                       {"delta", J.delta()}};
    }
    os << h.dump() << '\n';
    write_field(os, J.to_field(2 * J.range() + 1));
}

}  // namespace lacelab
