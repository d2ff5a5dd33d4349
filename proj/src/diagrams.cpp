#include "lacelab/diagrams.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lacelab/errors.hpp"
#include "lacelab/parallel.hpp"

namespace lacelab {

namespace {

bool odd_integer(double v) { return v > 0 && v == std::floor(v) && std::fmod(v, 2.0) == 1.0; }

// Coordinates of every site, flattened.
struct SiteTable {
    int d, L, h;
    std::vector<int> c;
    explicit SiteTable(const LatticeField& f) : d(f.dim()), L(f.side()), h(f.half()), c(f.size() * f.dim()) {
        for (std::size_t i = 0; i < f.size(); ++i) f.coords(i, std::span<int>(c.data() + i * d, d));
    }
    std::span<const int> at(std::size_t i) const { return {c.data() + i * d, static_cast<std::size_t>(d)}; }
    // index of x - y with wrapping
    std::size_t diff(const LatticeField& f, std::span<const int> x, std::span<const int> y, std::vector<int>& buf) const {
        for (int j = 0; j < d; ++j) buf[j] = x[j] - y[j];
        return f.index(buf);
    }
};

double field_max(const LatticeField& f) { return f.size() ? f.max() : 0.0; }

// R(w) = sum_x Gb(x) GG(a - x + w) T_x(x - w), with T_x(v) = sum_u G(u) G(x-u) G(v-u).
// H(a, b) = sum_w R(w) GG(w + b).
LatticeField h_slice(const LatticeField& G, const LatticeField& Gb, const LatticeField& GG,
                     const LatticePoint& a, const SiteTable& sites) {
    int d = G.dim();
    std::size_t n = G.size();
    std::mutex mu;
    std::vector<std::pair<std::size_t, std::vector<double>>> chunks;
    parallel_chunks(n, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> R(n, 0.0);
        std::vector<int> buf(d);
        LatticeField Px(d, G.side());
        for (std::size_t xi = lo; xi < hi; ++xi) {
            double gb = Gb[xi];
            if (gb == 0.0) continue;
            auto x = sites.at(xi);
            for (std::size_t ui = 0; ui < n; ++ui)
                Px[ui] = G[ui] * G[sites.diff(G, x, sites.at(ui), buf)];
            LatticeField Tx = convolve(Px, G);
            for (std::size_t wi = 0; wi < n; ++wi) {
                auto w = sites.at(wi);
                for (int j = 0; j < d; ++j) buf[j] = a[j] - x[j] + w[j];
                double gg = GG[G.index(buf)];
                for (int j = 0; j < d; ++j) buf[j] = x[j] - w[j];
                R[wi] += gb * gg * Tx[G.index(buf)];
            }
        }
        std::lock_guard lock(mu);
        chunks.emplace_back(lo, std::move(R));
    });
    std::sort(chunks.begin(), chunks.end(), [](const auto& p, const auto& q) { return p.first < q.first; });
    LatticeField R(d, G.side());
    for (const auto& [lo, part] : chunks)
        for (std::size_t i = 0; i < n; ++i) R[i] += part[i];
    // (R * GG)(-b)
    LatticeField conv = convolve(R, GG);
    LatticeField out(d, G.side());
    std::vector<int> buf(d);
    for (std::size_t bi = 0; bi < n; ++bi) {
        auto b = sites.at(bi);
        for (int j = 0; j < d; ++j) buf[j] = -b[j];
        out[bi] = conv[G.index(buf)];
    }
    return out;
}

}  // namespace

double sup_weighted(const LatticeField& G, double alpha, bool exclude_origin) {
    LatticeField w = weighted_field(G, alpha);
    double m = -std::numeric_limits<double>::infinity();
    std::vector<int> x(G.dim());
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (exclude_origin) {
            G.coords(i, x);
            if (std::all_of(x.begin(), x.end(), [](int c) { return c == 0; })) continue;
        }
        m = std::max(m, w[i]);
    }
    return std::isfinite(m) ? m : 0.0;
}

DiagramSet diagram_suite(const LatticeField& G, std::span<const WeightPair> weights, const DiagramOptions& opt) {
    require(G.size() > 0, ErrorCode::shape, "diagram_suite: empty field");
    require(check_symmetry(G, 256, 1, 1e-12 * std::max(1.0, G.max_abs())), ErrorCode::domain,
            "diagram_suite: G must be lattice-symmetric");
    const int d = G.dim();
    DiagramSet s;
    s.d = d;
    s.L = G.side();
    const std::size_t origin = G.index(LatticePoint::origin(d));
    const double G0 = G[origin];

    std::set<WeightPair> pairs(weights.begin(), weights.end());
    pairs.insert({0, 0});
    std::set<double> betas, gammas;
    for (const auto& w : pairs) {
        require(w.beta >= 0 && w.gamma >= 0, ErrorCode::domain, "diagram_suite: weights must be nonnegative");
        betas.insert(w.beta);
        gammas.insert(w.gamma);
        for (double v : {w.beta, w.gamma})
            if (odd_integer(v)) {
                std::ostringstream m;
                m << "odd integer weight " << v;
                if (std::find(s.flags.begin(), s.flags.end(), m.str()) == s.flags.end()) s.flags.push_back(m.str());
            }
    }

    std::map<double, LatticeField> weighted;
    for (double b : betas) weighted.emplace(b, weighted_field(G, b));
    for (double g : gammas) weighted.emplace(g, weighted_field(G, g));

    LatticeField GG = convolve(G, G);
    s.B = GG;
    for (std::size_t i = 0; i < G.size(); ++i) s.B[i] -= G0 * G[i];
    LatticeField G3 = convolve(GG, G);
    LatticeField G4 = convolve(G3, G);
    s.P = convolve(G4, G);

    for (const auto& w : pairs) {
        LatticeField Wf = convolve(weighted.at(w.beta), weighted.at(w.gamma));
        LatticeField Tf = convolve(Wf, G);
        if (w.beta == 0 && w.gamma == 0) Tf[origin] -= G0 * G0 * G0;
        s.W.emplace(w, std::move(Wf));
        s.T.emplace(w, std::move(Tf));
    }
    for (double g : gammas) {
        LatticeField Sf = convolve(convolve(convolve(weighted.at(g), G), G), G);
        if (g == 0) Sf[origin] -= G0 * G0 * G0 * G0;
        s.S.emplace(g, std::move(Sf));
    }

    s.wrap_estimate = std::max(boundary_shell_mass(G), boundary_shell_mass(s.P));
    if (s.wrap_estimate > opt.wrap_tol) {
        std::ostringstream m;
        m << "diagram_suite: wrap contamination " << s.wrap_estimate << " exceeds tolerance " << opt.wrap_tol
          << "; enlarge the box";
        fail(ErrorCode::numerical, m.str());
    }

    if (opt.compute_h) {
        double cost = std::pow(static_cast<double>(G.size()), 2.0);
        if (cost > opt.h_budget) {
            std::ostringstream m;
            m << "diagram_suite: H needs ~" << cost << " operations per sample, budget " << opt.h_budget;
            fail(ErrorCode::budget, m.str());
        }
        std::vector<LatticePoint> as = opt.h_points;
        if (as.empty())
            for (int k = 0; k <= std::min(opt.h_radius, G.half()); ++k) as.push_back(LatticePoint::axis(d, 0, k));
        SiteTable sites(G);
        for (double b : betas)
            for (const auto& a : as) {
                require(a.dim() == d, ErrorCode::shape, "diagram_suite: H sample dimension mismatch");
                s.H.push_back({b, a, h_slice(G, weighted.at(b), GG, a, sites)});
            }
    }

    s.bars.B = field_max(s.B);
    s.bars.P = field_max(s.P);
    for (const auto& [k, f] : s.W) s.bars.W[k] = field_max(f);
    for (const auto& [k, f] : s.T) s.bars.T[k] = field_max(f);
    for (const auto& [k, f] : s.S) s.bars.S[k] = field_max(f);
    for (const auto& h : s.H) {
        double m = field_max(h.values);
        auto [it, fresh] = s.bars.H.emplace(h.beta, m);
        if (!fresh) it->second = std::max(it->second, m);
    }
    if (!s.H.empty()) s.flags.push_back("H bars are maxima over sampled displacements (lower estimates)");
    return s;
}

PiBound pi_sum_bound_saw(const LatticeField& G, int N, PiWeights w, const DiagramOptions& opt) {
    require(N >= 2, ErrorCode::domain, "pi_sum_bound_saw: N must be at least 2");
    PiBound r;
    r.N = N;
    r.weighted = w.alpha != 0 || w.beta != 0 || w.gamma != 0;
    DiagramOptions o = opt;
    o.compute_h = false;
    std::vector<WeightPair> pairs{{w.beta, w.gamma}, {w.beta, 0}, {0, w.gamma}};
    DiagramSet s = diagram_suite(G, pairs, o);
    r.B_bar = s.bars.B;
    r.sup_offorigin = sup_weighted(G, 0, true);
    if (!r.weighted) {
        r.value = r.sup_offorigin * std::pow(r.B_bar, N - 1);
        return r;
    }
    r.G_alpha_bar = sup_weighted(G, w.alpha);
    double wbg = s.bars.W.at({w.beta, w.gamma});
    if (N == 2) {
        r.W_bar = wbg;
        r.value = r.G_alpha_bar * r.W_bar;
        return r;
    }
    r.W_bar = std::max(wbg, s.bars.W.at({w.beta, 0}) * s.bars.W.at({0, w.gamma}));
    double n = N;
    r.value = n * n * std::pow(n, w.alpha + w.beta + w.gamma) * r.G_alpha_bar * r.W_bar * std::pow(r.B_bar, N - 3);
    return r;
}

PointwiseExponent pi_pointwise_exponent(Model model, int d, double alpha, double beta) {
    require(d >= 1, ErrorCode::domain, "pi_pointwise_exponent: d must be positive");
    require(alpha > 0 && alpha < d, ErrorCode::domain, "pi_pointwise_exponent: need 0 < alpha < d");
    PointwiseExponent e;
    switch (model) {
    case Model::saw:
        e.exponent = 3 * alpha;
        e.coefficient = beta * beta * beta;
        e.coefficient_form = "beta^3";
        e.threshold = (d + 2) / 3.0;
        break;
    case Model::percolation:
        e.exponent = 2 * alpha;
        e.coefficient = beta * beta;
        e.coefficient_form = "beta^2";
        e.threshold = (d + 2) / 2.0;
        break;
    case Model::ltla:
        require(alpha > d / 2.0, ErrorCode::domain, "pi_pointwise_exponent: lattice trees/animals need alpha > d/2");
        e.exponent = 4 * alpha - 2 * d;
        e.coefficient = std::max(beta * beta, beta * beta * beta * beta);
        e.coefficient_form = "max(beta^2,beta^4)";
        e.threshold = (3 * d + 2) / 4.0;
        break;
    }
    e.sufficient = alpha > e.threshold;
    return e;
}

PivotFactor pivot_factor(const LatticeField& G, double p, double gamma, const DiagramOptions& opt) {
    require(p > 0, ErrorCode::domain, "pivot_factor: p must be positive");
    int d = G.dim();
    LatticeField D(d, G.side(), true);
    require(G.half() >= 1, ErrorCode::shape, "pivot_factor: box too small");
    for (int j = 0; j < d; ++j)
        for (int s : {1, -1}) D[LatticePoint::axis(d, j, s)] = 1.0 / (2 * d);
    PivotFactor r;
    r.field = convolve(D, G);
    r.field *= 2 * d * p;
    DiagramOptions o = opt;
    o.compute_h = false;
    std::vector<WeightPair> pairs{{0, gamma}};
    DiagramSet s = diagram_suite(G, pairs, o);
    r.T_bar = s.bars.T.at({0, gamma});
    r.adjustment = r.T_bar + 1.0 / (2 * d);
    r.note = "adjusted sup near the pivot: (1 + c lambda) * adjustment";
    return r;
}

void write_diagrams_json(std::ostream& os, const DiagramSet& s, bool with_fields) {
    using nlohmann::json;
    json j;
    j["d"] = s.d;
    j["L"] = s.L;
    j["wrap_estimate"] = s.wrap_estimate;
    j["flags"] = s.flags;
    json bars;
    bars["B"] = s.bars.B;
    bars["P"] = s.bars.P;
    auto pairs = [](const std::map<WeightPair, double>& m) {
        json a = json::array();
        for (const auto& [k, v] : m) a.push_back({{"beta", k.beta}, {"gamma", k.gamma}, {"value", v}});
        return a;
    };
    auto singles = [](const std::map<double, double>& m, const char* key) {
        json a = json::array();
        for (const auto& [k, v] : m) a.push_back({{key, k}, {"value", v}});
        return a;
    };
    bars["W"] = pairs(s.bars.W);
    bars["T"] = pairs(s.bars.T);
    bars["S"] = singles(s.bars.S, "gamma");
    bars["H_sampled"] = singles(s.bars.H, "beta");
    j["bars"] = bars;
    j["lambda_reference"] = lambda_reference;
    if (with_fields) {
        auto vals = [](const LatticeField& f) { return std::vector<double>(f.values().begin(), f.values().end()); };
        j["fields"]["B"] = vals(s.B);
        j["fields"]["P"] = vals(s.P);
    }
    os << j.dump(2) << '\n';
}

}  // namespace lacelab
