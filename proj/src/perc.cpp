#include "lacelab/perc.hpp"

#include <cmath>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "lacelab/errors.hpp"
#include "lacelab/parallel.hpp"

namespace lacelab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), 0); }
    void reset() {
        std::iota(parent_.begin(), parent_.end(), 0);
        std::fill(size_.begin(), size_.end(), 1);
    }
    std::uint32_t find(std::uint32_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
    }

private:
    std::vector<std::uint32_t> parent_, size_;
};

bool bars_le(const DiagramBars& lo, const DiagramBars& hi) {
    const double tol = 1e-12;
    auto le = [&](double a, double b) { return a <= b + tol * std::max(1.0, std::abs(b)); };
    bool ok = le(lo.B, hi.B) && le(lo.P, hi.P);
    for (const auto& [k, v] : lo.W) ok = ok && le(v, hi.W.at(k));
    for (const auto& [k, v] : lo.T) ok = ok && le(v, hi.T.at(k));
    for (const auto& [k, v] : lo.S) ok = ok && le(v, hi.S.at(k));
    for (const auto& [k, v] : lo.H) ok = ok && le(v, hi.H.at(k));
    return ok;
}

}  // namespace

double bond_uniform(std::uint64_t seed, std::uint64_t sample, std::uint64_t bond) {
    std::uint64_t h = splitmix64(splitmix64(seed ^ 0x5851f42d4c957f2dULL) ^ sample);
    h = splitmix64(h ^ bond);
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

PercEstimate sample_two_point(int d, int L, double p, std::uint64_t n_samples, std::uint64_t seed,
                              const PercOptions& opt) {
    require(d >= 1, ErrorCode::domain, "sample_two_point: d must be positive");
    require(L >= 3 && L % 2 == 1, ErrorCode::shape, "sample_two_point: L must be odd and at least 3");
    require(p >= 0 && p <= 1, ErrorCode::domain, "sample_two_point: p must lie in [0, 1]");
    require(n_samples >= 1, ErrorCode::domain, "sample_two_point: need at least one sample");
    double sites = std::pow(static_cast<double>(L), d);
    require(sites < 4e9, ErrorCode::budget, "sample_two_point: torus too large");
    if (sites * d * static_cast<double>(n_samples) > opt.budget) {
        std::ostringstream m;
        m << "sample_two_point: " << sites * d * n_samples << " bond draws exceed budget " << opt.budget;
        fail(ErrorCode::budget, m.str());
    }

    PercEstimate e;
    e.d = d;
    e.L = L;
    e.p = p;
    e.n_samples = n_samples;
    e.seed = seed;
    LatticeField shape(d, L);
    const std::size_t n = shape.size();
    // Neighbour in the +e_j direction, by flat index.
    std::vector<std::uint32_t> up(n * d);
    {
        std::vector<int> x(d);
        for (std::size_t i = 0; i < n; ++i) {
            shape.coords(i, x);
            for (int j = 0; j < d; ++j) {
                ++x[j];
                up[i * d + j] = static_cast<std::uint32_t>(shape.index(x));
                --x[j];
            }
        }
    }
    const auto origin = static_cast<std::uint32_t>(shape.index(LatticePoint::origin(d)));

    std::mutex mu;
    std::vector<std::uint64_t> hits(n, 0);
    parallel_chunks(n_samples, [&](std::size_t lo, std::size_t hi) {
        std::vector<std::uint64_t> local(n, 0);
        UnionFind uf(n);
        for (std::size_t s = lo; s < hi; ++s) {
            uf.reset();
            for (std::size_t i = 0; i < n; ++i)
                for (int j = 0; j < d; ++j)
                    if (bond_uniform(seed, s, i * d + j) < p) uf.unite(static_cast<std::uint32_t>(i), up[i * d + j]);
            std::uint32_t r0 = uf.find(origin);
            for (std::size_t i = 0; i < n; ++i)
                if (uf.find(static_cast<std::uint32_t>(i)) == r0) ++local[i];
        }
        std::lock_guard lock(mu);
        for (std::size_t i = 0; i < n; ++i) hits[i] += local[i];
    });

    LatticeField mean(d, L), se(d, L);
    const double ns = static_cast<double>(n_samples);
    for (std::size_t i = 0; i < n; ++i) {
        double m = static_cast<double>(hits[i]) / ns;
        mean[i] = m;
        se[i] = std::sqrt(m * (1 - m) / ns);
    }
    e.mean = symmetrize(mean);
    e.stderr_ = symmetrize(se);
    e.mean[origin] = 1.0;
    e.stderr_[origin] = 0.0;
    return e;
}

PercBridge perc_diagram_bridge(const PercEstimate& est, std::span<const WeightPair> weights, const DiagramOptions& opt) {
    PercBridge b;
    b.mean = diagram_suite(est.mean, weights, opt);
    LatticeField lo = est.mean, hi = est.mean;
    for (std::size_t i = 0; i < lo.size(); ++i) {
        lo[i] = std::max(0.0, est.mean[i] - est.stderr_[i]);
        hi[i] = std::min(1.0, est.mean[i] + est.stderr_[i]);
    }
    lo.set_symmetric(true);
    hi.set_symmetric(true);
    b.lower = diagram_suite(lo, weights, opt).bars;
    b.upper = diagram_suite(hi, weights, opt).bars;
    b.ordered = bars_le(b.lower, b.mean.bars) && bars_le(b.mean.bars, b.upper);
    return b;
}

void write_estimate(std::ostream& os, const PercEstimate& est) {
    nlohmann::json j;
    j["d"] = est.d;
    j["L"] = est.L;
    j["p"] = est.p;
    j["n_samples"] = est.n_samples;
    j["seed"] = est.seed;
    j["mean"] = std::vector<double>(est.mean.values().begin(), est.mean.values().end());
    j["stderr"] = std::vector<double>(est.stderr_.values().begin(), est.stderr_.values().end());
    os << j.dump() << '\n';
}

}  // namespace lacelab
