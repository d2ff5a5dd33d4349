#include "cosine_sum.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "lacelab/errors.hpp"
#include "lacelab/parallel.hpp"

namespace lacelab::detail {

AxisGrid midpoint_axis(int M) {
    require(M >= 2 && M % 2 == 0, ErrorCode::domain, "midpoint grid needs an even number of nodes");
    AxisGrid g;
    for (int i = 0; i < M / 2; ++i) {
        g.q.push_back(M_PI * (2 * i + 1) / M);
        g.w.push_back(2.0);
    }
    g.factor = 1.0 / M;
    return g;
}

AxisGrid torus_axis(int L) {
    require(L >= 1 && L % 2 == 1, ErrorCode::domain, "torus grid needs odd side");
    AxisGrid g;
    for (int m = 0; m <= (L - 1) / 2; ++m) {
        g.q.push_back(2.0 * M_PI * m / L);
        g.w.push_back(m == 0 ? 1.0 : 2.0);
    }
    g.factor = 1.0 / L;
    return g;
}

Symbol::Symbol(const StepDistribution& J) : J_(&J), separable_(J.axis_supported()) {}

namespace {

std::size_t ipow(std::size_t b, int e) {
    std::size_t r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

// Row generator for u = 1 - J^ along the last axis, for a given prefix of indices.
class RowSymbol {
public:
    RowSymbol(const AxisGrid& g, const Symbol& s) : g_(g), sep_(s.separable()), d_(s.step().dim()) {
        const auto& J = s.step();
        int n = static_cast<int>(g.q.size());
        if (sep_) {
            psi_.resize(n);
            for (int i = 0; i < n; ++i) psi_[i] = J.axis_symbol(g.q[i]);
            mass_ = J.mass();
            return;
        }
        int R = J.range();
        cos_.assign(static_cast<std::size_t>(R + 1) * n, 0.0);
        for (int a = 0; a <= R; ++a)
            for (int i = 0; i < n; ++i) cos_[a * n + i] = std::cos(g.q[i] * a);
        std::map<int, int> slot;
        for (const auto& e : J.support()) {
            int c = std::abs(e.x[d_ - 1]);
            if (!slot.count(c)) {
                slot.emplace(c, static_cast<int>(last_.size()));
                last_.push_back(c);
            }
            entries_.push_back({e.x.coords(), e.weight, slot[c]});
        }
    }

    void row(std::span<const int> prefix, std::span<double> u, std::vector<double>& scratch) const {
        int n = static_cast<int>(u.size());
        if (sep_) {
            double s = 0;
            for (int i : prefix) s += psi_[i];
            for (int i = 0; i < n; ++i) u[i] = (1.0 - mass_) + s + psi_[i];
            return;
        }
        scratch.assign(last_.size(), 0.0);
        for (const auto& e : entries_) {
            double p = e.w;
            for (int j = 0; j + 1 < d_; ++j) {
                int a = std::abs(e.x[j]);
                if (a) p *= cos_[a * n + prefix[j]];
            }
            scratch[e.slot] += p;
        }
        for (int i = 0; i < n; ++i) {
            double jh = 0;
            for (std::size_t c = 0; c < last_.size(); ++c) jh += scratch[c] * cos_[last_[c] * n + i];
            u[i] = 1.0 - jh;
        }
    }

private:
    struct Entry {
        std::vector<int> x;
        double w;
        int slot;
    };
    const AxisGrid& g_;
    bool sep_;
    int d_;
    double mass_ = 1.0;
    std::vector<double> psi_;
    std::vector<double> cos_;
    std::vector<int> last_;
    std::vector<Entry> entries_;
};

struct Contractor {
    const AxisGrid& g;
    int d;
    std::size_t n;
    std::span<const std::vector<int>> targets;
    std::vector<std::size_t> order;
    std::vector<double>& out;
    std::map<int, std::vector<double>> cw_cache;

    const std::vector<double>& cw(int v) {
        auto it = cw_cache.find(v);
        if (it != cw_cache.end()) return it->second;
        std::vector<double> t(n);
        for (std::size_t i = 0; i < n; ++i) t[i] = g.w[i] * std::cos(g.q[i] * v);
        return cw_cache.emplace(v, std::move(t)).first->second;
    }

    int coord(std::size_t pos, int j) const { return targets[order[pos]][j]; }

    // A holds n^j values over (i_0..i_{j-1}); targets in [lo, hi) share coordinates j..d-1.
    void descend(int j, const std::vector<double>& A, std::size_t lo, std::size_t hi) {
        if (j == 0) {
            for (std::size_t t = lo; t < hi; ++t) out[order[t]] = A[0];
            return;
        }
        std::size_t rows = ipow(n, j - 1);
        std::vector<double> B(rows);
        std::size_t a = lo;
        while (a < hi) {
            std::size_t b = a;
            int v = coord(a, j - 1);
            while (b < hi && coord(b, j - 1) == v) ++b;
            const auto& c = cw(v);
            parallel_chunks(rows, [&](std::size_t r0, std::size_t r1) {
                for (std::size_t r = r0; r < r1; ++r) {
                    const double* row = A.data() + r * n;
                    double s = 0;
                    for (std::size_t i = 0; i < n; ++i) s += row[i] * c[i];
                    B[r] = s;
                }
            });
            descend(j - 1, B, a, b);
            a = b;
        }
    }
};

}  // namespace

std::vector<double> cosine_sum(const AxisGrid& grid, const Symbol& sym, const RowKernel& F,
                               std::span<const std::vector<int>> targets, std::size_t mem_cap) {
    const auto& J = sym.step();
    int d = J.dim();
    std::size_t n = grid.q.size();
    std::vector<double> out(targets.size(), 0.0);
    if (targets.empty()) return out;
    for (const auto& t : targets) require(static_cast<int>(t.size()) == d, ErrorCode::shape, "target dimension mismatch");

    Contractor C{grid, d, n, targets, {}, out, {}};
    C.order.resize(targets.size());
    std::iota(C.order.begin(), C.order.end(), std::size_t{0});
    std::sort(C.order.begin(), C.order.end(), [&](std::size_t a, std::size_t b) {
        return std::lexicographical_compare(targets[a].rbegin(), targets[a].rend(), targets[b].rbegin(), targets[b].rend());
    });

    // Groups of distinct last coordinate.
    std::vector<std::pair<std::size_t, std::size_t>> groups;
    for (std::size_t a = 0; a < C.order.size();) {
        std::size_t b = a;
        while (b < C.order.size() && C.coord(b, d - 1) == C.coord(a, d - 1)) ++b;
        groups.emplace_back(a, b);
        a = b;
    }

    std::size_t prefixes = ipow(n, d - 1);
    std::size_t per_group = std::max<std::size_t>(prefixes * sizeof(double), 1);
    std::size_t batch = std::max<std::size_t>(1, mem_cap / per_group);
    RowSymbol rs(grid, sym);

    for (std::size_t g0 = 0; g0 < groups.size(); g0 += batch) {
        std::size_t g1 = std::min(groups.size(), g0 + batch);
        std::size_t nb = g1 - g0;
        std::vector<const std::vector<double>*> tabs;
        for (std::size_t g = g0; g < g1; ++g) tabs.push_back(&C.cw(C.coord(groups[g].first, d - 1)));
        std::vector<std::vector<double>> A(nb, std::vector<double>(prefixes));

        parallel_chunks(prefixes, [&](std::size_t p0, std::size_t p1) {
            std::vector<int> prefix(d - 1);
            std::vector<double> u(n), f(n), scratch;
            for (std::size_t p = p0; p < p1; ++p) {
                std::size_t r = p;
                for (int j = d - 2; j >= 0; --j) {
                    prefix[j] = static_cast<int>(r % n);
                    r /= n;
                }
                rs.row(prefix, u, scratch);
                F(u, f);
                for (std::size_t b = 0; b < nb; ++b) {
                    const double* c = tabs[b]->data();
                    double s = 0;
                    for (std::size_t i = 0; i < n; ++i) s += f[i] * c[i];
                    A[b][p] = s;
                }
            }
        });
        for (std::size_t b = 0; b < nb; ++b) {
            auto [lo, hi] = groups[g0 + b];
            C.descend(d - 1, A[b], lo, hi);
            std::vector<double>().swap(A[b]);
        }
    }
    double scale = std::pow(grid.factor, d);
    for (auto& v : out) v *= scale;
    return out;
}

}  // namespace lacelab::detail
