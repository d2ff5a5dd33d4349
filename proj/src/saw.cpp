#include "lacelab/saw.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "lacelab/errors.hpp"
#include "lacelab/parallel.hpp"

namespace lacelab {

namespace {

constexpr int series_version = 1;

// Sorted descending absolute values, written into out; returns the l1 norm.
int sort_abs(std::span<const int> x, std::span<int> out) {
    int s = 0, n = static_cast<int>(x.size());
    for (int i = 0; i < n; ++i) {
        int v = x[i] < 0 ? -x[i] : x[i];
        s += v;
        int j = i;
        while (j > 0 && out[j - 1] < v) {
            out[j] = out[j - 1];
            --j;
        }
        out[j] = v;
    }
    return s;
}

Int128 checked_add(Int128 a, Int128 b) {
    Int128 r;
    if (__builtin_add_overflow(a, b, &r)) fail(ErrorCode::overflow, "series arithmetic overflowed 128 bits");
    return r;
}

Int128 checked_mul(Int128 a, Int128 b) {
    Int128 r;
    if (__builtin_mul_overflow(a, b, &r)) fail(ErrorCode::overflow, "series arithmetic overflowed 128 bits");
    return r;
}

// All lattice points of an orbit.
std::vector<std::vector<int>> orbit_points(const LatticePoint& rep) {
    std::vector<int> base(rep.coords());
    std::sort(base.begin(), base.end());
    std::set<std::vector<int>> out;
    int d = rep.dim();
    do {
        for (int mask = 0; mask < (1 << d); ++mask) {
            std::vector<int> x = base;
            bool skip = false;
            for (int j = 0; j < d; ++j)
                if (mask >> j & 1) {
                    if (x[j] == 0) skip = true;
                    x[j] = -x[j];
                }
            if (!skip) out.insert(std::move(x));
        }
    } while (std::next_permutation(base.begin(), base.end()));
    return {out.begin(), out.end()};
}

struct SparseEntry {
    std::vector<int> y;
    Int128 v;
};

// Expanded nonzero entries of a class vector.
template <class T>
std::vector<SparseEntry> expand(const OrbitTable& orb, const std::vector<T>& cls) {
    std::vector<SparseEntry> out;
    for (std::size_t id = 0; id < orb.classes(); ++id) {
        if (cls[id] == 0) continue;
        for (auto& y : orbit_points(orb.rep(id))) out.push_back({std::move(y), static_cast<Int128>(cls[id])});
    }
    return out;
}

// (A * B)(rep) at every class, A given sparse.
std::vector<Int128> conv_classes(const OrbitTable& orb, const std::vector<SparseEntry>& A, const std::vector<Int128>& B,
                                 int parity) {
    int d = orb.dim();
    std::vector<Int128> out(orb.classes(), 0);
    parallel_chunks(orb.classes(), [&](std::size_t lo, std::size_t hi) {
        std::vector<int> z(d);
        for (std::size_t id = lo; id < hi; ++id) {
            const auto& x = orb.rep(id);
            int l1 = 0;
            for (int j = 0; j < d; ++j) l1 += x[j];
            if ((l1 & 1) != parity) continue;
            Int128 s = 0;
            for (const auto& e : A) {
                for (int j = 0; j < d; ++j) z[j] = x[j] - e.y[j];
                std::size_t k = orb.id_of(z);
                if (k == OrbitTable::npos || B[k] == 0) continue;
                s = checked_add(s, checked_mul(e.v, B[k]));
            }
            out[id] = s;
        }
    });
    return out;
}

class Walker {
public:
    Walker(int d, int N, const OrbitTable& orb)
        : d_(d), N_(N), side_(2 * N + 1), orb_(orb), pos_(d, 0), stride_(d),
          acc_(N + 1, std::vector<std::uint64_t>(orb.classes(), 0)) {
        std::size_t s = 1;
        for (int j = d - 1; j >= 0; --j) {
            stride_[j] = s;
            s *= side_;
        }
        visited_.assign(s, 0);
        here_ = flat(pos_);
        visited_[here_] = 1;
    }

    // Collect prefixes at depth P instead of descending further.
    void collect(int P, std::vector<std::vector<int>>* prefixes) {
        prefix_depth_ = P;
        prefixes_ = prefixes;
        record(0, 1);
        dfs(0, 1, 0);
    }

    // Replays a prefix and enumerates everything below it; the prefix nodes themselves are not counted.
    void run_prefix(const std::vector<int>& moves) {
        prefixes_ = nullptr;
        prefix_depth_ = -1;
        std::uint64_t w = 1;
        int k = 0;
        for (int m : moves) {
            auto [wm, kn] = apply(m, k);
            w *= wm;
            k = kn;
        }
        dfs(static_cast<int>(moves.size()), w, k);
        for (auto it = moves.rbegin(); it != moves.rend(); ++it) undo(*it);
    }

    const std::vector<std::vector<std::uint64_t>>& acc() const { return acc_; }

private:
    std::size_t flat(const std::vector<int>& x) const {
        std::size_t i = 0;
        for (int j = 0; j < d_; ++j) i += static_cast<std::size_t>(x[j] + N_) * stride_[j];
        return i;
    }

    void record(int n, std::uint64_t w) { acc_[n][orb_.id_of(pos_)] += w; }

    // move m: axis m/2, sign by parity. Returns (weight, new used-axis count).
    std::pair<std::uint64_t, int> apply(int m, int k) {
        int axis = m >> 1, sgn = (m & 1) ? -1 : 1;
        pos_[axis] += sgn;
        here_ = flat(pos_);
        visited_[here_] = 1;
        if (axis == k) return {static_cast<std::uint64_t>(2 * (d_ - k)), k + 1};
        return {1, k};
    }

    void undo(int m) {
        visited_[here_] = 0;
        int axis = m >> 1, sgn = (m & 1) ? -1 : 1;
        pos_[axis] -= sgn;
        here_ = flat(pos_);
    }

    void dfs(int n, std::uint64_t w, int k) {
        if (n == N_) return;
        if (n == prefix_depth_) {
            prefixes_->push_back(path_);
            return;
        }
        int moves = 2 * k + (k < d_ ? 1 : 0);
        for (int m = 0; m < moves; ++m) {
            int axis = m >> 1, sgn = (m & 1) ? -1 : 1;
            std::size_t next = here_ + (sgn > 0 ? stride_[axis] : -stride_[axis]);
            if (visited_[next]) continue;
            auto [wm, kn] = apply(m, k);
            if (prefixes_) path_.push_back(m);
            record(n + 1, w * wm);
            dfs(n + 1, w * wm, kn);
            if (prefixes_) path_.pop_back();
            undo(m);
        }
    }

    int d_, N_, side_;
    const OrbitTable& orb_;
    std::vector<int> pos_;
    std::vector<std::size_t> stride_;
    std::vector<std::uint8_t> visited_;
    std::size_t here_ = 0;
    std::vector<std::vector<std::uint64_t>> acc_;
    int prefix_depth_ = -1;
    std::vector<std::vector<int>>* prefixes_ = nullptr;
    std::vector<int> path_;
};

double connective_guess(int d) { return 2 * d - 1 - 1.0 / (2 * d); }

}  // namespace

OrbitTable::OrbitTable(int d, int N) : d_(d), N_(N) {
    require(d >= 1 && N >= 0, ErrorCode::domain, "OrbitTable: need d >= 1, N >= 0");
    double size = std::pow(N + 1.0, d);
    require(size <= double(1 << 28), ErrorCode::budget, "OrbitTable: class lookup too large");
    lookup_.assign(static_cast<std::size_t>(size), -1);
    std::vector<int> a(d, 0);
    // sorted descending tuples with sum <= N
    auto rec = [&](auto&& self, int j, int maxv, int left) -> void {
        if (j == d) {
            std::size_t code = 0;
            for (int v : a) code = code * (N + 1) + v;
            lookup_[code] = static_cast<std::int32_t>(reps_.size());
            reps_.emplace_back(a);
            return;
        }
        for (int v = 0; v <= std::min(maxv, left); ++v) {
            a[j] = v;
            self(self, j + 1, v, left - v);
        }
        a[j] = 0;
    };
    rec(rec, 0, N, N);
}

std::size_t OrbitTable::id_of(std::span<const int> x) const {
    int buf[32];
    std::span<int> s(buf, static_cast<std::size_t>(d_));
    if (sort_abs(x, s) > N_) return npos;
    std::size_t code = 0;
    for (int v : s) code = code * (N_ + 1) + v;
    return static_cast<std::size_t>(lookup_[code]);
}

std::uint64_t SiteSeries::at(int n, const LatticePoint& x) const {
    if (n < 0 || n > N) return 0;
    std::size_t id = orbits.id_of(x.coords());
    return id == OrbitTable::npos ? 0 : counts[n][id];
}

std::uint64_t SiteSeries::total(int n) const {
    Int128 s = 0;
    for (std::size_t id = 0; id < orbits.classes(); ++id)
        s = checked_add(s, checked_mul(counts[n][id], orbits.rep(id).orbit_size()));
    require(s <= Int128(UINT64_MAX), ErrorCode::overflow, "total count exceeds 64 bits");
    return static_cast<std::uint64_t>(s);
}

SiteSeries enumerate_saw(int d, int N, const EnumerateOptions& opt) {
    require(d >= 1 && d <= 32 && N >= 0, ErrorCode::domain, "enumerate_saw: need 1 <= d <= 32, N >= 0");
    double reduction = 2.0 * d * std::max(1, 2 * (d - 1));
    double nodes = std::pow(connective_guess(d), N) / reduction;
    if (nodes > opt.node_cap) {
        std::ostringstream m;
        m << "enumerate_saw: about " << nodes << " nodes estimated for d=" << d << ", N=" << N << ", cap "
          << opt.node_cap;
        fail(ErrorCode::budget, m.str());
    }
    require(std::pow(2.0 * d - 1, N) * 2 * d < 1.8e19 || N <= 1, ErrorCode::overflow,
            "enumerate_saw: counts would exceed 64 bits");
    require(std::pow(2.0 * N + 1, d) <= double(1u << 30), ErrorCode::budget, "enumerate_saw: visited box too large");

    SiteSeries s;
    s.d = d;
    s.N = N;
    s.orbits = OrbitTable(d, N);
    const auto& orb = s.orbits;

    // Split at a depth giving enough independent prefixes.
    int P = std::min(N, d <= 2 ? 6 : 4);
    std::vector<std::vector<int>> prefixes;
    Walker master(d, N, orb);
    master.collect(P, &prefixes);
    std::vector<std::vector<std::uint64_t>> acc = master.acc();

    std::mutex mu;
    std::vector<std::pair<std::size_t, std::vector<std::vector<std::uint64_t>>>> parts;
    if (P < N)
        parallel_chunks(prefixes.size(), [&](std::size_t lo, std::size_t hi) {
            Walker w(d, N, orb);
            for (std::size_t i = lo; i < hi; ++i) w.run_prefix(prefixes[i]);
            std::lock_guard lock(mu);
            parts.emplace_back(lo, w.acc());
        });
    std::sort(parts.begin(), parts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [lo, part] : parts)
        for (int n = 0; n <= N; ++n)
            for (std::size_t id = 0; id < orb.classes(); ++id) acc[n][id] += part[n][id];

    s.counts.assign(N + 1, std::vector<std::uint64_t>(orb.classes(), 0));
    for (int n = 0; n <= N; ++n)
        for (std::size_t id = 0; id < orb.classes(); ++id) {
            std::uint64_t a = acc[n][id];
            if (a == 0) continue;
            auto os = static_cast<std::uint64_t>(orb.rep(id).orbit_size());
            require(a % os == 0, ErrorCode::numerical, "enumerate_saw: orbit count not divisible");
            s.counts[n][id] = a / os;
        }
    return s;
}

std::string series_cache_name(int d, int N) {
    std::ostringstream m;
    m << "saw_d" << d << "_N" << N << "_v" << series_version << ".txt";
    return m.str();
}

void save_series(std::ostream& os, const SiteSeries& s) {
    os << "saw-series " << series_version << ' ' << s.d << ' ' << s.N << '\n';
    for (int n = 0; n <= s.N; ++n)
        for (std::size_t id = 0; id < s.orbits.classes(); ++id) {
            if (s.counts[n][id] == 0) continue;
            os << n;
            for (int v : s.orbits.rep(id).coords()) os << ' ' << v;
            os << ' ' << s.counts[n][id] << '\n';
        }
}

SiteSeries load_series(std::istream& is) {
    std::string tag;
    int ver = 0;
    SiteSeries s;
    if (!(is >> tag >> ver >> s.d >> s.N) || tag != "saw-series")
        fail(ErrorCode::io, "load_series: bad header");
    require(ver == series_version, ErrorCode::io, "load_series: version mismatch");
    s.orbits = OrbitTable(s.d, s.N);
    s.counts.assign(s.N + 1, std::vector<std::uint64_t>(s.orbits.classes(), 0));
    int n;
    std::vector<int> x(s.d);
    while (is >> n) {
        for (int& v : x) is >> v;
        std::uint64_t c;
        if (!(is >> c)) fail(ErrorCode::io, "load_series: truncated row");
        std::size_t id = s.orbits.id_of(x);
        require(n >= 0 && n <= s.N && id != OrbitTable::npos, ErrorCode::io, "load_series: row out of range");
        s.counts[n][id] = c;
    }
    return s;
}

SiteSeries enumerate_saw_cached(int d, int N, const std::filesystem::path& dir, const EnumerateOptions& opt) {
    namespace fs = std::filesystem;
    fs::path file = dir / series_cache_name(d, N);
    if (fs::exists(file)) {
        std::ifstream in(file);
        SiteSeries s = load_series(in);
        if (s.d == d && s.N == N) return s;
    }
    SiteSeries s = enumerate_saw(d, N, opt);
    std::error_code ec;
    fs::create_directories(dir, ec);
    fs::path tmp = file;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) return s;
        save_series(out, s);
    }
    fs::rename(tmp, file, ec);
    return s;
}

SeriesField g_series_eval(const SiteSeries& s, double p, int L) {
    require(p >= 0, ErrorCode::domain, "g_series_eval: p must be nonnegative");
    if (L == 0) L = 2 * s.N + 1;
    require(L % 2 == 1, ErrorCode::shape, "g_series_eval: box side must be odd");
    std::vector<double> cls(s.orbits.classes(), 0.0);
    for (std::size_t id = 0; id < cls.size(); ++id) {
        double v = 0;
        for (int n = s.N; n >= 0; --n) v = v * p + static_cast<double>(s.counts[n][id]);
        cls[id] = v;
    }
    SeriesField r;
    r.G = LatticeField(s.d, L, true);
    std::vector<int> x(s.d);
    for (std::size_t i = 0; i < r.G.size(); ++i) {
        r.G.coords(i, x);
        std::size_t id = s.orbits.id_of(x);
        if (id != OrbitTable::npos) r.G[i] = cls[id];
    }
    r.last_term = static_cast<double>(s.total(s.N)) * std::pow(p, s.N);
    return r;
}

Int128 PiSeries::at(int n, const LatticePoint& x) const {
    if (n < 0 || n > order) return 0;
    std::size_t id = orbits.id_of(x.coords());
    return id == OrbitTable::npos ? 0 : pi[n][id];
}

Int128 PiSeries::total(int n) const {
    Int128 s = 0;
    for (std::size_t id = 0; id < orbits.classes(); ++id)
        if (pi[n][id] != 0) s = checked_add(s, checked_mul(pi[n][id], orbits.rep(id).orbit_size()));
    return s;
}

PiSeries extract_pi_series(const SiteSeries& s) {
    const auto& orb = s.orbits;
    const std::size_t nc = orb.classes();
    PiSeries r;
    r.d = s.d;
    r.order = s.N;
    r.orbits = orb;
    std::vector<std::vector<SparseEntry>> Gs(s.N + 1);
    for (int k = 1; k <= s.N; ++k) Gs[k] = expand(orb, s.counts[k]);
    const std::size_t origin = 0;  // the all-zero tuple is enumerated first
    r.q.assign(s.N + 1, std::vector<Int128>(nc, 0));
    r.q[0][origin] = 1;
    for (int n = 1; n <= s.N; ++n) {
        std::vector<Int128> acc(nc, 0);
        for (int k = 1; k <= n; ++k) {
            auto part = conv_classes(orb, Gs[k], r.q[n - k], n & 1);
            for (std::size_t id = 0; id < nc; ++id) acc[id] = checked_add(acc[id], part[id]);
        }
        for (std::size_t id = 0; id < nc; ++id) r.q[n][id] = -acc[id];
    }
    r.pi.assign(s.N + 1, std::vector<Int128>(nc, 0));
    std::vector<int> e1(s.d, 0);
    e1[0] = 1;
    const std::size_t nn = s.N >= 1 ? orb.id_of(e1) : OrbitTable::npos;
    for (int n = 0; n <= s.N; ++n)
        for (std::size_t id = 0; id < nc; ++id) {
            Int128 v = -r.q[n][id];
            if (n == 0 && id == origin) v += 1;
            if (n == 1 && id == nn) v -= 1;
            r.pi[n][id] = v;
        }
    return r;
}

std::vector<std::vector<Int128>> rebuild_counts(const PiSeries& pi) {
    const auto& orb = pi.orbits;
    const std::size_t nc = orb.classes();
    std::vector<std::vector<SparseEntry>> Js(pi.order + 1);
    std::vector<int> e1(pi.d, 0);
    e1[0] = 1;
    for (int k = 1; k <= pi.order; ++k) {
        std::vector<Int128> j = pi.pi[k];
        if (k == 1) j[orb.id_of(e1)] += 1;
        Js[k] = expand(orb, j);
    }
    std::vector<std::vector<Int128>> G(pi.order + 1, std::vector<Int128>(nc, 0));
    G[0][0] = 1;
    for (int n = 1; n <= pi.order; ++n)
        for (int k = 1; k <= n; ++k) {
            auto part = conv_classes(orb, Js[k], G[n - k], n & 1);
            for (std::size_t id = 0; id < nc; ++id) G[n][id] = checked_add(G[n][id], part[id]);
        }
    return G;
}

Int128 roundtrip_defect(const SiteSeries& s, const PiSeries& pi) {
    const auto& orb = s.orbits;
    const std::size_t nc = orb.classes();
    Int128 worst = 0;
    for (int n = 0; n <= s.N; ++n) {
        std::vector<Int128> acc(nc, 0);
        for (int k = 0; k <= n; ++k) {
            auto part = conv_classes(orb, expand(orb, s.counts[k]), pi.q[n - k], n & 1);
            for (std::size_t id = 0; id < nc; ++id) acc[id] = checked_add(acc[id], part[id]);
        }
        if (n == 0) acc[0] -= 1;
        for (Int128 v : acc) worst = std::max(worst, v < 0 ? -v : v);
    }
    return worst;
}

double pc_root(const PiSeries& pi, int order, bool* bracketed) {
    if (order <= 0 || order > pi.order) order = pi.order;
    const int d = pi.d;
    std::vector<long double> tot(order + 1);
    for (int n = 0; n <= order; ++n) tot[n] = static_cast<long double>(pi.total(n));
    auto f = [&](long double p) {
        long double v = 0;
        for (int n = order; n >= 0; --n) v = v * p + tot[n];
        return 2 * d * p + v - 1;
    };
    // First upward crossing; past the convergence radius the truncated series oscillates.
    const long double a = 1.0L / (2 * d), b = 2.0L / (2 * d);
    const int scan = 4096;
    long double lo = a, hi = a;
    bool found = f(a) >= 0;
    if (found) {
        if (bracketed) *bracketed = f(a) == 0;
        return f(a) == 0 ? static_cast<double>(a) : std::nan("");
    }
    for (int i = 1; i <= scan && !found; ++i) {
        hi = a + (b - a) * i / scan;
        if (f(hi) >= 0)
            found = true;
        else
            lo = hi;
    }
    if (bracketed) *bracketed = found;
    if (!found) return std::nan("");
    while (hi - lo > 1e-12L) {
        long double mid = (lo + hi) / 2;
        if (f(mid) < 0)
            lo = mid;
        else
            hi = mid;
    }
    return static_cast<double>((lo + hi) / 2);
}

PcEstimate estimate_pc(const PiSeries& pi) {
    PcEstimate e;
    bool ok = false;
    e.pc = pc_root(pi, pi.order, &ok);
    e.bracketed = ok;
    if (!ok) {
        e.diagnostic = "no sign change of sum J_p - 1 on [1/(2d), 2/(2d)]";
        return e;
    }
    if (pi.order - 2 >= 1) {
        bool ok2 = false;
        e.pc_lower_order = pc_root(pi, pi.order - 2, &ok2);
        e.sensitivity = ok2 ? std::abs(e.pc - e.pc_lower_order) : std::nan("");
        if (!ok2) e.diagnostic = "lower-order root not bracketed";
    } else {
        e.pc_lower_order = e.pc;
    }
    e.band_ok = 2 * pi.d * e.pc >= 1 - 1e-12;
    return e;
}

LambdaCheck lambda_check(const LatticeField& G) {
    LambdaCheck r;
    r.G2_bar = sup_weighted(G, 2);
    DiagramOptions opt;
    opt.compute_h = false;
    opt.wrap_tol = 1.0;
    std::vector<WeightPair> none;
    DiagramSet s = diagram_suite(G, none, opt);
    r.B_bar = s.bars.B;
    r.wrap_estimate = s.wrap_estimate;
    r.pass = r.G2_bar < r.reference && r.B_bar < r.reference;
    return r;
}

}  // namespace lacelab
