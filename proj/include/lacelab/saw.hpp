#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lacelab/diagrams.hpp"
#include "lacelab/lattice.hpp"

namespace lacelab {

using Int128 = __int128;

// Exact coefficients indexed by orbit representative (absolute values sorted descending).
class OrbitTable {
public:
    OrbitTable() = default;
    OrbitTable(int d, int N);

    int dim() const { return d_; }
    int order() const { return N_; }
    std::size_t classes() const { return reps_.size(); }
    const LatticePoint& rep(std::size_t id) const { return reps_[id]; }
    // Class id of any point with |x|_1 <= N, or npos.
    std::size_t id_of(std::span<const int> x) const;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    int d_ = 0, N_ = 0;
    std::vector<LatticePoint> reps_;
    std::vector<std::int32_t> lookup_;  // base-(N+1) code of the sorted tuple
};

struct SiteSeries {
    int d = 0;
    int N = 0;
    OrbitTable orbits;
    // counts[n][id] = c_n(x) for one point x of the class
    std::vector<std::vector<std::uint64_t>> counts;

    std::uint64_t at(int n, const LatticePoint& x) const;
    // c_n = sum_x c_n(x)
    std::uint64_t total(int n) const;
};

struct EnumerateOptions {
    double node_cap = 2e10;  // estimated DFS nodes
};

SiteSeries enumerate_saw(int d, int N, const EnumerateOptions& opt = {});

// Cached enumeration under dir (created on demand).
SiteSeries enumerate_saw_cached(int d, int N, const std::filesystem::path& dir, const EnumerateOptions& opt = {});
std::string series_cache_name(int d, int N);
void save_series(std::ostream& os, const SiteSeries& s);
SiteSeries load_series(std::istream& is);

struct SeriesField {
    LatticeField G;
    double last_term = 0;  // sum_x c_N(x) p^N
};

// G_p(x) = sum_{n <= N} c_n(x) p^n on a box of side L (default 2N+1).
SeriesField g_series_eval(const SiteSeries& s, double p, int L = 0);

struct PiSeries {
    int d = 0;
    int order = 0;
    OrbitTable orbits;
    std::vector<std::vector<Int128>> pi;  // pi[n][id]
    std::vector<std::vector<Int128>> q;   // convolution inverse of G

    Int128 at(int n, const LatticePoint& x) const;
    // sum_x Pi_n(x)
    Int128 total(int n) const;
};

PiSeries extract_pi_series(const SiteSeries& s);

// Rebuilds c_n(x) from Pi by G = delta + J * G with J = 2dpD + Pi.
std::vector<std::vector<Int128>> rebuild_counts(const PiSeries& pi);

// Max |sum_k G_k * Q_{n-k} - delta_{n0} delta| over all n <= N and classes (0 for an exact inverse).
Int128 roundtrip_defect(const SiteSeries& s, const PiSeries& pi);

struct PcEstimate {
    double pc = 0;
    double pc_lower_order = 0;  // root with the series cut at N-2
    double sensitivity = 0;     // |pc - pc_lower_order|
    bool bracketed = false;
    bool band_ok = false;       // 2d pc >= 1
    std::string diagnostic;
};

// First root of sum_x J_p(x) = 1 in [1/(2d), 2/(2d)], from the series truncated at `order` (0: full).
PcEstimate estimate_pc(const PiSeries& pi);
double pc_root(const PiSeries& pi, int order, bool* bracketed = nullptr);

struct LambdaCheck {
    double G2_bar = 0;
    double B_bar = 0;
    double wrap_estimate = 0;
    bool pass = false;
    double reference = lambda_reference;
};

LambdaCheck lambda_check(const LatticeField& G);

}  // namespace lacelab
