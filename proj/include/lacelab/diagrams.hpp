#pragma once

#include <compare>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lacelab/lattice.hpp"
#include "lacelab/model.hpp"

namespace lacelab {

struct WeightPair {
    double beta = 0;
    double gamma = 0;
    auto operator<=>(const WeightPair&) const = default;
};

struct DiagramOptions {
    bool compute_h = true;
    // Displacements a at which H(a, .) is tabulated over all b. Empty: k e_1 for 0 <= k <= h_radius.
    std::vector<LatticePoint> h_points;
    int h_radius = 4;
    // Maximal L^{2d} for the H evaluation.
    double h_budget = 1 << 27;
    // Maximal tolerated share of mass on the outer shell of G or P.
    double wrap_tol = 0.05;
};

struct HSample {
    double beta = 0;
    LatticePoint a;
    LatticeField values;  // H(a, b) over b
};

struct DiagramBars {
    double B = 0;
    double P = 0;
    std::map<WeightPair, double> W, T;
    std::map<double, double> S;
    // Max over the sampled (a, b) only; a lower estimate of the true sup.
    std::map<double, double> H;
};

struct DiagramSet {
    int d = 0, L = 0;
    LatticeField B, P;
    std::map<WeightPair, LatticeField> W, T;
    std::map<double, LatticeField> S;
    std::vector<HSample> H;
    DiagramBars bars;
    double wrap_estimate = 0;
    std::vector<std::string> flags;
};

// Diagrams built from a symmetric two-point field on the torus. The pair (0,0) is always included.
DiagramSet diagram_suite(const LatticeField& G, std::span<const WeightPair> weights, const DiagramOptions& opt = {});

// sup_x |x|^alpha G(x), optionally over x != 0 only.
double sup_weighted(const LatticeField& G, double alpha, bool exclude_origin = false);

struct PiWeights {
    double alpha = 0, beta = 0, gamma = 0;
};

struct PiBound {
    int N = 0;
    double value = 0;
    double sup_offorigin = 0;  // sup_{x != 0} G
    double B_bar = 0;
    double G_alpha_bar = 0;
    double W_bar = 0;          // max(W^(b,g), W^(b,0) W^(0,g)) or W^(b,g) for N = 2
    bool weighted = false;
};

// Bound on the N-th lace coefficient of self-avoiding walk, summed over x with weight |x|^{a+b+g}.
PiBound pi_sum_bound_saw(const LatticeField& G, int N, PiWeights w = {}, const DiagramOptions& opt = {});

struct PointwiseExponent {
    double exponent = 0;
    double coefficient = 0;         // evaluated at the given beta
    std::string coefficient_form;   // "beta^3", "beta^2", "max(beta^2,beta^4)"
    double threshold = 0;           // alpha at which the decay reaches d+2
    bool sufficient = false;        // alpha > threshold
};

PointwiseExponent pi_pointwise_exponent(Model model, int d, double alpha, double beta);

struct PivotFactor {
    LatticeField field;     // 2dp (D*G)
    double adjustment = 0;  // T^(0,gamma) bar + 1/(2d), for displacements next to the pivot
    double T_bar = 0;
    std::string note;
};

PivotFactor pivot_factor(const LatticeField& G, double p, double gamma = 0, const DiagramOptions& opt = {});

inline constexpr double lambda_reference = 0.493;

void write_diagrams_json(std::ostream& os, const DiagramSet& s, bool with_fields = false);

}  // namespace lacelab
