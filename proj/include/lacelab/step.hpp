#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lacelab/lattice.hpp"

namespace lacelab {

enum class StepKind { nearest_neighbor, spread_out, counterexample, custom };

std::string to_string(StepKind k);

struct CounterexampleParams {
    enum class GKind { log, log_power };

    int d = 5;
    double eps = 0.1;
    GKind g_kind = GKind::log;
    double g_scale = 1.0;
    double g_power = 1.0;
    std::vector<int> l_list;

    // g(x) = c log(2+|x|) or c log(2+|x|)^kappa
    double g(double r) const;
    // h(x) = g(x)^(-(1+eps)/d)
    double h(double r) const;
};

struct StepEntry {
    LatticePoint x;
    double weight;
};

class StepDistribution {
public:
    StepDistribution(int d, std::vector<StepEntry> support, StepKind kind);

    int dim() const { return d_; }
    StepKind kind() const { return kind_; }
    std::span<const StepEntry> support() const { return support_; }
    double mass() const { return mass_; }
    double K1() const { return K1_; }
    double K2() const { return K2_; }
    double K2prime(double rho) const;
    // Largest |x_j| over the support.
    int range() const { return range_; }
    bool nonnegative() const;
    // Support lies on the coordinate axes, so 1 - J^(k) splits into a sum over axes.
    bool axis_supported() const;
    // Every support point has odd l1 norm.
    bool bipartite() const;

    double jhat(std::span<const double> k) const;
    // psi(q) = sum_{m != 0} J(m e_1)(1 - cos(m q)); only meaningful when axis_supported().
    double axis_symbol(double q) const;
    // Weights J(m e_1), m = 1..range(); only meaningful when axis_supported().
    std::vector<double> axis_weights() const;

    LatticeField to_field(int L) const;

    const std::optional<CounterexampleParams>& counterexample() const { return params_; }
    double delta() const { return delta_; }
    void set_counterexample(CounterexampleParams p, double delta) {
        params_ = std::move(p);
        delta_ = delta;
    }

private:
    int d_;
    StepKind kind_;
    std::vector<StepEntry> support_;
    double mass_ = 0, K1_ = 0, K2_ = 0;
    int range_ = 0;
    std::optional<CounterexampleParams> params_;
    double delta_ = 0;
};

StepDistribution nn_step(int d);
StepDistribution spread_out_step(int d, int R);
StepDistribution counterexample_step(const CounterexampleParams& params);
StepDistribution custom_step(const LatticeField& f);

struct MomentReport {
    double rho = 0;
    double mass = 0;
    double K0 = 0;
    int K0_grid = 0;
    double K1 = 0;
    double K2 = 0;
    double K2prime = 0;
    double K3 = 0;
    LatticePoint K3_witness;
    double K3prime = 0;
};

MomentReport moments(const StepDistribution& J, double rho, int grid_M = 0);

struct BoundReport {
    bool ok = true;
    std::string violated;
    std::vector<double> witness;
    double max_ratio = 0;           // max over nodes of (1 - J^) / (K2 |k|^2 / 2d)
    double max_remainder_ratio = 0; // max |R2(k)| / |k|^2 over nodes with |k| <= pi/4
    double max_d1_ratio = 0;        // max |d1 J^| / ((K2/d) |k_1|)
    double max_d2_ratio = 0;        // max |d1^2 J^| / (K2/d)
    std::size_t nodes = 0;
};

BoundReport jhat_bounds_check(const StepDistribution& J, const FourierGrid& grid);

void write_step(std::ostream& os, const StepDistribution& J);

}  // namespace lacelab
