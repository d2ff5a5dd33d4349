#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>

#include "lacelab/diagrams.hpp"
#include "lacelab/lattice.hpp"

namespace lacelab {

struct PercEstimate {
    int d = 0, L = 0;
    double p = 0;
    std::uint64_t n_samples = 0, seed = 0;
    LatticeField mean;    // P(0 <-> x), orbit-averaged
    LatticeField stderr_; // binomial standard error, orbit-averaged
};

struct PercOptions {
    double budget = 2e10;  // bond draws
};

// Bond percolation on the torus of odd side L >= 3.
PercEstimate sample_two_point(int d, int L, double p, std::uint64_t n_samples, std::uint64_t seed,
                              const PercOptions& opt = {});

// Occupation of bond (site, +e_axis) in a given sample; shared by every p for coupling.
double bond_uniform(std::uint64_t seed, std::uint64_t sample, std::uint64_t bond);

struct PercBridge {
    DiagramSet mean;
    DiagramBars lower, upper;  // bars at mean - stderr and mean + stderr, clipped to [0, 1]
    bool ordered = false;      // lower <= mean <= upper for every bar
};

PercBridge perc_diagram_bridge(const PercEstimate& est, std::span<const WeightPair> weights,
                               const DiagramOptions& opt = {});

void write_estimate(std::ostream& os, const PercEstimate& est);

}  // namespace lacelab
