#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "lacelab/step.hpp"

namespace lacelab::detail {

// Nonnegative half of a symmetric one-dimensional k-grid. Each node stands for
// itself and its mirror image, which is folded into the weight.
struct AxisGrid {
    std::vector<double> q;
    std::vector<double> w;
    double factor = 1.0;  // per-axis normalisation
};

// Offset midpoint grid with M (even) nodes on [-pi, pi].
AxisGrid midpoint_axis(int M);
// Torus dual grid k = 2 pi m / L for odd L.
AxisGrid torus_axis(int L);

// Evaluates u(k) = 1 - J^(k) on the tensor grid.
class Symbol {
public:
    explicit Symbol(const StepDistribution& J);
    bool separable() const { return separable_; }
    const StepDistribution& step() const { return *J_; }

private:
    const StepDistribution* J_;
    bool separable_;
};

// Maps a row of u values to integrand values in place of out.
using RowKernel = std::function<void(std::span<const double> u, std::span<double> out)>;

// For every target x returns
//   prod_j factor * sum_{i_0..i_{d-1}} prod_j w_{i_j} cos(q_{i_j} x_j) F(u(q_{i_0}, ..., q_{i_{d-1}})).
// Targets are contracted axis by axis from the last; sorted-descending coordinates keep
// the number of distinct suffixes small. mem_cap bounds the top-level work arrays in bytes.
std::vector<double> cosine_sum(const AxisGrid& grid, const Symbol& sym, const RowKernel& F,
                               std::span<const std::vector<int>> targets, std::size_t mem_cap = std::size_t{1} << 29);

}  // namespace lacelab::detail
