#pragma once

#include <complex>
#include <vector>

#include "lacelab/lattice.hpp"
#include "lacelab/step.hpp"

namespace lacelab {

enum class Parity { odd, even };

// One-dimensional Fourier kernels of |x|^{-eps} sgn(x) (odd) and |x|^{-eps} I[x != 0] (even):
//   w(x) = int_{-pi}^{pi} e^{ipx} L(p) dp.
// The odd kernel is purely imaginary; real_value() returns i L for it and L for the even one.
class FracKernel {
public:
    FracKernel(Parity parity, double eps, int series_terms = 32);

    Parity parity() const { return parity_; }
    double eps() const { return eps_; }
    int series_terms() const { return terms_; }

    std::complex<double> operator()(double p) const;
    double real_value(double p) const;
    // Coefficient c of the local singularity c |p|^{eps-1} (times sgn p for the odd kernel).
    double singular_coeff() const { return c_; }
    // real_value(p) - c |p|^{eps-1} (sgn p); smooth on [-pi, pi].
    double remainder(double p) const;
    // Independent evaluation through the t-integral representation.
    double integral_value(double p) const;
    // L_e(pi) = -eta(eps)/pi (even kernel only).
    double value_at_pi() const { return at_pi_; }

    // Target weight w(x).
    double weight(int x) const;

private:
    double tail_sum(double p) const;

    Parity parity_;
    double eps_;
    int terms_;
    double c_;
    double at_pi_ = 0;
};

// Dirichlet eta function by repeated averaging of alternating partial sums.
double dirichlet_eta(double s);

struct IdentityResult {
    double value;      // 2 int_0^pi {sin, cos}(px) real_value(p) dp
    double target;     // w(x)
    double residual;   // |value - target|
    double self_error; // difference between two node counts
};

IdentityResult kernel_fourier_identity(const FracKernel& L, int x, int quad_nodes = 24);

struct KernelBoundReport {
    std::size_t samples = 0;
    double max_abs_ratio = 0;   // |L| / (bound)
    double min_even_value = 0;  // min L_e (even only)
    double max_upper_ratio = 0; // L_e / (|p|^{eps-1} / (pi(1-eps))) (even only)
    double max_deriv_ratio = 0; // |dL| / derivative bound
    bool parity_ok = true;
    bool ok = false;
};

// Samples p uniformly in (0, pi] with a fixed seed and checks the kernel bounds.
KernelBoundReport kernel_bounds_check(const FracKernel& L, std::size_t samples, std::uint64_t seed = 7);

// Grid values of sum_x |x_1|^{m-eps} f(x) e^{-ikx}, assembled from the kernel identity weights.
FourierValues frac_transform(const LatticeField& f, int m, double eps, const FourierGrid& grid);
// m = 0 branch: weights |x_1|^{-eps} (even) or |x_1|^{-eps} sgn x_1 (odd).
FourierValues frac_transform_negative(const LatticeField& f, Parity parity, double eps, const FourierGrid& grid);
// Inverse of fourier_eval on an odd box of side L <= M.
LatticeField inverse_fourier(const FourierValues& v, const FourierGrid& grid, int L);

struct DerivativeProbe {
    double sup_ratio = 0;         // sup |k|^{2+m} |d_1^m G^(k)|
    std::vector<double> witness;
};

// G^ = g^ / (1 - J^); derivatives along k_1 by exact Leibniz recursion of the finite sums.
DerivativeProbe derivative_bound_probe(const StepDistribution& J, const LatticeField& g, int m, const FourierGrid& grid);

struct ConvBoundReport {
    double rho = 0, eps = 0;
    int M = 0;
    double margin = 0;        // max |(d_1 f * g)| |k_1|^{1-eps} |kv|^{rho-1} |k|
    double margin_inner = 0;  // max ratio to |k_1|^{eps-1} |kv|^{-rho} over |k_1| <= |kv|
    double margin_outer = 0;  // max ratio to |k_1|^{eps-2} |kv|^{1-rho} over |k_1| >= |kv|
};

// f = |k|^{-rho} with k_1 wrapped to [-pi, pi), g = |p|^{eps-1}; k_1 and |kv| on the positive
// midpoint nodes of an M-point grid.
ConvBoundReport conv_bound_check(double rho, double eps, int M);

}  // namespace lacelab
