#pragma once

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lacelab/lattice.hpp"
#include "lacelab/step.hpp"

namespace lacelab {

// a_d = d Gamma(d/2 - 1) / (2 pi^{d/2})
double gaussian_constant(int d);

enum class GreenMethod { quadrature, heat_split, series };
std::string to_string(GreenMethod m);

// Where to evaluate C: every site of an odd box, or an explicit list of points.
struct GreenTarget {
    int L = 0;
    std::vector<LatticePoint> points;

    static GreenTarget box(int L);
    static GreenTarget list(std::vector<LatticePoint> pts);
    bool dense() const { return L > 0; }
    // Canonical representatives of all requested sites.
    std::vector<std::vector<int>> canonical(int d) const;
    int radius(int d) const;
};

struct GreenDiagnostics {
    std::vector<int> grids;        // M ladder (quadrature) or torus sides (series)
    std::vector<double> levels;    // per-level raw values at the first target, for reporting
    int panels = 0;                // t-panels (heat split)
    int truncation_order = 0;      // largest walk length (series)
    double wrap_estimate = 0;
    double error_estimate = 0;     // absolute truncation estimate, max over targets
    double split_T = 0;
    std::vector<std::string> flags;
};

// Values of a Z^d-symmetric function keyed by canonical representative.
class GreenResult {
public:
    GreenResult() = default;
    GreenResult(int d, GreenMethod m) : d_(d), method_(m) {}

    int dim() const { return d_; }
    GreenMethod method() const { return method_; }
    bool has(const LatticePoint& x) const { return values_.count(x.canonical().coords()) > 0; }
    double at(const LatticePoint& x) const;
    void set(const LatticePoint& x, double v) { values_[x.canonical().coords()] = v; }
    const std::map<std::vector<int>, double>& values() const { return values_; }

    // Dense field on an odd box; every site must be available.
    LatticeField to_field(int L) const;

    GreenDiagnostics diagnostics;

private:
    int d_ = 0;
    GreenMethod method_ = GreenMethod::quadrature;
    std::map<std::vector<int>, double> values_;
};

struct QuadratureOptions {
    int M = 128;     // finest grid
    int levels = 0;  // number of grids M, M/2, ...; 0 picks 3 for d <= 3 and 2 above
};

GreenResult green_quadrature(const StepDistribution& J, const GreenTarget& target, const QuadratureOptions& opt = {});

struct HeatOptions {
    double t_max = 0;           // 0 picks 1e4 * max(|x|^2, 1)
    double panel_tol = 1e-11;   // per-panel relative self-estimate
    std::size_t torus_budget = std::size_t{1} << 27;  // grid nodes for non-separable J
};

struct HeatSplit {
    double T = 0;
    double C_less = 0;
    double C_greater = 0;
    double total = 0;
    double gaussian_greater = 0;  // Gaussian leading part of C_greater
    double error_estimate = 0;
    int panels = 0;
    bool in_window = true;        // |x| >= 1/eps_split
    std::vector<std::string> flags;
};

// Heat-kernel density I_t(x) = int e^{ikx} e^{-t(1 - J^(k))} dk/(2pi)^d.
double heat_kernel(const StepDistribution& J, const LatticePoint& x, double t);

HeatSplit green_heat_split(const StepDistribution& J, const LatticePoint& x, double eps_split = 0.05,
                           const HeatOptions& opt = {});
// Same split with an explicit T.
HeatSplit heat_split_at(const StepDistribution& J, const LatticePoint& x, double T, const HeatOptions& opt = {});
GreenResult green_heat_split_field(const StepDistribution& J, const GreenTarget& target, double eps_split = 0.05,
                                   const HeatOptions& opt = {});

struct SeriesOptions {
    bool tail = true;           // add the Gaussian tail and extrapolate over a ladder of truncations
    int ladder = 4;             // number of truncation orders n_max+1, (n_max+1)/2, ...
    int torus = 0;              // 0 chooses the torus side automatically
    double wrap_tol = 1e-12;
};

// n_max = 0 gives delta_0. With tail=false the result is the raw partial sum over n <= n_max.
GreenResult green_series(const StepDistribution& J, const GreenTarget& target, int n_max, const SeriesOptions& opt = {});

struct AsymptoteRow {
    LatticePoint x;
    double absx;
    double C;
    double scaled;     // |x|^{d-2} C(x)
    double deviation;  // scaled / (a_d/K1) - 1
};

struct AsymptoteReport {
    int d = 0;
    double a_d = 0;
    double K1 = 0;
    double predicted = 0;
    double error_exponent = 0;  // (rho ^ 2)/d
    double fitted_exponent = 0; // decay exponent of |deviation| fitted over the rows
    std::vector<AsymptoteRow> rows;
};

// Rows for every available axis and diagonal point (x != 0), sorted by |x|.
AsymptoteReport asymptotics_report(const GreenResult& C, const StepDistribution& J, double rho);

struct TwoPointResult {
    GreenResult H;
    double A = 0;     // sum g / K1
    double sum_g = 0;
};

// H = C * g on the target points; C from quadrature on the required translates.
TwoPointResult lace_two_point(const LatticeField& g, const StepDistribution& J, const GreenTarget& target,
                              const QuadratureOptions& opt = {});

struct ResolventReport {
    double max_residual = 0;
    double estimate = 0;
    std::size_t points = 0;
    bool ok = false;
};

// C - delta_0 - J*C at every point whose J-neighbourhood is available.
ResolventReport resolvent_check(const GreenResult& C, const StepDistribution& J);

struct GrowthRow {
    int l;
    double C;
    double r;       // l^{d-2} C(l e_1)
    double trend;   // fitted c g h^4 exp(-c' g h^d)
};

struct GrowthReport {
    int d = 0;
    double delta = 0;
    double K1 = 0;
    double predicted = 0;  // a_d / K1
    std::vector<GrowthRow> rows;
    double fit_c = 0, fit_cprime = 0;
    bool increasing = false;
    std::vector<std::string> flags;
};

// With an empty l_list the rows are taken at l = 12, 24, 48.
GrowthReport counterexample_experiment(const CounterexampleParams& params, int box);

struct SplitReport {
    double rho = 0;
    double T = 0;
    HeatSplit split;
    double reference_total = 0;  // total from the eps-split
};

SplitReport improved_split_probe(const StepDistribution& J, const LatticePoint& x, double rho, const HeatOptions& opt = {});

// y^{-beta} e^{-alpha/y} <= (beta/(alpha e))^beta, compared in log space.
bool power_exp_bound_holds(double y, double alpha, double beta);
// int_{|k|>=b} e^{-a|k|^2} d^dk/(2pi)^d <= (2 pi a)^{-d/2} e^{-a b^2/2}
bool gaussian_tail_bound_holds(double a, double b, int d);

struct HelperReport {
    std::size_t draws = 0;
    std::size_t failures = 0;
};

HelperReport check_power_exp_bound(std::size_t draws, std::uint64_t seed);
HelperReport check_gaussian_tail_bound(std::size_t draws, std::uint64_t seed);

struct HeatDecayRow {
    double t;
    double sup0;  // sup_x |I_t(x)| t^{d/2}
    double supd;  // sup_x |||x|||^d |I_t(x)|
};

// Sup over axis and diagonal points up to radius 8 sigma.
std::vector<HeatDecayRow> heat_decay_probe(const StepDistribution& J, std::span<const double> ts);

}  // namespace lacelab
