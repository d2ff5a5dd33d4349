#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lacelab/model.hpp"

namespace lacelab {

struct BootstrapStep {
    int i = 0;
    double alpha = 0;  // weight on the G line (SAW) or the W line (percolation, LTLA); 0 at i = 0
    double gamma = 0;  // 0 at i = 0
    double phi = 0;
    bool integer_phi = false;  // floor is taken at an exact integer
};

struct BootstrapTrace {
    Model model = Model::saw;
    int d = 0;
    double eps = 0;
    std::vector<BootstrapStep> steps;  // ends with the first repeated phi
    double terminal_alpha = 0;
    double threshold = 0;
    bool pass = false;
    double rho = 0;
    int gate = 0;  // smallest d with a pass as eps -> 0
    std::vector<std::string> warnings;
};

BootstrapTrace run_bootstrap(Model model, int d, double eps = 0.01);

// Saturation level d - c of phi and cap d - c' of gamma.
int phi_offset(Model model);
int gamma_offset(Model model);
double decay_threshold(Model model, int d);
double rho_exponent(Model model, int d);

struct GateRow {
    Model model = Model::saw;
    int min_d = 0;    // at the given eps
    int limit_d = 0;  // as eps -> 0
};

std::vector<GateRow> gate_table(double eps = 0.01, int d_max = 256);

void write_trace_json(std::ostream& os, const BootstrapTrace& t);
void write_gate_csv(std::ostream& os, const std::vector<GateRow>& rows, double eps);

}  // namespace lacelab
