#include "lacelab/bootstrap.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "lacelab/errors.hpp"

namespace lacelab {

std::string to_string(Model m) {
    switch (m) {
    case Model::saw: return "saw";
    case Model::percolation: return "percolation";
    case Model::ltla: return "ltla";
    }
    return "?";
}

Model parse_model(const std::string& s) {
    std::string t(s);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "saw") return Model::saw;
    if (t == "percolation" || t == "perc") return Model::percolation;
    if (t == "ltla") return Model::ltla;
    fail(ErrorCode::config, "unknown model '" + s + "' (expected saw, percolation or ltla)");
}

int phi_offset(Model m) { return m == Model::saw ? 2 : m == Model::percolation ? 4 : 6; }
int gamma_offset(Model m) { return phi_offset(m) + 2; }

double decay_threshold(Model m, int d) {
    switch (m) {
    case Model::saw: return (d + 2) / 3.0;
    case Model::percolation: return (d + 2) / 2.0;
    case Model::ltla: return (3.0 * d + 2) / 4.0;
    }
    return 0;
}

double rho_exponent(Model m, int d) {
    switch (m) {
    case Model::saw: return 2.0 * (d - 4);
    case Model::percolation: return d - 6.0;
    case Model::ltla: return d - 10.0;
    }
    return 0;
}

namespace {

int limit_gate(Model m) {
    // threshold(d) < d - c is linear in d; the smallest integer above the crossing
    for (int d = 1;; ++d)
        if (decay_threshold(m, d) < d - phi_offset(m)) return d;
}

}  // namespace

BootstrapTrace run_bootstrap(Model model, int d, double eps) {
    require(d >= 3, ErrorCode::domain, "run_bootstrap: need d >= 3");
    require(eps > 0 && eps < 1, ErrorCode::domain, "run_bootstrap: eps must lie in (0, 1)");
    BootstrapTrace t;
    t.model = model;
    t.d = d;
    t.eps = eps;
    const int cphi = phi_offset(model), cgam = gamma_offset(model);
    double phi = 2;
    t.steps.push_back({0, 0, 0, phi, false});
    for (int i = 1; i < 10000; ++i) {
        double fl = std::floor(phi);
        double next = std::min<double>(d - cphi, fl + 2) - eps;
        double gamma = std::min<double>(d - cgam, fl) - eps;
        BootstrapStep s{i, 2, gamma, next, false};
        s.integer_phi = next == std::floor(next);
        if (s.integer_phi) {
            std::ostringstream m;
            m << "phi_" << i << " = " << next << " is an integer; floor taken literally";
            t.warnings.push_back(m.str());
        }
        // Weight pair of the W/T line: (0, gamma) for SAW, (2, gamma) otherwise.
        double b = model == Model::saw ? 0 : 2, g = std::max(gamma, 0.0);
        if (b + g - (std::floor(b) + std::floor(g)) >= 1) {
            std::ostringstream m;
            m << "step " << i << ": weight pair (" << b << ", " << g << ") violates the fractional-part condition";
            t.warnings.push_back(m.str());
        }
        if (gamma < 0) t.warnings.push_back("step " + std::to_string(i) + ": gamma is negative; dimension too low");
        t.steps.push_back(s);
        if (next == phi) break;
        phi = next;
    }
    t.terminal_alpha = t.steps.back().phi;
    t.threshold = decay_threshold(model, d);
    t.pass = t.threshold < t.terminal_alpha;
    t.rho = rho_exponent(model, d);
    t.gate = limit_gate(model);
    return t;
}

std::vector<GateRow> gate_table(double eps, int d_max) {
    require(eps > 0 && eps < 1, ErrorCode::domain, "gate_table: eps must lie in (0, 1)");
    std::vector<GateRow> rows;
    for (Model m : {Model::saw, Model::percolation, Model::ltla}) {
        GateRow r{m, 0, limit_gate(m)};
        for (int d = 3; d <= d_max; ++d)
            if (run_bootstrap(m, d, eps).pass) {
                r.min_d = d;
                break;
            }
        rows.push_back(r);
    }
    return rows;
}

void write_trace_json(std::ostream& os, const BootstrapTrace& t) {
    nlohmann::json j;
    j["model"] = to_string(t.model);
    j["d"] = t.d;
    j["eps"] = t.eps;
    auto& steps = j["steps"] = nlohmann::json::array();
    for (const auto& s : t.steps)
        steps.push_back({{"i", s.i}, {"alpha", s.alpha}, {"gamma", s.gamma}, {"phi", s.phi}, {"integer_phi", s.integer_phi}});
    j["terminal_alpha"] = t.terminal_alpha;
    j["threshold"] = t.threshold;
    j["verdict"] = t.pass ? "pass" : "fail";
    j["rho"] = t.rho;
    j["gate"] = t.gate;
    j["warnings"] = t.warnings;
    os << j.dump(2) << '\n';
}

void write_gate_csv(std::ostream& os, const std::vector<GateRow>& rows, double eps) {
    os << "model,eps,min_d,limit_d\n";
    for (const auto& r : rows) os << to_string(r.model) << ',' << eps << ',' << r.min_d << ',' << r.limit_d << '\n';
}

}  // namespace lacelab
