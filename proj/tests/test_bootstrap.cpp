#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "lacelab/bootstrap.hpp"
#include "lacelab/errors.hpp"

using namespace lacelab;

namespace {
std::vector<double> phis(const BootstrapTrace& t) {
    std::vector<double> v;
    for (const auto& s : t.steps) v.push_back(s.phi);
    return v;
}
}  // namespace

TEST_CASE("saw trace in d=7 reaches its fixed point") {
    auto t = run_bootstrap(Model::saw, 7, 0.01);
    auto v = phis(t);
    REQUIRE(v.size() == 4);
    CHECK(v[0] == 2.0);
    CHECK(v[1] == doctest::Approx(3.99));
    CHECK(v[2] == doctest::Approx(4.99));
    CHECK(v[3] == v[2]);
    CHECK(t.terminal_alpha == doctest::Approx(4.99));
    CHECK(t.threshold == doctest::Approx(3.0));
    CHECK(t.pass);
    CHECK(t.steps[1].gamma == doctest::Approx(1.99));
    CHECK(t.steps[0].alpha == 0);
    CHECK(t.steps[1].alpha == 2);
}

TEST_CASE("saturation and failure near the gate") {
    auto s5 = run_bootstrap(Model::saw, 5, 0.01);
    CHECK(s5.terminal_alpha == doctest::Approx(2.99));
    CHECK(s5.pass);
    CHECK_FALSE(run_bootstrap(Model::saw, 4, 0.01).pass);
    auto p10 = run_bootstrap(Model::percolation, 10, 0.01);
    CHECK(p10.terminal_alpha == doctest::Approx(5.99));
    CHECK_FALSE(p10.pass);
    CHECK(run_bootstrap(Model::percolation, 11, 0.01).pass);
    CHECK_FALSE(run_bootstrap(Model::ltla, 26, 0.01).pass);
    CHECK(run_bootstrap(Model::ltla, 27, 0.01).pass);
}

TEST_CASE("gate table") {
    auto rows = gate_table(0.01);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].min_d == 5);
    CHECK(rows[1].min_d == 11);
    CHECK(rows[2].min_d == 27);
    CHECK(rows[0].limit_d == 5);
    CHECK(rows[1].limit_d == 11);
    CHECK(rows[2].limit_d == 27);
    // a large eps pushes the gate up
    CHECK(gate_table(0.7)[0].min_d == 6);
    std::ostringstream os;
    write_gate_csv(os, rows, 0.01);
    CHECK(os.str().rfind("model,eps,min_d,limit_d\nsaw,0.01,5,5\n", 0) == 0);
}

TEST_CASE("exponent helpers") {
    CHECK(rho_exponent(Model::saw, 7) == 6);
    CHECK(rho_exponent(Model::percolation, 11) == 5);
    CHECK(rho_exponent(Model::ltla, 27) == 17);
    CHECK(decay_threshold(Model::ltla, 10) == doctest::Approx(8.0));
    CHECK(phi_offset(Model::percolation) == 4);
    CHECK(gamma_offset(Model::ltla) == 8);
}

TEST_CASE("warnings and validation") {
    auto t = run_bootstrap(Model::saw, 3, 0.01);
    bool neg = false;
    for (const auto& w : t.warnings) neg = neg || w.find("negative") != std::string::npos;
    CHECK(neg);
    auto p = run_bootstrap(Model::percolation, 5, 0.5);
    CHECK_FALSE(p.warnings.empty());
    CHECK_THROWS_AS(run_bootstrap(Model::saw, 2, 0.01), Error);
    CHECK_THROWS_AS(run_bootstrap(Model::saw, 7, 0.0), Error);
    CHECK(parse_model("PERC") == Model::percolation);
    CHECK_THROWS_AS(parse_model("ising"), Error);
}

TEST_CASE("trace JSON") {
    std::ostringstream os;
    write_trace_json(os, run_bootstrap(Model::saw, 7));
    auto j = nlohmann::json::parse(os.str());
    CHECK(j["verdict"] == "pass");
    CHECK(j["steps"].size() == 4);
    CHECK(j["gate"] == 5);
}
