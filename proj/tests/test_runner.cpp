#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lacelab/runner.hpp"

using namespace lacelab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("lacelab_runner_" + name);
    fs::remove_all(p);
    return p;
}

RunResult run(const std::string& cfg, const fs::path& out) {
    RunOptions o;
    o.output_dir = out;
    o.cache_dir = out / "cache";
    return run_experiment(cfg, o);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("malformed configs exit with code 2 and name the field") {
    auto out = scratch("bad");
    auto r = run("{not json", out);
    CHECK(r.exit_code == 2);

    r = run(R"({"command": "bootstrap", "params": {"model": "saw", "d": "seven"}})", out);
    CHECK(r.exit_code == 2);
    CHECK(r.message.find("params.d") != std::string::npos);

    r = run(R"({"command": "bootstrap", "params": {"model": "saw", "d": 7, "colour": 1}})", out);
    CHECK(r.exit_code == 2);
    CHECK(r.message.find("colour") != std::string::npos);

    r = run(R"({"command": "fly"})", out);
    CHECK(r.exit_code == 2);
    CHECK(r.message.find("command") != std::string::npos);

    r = run(R"({"command": "bootstrap", "seed": -3, "params": {"gates": true}})", out);
    CHECK(r.exit_code == 2);
    CHECK(r.message.find("seed") != std::string::npos);

    r = run(R"({"command": "percolation", "params": {"d": 2, "L": 3, "p": 0.5, "weights": [[1]]}})", out);
    CHECK(r.exit_code == 2);
    CHECK(r.message.find("params.weights[0]") != std::string::npos);

    CHECK(run_experiment_file(out / "missing.json").exit_code == 2);
    fs::remove_all(out);
}

TEST_CASE("bootstrap command writes trace, gates and manifest") {
    auto out = scratch("boot");
    auto r = run(R"({"command": "bootstrap", "params": {"model": "saw", "d": 7, "gates": true}})", out);
    REQUIRE(r.exit_code == 0);
    auto j = nlohmann::json::parse(slurp(out / "bootstrap.json"));
    CHECK(j["terminal_alpha"].get<double>() == doctest::Approx(4.99));
    CHECK(slurp(out / "gates.csv").find("percolation,0.01,11,11") != std::string::npos);
    auto m = nlohmann::json::parse(slurp(out / "manifest.json"));
    CHECK(m["command"] == "bootstrap");
    CHECK(m["config_hash"].get<std::string>().size() == 16);
    CHECK(m["files"].size() == 2);
    fs::remove_all(out);
}

TEST_CASE("data files are identical across reruns") {
    auto a = scratch("rep_a"), b = scratch("rep_b");
    const std::string cfgs[] = {
        R"({"command": "percolation", "seed": 4, "params": {"d": 2, "L": 5, "p": 0.4, "samples": 200}})",
        R"({"command": "saw", "params": {"d": 2, "N": 6, "p": [0.1, 0.2]}})",
        R"({"command": "kernels", "params": {"eps": [0.5], "x_max": 5, "samples": 20}})",
        R"({"command": "green", "params": {"d": 3, "method": "series", "L": 5, "n_max": 255}})",
    };
    for (const auto& cfg : cfgs) {
        auto ra = run(cfg, a), rb = run(cfg, b);
        REQUIRE_MESSAGE(ra.exit_code == 0, ra.message);
        REQUIRE(rb.exit_code == 0);
        CHECK(ra.files == rb.files);
        for (const auto& f : ra.files) {
            if (f == "manifest.json") continue;
            CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
        }
    }
    CHECK(fs::exists(a / "cache" / "saw_d2_N6_v1.txt"));
    auto head = slurp(a / "perc_mean.csv");
    CHECK(head.rfind("x1,x2,mean,stderr\n", 0) == 0);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("numerical failures exit with code 1") {
    auto out = scratch("num");
    // bubble far from small on a tiny box: wrap guard trips
    auto r = run(R"({"command": "diagrams", "params": {"source": "saw", "d": 2, "p": 0.3, "N": 6, "L": 3, "h": false}})", out);
    CHECK(r.exit_code == 1);
    CHECK_FALSE(r.message.empty());
    fs::remove_all(out);
}
