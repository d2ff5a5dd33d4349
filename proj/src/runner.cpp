#include "lacelab/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <optional>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lacelab/bootstrap.hpp"
#include "lacelab/diagrams.hpp"
#include "lacelab/errors.hpp"
#include "lacelab/frac.hpp"
#include "lacelab/green.hpp"
#include "lacelab/parallel.hpp"
#include "lacelab/perc.hpp"
#include "lacelab/saw.hpp"
#include "lacelab/step.hpp"

namespace lacelab {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
    fail(ErrorCode::config, path + ": " + what);
}

// Typed access to one JSON object with unknown-key rejection.
class Params {
public:
    Params(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) config_error(path_, "expected an object");
    }

    bool has(const std::string& k) const { return j_.contains(k); }
    void allow(const std::string& k) { used_.insert(k); }

    int integer(const std::string& k, std::optional<int> def = {}) {
        const json* v = get(k, def.has_value());
        if (!v) return *def;
        if (!v->is_number_integer()) config_error(at(k), "expected an integer");
        return v->get<int>();
    }

    double number(const std::string& k, std::optional<double> def = {}) {
        const json* v = get(k, def.has_value());
        if (!v) return *def;
        if (!v->is_number()) config_error(at(k), "expected a number");
        return v->get<double>();
    }

    bool boolean(const std::string& k, bool def) {
        const json* v = get(k, true);
        if (!v) return def;
        if (!v->is_boolean()) config_error(at(k), "expected true or false");
        return v->get<bool>();
    }

    std::string text(const std::string& k, std::optional<std::string> def = {}) {
        const json* v = get(k, def.has_value());
        if (!v) return *def;
        if (!v->is_string()) config_error(at(k), "expected a string");
        return v->get<std::string>();
    }

    std::string choice(const std::string& k, std::initializer_list<const char*> options, std::optional<std::string> def = {}) {
        std::string s = text(k, def);
        for (const char* o : options)
            if (s == o) return s;
        std::string list;
        for (const char* o : options) list += std::string(list.empty() ? "" : ", ") + o;
        config_error(at(k), "expected one of " + list);
    }

    std::vector<int> int_list(const std::string& k, std::vector<int> def) {
        const json* v = get(k, true);
        if (!v) return def;
        if (!v->is_array()) config_error(at(k), "expected an array of integers");
        std::vector<int> out;
        for (std::size_t i = 0; i < v->size(); ++i) {
            if (!(*v)[i].is_number_integer()) config_error(at(k) + "[" + std::to_string(i) + "]", "expected an integer");
            out.push_back((*v)[i].get<int>());
        }
        return out;
    }

    std::vector<double> number_list(const std::string& k, std::vector<double> def) {
        const json* v = get(k, true);
        if (!v) return def;
        if (!v->is_array()) config_error(at(k), "expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v->size(); ++i) {
            if (!(*v)[i].is_number()) config_error(at(k) + "[" + std::to_string(i) + "]", "expected a number");
            out.push_back((*v)[i].get<double>());
        }
        return out;
    }

    std::vector<WeightPair> weight_list(const std::string& k) {
        const json* v = get(k, true);
        if (!v) return {};
        if (!v->is_array()) config_error(at(k), "expected an array of [beta, gamma] pairs");
        std::vector<WeightPair> out;
        for (std::size_t i = 0; i < v->size(); ++i) {
            const json& e = (*v)[i];
            std::string p = at(k) + "[" + std::to_string(i) + "]";
            if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
                config_error(p, "expected [beta, gamma]");
            double b = e[0].get<double>(), g = e[1].get<double>();
            if (b < 0 || g < 0) config_error(p, "weights must be nonnegative");
            out.push_back({b, g});
        }
        return out;
    }

    void positive(const std::string& k, double v) const {
        if (!(v > 0)) config_error(at(k), "must be positive");
    }
    void range(const std::string& k, double v, double lo, double hi) const {
        if (!(v >= lo && v <= hi)) {
            std::ostringstream m;
            m << "must lie in [" << lo << ", " << hi << "]";
            config_error(at(k), m.str());
        }
    }
    void odd(const std::string& k, int v) const {
        if (v < 1 || v % 2 == 0) config_error(at(k), "must be a positive odd integer");
    }

    // Rejects keys never asked for.
    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!used_.count(k)) config_error(at(k), "unknown key");
    }

    std::string at(const std::string& k) const { return path_ + "." + k; }

private:
    const json* get(const std::string& k, bool optional) {
        used_.insert(k);
        if (!j_.contains(k)) {
            if (!optional) config_error(at(k), "missing required field");
            return nullptr;
        }
        return &j_.at(k);
    }

    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

std::string num(double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

class Output {
public:
    explicit Output(fs::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) fail(ErrorCode::io, "cannot create output directory " + dir_.string());
    }
    std::ofstream open(const std::string& name) {
        std::ofstream f(dir_ / name);
        if (!f) fail(ErrorCode::io, "cannot write " + (dir_ / name).string());
        files_.push_back(name);
        return f;
    }
    const std::vector<std::string>& files() const { return files_; }
    const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
    std::vector<std::string> files_;
};

StepDistribution read_step(Params& p, int d) {
    std::string kind = p.choice("step", {"nn", "spread_out"}, "nn");
    if (kind == "nn") return nn_step(d);
    int R = p.integer("R", 2);
    p.positive("R", R);
    return spread_out_step(d, R);
}

std::vector<LatticePoint> ball_reps(int d, int radius) {
    std::vector<LatticePoint> out;
    std::vector<int> a(d, 0);
    auto rec = [&](auto&& self, int j, int maxv, long long n2) -> void {
        if (j == d) {
            out.emplace_back(a);
            return;
        }
        for (int v = 0; v <= maxv; ++v) {
            if (n2 + static_cast<long long>(v) * v > static_cast<long long>(radius) * radius) break;
            a[j] = v;
            self(self, j + 1, v, n2 + static_cast<long long>(v) * v);
        }
        a[j] = 0;
    };
    rec(rec, 0, radius, 0);
    return out;
}

void write_point(std::ostream& os, const std::vector<int>& x) {
    for (std::size_t j = 0; j < x.size(); ++j) os << (j ? "," : "") << x[j];
}

void header_coords(std::ostream& os, int d) {
    for (int j = 1; j <= d; ++j) os << (j > 1 ? "," : "") << 'x' << j;
}

void write_green_csv(std::ostream& os, const GreenResult& C) {
    header_coords(os, C.dim());
    os << ",C\n";
    for (const auto& [x, v] : C.values()) {
        write_point(os, x);
        os << ',' << num(v) << '\n';
    }
}

GreenResult compute_green(Params& p, const StepDistribution& J, const GreenTarget& t, const std::string& method) {
    if (method == "quadrature") {
        QuadratureOptions q;
        q.M = p.integer("M", 128);
        q.levels = p.integer("levels", 0);
        if (q.M < 4 || q.M % 2) config_error(p.at("M"), "must be an even integer >= 4");
        return green_quadrature(J, t, q);
    }
    if (method == "heat_split") {
        double e = p.number("eps_split", 0.05);
        p.range("eps_split", e, 1e-6, 1);
        return green_heat_split_field(J, t, e);
    }
    int n = p.integer("n_max", 8191);
    p.positive("n_max", n);
    return green_series(J, t, n);
}

json diagnostics_json(const GreenDiagnostics& g) {
    return {{"grids", g.grids},
            {"panels", g.panels},
            {"truncation_order", g.truncation_order},
            {"wrap_estimate", g.wrap_estimate},
            {"error_estimate", g.error_estimate},
            {"split_T", g.split_T},
            {"flags", g.flags}};
}

void cmd_green(Params& p, Output& out) {
    int d = p.integer("d");
    p.range("d", d, 1, 12);
    StepDistribution J = read_step(p, d);
    std::string method = p.choice("method", {"quadrature", "heat_split", "series"}, "quadrature");
    int L = p.integer("L", 21);
    p.odd("L", L);
    GreenResult C = compute_green(p, J, GreenTarget::box(L), method);
    p.finish();
    auto f = out.open("green.csv");
    write_green_csv(f, C);
    auto r = resolvent_check(C, J);
    json j = {{"method", to_string(C.method())},
              {"diagnostics", diagnostics_json(C.diagnostics)},
              {"resolvent", {{"max_residual", r.max_residual}, {"estimate", r.estimate}, {"points", r.points}, {"ok", r.ok}}}};
    out.open("green.json") << j.dump(2) << '\n';
}

void cmd_asymptote(Params& p, Output& out) {
    int d = p.integer("d");
    p.range("d", d, 3, 12);
    StepDistribution J = read_step(p, d);
    std::string method = p.choice("method", {"quadrature", "heat_split", "series"}, "quadrature");
    int L = p.integer("L", 41);
    p.odd("L", L);
    double rho = p.number("rho", 2);
    GreenResult C = compute_green(p, J, GreenTarget::box(L), method);
    p.finish();
    AsymptoteReport a = asymptotics_report(C, J, rho);
    auto f = out.open("asymptote.csv");
    header_coords(f, d);
    f << ",absx,C,scaledC,deviation\n";
    for (const auto& r : a.rows) {
        write_point(f, r.x.coords());
        f << ',' << num(r.absx) << ',' << num(r.C) << ',' << num(r.scaled) << ',' << num(r.deviation) << '\n';
    }
    json j = {{"d", a.d},
              {"a_d", a.a_d},
              {"K1", a.K1},
              {"predicted", a.predicted},
              {"error_exponent", a.error_exponent},
              {"fitted_exponent", a.fitted_exponent}};
    out.open("asymptote.json") << j.dump(2) << '\n';
}

void cmd_counterexample(Params& p, Output& out) {
    CounterexampleParams c;
    c.d = p.integer("d", 5);
    c.eps = p.number("eps", 0.2);
    std::string g = p.choice("g", {"log", "log_power"}, "log_power");
    c.g_kind = g == "log" ? CounterexampleParams::GKind::log : CounterexampleParams::GKind::log_power;
    c.g_scale = p.number("g_scale", 0.1);
    c.g_power = p.number("g_power", 16);
    c.l_list = p.int_list("l_list", {12, 24, 48});
    int box = p.integer("box", 201);
    p.odd("box", box);
    p.finish();
    GrowthReport r = counterexample_experiment(c, box);
    json rows = json::array();
    for (const auto& row : r.rows) rows.push_back({{"l", row.l}, {"C", row.C}, {"r", row.r}, {"trend", row.trend}});
    json j = {{"d", r.d},        {"delta", r.delta},   {"K1", r.K1},
              {"predicted", r.predicted}, {"rows", rows}, {"fit_c", r.fit_c},
              {"fit_cprime", r.fit_cprime}, {"increasing", r.increasing}, {"flags", r.flags}};
    out.open("growth.json") << j.dump(2) << '\n';
}

void cmd_kernels(Params& p, Output& out, std::uint64_t seed) {
    std::vector<double> eps = p.number_list("eps", {0.25, 0.5, 0.75});
    int xmax = p.integer("x_max", 50);
    p.positive("x_max", xmax);
    int samples = p.integer("samples", 1000);
    p.positive("samples", samples);
    p.finish();
    for (std::size_t i = 0; i < eps.size(); ++i)
        if (!(eps[i] > 0 && eps[i] < 1)) config_error("params.eps[" + std::to_string(i) + "]", "must lie in (0, 1)");
    auto f = out.open("kernels.csv");
    f << "parity,eps,x,value,target,residual\n";
    json bounds = json::array();
    for (double e : eps)
        for (Parity par : {Parity::odd, Parity::even}) {
            FracKernel K(par, e);
            const char* name = par == Parity::odd ? "odd" : "even";
            for (int x = -xmax; x <= xmax; ++x) {
                if (x == 0) continue;
                auto r = kernel_fourier_identity(K, x);
                f << name << ',' << num(e) << ',' << x << ',' << num(r.value) << ',' << num(r.target) << ','
                  << num(r.residual) << '\n';
            }
            auto b = kernel_bounds_check(K, samples, seed);
            json row = {{"parity", name},
                        {"eps", e},
                        {"samples", b.samples},
                        {"max_abs_ratio", b.max_abs_ratio},
                        {"max_deriv_ratio", b.max_deriv_ratio},
                        {"parity_ok", b.parity_ok},
                        {"ok", b.ok}};
            if (par == Parity::even) {
                row["min_even_value"] = b.min_even_value;
                row["max_upper_ratio"] = b.max_upper_ratio;
            }
            bounds.push_back(row);
        }
    out.open("kernel_bounds.json") << bounds.dump(2) << '\n';
}

fs::path resolve_cache(const RunOptions& opt, const fs::path& output) {
    if (!opt.cache_dir.empty()) return opt.cache_dir;
    if (const char* env = std::getenv("LACELAB_CACHE_DIR"); env && *env) return env;
    return output / "cache";
}

LatticeField diagram_source(Params& p, const fs::path& cache, std::uint64_t seed) {
    std::string src = p.choice("source", {"saw", "percolation", "file"});
    if (src == "file") {
        std::string path = p.text("path");
        std::ifstream in(path);
        if (!in) config_error(p.at("path"), "cannot open " + path);
        return read_field(in);
    }
    int d = p.integer("d");
    p.range("d", d, 1, 12);
    double prob = p.number("p");
    if (src == "saw") {
        int N = p.integer("N", 8);
        p.range("N", N, 1, 30);
        p.range("p", prob, 0, 1);
        int L = p.integer("L", 0);
        if (L) p.odd("L", L);
        SiteSeries s = enumerate_saw_cached(d, N, cache);
        return g_series_eval(s, prob, L).G;
    }
    int L = p.integer("L", 9);
    p.odd("L", L);
    p.range("p", prob, 0, 1);
    int samples = p.integer("samples", 10000);
    p.positive("samples", samples);
    return sample_two_point(d, L, prob, samples, seed).mean;
}

void cmd_diagrams(Params& p, Output& out, const fs::path& cache, std::uint64_t seed) {
    LatticeField G = diagram_source(p, cache, seed);
    std::vector<WeightPair> w = p.weight_list("weights");
    DiagramOptions o;
    o.compute_h = p.boolean("h", true);
    o.h_radius = p.integer("h_radius", 4);
    o.wrap_tol = p.number("wrap_tol", 0.05);
    int pi_max = p.integer("pi_N_max", 0);
    bool fields = p.boolean("fields", false);
    p.finish();
    DiagramSet s = diagram_suite(G, w, o);
    {
        auto f = out.open("diagrams.json");
        write_diagrams_json(f, s, fields);
    }
    if (pi_max >= 2) {
        auto f = out.open("pi_bounds.csv");
        f << "N,bound,sup_offorigin,B_bar\n";
        for (int N = 2; N <= pi_max; ++N) {
            PiBound b = pi_sum_bound_saw(G, N, {}, o);
            f << N << ',' << num(b.value) << ',' << num(b.sup_offorigin) << ',' << num(b.B_bar) << '\n';
        }
    }
}

void cmd_saw(Params& p, Output& out, const fs::path& cache) {
    int d = p.integer("d");
    p.range("d", d, 1, 12);
    int N = p.integer("N");
    p.range("N", N, 0, 30);
    std::vector<double> ps = p.number_list("p", {});
    for (std::size_t i = 0; i < ps.size(); ++i)
        if (ps[i] < 0) config_error("params.p[" + std::to_string(i) + "]", "must be nonnegative");
    bool use_cache = p.boolean("cache", true);
    p.finish();
    SiteSeries s = use_cache ? enumerate_saw_cached(d, N, cache) : enumerate_saw(d, N);
    PiSeries pi = extract_pi_series(s);
    {
        auto f = out.open("saw_counts.csv");
        f << "n,";
        header_coords(f, d);
        f << ",count\n";
        for (int n = 0; n <= N; ++n)
            for (std::size_t id = 0; id < s.orbits.classes(); ++id) {
                if (!s.counts[n][id]) continue;
                f << n << ',';
                write_point(f, s.orbits.rep(id).coords());
                f << ',' << s.counts[n][id] << '\n';
            }
    }
    auto i128 = [](Int128 v) {
        if (v == 0) return std::string("0");
        bool neg = v < 0;
        unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
        std::string r;
        while (u) {
            r.insert(r.begin(), static_cast<char>('0' + static_cast<int>(u % 10)));
            u /= 10;
        }
        return neg ? "-" + r : r;
    };
    {
        auto f = out.open("pi_series.csv");
        f << "n,";
        header_coords(f, d);
        f << ",pi\n";
        for (int n = 0; n <= N; ++n)
            for (std::size_t id = 0; id < pi.orbits.classes(); ++id) {
                if (pi.pi[n][id] == 0) continue;
                f << n << ',';
                write_point(f, pi.orbits.rep(id).coords());
                f << ',' << i128(pi.pi[n][id]) << '\n';
            }
    }
    PcEstimate e = estimate_pc(pi);
    json totals = json::array();
    for (int n = 0; n <= N; ++n) totals.push_back(s.total(n));
    json j = {{"d", d},
              {"N", N},
              {"totals", totals},
              {"pc", e.bracketed ? json(e.pc) : json(nullptr)},
              {"pc_lower_order", e.bracketed ? json(e.pc_lower_order) : json(nullptr)},
              {"sensitivity", e.bracketed ? json(e.sensitivity) : json(nullptr)},
              {"band_ok", e.band_ok},
              {"diagnostic", e.diagnostic}};
    json lam = json::array();
    for (double prob : ps) {
        SeriesField G = g_series_eval(s, prob);
        LambdaCheck l = lambda_check(G.G);
        lam.push_back({{"p", prob},
                       {"G2_bar", l.G2_bar},
                       {"B_bar", l.B_bar},
                       {"last_term", G.last_term},
                       {"wrap_estimate", l.wrap_estimate},
                       {"reference", l.reference},
                       {"pass", l.pass}});
    }
    j["lambda"] = lam;
    out.open("saw.json") << j.dump(2) << '\n';
}

void cmd_percolation(Params& p, Output& out, std::uint64_t seed) {
    int d = p.integer("d");
    p.range("d", d, 1, 12);
    int L = p.integer("L");
    p.odd("L", L);
    if (L < 3) config_error(p.at("L"), "must be at least 3");
    double prob = p.number("p");
    p.range("p", prob, 0, 1);
    int samples = p.integer("samples", 10000);
    p.positive("samples", samples);
    bool bridge = p.boolean("bridge", false);
    std::vector<WeightPair> w = p.weight_list("weights");
    DiagramOptions o;
    o.compute_h = p.boolean("h", false);
    o.wrap_tol = p.number("wrap_tol", 1.0);
    p.finish();
    PercEstimate e = sample_two_point(d, L, prob, samples, seed);
    auto f = out.open("perc_mean.csv");
    header_coords(f, d);
    f << ",mean,stderr\n";
    std::vector<int> x(d);
    for (std::size_t i = 0; i < e.mean.size(); ++i) {
        e.mean.coords(i, x);
        write_point(f, x);
        f << ',' << num(e.mean[i]) << ',' << num(e.stderr_[i]) << '\n';
    }
    {
        auto fe = out.open("perc_estimate.json");
        write_estimate(fe, e);
    }
    if (bridge) {
        PercBridge b = perc_diagram_bridge(e, w, o);
        json j = {{"B", {b.lower.B, b.mean.bars.B, b.upper.B}},
                  {"P", {b.lower.P, b.mean.bars.P, b.upper.P}},
                  {"ordered", b.ordered},
                  {"lambda_reference", lambda_reference}};
        json T = json::array(), W = json::array();
        for (const auto& [k, v] : b.mean.bars.T)
            T.push_back({{"beta", k.beta}, {"gamma", k.gamma}, {"bars", {b.lower.T.at(k), v, b.upper.T.at(k)}}});
        for (const auto& [k, v] : b.mean.bars.W)
            W.push_back({{"beta", k.beta}, {"gamma", k.gamma}, {"bars", {b.lower.W.at(k), v, b.upper.W.at(k)}}});
        j["T"] = T;
        j["W"] = W;
        out.open("perc_bars.json") << j.dump(2) << '\n';
    }
}

void cmd_bootstrap(Params& p, Output& out) {
    double eps = p.number("eps", 0.01);
    if (!(eps > 0 && eps < 1)) config_error(p.at("eps"), "must lie in (0, 1)");
    bool gates = p.boolean("gates", false);
    std::optional<Model> model;
    int d = 0;
    if (p.has("model")) {
        std::string m = p.text("model");
        try {
            model = parse_model(m);
        } catch (const Error&) {
            config_error(p.at("model"), "expected saw, percolation or ltla");
        }
        d = p.integer("d");
        if (d < 3) config_error(p.at("d"), "must be at least 3");
    }
    p.finish();
    if (!model && !gates) config_error("params", "give a model and d, or gates: true");
    if (model) {
        auto f = out.open("bootstrap.json");
        write_trace_json(f, run_bootstrap(*model, d, eps));
    }
    if (gates) {
        auto f = out.open("gates.csv");
        write_gate_csv(f, gate_table(eps), eps);
    }
}

void cmd_crosscheck(Params& p, Output& out) {
    int d = p.integer("d", 3);
    p.range("d", d, 3, 8);
    int radius = p.integer("radius", 8);
    p.positive("radius", radius);
    QuadratureOptions q;
    q.M = p.integer("M", 512);
    q.levels = p.integer("levels", 0);
    if (q.M < 4 || q.M % 2) config_error(p.at("M"), "must be an even integer >= 4");
    int n_max = p.integer("n_max", 8191);
    p.positive("n_max", n_max);
    double eps_split = p.number("eps_split", 0.05);
    p.finish();
    StepDistribution J = nn_step(d);
    GreenTarget t = GreenTarget::list(ball_reps(d, radius));
    GreenResult cq = green_quadrature(J, t, q);
    GreenResult ch = green_heat_split_field(J, t, eps_split);
    GreenResult cs = green_series(J, t, n_max);
    auto f = out.open("crosscheck.csv");
    header_coords(f, d);
    f << ",quadrature,heat_split,series,max_rel\n";
    double worst = 0;
    for (const auto& x : t.points) {
        double a = cq.at(x), b = ch.at(x), c = cs.at(x);
        double m = std::max({std::abs(a - b) / std::abs(b), std::abs(a - c) / std::abs(c), std::abs(b - c) / std::abs(c)});
        worst = std::max(worst, m);
        write_point(f, x.coords());
        f << ',' << num(a) << ',' << num(b) << ',' << num(c) << ',' << num(m) << '\n';
    }
    json j = {{"d", d}, {"points", t.points.size()}, {"max_pairwise_relative", worst}, {"C0", cq.at(LatticePoint::origin(d))}};
    out.open("crosscheck.json") << j.dump(2) << '\n';
}

std::string fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream o;
    o << std::hex << std::setw(16) << std::setfill('0') << h;
    return o.str();
}

}  // namespace

RunResult run_experiment(std::string_view config_text, const RunOptions& opt) {
    RunResult result;
    auto t0 = std::chrono::steady_clock::now();
    try {
        json cfg;
        try {
            cfg = json::parse(config_text);
        } catch (const json::parse_error& e) {
            config_error("config", std::string("not valid JSON: ") + e.what());
        }
        Params top(cfg, "config");
        std::string command = top.choice("command", {"green", "asymptote", "counterexample", "kernels", "diagrams",
                                                     "saw", "percolation", "bootstrap", "crosscheck"});
        std::uint64_t seed = 1;
        if (top.has("seed")) {
            const json& s = cfg.at("seed");
            if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<long long>() < 0))
                config_error("config.seed", "expected a nonnegative integer");
            seed = s.get<std::uint64_t>();
        }
        top.allow("seed");
        std::string out_dir = top.text("output_dir", "lacelab-out");
        top.allow("params");
        top.finish();
        static const json empty = json::object();
        Params params(cfg.contains("params") ? cfg.at("params") : empty, "params");

        fs::path dir = opt.output_dir.empty() ? fs::path(out_dir) : opt.output_dir;
        if (opt.threads > 0) set_threads(opt.threads);
        Output out(dir);
        fs::path cache = resolve_cache(opt, dir);

        if (command == "green") cmd_green(params, out);
        else if (command == "asymptote") cmd_asymptote(params, out);
        else if (command == "counterexample") cmd_counterexample(params, out);
        else if (command == "kernels") cmd_kernels(params, out, seed);
        else if (command == "diagrams") cmd_diagrams(params, out, cache, seed);
        else if (command == "saw") cmd_saw(params, out, cache);
        else if (command == "percolation") cmd_percolation(params, out, seed);
        else if (command == "bootstrap") cmd_bootstrap(params, out);
        else cmd_crosscheck(params, out);

        double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::time_t now = std::time(nullptr);
        char stamp[32];
        std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        json manifest = {{"command", command},
                         {"config_hash", fnv1a(cfg.dump())},
                         {"config", cfg},
                         {"version", version_string},
                         {"threads", threads()},
                         {"cache_dir", cache.string()},
                         {"files", out.files()},
                         {"wall_time_s", wall},
                         {"timestamp", stamp}};
        std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
        result.files = out.files();
        result.files.push_back("manifest.json");
    } catch (const Error& e) {
        result.exit_code = e.code() == ErrorCode::config ? 2 : 1;
        result.message = e.what();
    } catch (const std::exception& e) {
        result.exit_code = 1;
        result.message = e.what();
    }
    return result;
}

RunResult run_experiment_file(const fs::path& config, const RunOptions& opt) {
    std::ifstream in(config);
    if (!in) return {2, "config: cannot open " + config.string(), {}};
    std::stringstream ss;
    ss << in.rdbuf();
    return run_experiment(ss.str(), opt);
}

}  // namespace lacelab
