#include "lacelab/lacelab.h"

#include <limits>
#include <string>

#include "lacelab/bootstrap.hpp"
#include "lacelab/diagrams.hpp"
#include "lacelab/errors.hpp"
#include "lacelab/green.hpp"
#include "lacelab/parallel.hpp"
#include "lacelab/perc.hpp"
#include "lacelab/runner.hpp"
#include "lacelab/saw.hpp"

struct lacelab_field {
    lacelab::LatticeField f;
};

struct lacelab_series {
    lacelab::SiteSeries s;
    lacelab::PiSeries pi;
};

namespace {

thread_local std::string last_error;

lacelab_status to_status(lacelab::ErrorCode c) { return static_cast<lacelab_status>(static_cast<int>(c)); }

template <class F>
lacelab_status guarded(F&& fn) {
    try {
        last_error.clear();
        fn();
        return LACELAB_OK;
    } catch (const lacelab::Error& e) {
        last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return LACELAB_E_BUDGET;
    } catch (const std::exception& e) {
        last_error = e.what();
        return LACELAB_E_INTERNAL;
    }
}

void need(bool cond, const char* what) {
    if (!cond) throw lacelab::Error(lacelab::ErrorCode::argument, what);
}

lacelab::Model model_of(lacelab_model m) {
    switch (m) {
    case LACELAB_SAW: return lacelab::Model::saw;
    case LACELAB_PERCOLATION: return lacelab::Model::percolation;
    case LACELAB_LTLA: return lacelab::Model::ltla;
    }
    need(false, "unknown model");
    return lacelab::Model::saw;
}

}  // namespace

extern "C" {

const char* lacelab_last_error(void) { return last_error.c_str(); }

const char* lacelab_version(void) { return lacelab::version_string; }

lacelab_status lacelab_set_threads(int n) {
    return guarded([&] {
        need(n >= 0, "thread count must be nonnegative");
        lacelab::set_threads(n);
    });
}

lacelab_status lacelab_gaussian_constant(int d, double* out) {
    return guarded([&] {
        need(out, "null output");
        *out = lacelab::gaussian_constant(d);
    });
}

lacelab_status lacelab_green_nn(int d, lacelab_method method, int L, int param, lacelab_field** out) {
    return guarded([&] {
        need(out, "null output");
        *out = nullptr;
        auto J = lacelab::nn_step(d);
        auto t = lacelab::GreenTarget::box(L);
        lacelab::GreenResult C;
        switch (method) {
        case LACELAB_QUADRATURE: {
            lacelab::QuadratureOptions q;
            if (param > 0) q.M = param;
            C = lacelab::green_quadrature(J, t, q);
            break;
        }
        case LACELAB_HEAT_SPLIT: C = lacelab::green_heat_split_field(J, t); break;
        case LACELAB_SERIES: C = lacelab::green_series(J, t, param > 0 ? param : 8191); break;
        default: need(false, "unknown method");
        }
        *out = new lacelab_field{C.to_field(L)};
    });
}

lacelab_status lacelab_field_new(int d, int L, const double* values, size_t n, lacelab_field** out) {
    return guarded([&] {
        need(out && values, "null argument");
        need(d >= 1 && L >= 1 && L % 2 == 1, "need d >= 1 and odd L");
        lacelab::LatticeField f(d, L);
        need(n == f.size(), "value count does not match L^d");
        std::copy(values, values + n, f.values().begin());
        *out = new lacelab_field{std::move(f)};
    });
}

lacelab_status lacelab_field_shape(const lacelab_field* f, int* d, int* L) {
    return guarded([&] {
        need(f && d && L, "null argument");
        *d = f->f.dim();
        *L = f->f.side();
    });
}

lacelab_status lacelab_field_get(const lacelab_field* f, const int* x, double* out) {
    return guarded([&] {
        need(f && x && out, "null argument");
        *out = f->f[f->f.index(std::span<const int>(x, static_cast<std::size_t>(f->f.dim())))];
    });
}

lacelab_status lacelab_field_values(const lacelab_field* f, double* buf, size_t n) {
    return guarded([&] {
        need(f && buf, "null argument");
        need(n >= f->f.size(), "buffer too small");
        std::copy(f->f.values().begin(), f->f.values().end(), buf);
    });
}

void lacelab_field_free(lacelab_field* f) { delete f; }

lacelab_status lacelab_saw_enumerate(int d, int N, const char* cache_dir, lacelab_series** out) {
    return guarded([&] {
        need(out, "null output");
        *out = nullptr;
        auto s = cache_dir ? lacelab::enumerate_saw_cached(d, N, cache_dir) : lacelab::enumerate_saw(d, N);
        auto pi = lacelab::extract_pi_series(s);
        *out = new lacelab_series{std::move(s), std::move(pi)};
    });
}

lacelab_status lacelab_saw_count(const lacelab_series* s, int n, const int* x, uint64_t* out) {
    return guarded([&] {
        need(s && x && out, "null argument");
        *out = s->s.at(n, lacelab::LatticePoint(std::vector<int>(x, x + s->s.d)));
    });
}

lacelab_status lacelab_saw_total(const lacelab_series* s, int n, uint64_t* out) {
    return guarded([&] {
        need(s && out, "null argument");
        need(n >= 0 && n <= s->s.N, "order out of range");
        *out = s->s.total(n);
    });
}

lacelab_status lacelab_saw_pi_total(const lacelab_series* s, int n, int64_t* out) {
    return guarded([&] {
        need(s && out, "null argument");
        need(n >= 0 && n <= s->pi.order, "order out of range");
        lacelab::Int128 v = s->pi.total(n);
        if (v > std::numeric_limits<int64_t>::max() || v < std::numeric_limits<int64_t>::min())
            lacelab::fail(lacelab::ErrorCode::overflow, "coefficient exceeds 64 bits");
        *out = static_cast<int64_t>(v);
    });
}

lacelab_status lacelab_saw_pc(const lacelab_series* s, double* pc, double* sensitivity) {
    return guarded([&] {
        need(s && pc, "null argument");
        auto e = lacelab::estimate_pc(s->pi);
        if (!e.bracketed) lacelab::fail(lacelab::ErrorCode::numerical, "estimate_pc: " + e.diagnostic);
        *pc = e.pc;
        if (sensitivity) *sensitivity = e.sensitivity;
    });
}

lacelab_status lacelab_saw_field(const lacelab_series* s, double p, int L, lacelab_field** out) {
    return guarded([&] {
        need(s && out, "null argument");
        *out = new lacelab_field{lacelab::g_series_eval(s->s, p, L).G};
    });
}

void lacelab_series_free(lacelab_series* s) { delete s; }

lacelab_status lacelab_perc_sample(int d, int L, double p, uint64_t n_samples, uint64_t seed, lacelab_field** mean,
                                   lacelab_field** stderr_out) {
    return guarded([&] {
        need(mean, "null output");
        auto e = lacelab::sample_two_point(d, L, p, n_samples, seed);
        *mean = new lacelab_field{std::move(e.mean)};
        if (stderr_out) *stderr_out = new lacelab_field{std::move(e.stderr_)};
    });
}

lacelab_status lacelab_diagram_bars(const lacelab_field* G, int with_h, double wrap_tol, lacelab_bars* out) {
    return guarded([&] {
        need(G && out, "null argument");
        lacelab::DiagramOptions o;
        o.compute_h = with_h != 0;
        if (wrap_tol > 0) o.wrap_tol = wrap_tol;
        std::vector<lacelab::WeightPair> none;
        auto s = lacelab::diagram_suite(G->f, none, o);
        *out = {s.bars.B,
                s.bars.P,
                s.bars.W.at({0, 0}),
                s.bars.T.at({0, 0}),
                s.bars.S.at(0.0),
                o.compute_h ? s.bars.H.at(0.0) : 0.0,
                s.wrap_estimate,
                o.compute_h ? 1 : 0};
    });
}

lacelab_status lacelab_bootstrap(lacelab_model model, int d, double eps, double* terminal_alpha, double* threshold,
                                 int* pass) {
    return guarded([&] {
        auto t = lacelab::run_bootstrap(model_of(model), d, eps);
        if (terminal_alpha) *terminal_alpha = t.terminal_alpha;
        if (threshold) *threshold = t.threshold;
        if (pass) *pass = t.pass ? 1 : 0;
    });
}

lacelab_status lacelab_gate(lacelab_model model, double eps, int* min_d) {
    return guarded([&] {
        need(min_d, "null output");
        auto m = model_of(model);
        for (const auto& r : lacelab::gate_table(eps))
            if (r.model == m) *min_d = r.min_d;
    });
}

int lacelab_run_config(const char* config_path, const char* output_dir, const char* cache_dir, int threads) {
    last_error.clear();
    if (!config_path) {
        last_error = "config: no path given";
        return 2;
    }
    lacelab::RunOptions opt;
    if (output_dir) opt.output_dir = output_dir;
    if (cache_dir) opt.cache_dir = cache_dir;
    opt.threads = threads;
    auto r = lacelab::run_experiment_file(config_path, opt);
    last_error = r.message;
    return r.exit_code;
}

}  // extern "C"
