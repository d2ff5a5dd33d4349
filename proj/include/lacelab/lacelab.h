#ifndef LACELAB_H
#define LACELAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LACELAB_API __declspec(dllexport)
#else
#define LACELAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lacelab_status {
    LACELAB_OK = 0,
    LACELAB_E_SHAPE = 1,
    LACELAB_E_DOMAIN = 2,
    LACELAB_E_OVERFLOW = 3,
    LACELAB_E_INFEASIBLE = 4,
    LACELAB_E_NUMERICAL = 5,
    LACELAB_E_CONFIG = 6,
    LACELAB_E_IO = 7,
    LACELAB_E_BUDGET = 8,
    LACELAB_E_ARGUMENT = 9,
    LACELAB_E_INTERNAL = 10
} lacelab_status;

typedef enum lacelab_model { LACELAB_SAW = 0, LACELAB_PERCOLATION = 1, LACELAB_LTLA = 2 } lacelab_model;

typedef enum lacelab_method {
    LACELAB_QUADRATURE = 0,
    LACELAB_HEAT_SPLIT = 1,
    LACELAB_SERIES = 2
} lacelab_method;

/* Dense field on an odd torus box. */
typedef struct lacelab_field lacelab_field;
/* Exact self-avoiding walk counts with their lace coefficients. */
typedef struct lacelab_series lacelab_series;

typedef struct lacelab_bars {
    double B, P, W00, T00, S0, H0;
    double wrap_estimate;
    int h_computed;
} lacelab_bars;

/* Message for the last failure on the calling thread; empty after success. */
LACELAB_API const char* lacelab_last_error(void);
LACELAB_API const char* lacelab_version(void);
LACELAB_API lacelab_status lacelab_set_threads(int n);

LACELAB_API lacelab_status lacelab_gaussian_constant(int d, double* out);

/* Green's function of the nearest-neighbour walk on a box of side L.
   param: M for quadrature, n_max for series, ignored for the heat split. */
LACELAB_API lacelab_status lacelab_green_nn(int d, lacelab_method method, int L, int param, lacelab_field** out);

LACELAB_API lacelab_status lacelab_field_new(int d, int L, const double* values, size_t n, lacelab_field** out);
LACELAB_API lacelab_status lacelab_field_shape(const lacelab_field* f, int* d, int* L);
LACELAB_API lacelab_status lacelab_field_get(const lacelab_field* f, const int* x, double* out);
LACELAB_API lacelab_status lacelab_field_values(const lacelab_field* f, double* buf, size_t n);
LACELAB_API void lacelab_field_free(lacelab_field* f);

/* cache_dir may be NULL to skip caching. */
LACELAB_API lacelab_status lacelab_saw_enumerate(int d, int N, const char* cache_dir, lacelab_series** out);
LACELAB_API lacelab_status lacelab_saw_count(const lacelab_series* s, int n, const int* x, uint64_t* out);
LACELAB_API lacelab_status lacelab_saw_total(const lacelab_series* s, int n, uint64_t* out);
/* Sum over x of the n-th lace coefficient; fails with LACELAB_E_OVERFLOW beyond 64 bits. */
LACELAB_API lacelab_status lacelab_saw_pi_total(const lacelab_series* s, int n, int64_t* out);
LACELAB_API lacelab_status lacelab_saw_pc(const lacelab_series* s, double* pc, double* sensitivity);
LACELAB_API lacelab_status lacelab_saw_field(const lacelab_series* s, double p, int L, lacelab_field** out);
LACELAB_API void lacelab_series_free(lacelab_series* s);

LACELAB_API lacelab_status lacelab_perc_sample(int d, int L, double p, uint64_t n_samples, uint64_t seed,
                                               lacelab_field** mean, lacelab_field** stderr_out);

LACELAB_API lacelab_status lacelab_diagram_bars(const lacelab_field* G, int with_h, double wrap_tol, lacelab_bars* out);

LACELAB_API lacelab_status lacelab_bootstrap(lacelab_model model, int d, double eps, double* terminal_alpha,
                                             double* threshold, int* pass);
LACELAB_API lacelab_status lacelab_gate(lacelab_model model, double eps, int* min_d);

/* Runs one experiment. output_dir and cache_dir may be NULL; threads 0 keeps the default.
   Returns the process exit code: 0 ok, 2 invalid config, 1 other failure. */
LACELAB_API int lacelab_run_config(const char* config_path, const char* output_dir, const char* cache_dir, int threads);

#ifdef __cplusplus
}
#endif

#endif
