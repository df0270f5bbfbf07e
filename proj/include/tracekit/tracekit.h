/* tracekit: weighted mixed-norm function spaces, C interface.
 *
 * Every call returns a tk_status. On failure, tk_last_error() describes the
 * most recent error on the calling thread. Strings returned through char**
 * are allocated by the library and released with tk_string_free().
 *
 * Family specs, exponent configurations and quadrature overrides are JSON:
 *   family: {"kind": "hat", "params": {"scale": 1}, "children": [...]}
 *   cfg:    {"p": [1, 2], "q": 2, "alpha": 0}
 */
#ifndef TRACEKIT_H
#define TRACEKIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(TRACEKIT_BUILDING)
#define TK_EXPORT __attribute__((visibility("default")))
#else
#define TK_EXPORT
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tk_status {
  TK_OK = 0,
  TK_INVALID_ARGUMENT = 1, /* null pointer, malformed JSON */
  TK_DOMAIN = 2,           /* parameter outside its mathematical window */
  TK_NUMERIC = 3,          /* non-finite quadrature sample */
  TK_CONFIG = 4,           /* malformed run configuration */
  TK_CHECK_FAILED = 5,     /* a verification instance reported FAIL */
  TK_INTERNAL = 6
} tk_status;

typedef struct tk_quadrature {
  double box_radius;
  int32_t panels_per_axis;
  int32_t points_per_panel;
  double vertical_cap;
  int32_t vertical_panels;
  double grading_exponent; /* 0 selects max(1, 3/(1+alpha)) */
  int32_t radial_octaves;
  int32_t directions;      /* 0 selects the dimension default */
  uint64_t seed;
} tk_quadrature;

typedef struct tk_function tk_function;

TK_EXPORT const char* tk_last_error(void);
TK_EXPORT void tk_string_free(char* s);
TK_EXPORT const char* tk_version(void);

TK_EXPORT void tk_quadrature_defaults(tk_quadrature* out);

/* ℓ = 1 − (1+α)/q. */
TK_EXPORT tk_status tk_smoothness_order(double q, double alpha, double* out);

TK_EXPORT tk_status tk_function_create(const char* family_json, tk_function** out);
TK_EXPORT void tk_function_free(tk_function* f);
TK_EXPORT int tk_function_dim(const tk_function* f);
/* 1 for half-space functions, 0 for functions on R^d. */
TK_EXPORT int tk_function_is_halfspace(const tk_function* f);
/* x has dim entries; y is ignored for boundary functions. */
TK_EXPORT tk_status tk_function_eval(const tk_function* f, const double* x, double y, double* out);

/* Norms. `q` must be NULL for the default mesh. */
TK_EXPORT tk_status tk_mixed_lebesgue_norm(const tk_function* f, const double* p, size_t d,
                                           const tk_quadrature* q, double* out);
TK_EXPORT tk_status tk_weighted_norm(const tk_function* u, const char* cfg_json, const tk_quadrature* q,
                                     double* out);
TK_EXPORT tk_status tk_sobolev_norm(const tk_function* u, const char* cfg_json, const tk_quadrature* q,
                                    double* out);
TK_EXPORT tk_status tk_modulus(const tk_function* f, double delta, const double* p, size_t d,
                               const tk_quadrature* q, double* out);

typedef enum tk_besov_variant { TK_BESOV_DIRECT = 0, TK_BESOV_INTEGRAL = 1, TK_BESOV_DYADIC = 2 } tk_besov_variant;

/* Full norm ‖f‖_{L_p} + seminorm; `a` is the upper limit of the integral
 * variant (INFINITY allowed), ignored otherwise. */
TK_EXPORT tk_status tk_besov_norm(const tk_function* f, const char* cfg_json, tk_besov_variant variant, double a,
                                  const tk_quadrature* q, double* norm, double* seminorm);

/* Hardy inequality for a named shape; writes the report JSON. */
TK_EXPORT tk_status tk_hardy_check(const char* shape, double q, double sigma, double a, double eps,
                                   const tk_quadrature* quad, char** report_json);

/* Both convolution-lemma reports as a JSON array. */
TK_EXPORT tk_status tk_convolution_check(const tk_function* f, double delta, const double* p, size_t d,
                                         const tk_quadrature* q, double ceiling, char** reports_json);

/* Extension E(g): L_s = 2^{sℓ}‖E(g)(·,2^{-s}) − g‖ for s = s_lo..s_hi. */
TK_EXPORT tk_status tk_extension_profile(const tk_function* g, const char* cfg_json, int k_max, int s_lo,
                                         int s_hi, const tk_quadrature* q, double* out, size_t out_len);
/* E(g)(x, y). */
TK_EXPORT tk_status tk_extension_eval(const tk_function* g, int k_max, const double* x, double y,
                                      const tk_quadrature* q, double* out);
/* CSV rows "y,raw,scaled" for y = 2^{-s}, s = s_lo..s_hi. */
TK_EXPORT tk_status tk_extension_slices_csv(const tk_function* g, const char* cfg_json, int k_max, int s_lo,
                                            int s_hi, const tk_quadrature* q, char** csv);

/* Boundary restriction of a half-space function as a new handle. */
TK_EXPORT tk_status tk_trace(const tk_function* u, tk_function** out);

/* One harness instance:
 *   {"kind": "besov-trace", "family": {...}, "cfg": {...}, "extra": {...}}
 * Writes a JSON array of reports. */
TK_EXPORT tk_status tk_run_instance(const char* instance_json, const tk_quadrature* q, char** reports_json);
/* Refinement study of one instance (levels in [2, 4]). */
TK_EXPORT tk_status tk_refine(const char* instance_json, int levels, const tk_quadrature* q, char** report_json);

/* Default configuration as TOML text. */
TK_EXPORT tk_status tk_config_default(char** toml);
/* Parses a TOML file and re-serializes it (validation / round trip). */
TK_EXPORT tk_status tk_config_normalize(const char* path, char** toml);

/* Runs a configuration file. seed < 0 keeps the file's seed; out_jsonl and
 * out_csv override the [output] section when non-NULL. Writes the summary
 * JSON and the number of FAIL reports. */
TK_EXPORT tk_status tk_run_config(const char* path, int64_t seed, const char* out_jsonl, const char* out_csv,
                                  char** summary_json, size_t* failures);

#ifdef __cplusplus
}
#endif

#endif /* TRACEKIT_H */
