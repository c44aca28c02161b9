/* C interface to the wbound library. All state indices are 0-based. */
#ifndef WBOUND_WBOUND_H
#define WBOUND_WBOUND_H

#include <stddef.h>

#if defined(WB_BUILDING_LIBRARY)
#define WB_API __attribute__((visibility("default")))
#else
#define WB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wb_status {
  WB_OK = 0,
  WB_ERR_VALIDATION = 1, /* bad input; see wb_last_error_name() */
  WB_ERR_NUMERICAL = 2,  /* solver failure */
  WB_ERR_IO = 3,
  WB_ERR_INTERNAL = 4
} wb_status;

typedef enum wb_model_kind { WB_KIND_NONE = 0, WB_KIND_CTMC = 1, WB_KIND_DTMC = 2 } wb_model_kind;

/* Details of the last failure on the calling thread. */
WB_API const char* wb_last_error_name(void);
WB_API const char* wb_last_error_message(void);
WB_API const char* wb_version(void);

typedef struct wb_model wb_model;

WB_API wb_status wb_model_load_file(const char* path, wb_model** out);
WB_API wb_status wb_model_load_json(const char* text, wb_model** out);
/* The 3-state example chain; discrete != 0 swaps in the discrete metric.
   Comes with partition {1,2},{3} and initial distribution (1/2, 1/2, 0). */
WB_API wb_status wb_model_builtin_toy(int discrete, wb_model** out);
/* Translation-invariant chain on a box ("0:4,0:4") with jumps
   ("1,0:0.25;-1,0:0.25"). root_state < 0 means no root link. */
WB_API wb_status wb_model_builtin_grid(const char* box, double rate, const char* jumps, long root_state,
                                       double root_rate, wb_model** out);
/* Six states on a line with the example pair of distributions as
   initial/target. */
WB_API wb_status wb_model_builtin_w1_example(wb_model** out);
WB_API void wb_model_free(wb_model* model);

WB_API size_t wb_model_states(const wb_model* model);
WB_API wb_model_kind wb_model_kind_of(const wb_model* model);

/* Blocks as "1,2;3" (1-based, as on the command line). */
WB_API wb_status wb_model_set_partition(wb_model* model, const char* blocks);
/* Blocks as JSON: [[1,2],[3]] or {"partition": [[1,2],[3]]}. */
WB_API wb_status wb_model_set_partition_json(wb_model* model, const char* json);
WB_API wb_status wb_model_set_epsilon_partition(wb_model* model, double eps);
WB_API wb_status wb_model_set_initial(wb_model* model, const char* spec);

/* Canonical JSON; release with wb_string_free. */
WB_API wb_status wb_model_to_json(const wb_model* model, char** out);
WB_API void wb_string_free(char* text);

/* Resolves a distribution spec (dirac:<i>, uniform, uniform-block:<b>,
   file:<path>, vec:<a>,<b>,..., initial, target) into out[0..n). */
WB_API wb_status wb_model_distribution(const wb_model* model, const char* spec, double* out, size_t n);

#define WB_W1_GENERIC_LP 1u

/* W1(p, q) under the model metric. coupling (n*n, row-major) and potential
   (n) may be NULL. */
WB_API wb_status wb_w1(const wb_model* model, const double* p, const double* q, size_t n, unsigned flags,
                       double* value, double* coupling, double* potential);

typedef enum wb_pairs { WB_PAIRS_ALL = 0, WB_PAIRS_ONE = 1, WB_PAIRS_MIN = 2 } wb_pairs;

typedef struct wb_curvature_options {
  wb_pairs pairs;
  size_t r, s;        /* for WB_PAIRS_ONE */
  int k_only;         /* skip all LPs */
  int has_margin;
  double margin;      /* candidate margin for WB_PAIRS_MIN */
  int allow_large;    /* exact all-pairs on more than 200 states */
} wb_curvature_options;

typedef struct wb_curvature_report wb_curvature_report;

WB_API void wb_curvature_options_init(wb_curvature_options* options);
WB_API wb_status wb_curvature(const wb_model* model, const wb_curvature_options* options,
                              wb_curvature_report** out);
WB_API size_t wb_curvature_pair_count(const wb_curvature_report* report);
/* has_k is 0 for DTMC models, has_kappa is 0 for pairs not solved. */
WB_API wb_status wb_curvature_pair(const wb_curvature_report* report, size_t i, size_t* r, size_t* s,
                                   int* has_k, double* k, int* has_kappa, double* kappa);
/* Summary values; returns 0 when the value was not computed. */
WB_API int wb_curvature_summary(const wb_curvature_report* report, const char* key, double* value);
/* K_loc per state; NULL for DTMC models. */
WB_API const double* wb_curvature_K_local(const wb_curvature_report* report, size_t* n);
WB_API void wb_curvature_report_free(wb_curvature_report* report);

typedef struct wb_bounds_options {
  double T;
  size_t grid_points;
  const char* variants; /* comma-separated names, NULL for all */
  int exact;
  const char* p0;       /* distribution spec, NULL for the model's initial */
  int has_margin;
  double margin;
  int hybrid_kappa;     /* hybrid uses kappa_min instead of k_min */
  size_t steps;         /* DTMC models: number of steps */
} wb_bounds_options;

typedef struct wb_bound_curve wb_bound_curve;

WB_API void wb_bounds_options_init(wb_bounds_options* options);
WB_API wb_status wb_bounds(const wb_model* model, const wb_bounds_options* options, wb_bound_curve** out);
WB_API size_t wb_bound_curve_rows(const wb_bound_curve* curve);
WB_API size_t wb_bound_curve_columns(const wb_bound_curve* curve);
WB_API const char* wb_bound_curve_column_name(const wb_bound_curve* curve, size_t column);
WB_API double wb_bound_curve_value(const wb_bound_curve* curve, size_t row, size_t column);
/* W0, defect_norm, k_min, kappa_min, K_global, d_max; returns 0 if absent. */
WB_API int wb_bound_curve_info(const wb_bound_curve* curve, const char* key, double* value);
WB_API void wb_bound_curve_free(wb_bound_curve* curve);

typedef struct wb_aggregate_report wb_aggregate_report;

/* Aggregation from the model's partition (or explicit aggregation). */
WB_API wb_status wb_aggregate(const wb_model* model, wb_aggregate_report** out);
WB_API size_t wb_aggregate_blocks(const wb_aggregate_report* report);
WB_API double wb_aggregate_defect_norm(const wb_aggregate_report* report);
/* JSON with partition, A, Lambda, Theta or Pi, defect_vector, defect_norm. */
WB_API const char* wb_aggregate_json(const wb_aggregate_report* report);
WB_API void wb_aggregate_report_free(wb_aggregate_report* report);

#ifdef __cplusplus
}
#endif

#endif
