#ifndef RCL_H
#define RCL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RclMethod {
  RCL_METHOD_RCL = 0,
  RCL_METHOD_VANILLA = 1,
  RCL_METHOD_CURRICULUM_LINEAR = 2,
  RCL_METHOD_CURRICULUM_ROOT = 3,
  RCL_METHOD_RANDOM_LINEAR = 4,
  RCL_METHOD_RANDOM_ROOT = 5,
} RclMethod;

typedef enum RclStatus {
  RCL_STATUS_OK = 0,
  RCL_STATUS_NULL_POINTER = 1,
  RCL_STATUS_INVALID_ARGUMENT = 2,
  RCL_STATUS_PARSE = 3,
  RCL_STATUS_INVALID_GRAPH = 4,
  RCL_STATUS_IO = 5,
  RCL_STATUS_INFEASIBLE = 6,
  RCL_STATUS_SHAPE = 7,
  RCL_STATUS_NON_FINITE = 8,
  RCL_STATUS_EMPTY = 9,
  RCL_STATUS_PANIC = 10,
} RclStatus;

/**
 * Opaque graph handle.
 */
typedef struct RclGraph RclGraph;

/**
 * Training hyperparameters; start from `rcl_train_config_default`.
 */
typedef struct RclTrainConfig {
  double beta;
  double gamma;
  uint32_t pace;
  uint32_t epochs;
  double lr;
  size_t hidden;
  double epsilon_conv;
  double init_frac;
  bool recon_in_wstep;
  bool smoothing;
  double loss_decay;
  bool learn_mask;
  uint64_t seed;
} RclTrainConfig;

/**
 * Synthetic graph parameters; start from `rcl_synth_params_default`.
 */
typedef struct RclSynthParams {
  size_t num_nodes;
  size_t num_classes;
  double homo;
  double avg_degree;
  size_t feature_dim;
  double gaussian_spread;
  uint64_t seed;
} RclSynthParams;

typedef struct RclMetrics {
  double best_val_acc;
  double test_acc;
  uint32_t best_epoch;
  uint32_t epochs;
} RclMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *rcl_last_error_message(void);

void rcl_clear_error(void);

struct RclTrainConfig rcl_train_config_default(void);

struct RclSynthParams rcl_synth_params_default(void);

/**
 * Loads a graph file into `*out`.
 *
 * # Safety
 * `path` must be a valid C string and `out` a valid pointer.
 */
enum RclStatus rcl_graph_load(const char *path, struct RclGraph **out);

/**
 * Generates a synthetic graph (with edge difficulty labels) into `*out`.
 *
 * # Safety
 * `params` and `out` must be valid pointers.
 */
enum RclStatus rcl_graph_generate(const struct RclSynthParams *params, struct RclGraph **out);

/**
 * Writes the graph in the text graph format.
 *
 * # Safety
 * `graph` must come from this library; `path` must be a valid C string.
 */
enum RclStatus rcl_graph_save(const struct RclGraph *graph, const char *path);

/**
 * Releases a graph handle. Null is ignored.
 *
 * # Safety
 * `graph` must come from this library and not be used afterwards.
 */
void rcl_graph_free(struct RclGraph *graph);

/**
 * # Safety
 * `graph` must be null or come from this library.
 */
size_t rcl_graph_num_nodes(const struct RclGraph *graph);

/**
 * # Safety
 * `graph` must be null or come from this library.
 */
size_t rcl_graph_num_edges(const struct RclGraph *graph);

/**
 * # Safety
 * `graph` must be null or come from this library.
 */
size_t rcl_graph_num_classes(const struct RclGraph *graph);

/**
 * # Safety
 * `graph` must be null or come from this library.
 */
size_t rcl_graph_num_features(const struct RclGraph *graph);

/**
 * Fraction of edges joining same-label nodes.
 *
 * # Safety
 * `graph` must come from this library; `out` must be valid.
 */
enum RclStatus rcl_graph_homophily(const struct RclGraph *graph, double *out);

/**
 * Trains `method` on the graph and reports best-validation metrics.
 *
 * # Safety
 * `graph` must come from this library; `config` and `out` must be valid.
 */
enum RclStatus rcl_train(const struct RclGraph *graph,
                         enum RclMethod method,
                         const struct RclTrainConfig *config,
                         struct RclMetrics *out);

/**
 * Closed-form mask update over `len` edges, written to `out` (which may
 * alias neither input).
 *
 * # Safety
 * `residuals`, `prev` and `out` must each point to `len` doubles.
 */
enum RclStatus rcl_update_mask(const double *residuals,
                               const double *prev,
                               size_t len,
                               double lambda,
                               double beta,
                               double gamma,
                               double *out);

/**
 * Attacked copy of `graph` with `round(ratio * E)` random new edges.
 *
 * # Safety
 * `graph` must come from this library; `out` must be valid.
 */
enum RclStatus rcl_inject_edges(const struct RclGraph *graph,
                                double ratio,
                                uint64_t seed,
                                struct RclGraph **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RCL_H */
