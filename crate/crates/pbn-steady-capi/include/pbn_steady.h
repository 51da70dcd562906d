/* C ABI for the pbn-steady probabilistic Boolean network toolkit. */

#ifndef PBN_STEADY_H
#define PBN_STEADY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum PsStatus {
  // Success.
  PS_STATUS_OK = 0,
  // A required pointer argument was NULL.
  PS_STATUS_NULL_POINTER = 1,
  // An argument value was rejected (range, index, predicate, parameters).
  PS_STATUS_INVALID_ARGUMENT = 2,
  // Model text violated the `.pbn` grammar.
  PS_STATUS_PARSE_ERROR = 3,
  // A structural model invariant failed.
  PS_STATUS_MODEL_ERROR = 4,
  // The estimator could not produce a valid estimate.
  PS_STATUS_ESTIMATION_ERROR = 5,
  // The exact solver's state-space cap was exceeded.
  PS_STATUS_CAP_EXCEEDED = 6,
  // Iterative computation failed to converge.
  PS_STATUS_NON_CONVERGENCE = 7,
  // Underlying I/O failure.
  PS_STATUS_IO_ERROR = 8,
  // A string argument was not valid UTF-8.
  PS_STATUS_UTF8_ERROR = 9,
  // An internal panic was caught at the boundary.
  PS_STATUS_PANIC = 10,
} PsStatus;

// Initialization heuristic selector.
typedef enum PsHeuristic {
  // No safeguard (the documented failure mode).
  PS_HEURISTIC_NONE = 0,
  // Clamp n₀ into the safe pilot range.
  PS_HEURISTIC_PITFALL_AVOIDANCE = 1,
  // Controlled initial estimation of the rarer rate.
  PS_HEURISTIC_CONTROLLED = 2,
  // Double until both transition counts reach 3 (default).
  PS_HEURISTIC_SIMPLE = 3,
} PsHeuristic;

// Opaque handle to a probabilistic Boolean network model.
typedef struct PsModel PsModel;

// Mirror of the random-model generator configuration.
typedef struct PsGeneratorSpec {
  // Number of nodes (≥ 1).
  uint64_t node_count;
  // Minimum predictor functions per node (≥ 1).
  uint64_t min_funcs;
  // Maximum predictor functions per node.
  uint64_t max_funcs;
  // Minimum parents per function.
  uint64_t min_parents;
  // Maximum parents per function.
  uint64_t max_parents;
  // Perturbation parameter p (0, or in (0,1)).
  double perturbation_p;
  // Generator seed.
  uint64_t seed;
} PsGeneratorSpec;

// Mirror of the estimator parameters.
typedef struct PsTwoStateParams {
  // Burn-in convergence tolerance ε ∈ (0,1); e.g. 1e-10.
  double epsilon;
  // Half-width precision r > 0.
  double r;
  // Confidence level s ∈ (0,1); e.g. 0.95.
  double s;
  // Subsampling lag k ≥ 1.
  uint64_t k;
  // Initial burn-in m₀ ≥ 1 (two-state scale).
  uint64_t m0;
  // Pilot size n₀; 0 selects the AUTO rule.
  uint64_t n0;
  // Initialization heuristic.
  enum PsHeuristic heuristic;
  // Cap on heuristic trajectory doublings; e.g. 30.
  uint32_t doubling_cap;
} PsTwoStateParams;

// Results of one estimation run.
typedef struct PsTwoStateRun {
  // Final α̂.
  double alpha_hat;
  // Final β̂.
  double beta_hat;
  // Steady-state probability estimate.
  double q_hat;
  // 0→0 transition count.
  uint64_t c00;
  // 0→1 transition count.
  uint64_t c01;
  // 1→0 transition count.
  uint64_t c10;
  // 1→1 transition count.
  uint64_t c11;
  // Burn-in t in subsampled observations.
  uint64_t burn_in_t;
  // Sample size ⌈n⌉ in subsampled observations.
  uint64_t sample_obs;
  // Burn-in M = 1+(t−1)k in original steps.
  uint64_t burn_in_steps;
  // Sample N = 1+(⌈n⌉−1)k in original steps.
  uint64_t sample_steps;
  // Original-chain steps consumed.
  uint64_t total_steps;
  // Observations collected.
  uint64_t observations;
  // Pilot size after AUTO resolution / clamping.
  uint64_t resolved_n0;
  // Estimation rounds.
  uint32_t iterations;
  // Wall-clock milliseconds.
  double wall_time_ms;
} PsTwoStateRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Returns the library version as a static NUL-terminated string.
const char *ps_version(void);

// Returns the message of the calling thread's most recent error (empty
// string when no error has occurred). The pointer stays valid until this
// thread's next library call.
const char *ps_last_error(void);

// Parses `.pbn` model text into a new model handle.
//
// # Safety
// `text` must be a NUL-terminated string; `out` must point to writable
// storage for one pointer.
enum PsStatus ps_model_parse(const char *text, struct PsModel **out);

// Generates a random model from a [`PsGeneratorSpec`].
//
// # Safety
// `spec` and `out` must be non-NULL and point to valid storage.
enum PsStatus ps_model_generate(const struct PsGeneratorSpec *spec, struct PsModel **out);

// Releases a model handle. NULL is a no-op.
//
// # Safety
// `model` must be NULL or a handle obtained from this library that has not
// been freed already.
void ps_model_free(struct PsModel *model);

// Number of nodes in the model (0 for NULL).
//
// # Safety
// `model` must be NULL or a live handle from this library.
uint64_t ps_model_node_count(const struct PsModel *model);

// Parent-count density 𝒟 of the model (NaN for NULL).
//
// # Safety
// `model` must be NULL or a live handle from this library.
double ps_model_density(const struct PsModel *model);

// Serializes a model to `.pbn` text. The returned string must be released
// with [`ps_string_free`].
//
// # Safety
// `model` must be a live handle; `out` must point to writable storage for
// one pointer.
enum PsStatus ps_model_serialize(const struct PsModel *model, char **out);

// Releases a string returned by this library. NULL is a no-op.
//
// # Safety
// `text` must be NULL or a string obtained from this library that has not
// been freed already.
void ps_string_free(char *text);

// Estimates the steady-state probability of `predicate` (e.g. `"3=1&7=0"`)
// on the model with the two-state estimator.
//
// # Safety
// `model` must be a live handle; `predicate` a NUL-terminated string;
// `params` and `out` non-NULL pointers to valid storage.
enum PsStatus ps_steady_estimate(const struct PsModel *model,
                                 const char *predicate,
                                 const struct PsTwoStateParams *params,
                                 uint64_t seed,
                                 struct PsTwoStateRun *out);

// Exact steady-state probability of `predicate` (small networks only).
//
// # Safety
// `model` must be a live handle; `predicate` a NUL-terminated string;
// `out` a non-NULL pointer to one f64.
enum PsStatus ps_exact_meta_probability(const struct PsModel *model,
                                        const char *predicate,
                                        double *out);

// Computes the safe pilot range for (r, s). On success writes the inclusive
// bounds; an empty range writes 0 to both.
//
// # Safety
// `out_lower` and `out_upper` must be non-NULL pointers to u64 storage.
enum PsStatus ps_safe_n0_range(double r, double s, uint64_t *out_lower, uint64_t *out_upper);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PBN_STEADY_H */
