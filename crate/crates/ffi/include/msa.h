#ifndef MSA_H
#define MSA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum MsaStatus {
  MSA_STATUS_OK = 0,
  MSA_STATUS_NULL_ARGUMENT = 1,
  MSA_STATUS_INVALID_UTF8 = 2,
  // Source text failed to parse or compile.
  MSA_STATUS_PARSE = 3,
  // Rejection sampling failed, e.g. the condition is never met.
  MSA_STATUS_INFERENCE = 4,
  MSA_STATUS_INVALID_ARGUMENT = 5,
  // No query with the given label.
  MSA_STATUS_NOT_FOUND = 6,
  MSA_STATUS_METRICS = 7,
  MSA_STATUS_JSON = 8,
  // The output buffer is too small; the needed length was written.
  MSA_STATUS_BUFFER_TOO_SMALL = 9,
  MSA_STATUS_PANIC = 10,
} MsaStatus;

// Samples drawn from a program's posterior.
typedef struct MsaPosterior MsaPosterior;

// A compiled program.
typedef struct MsaProgram MsaProgram;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// The message of the last failed call on this thread, or null. Valid
// until the next failing call on the same thread.
const char *msa_last_error_message(void);

// Static version string.
const char *msa_version(void);

// Free a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be freed twice.
void msa_string_free(char *s);

// Parse and compile program text.
//
// # Safety
// `source` is a NUL-terminated string; `out_program` is writable.
enum MsaStatus msa_program_load(const char *source, struct MsaProgram **out_program);

// # Safety
// `program` comes from [`msa_program_load`] and is not used afterwards.
void msa_program_free(struct MsaProgram *program);

// Draw `n_samples` posterior samples by rejection. `max_attempts_per_sample`
// of 0 keeps the library default.
//
// # Safety
// `program` is a live handle; `out_posterior` is writable.
enum MsaStatus msa_program_sample(const struct MsaProgram *program,
                                  size_t n_samples,
                                  uint64_t seed,
                                  uint64_t max_attempts_per_sample,
                                  struct MsaPosterior **out_posterior);

// # Safety
// `posterior` comes from [`msa_program_sample`] and is not used afterwards.
void msa_posterior_free(struct MsaPosterior *posterior);

// Samples per query and traces rejected along the way.
//
// # Safety
// `posterior` is a live handle; the out pointers are writable.
enum MsaStatus msa_posterior_counts(const struct MsaPosterior *posterior,
                                    size_t *out_samples,
                                    uint64_t *out_rejected);

// Mean of one query.
//
// # Safety
// `posterior` is a live handle; `label` is a NUL-terminated string.
enum MsaStatus msa_posterior_mean(const struct MsaPosterior *posterior,
                                  const char *label,
                                  double *out_mean);

// Copy one query's samples into `buffer`. `out_len` always receives the
// sample count; a short buffer yields `MSA_STATUS_BUFFER_TOO_SMALL` and
// copies nothing.
//
// # Safety
// `buffer` holds `capacity` doubles (or is null with capacity 0).
enum MsaStatus msa_posterior_samples(const struct MsaPosterior *posterior,
                                     const char *label,
                                     double *buffer,
                                     size_t capacity,
                                     size_t *out_len);

// The whole estimate as JSON; free with [`msa_string_free`].
//
// # Safety
// `posterior` is a live handle; `out_json` is writable.
enum MsaStatus msa_posterior_to_json(const struct MsaPosterior *posterior, char **out_json);

// Counts of `samples` over ten buckets of [0, 100] into `out_counts[10]`.
//
// # Safety
// `samples` holds `len` doubles; `out_counts` has room for 10 values.
enum MsaStatus msa_bucketize(const double *samples, size_t len, uint64_t *out_counts);

// Wasserstein distance on the 0-100 scale between two 10-bucket count
// arrays.
//
// # Safety
// `a` and `b` each hold 10 counts.
enum MsaStatus msa_wasserstein(const uint64_t *a, const uint64_t *b, double *out_distance);

// Total variation distance between two 10-bucket count arrays.
//
// # Safety
// `a` and `b` each hold 10 counts.
enum MsaStatus msa_tvd(const uint64_t *a, const uint64_t *b, double *out_distance);

// Squared Pearson correlation of two series of length `len`.
//
// # Safety
// `x` and `y` each hold `len` doubles.
enum MsaStatus msa_mean_r2(const double *x, const double *y, size_t len, double *out_r2);

// The vignettes of one experiment ("e1", "e2" or "e3") as a JSON array.
// e3 uses `commentary_json` if given, else the shipped commentary.
//
// # Safety
// String arguments are NUL-terminated; `commentary_json` may be null.
enum MsaStatus msa_generate_experiment(const char *experiment,
                                       uint64_t seed,
                                       const char *commentary_json,
                                       char **out_json);

// Gold program text for one vignette (JSON) with default parameters.
//
// # Safety
// `vignette_json` is NUL-terminated; `out_source` is writable.
enum MsaStatus msa_gold_model_source(const char *vignette_json, char **out_source);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MSA_H */
