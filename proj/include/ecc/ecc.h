/* C interface to the edge-cloud continuum simulator and experiment harness.
 *
 * All objects are opaque handles. Every call returns an ecc_status; on
 * failure ecc_last_error() describes the problem (thread-local, valid until
 * the next failing call on the same thread). */
#ifndef ECC_ECC_H
#define ECC_ECC_H

#include <stddef.h>
#include <stdint.h>

#if defined(ECC_BUILDING_LIBRARY)
#define ECC_API __attribute__((visibility("default")))
#else
#define ECC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ecc_status {
  ECC_OK = 0,
  ECC_ERR_ARGUMENT = 1, /* null handle, bad index, malformed input */
  ECC_ERR_CONFIG = 2,   /* configuration failed validation */
  ECC_ERR_IO = 3,       /* file could not be read or written */
  ECC_ERR_STATE = 4,    /* call not valid in the object's current state */
  ECC_ERR_INTERNAL = 5
} ecc_status;

typedef struct ecc_experiment ecc_experiment;
typedef struct ecc_env ecc_env;

ECC_API const char* ecc_version(void);
ECC_API const char* ecc_last_error(void);

/* --- experiments --------------------------------------------------------- */

/* Loads a JSON config from `path` (NULL = built-in defaults). paper_scale
 * selects the full-size preset as the base the file is overlaid on. */
ECC_API ecc_status ecc_experiment_load(const char* path, int paper_scale, ecc_experiment** out);
ECC_API ecc_status ecc_experiment_from_json(const char* json_text, int paper_scale, ecc_experiment** out);
ECC_API void ecc_experiment_free(ecc_experiment* e);

/* Number of validation violations; each one is retrievable as text. */
ECC_API ecc_status ecc_experiment_validate(const ecc_experiment* e, size_t* violations);
ECC_API ecc_status ecc_experiment_violation(const ecc_experiment* e, size_t index, char* buf, size_t buflen);

/* Replaces the campaign seeds with one seed. */
ECC_API ecc_status ecc_experiment_set_seed(ecc_experiment* e, uint64_t seed);
ECC_API ecc_status ecc_experiment_set_output(ecc_experiment* e, const char* out_dir);
/* Comma-separated policy names. */
ECC_API ecc_status ecc_experiment_set_policies(ecc_experiment* e, const char* policies);
/* Full effective configuration as JSON. Writes at most buflen bytes
 * including the terminator; *needed receives the full size. */
ECC_API ecc_status ecc_experiment_to_json(const ecc_experiment* e, char* buf, size_t buflen, size_t* needed);

typedef void (*ecc_progress_fn)(const char* message, void* user);

/* mode: "train", "infer", "sweep" or "ablate-lstm". Writes into the output
 * directory; *rows receives the number of metrics rows (0 for train). */
ECC_API ecc_status ecc_experiment_run(ecc_experiment* e, const char* mode, ecc_progress_fn progress, void* user,
                                      size_t* rows);

/* Renders one SVG per metric from a metrics CSV. */
ECC_API ecc_status ecc_plot(const char* csv_path, const char* out_dir, size_t* files);

/* --- single environment -------------------------------------------------- */

ECC_API ecc_status ecc_env_create(const ecc_experiment* e, uint64_t seed, ecc_env** out);
ECC_API void ecc_env_free(ecc_env* env);
ECC_API ecc_status ecc_env_clock(const ecc_env* env, int* slot);
ECC_API ecc_status ecc_env_finished(const ecc_env* env, int* finished);
/* Size in bits of agent `ea`'s arrival this slot, 0 when none. */
ECC_API ecc_status ecc_env_arrival(const ecc_env* env, int ea, int64_t* size_bits);
/* actions[n-1] for agent n: -1 none, 0 local, k > 0 offload to node k
 * (N+1 is the cloud). */
ECC_API ecc_status ecc_env_step(ecc_env* env, const int* actions, size_t count);
ECC_API ecc_status ecc_env_drain(ecc_env* env);
ECC_API ecc_status ecc_env_counts(const ecc_env* env, int64_t* arrived, int64_t* processed, int64_t* dropped);

#ifdef __cplusplus
}
#endif

#endif
