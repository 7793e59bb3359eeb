#ifndef DISTEXPLORE_H
#define DISTEXPLORE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DxStatus {
  DX_STATUS_OK = 0,
  DX_STATUS_NULL_POINTER = 1,
  // Not UTF-8, or an index out of range.
  DX_STATUS_INVALID_ARGUMENT = 2,
  DX_STATUS_CONFIG = 3,
  DX_STATUS_PREDICATE = 4,
  DX_STATUS_DISABLED_ACTION = 5,
  // Any other failure inside the library, including panics.
  DX_STATUS_RUNTIME = 6,
} DxStatus;

// Opaque environment handle.
typedef struct DxEnv DxEnv;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Last error message on this thread, or null. Valid until the next failing
// call on the same thread; do not free.
const char *dx_last_error(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed already.
void dx_string_free(char *s);

// Builds an environment from a TOML table such as `kind = "cube"` or
// `kind = "raft"` plus its parameters, and resets it.
//
// # Safety
// `toml` must be a NUL-terminated string; `out` must be writable.
enum DxStatus dx_env_new(const char *toml, struct DxEnv **out);

// # Safety
// `env` must come from [`dx_env_new`] and not be used afterwards. Null is ignored.
void dx_env_free(struct DxEnv *env);

// Returns to the initial state and writes its key.
//
// # Safety
// `env` must be a live handle; `out_key` must be writable.
enum DxStatus dx_env_reset(struct DxEnv *env, char **out_key);

// Current state key.
//
// # Safety
// `env` must be a live handle; `out_key` must be writable.
enum DxStatus dx_env_state_key(struct DxEnv *env, char **out_key);

// Number of actions enabled in the current state.
//
// # Safety
// `env` must be a live handle; `out` must be writable.
enum DxStatus dx_env_action_count(struct DxEnv *env, uintptr_t *out);

// Key of enabled action `index`, in the order the environment lists them.
//
// # Safety
// `env` must be a live handle; `out_key` must be writable.
enum DxStatus dx_env_action_key(struct DxEnv *env, uintptr_t index, char **out_key);

// Takes `action` and writes the key of the next state.
//
// # Safety
// `env` must be a live handle; `action` a NUL-terminated string; `out_key`
// writable or null when the key is not wanted.
enum DxStatus dx_env_step(struct DxEnv *env, const char *action, char **out_key);

// Two-sided Mann-Whitney U test of `a[0..n]` against `b[0..m]`.
//
// # Safety
// `a` and `b` must point to `n` and `m` readable doubles; `out_u` and `out_p`
// must be writable.
enum DxStatus dx_mann_whitney_u(const double *a,
                                uintptr_t n,
                                const double *b,
                                uintptr_t m,
                                double *out_u,
                                double *out_p);

// Runs a full experiment configuration and writes its summary CSV. Nothing is
// written to disk.
//
// # Safety
// `config_toml` must be a NUL-terminated string; `out_csv` must be writable.
enum DxStatus dx_run_experiment(const char *config_toml, char **out_csv);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DISTEXPLORE_H */
