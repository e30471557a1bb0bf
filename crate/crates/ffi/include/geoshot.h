#ifndef GEOSHOT_H
#define GEOSHOT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GsStatus {
  GS_STATUS_OK = 0,
  GS_STATUS_NULL_POINTER = 1,
  GS_STATUS_INVALID_UTF8 = 2,
  GS_STATUS_INVALID_ARGUMENT = 3,
  GS_STATUS_CONFIG = 4,
  GS_STATUS_PARTITION = 5,
  GS_STATUS_SOLVER = 6,
  GS_STATUS_UNDEFINED = 7,
  GS_STATUS_INTERNAL = 8,
  GS_STATUS_PANIC = 9,
} GsStatus;

// A Hamiltonian on a lattice.
typedef struct GsModel GsModel;

// Lowest eigenpairs of a model.
typedef struct GsState GsState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Builds a model from JSON such as
// `{"model": {"model": "tfim", "j": 1, "h": 1}, "lattice": {"nx": 4, "ny": 3}}`.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum GsStatus gs_model_from_json(const char *json, struct GsModel **out);

// # Safety
// `model` must come from [`gs_model_from_json`] and not be used afterwards.
void gs_model_free(struct GsModel *model);

// Number of qubits, or 0 for a null handle.
//
// # Safety
// `model` must be null or a live handle.
size_t gs_model_n_qubits(const struct GsModel *model);

// The Hamiltonian in Pauli text format, one `coefficient STRING` per line. Release the
// string with [`gs_string_free`].
//
// # Safety
// `model` must be a live handle and `out` a valid pointer.
enum GsStatus gs_model_hamiltonian_text(const struct GsModel *model, char **out);

// # Safety
// `s` must come from this library and not be used afterwards.
void gs_string_free(char *s);

// Solves for the ground state.
//
// # Safety
// `model` must be a live handle and `out` a valid pointer.
enum GsStatus gs_ground_state(const struct GsModel *model, struct GsState **out);

// # Safety
// `state` must come from [`gs_ground_state`] and not be used afterwards.
void gs_state_free(struct GsState *state);

// Ground energy, spectral gap (NaN when unavailable) and degeneracy flag.
//
// # Safety
// `state` must be a live handle; each output pointer may be null to skip it.
enum GsStatus gs_state_info(const struct GsState *state,
                            double *energy,
                            double *gap,
                            bool *degenerate);

// `cost(kind_a) / cost(kind_b)` on the ground state, where the cost of a partitioning
// is `(Σ_b √Var H_b)²`. Kinds use the CLI spelling: `pauli`, `geo1d:2`, `geo2d:2x2`,
// `two_local`, `whole`.
//
// # Safety
// Handles must be live, strings NUL-terminated and `out` valid.
enum GsStatus gs_relative_complexity(const struct GsModel *model,
                                     const struct GsState *state,
                                     const char *kind_a,
                                     const char *kind_b,
                                     double *out);

// Absolute cost `(Σ_b √Var H_b)²` of one partitioning on the ground state.
//
// # Safety
// Handles must be live, `kind` NUL-terminated and `out` valid.
enum GsStatus gs_partition_cost(const struct GsModel *model,
                                const struct GsState *state,
                                const char *kind,
                                double *out);

// Copies the calling thread's last error message into `buf` (truncated, always
// NUL-terminated when `len > 0`) and returns the length needed including the NUL.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t gs_last_error(char *buf, size_t len);

// Library version, a static NUL-terminated string.
const char *gs_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GEOSHOT_H */
