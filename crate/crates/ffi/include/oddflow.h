/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef ODDFLOW_H
#define ODDFLOW_H

#include <stddef.h>
#include <stdint.h>

#define ODDFLOW_OK 0

#define ODDFLOW_NULL_POINTER 1

#define ODDFLOW_INVALID_INPUT 2

#define ODDFLOW_SOLVER_FAILURE 3

#define ODDFLOW_IO_ERROR 4

#define ODDFLOW_PANIC 5

#define ODDFLOW_FIELD_RHO 0

#define ODDFLOW_FIELD_U1 1

#define ODDFLOW_FIELD_U2 2

#define ODDFLOW_FIELD_PRESSURE 3

// A field dump held in memory.
typedef struct OddflowField OddflowField;

// Shear and odd viscosity laws with density bounds.
typedef struct OddflowLaw OddflowLaw;

// Periodic simulation advanced step by step.
typedef struct OddflowSimulation OddflowSimulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version, a static NUL-terminated string.
const char *oddflow_version(void);

// Copies the last error message of this thread into `buf` (truncated and
// always NUL-terminated when `len > 0`). Returns the full message length
// including the terminator, so a call with `len == 0` sizes the buffer.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t oddflow_last_error(char *buf, size_t len);

// Viscosity laws from specification strings (`const:v`, `affine:a,b`,
// `prop:c`, `sin:base,amp`, `table:path`) on `[rho_min, rho_max]`. The
// bounds `mu_*`, `mu^*` are the sampled extremes of the laws.
//
// # Safety
// `nu_e` and `nu_o` must be NUL-terminated strings; `out` must be writable.
int oddflow_law_new(const char *nu_e,
                    const char *nu_o,
                    double rho_min,
                    double rho_max,
                    struct OddflowLaw **out_law);

// `ν_e(ρ)` and `ν_o(ρ)`; either output may be null.
//
// # Safety
// `law` must come from [`oddflow_law_new`].
int oddflow_law_eval(const struct OddflowLaw *law, double rho, double *nu_e, double *nu_o);

// # Safety
// `law` must be null or come from [`oddflow_law_new`] and not be freed twice.
void oddflow_law_free(struct OddflowLaw *law);

// Periodic simulation on an `n x n` grid of side `length` without forcing.
// `rho`, `u1`, `u2` hold `n*n` values with the sample at `(i h, j h)` at
// index `i*n + j`; `u` must be divergence-free. Each step has length `dt`.
//
// # Safety
// `law` must be a live handle, the arrays must hold `n*n` values and
// `out_sim` must be writable.
int oddflow_simulation_new(const struct OddflowLaw *law,
                           size_t n,
                           double length,
                           double dt,
                           const double *rho,
                           const double *u1,
                           const double *u2,
                           struct OddflowSimulation **out_sim);

// Advances `steps` steps. On failure the state is left at the last good step.
//
// # Safety
// `sim` must be a live handle.
int oddflow_simulation_step(struct OddflowSimulation *sim, size_t steps);

// Current time and `∫ρ|u|²`; either output may be null.
//
// # Safety
// `sim` must be a live handle.
int oddflow_simulation_status(const struct OddflowSimulation *sim, double *time, double *kinetic);

// Copies one of `ODDFLOW_FIELD_*` into `buf`, which holds `len >= n*n` values.
//
// # Safety
// `sim` must be a live handle and `buf` must hold `len` writable values.
int oddflow_simulation_field(const struct OddflowSimulation *sim,
                             int which,
                             double *buf,
                             size_t len);

// # Safety
// `sim` must be null or a handle not yet freed.
void oddflow_simulation_free(struct OddflowSimulation *sim);

// Picard solve of the manufactured stationary problem on an `n x n` mesh;
// reports the iteration count and the L² error of the stream function.
//
// # Safety
// Outputs must be null or writable.
int oddflow_stationary_manufactured(size_t n, size_t *iterations, double *l2_error);

// Parallel flow `u = (u1(x2), 0)` on `[0, 1]` with pressure gradient `-c`
// and wall values `u_a`, `u_b`, odd stress absorbed into the pressure.
// `rho` is a profile string (`const:v`, `layers:lo,hi,at,width`, ...).
// Writes the `n + 1` nodal values of `u1` into `profile`.
//
// # Safety
// `law` must be a live handle, `rho` a NUL-terminated string and `profile`
// must hold `len` writable values.
int oddflow_parallel_profile(const struct OddflowLaw *law,
                             const char *rho,
                             double c,
                             double u_a,
                             double u_b,
                             size_t n,
                             double *profile,
                             size_t len);

// Runs a command-line subcommand (`evolve`, `stationary`, `symmetric`,
// `nonexistence`, `sweep-odd-limit`) on configuration text, writing its
// artifacts into `out_dir`.
//
// # Safety
// All arguments must be NUL-terminated strings.
int oddflow_run(const char *command, const char *config, const char *out_dir);

// Runs the invariant checks whose name contains `filter` (null for all)
// and stores the number of failures.
//
// # Safety
// `filter` must be null or NUL-terminated; `failed` must be writable.
int oddflow_verify(const char *filter, uint64_t seed, size_t *failed);

// Reads a field dump.
//
// # Safety
// `path` must be NUL-terminated and `out_field` writable.
int oddflow_field_read(const char *path, struct OddflowField **out_field);

// Component count (1, 2 or 4), grid size and time stamp of a dump; the
// data holds `components * n1 * n2` values.
//
// # Safety
// `field` must be a live handle; outputs must be null or writable.
int oddflow_field_shape(const struct OddflowField *field,
                        size_t *components,
                        size_t *n1,
                        size_t *n2,
                        double *time);

// # Safety
// `field` must be a live handle and `buf` must hold `len` writable values.
int oddflow_field_data(const struct OddflowField *field, double *buf, size_t len);

// Writes a dump of `components` (1, 2 or 4) fields on an `n1 x n2` grid
// with side lengths `len1`, `len2`; `data` holds `components * n1 * n2` values.
//
// # Safety
// `path` must be NUL-terminated and `data` must hold the stated values.
int oddflow_field_write(const char *path,
                        size_t components,
                        size_t n1,
                        size_t n2,
                        double len1,
                        double len2,
                        double time,
                        const double *data);

// # Safety
// `field` must be null or a handle not yet freed.
void oddflow_field_free(struct OddflowField *field);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ODDFLOW_H */
