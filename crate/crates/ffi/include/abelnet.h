#ifndef ABELNET_H
#define ABELNET_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define ABN_OK 0

/**
 * A required pointer argument was null.
 */
#define ABN_ERR_NULL -1

/**
 * A string argument was not valid UTF-8.
 */
#define ABN_ERR_UTF8 -2

/**
 * A network or program document failed to parse or build.
 */
#define ABN_ERR_PARSE -3

/**
 * The engine reported an error while running or solving.
 */
#define ABN_ERR_RUN -4

/**
 * An argument was out of range (unknown scheduler, zero workers, ...).
 */
#define ABN_ERR_ARG -5

/**
 * A panic was caught at the boundary.
 */
#define ABN_ERR_PANIC -6

#define ABN_HALTED 0

#define ABN_NON_HALTING 1

#define ABN_BUDGET_EXHAUSTED 2

#define ABN_FEASIBLE 0

#define ABN_INFEASIBLE 1

#define ABN_UNKNOWN 2

/**
 * A parsed network file with its input and starting states.
 */
typedef struct AbnNetwork AbnNetwork;

/**
 * The result of a run.
 */
typedef struct AbnOutcome AbnOutcome;

/**
 * The result of solving a program file.
 */
typedef struct AbnSolution AbnSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a network document (TOML text). On success `*out` owns a new
 * network.
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `out` must be writable.
 */
int32_t abn_network_parse(const char *toml, struct AbnNetwork **out);

/**
 * Releases a network. Null is ignored.
 *
 * # Safety
 * `net` must come from [`abn_network_parse`] and not be used afterwards.
 */
void abn_network_free(struct AbnNetwork *net);

/**
 * Number of vertices.
 *
 * # Safety
 * `net` must be a live network and `out` writable.
 */
int32_t abn_network_vertex_count(const struct AbnNetwork *net, size_t *out);

/**
 * Total number of letters across all vertices; the length of an odometer.
 *
 * # Safety
 * `net` must be a live network and `out` writable.
 */
int32_t abn_network_alphabet_size(const struct AbnNetwork *net, size_t *out);

/**
 * Runs the network from its file input and states. `scheduler` is one of
 * `fifo`, `lifo`, `rr`, `greedy` or `random:SEED`; null means `fifo`.
 *
 * # Safety
 * `net` must be a live network, `scheduler` null or NUL-terminated, and
 * `out` writable.
 */
int32_t abn_run(const struct AbnNetwork *net,
                const char *scheduler,
                uint64_t budget,
                struct AbnOutcome **out);

/**
 * Runs with `workers` threads; the outcome equals the `fifo` run.
 *
 * # Safety
 * `net` must be a live network and `out` writable.
 */
int32_t abn_run_parallel(const struct AbnNetwork *net,
                         size_t workers,
                         uint64_t seed,
                         uint64_t budget,
                         struct AbnOutcome **out);

/**
 * `ABN_HALTED`, `ABN_NON_HALTING` or `ABN_BUDGET_EXHAUSTED`; `ABN_ERR_NULL`
 * for a null outcome.
 *
 * # Safety
 * `outcome` must be null or a live outcome.
 */
int32_t abn_outcome_kind(const struct AbnOutcome *outcome);

/**
 * Letters processed: the run length, or the step at which the repeated
 * configuration was seen again.
 *
 * # Safety
 * `outcome` must be a live outcome and `out` writable.
 */
int32_t abn_outcome_steps(const struct AbnOutcome *outcome, uint64_t *out);

/**
 * Copies the odometer (letters processed per letter). For a non-halting
 * outcome there is no odometer and `*needed` is set to 0.
 *
 * # Safety
 * `outcome` must be a live outcome, `buf` null or valid for `len` writes,
 * and `needed` writable.
 */
int32_t abn_outcome_odometer(const struct AbnOutcome *outcome,
                             uint64_t *buf,
                             size_t len,
                             size_t *needed);

/**
 * Releases an outcome. Null is ignored.
 *
 * # Safety
 * `outcome` must come from [`abn_run`] or [`abn_run_parallel`] and not be
 * used afterwards.
 */
void abn_outcome_free(struct AbnOutcome *outcome);

/**
 * Checks every vertex processor for abelianness with `trials` random
 * trials; `*failures` receives the number of vertices that failed.
 *
 * # Safety
 * `net` must be a live network and `failures` writable.
 */
int32_t abn_check_abelian(const struct AbnNetwork *net,
                          size_t trials,
                          uint64_t seed,
                          size_t *failures);

/**
 * Solves a program document (a tabulated monotone map or a toppling
 * system).
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` writable.
 */
int32_t abn_solve_program(const char *toml, uint64_t budget, struct AbnSolution **out);

/**
 * `ABN_FEASIBLE`, `ABN_INFEASIBLE` or `ABN_UNKNOWN`; `ABN_ERR_NULL` for a
 * null solution.
 *
 * # Safety
 * `solution` must be null or a live solution.
 */
int32_t abn_solution_status(const struct AbnSolution *solution);

/**
 * Engine steps taken by the solver.
 *
 * # Safety
 * `solution` must be a live solution and `out` writable.
 */
int32_t abn_solution_steps(const struct AbnSolution *solution, uint64_t *out);

/**
 * Copies the minimizer; `*needed` is 0 unless the program is feasible.
 *
 * # Safety
 * `solution` must be a live solution, `buf` null or valid for `len`
 * writes, and `needed` writable.
 */
int32_t abn_solution_minimizer(const struct AbnSolution *solution,
                               uint64_t *buf,
                               size_t len,
                               size_t *needed);

/**
 * Releases a solution. Null is ignored.
 *
 * # Safety
 * `solution` must come from [`abn_solve_program`] and not be used
 * afterwards.
 */
void abn_solution_free(struct AbnSolution *solution);

/**
 * The last error on this thread, or null if the last call succeeded. The
 * string stays valid until the next `abn_*` call on the same thread.
 */
const char *abn_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ABELNET_H */
