#ifndef WBNSIM_H
#define WBNSIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  WBN_MECHANISM_PBFT = 0,
  WBN_MECHANISM_RAFT = 1,
  WBN_MECHANISM_POW = 2,
} WbnMechanism;

typedef enum {
  WBN_STATUS_OK = 0,
  WBN_STATUS_NULL_POINTER = 1,
  WBN_STATUS_INVALID_ARGUMENT = 2,
  WBN_STATUS_CONFIG = 3,
  WBN_STATUS_CONSENSUS = 4,
  WBN_STATUS_INFEASIBLE = 5,
  WBN_STATUS_IO = 6,
  WBN_STATUS_PANIC = 7,
} WbnStatus;

/**
 * Opaque node deployment.
 */
typedef struct WbnDeployment WbnDeployment;

/**
 * Opaque result table.
 */
typedef struct WbnTable WbnTable;

/**
 * Log-distance channel and detection thresholds. `-INFINITY` disables
 * the sensitivity check or the noise floor.
 */
typedef struct {
  double pathloss_exponent;
  double reference_loss_db;
  double rx_sensitivity_dbm;
  double sir_threshold_db;
  double noise_floor_dbm;
} WbnChannel;

typedef struct {
  double x;
  double y;
  double tx_power_dbm;
  bool active;
} WbnJammer;

/**
 * Counters of one consensus round. `proposer` is -1 when no block
 * proposer applies.
 */
typedef struct {
  bool success;
  size_t confirming_nodes;
  uint64_t tx_events;
  uint64_t rx_events;
  uint64_t slots_elapsed;
  double elapsed_s;
  bool timed_out;
  int64_t proposer;
} WbnRoundSummary;

/**
 * Minimum viable powers; filled even when the status is
 * `WBN_STATUS_INFEASIBLE`.
 */
typedef struct {
  double p1_star;
  double p2_star;
  double r_star;
} WbnViability;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next call into this library from the same thread.
 */
const char *wbn_last_error(void);

/**
 * Library version as a static string.
 */
const char *wbn_version(void);

/**
 * The library's default channel.
 */
WbnChannel wbn_channel_default(void);

/**
 * Every reception succeeds (sensitivity `-INFINITY`).
 */
WbnChannel wbn_channel_perfect(void);

/**
 * Places the leader at the origin and `n - 1` nodes uniformly over a
 * disk of `radius` metres.
 *
 * # Safety
 * `out_deployment` must be valid for writes.
 */
WbnStatus wbn_deployment_place(size_t n,
                               double radius,
                               uint64_t seed,
                               WbnDeployment **out_deployment);

/**
 * Builds a deployment from `n` explicit coordinates; node 0 leads.
 *
 * # Safety
 * `xs` and `ys` must each hold `n` readable doubles; `out_deployment`
 * must be valid for writes.
 */
WbnStatus wbn_deployment_from_positions(const double *xs,
                                        const double *ys,
                                        size_t n,
                                        double tx_power_dbm,
                                        WbnDeployment **out_deployment);

/**
 * # Safety
 * `deployment` must be null or a handle from this library not yet freed.
 */
void wbn_deployment_free(WbnDeployment *deployment);

/**
 * Node count, or 0 for a null handle.
 *
 * # Safety
 * `deployment` must be null or a live handle.
 */
size_t wbn_deployment_len(const WbnDeployment *deployment);

/**
 * # Safety
 * `deployment` must be a live handle; `x` and `y` valid for writes.
 */
WbnStatus wbn_deployment_position(const WbnDeployment *deployment, size_t id, double *x, double *y);

/**
 * Sets every node's transmit power.
 *
 * # Safety
 * `deployment` must be a live handle.
 */
WbnStatus wbn_deployment_set_tx_power(WbnDeployment *deployment, double tx_power_dbm);

/**
 * Marks the highest-numbered nodes faulty: the last `byzantine` become
 * Byzantine, the `crashed` before them Crashed.
 *
 * # Safety
 * `deployment` must be a live handle.
 */
WbnStatus wbn_deployment_mark_faults(WbnDeployment *deployment, size_t byzantine, size_t crashed);

/**
 * Does node `to` decode a transmission from node `from`? `jammer` may
 * be null.
 *
 * # Safety
 * `deployment` and `channel` must be live; `jammer` null or live;
 * `out_ok` valid for writes.
 */
WbnStatus wbn_link_ok(const WbnDeployment *deployment,
                      size_t from,
                      size_t to,
                      const WbnChannel *channel,
                      const WbnJammer *jammer,
                      bool *out_ok);

/**
 * Multi-hop flood from `source`. `reached` may be null; otherwise it
 * must hold one byte per node and receives 1 for every node reached.
 *
 * # Safety
 * Handles and `channel` must be live; `jammer` null or live; `reached`
 * null or writable for `wbn_deployment_len` bytes; `out_transmissions`
 * valid for writes.
 */
WbnStatus wbn_flood_reach(const WbnDeployment *deployment,
                          size_t source,
                          const WbnChannel *channel,
                          const WbnJammer *jammer,
                          uint8_t *reached,
                          size_t *out_transmissions);

/**
 * One consensus round over the radio model.
 *
 * # Safety
 * Handles and `channel` must be live; `jammer` null or live; `out_summary`
 * valid for writes.
 */
WbnStatus wbn_run_round(const WbnDeployment *deployment,
                        const WbnChannel *channel,
                        const WbnJammer *jammer,
                        WbnMechanism mechanism,
                        size_t fault_budget,
                        uint64_t seed,
                        WbnRoundSummary *out_summary);

/**
 * Receiver-side message events per round (PBFT `2N^2+N`, Raft and PoW
 * `2N`). Fails if the value exceeds 64 bits.
 *
 * # Safety
 * `out_count` must be valid for writes.
 */
WbnStatus wbn_comm_complexity(WbnMechanism mechanism, uint32_t n, uint64_t *out_count);

/**
 * Transmission slots per round (PBFT `2N+1`, Raft `N+1`, PoW `2`).
 *
 * # Safety
 * `out_count` must be valid for writes.
 */
WbnStatus wbn_spectrum_requirement(WbnMechanism mechanism, uint32_t n, uint64_t *out_count);

/**
 * Minimum viable leader and replica powers for `f` faults at density
 * `lambda`. Returns `WBN_STATUS_INFEASIBLE` (with `out` still filled) when
 * the required radius exceeds `r_max`.
 *
 * # Safety
 * `channel` must be live; `out_result` valid for writes.
 */
WbnStatus wbn_min_viable_power(uint64_t f,
                               double lambda,
                               const WbnChannel *channel,
                               double r_max,
                               WbnViability *out_result);

/**
 * Runs the experiment described by flat `key=value` config text (which
 * must include an `experiment` key) and returns its main table.
 *
 * # Safety
 * `config_text` must be a nul-terminated string; `out_table` valid for
 * writes.
 */
WbnStatus wbn_run_config(const char *config_text, WbnTable **out_table);

/**
 * # Safety
 * `table` must be null or a handle from this library not yet freed.
 */
void wbn_table_free(WbnTable *table);

/**
 * Data rows, or 0 for a null handle.
 *
 * # Safety
 * `table` must be null or a live handle.
 */
size_t wbn_table_rows(const WbnTable *table);

/**
 * Columns, or 0 for a null handle.
 *
 * # Safety
 * `table` must be null or a live handle.
 */
size_t wbn_table_cols(const WbnTable *table);

/**
 * The table rendered as CSV. Free with [`wbn_string_free`].
 *
 * # Safety
 * `table` must be a live handle; `out_csv` valid for writes.
 */
WbnStatus wbn_table_to_csv(const WbnTable *table, char **out_csv);

/**
 * Writes the table to `path` atomically.
 *
 * # Safety
 * `table` must be a live handle; `path` a nul-terminated string.
 */
WbnStatus wbn_table_write_csv(const WbnTable *table, const char *path);

/**
 * # Safety
 * `s` must be null or a string returned by this library not yet freed.
 */
void wbn_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WBNSIM_H */
