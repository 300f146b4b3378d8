#ifndef LIFL_SIM_H
#define LIFL_SIM_H

/* Generated by cbindgen from lifl-sim-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of an FFI call.
 */
typedef enum LiflStatus {
  /**
   * The call succeeded.
   */
  LiflStatus_Ok = 0,
  /**
   * A required pointer argument was null.
   */
  LiflStatus_NullPointer = 1,
  /**
   * An argument violated a model constraint (wrong id, bad parameter).
   */
  LiflStatus_InvalidArgument = 2,
  /**
   * An index was outside the collection it addresses.
   */
  LiflStatus_IndexOutOfRange = 3,
  /**
   * The simulation run itself failed.
   */
  LiflStatus_RunFailed = 4,
  /**
   * An internal panic was caught at the boundary.
   */
  LiflStatus_Panic = 5,
} LiflStatus;

/**
 * Opaque network being built or simulated.
 */
typedef struct LiflNetwork LiflNetwork;

/**
 * Opaque simulation trace.
 */
typedef struct LiflTrace LiflTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Create an empty network. Free it with `lifl_network_free`.
 */
struct LiflNetwork *lifl_network_new(void);

/**
 * Destroy a network created by `lifl_network_new`. A null pointer is a
 * no-op.
 *
 * # Safety
 * `net` must be null or a pointer previously returned by
 * `lifl_network_new` that has not been freed yet.
 */
void lifl_network_free(struct LiflNetwork *net);

/**
 * Add a neuron with the given threshold offset, leak and refractory
 * period; writes the new neuron id to `out_id`.
 *
 * # Safety
 * `net` must be a live network handle; `out_id` must be valid for one
 * `uint32_t` write or null.
 */
enum LiflStatus lifl_network_add_neuron(struct LiflNetwork *net,
                                        double d,
                                        double l_d,
                                        double t_arp,
                                        uint32_t *out_id);

/**
 * Connect `pre` to `post` through a memristive synapse starting at state
 * `initial_x` in [0, 1]. Plastic synapses follow the calibrated STDP
 * pipeline; fixed ones keep their weight. Writes the synapse id to
 * `out_id`.
 *
 * # Safety
 * `net` must be a live network handle; `out_id` must be valid for one
 * `uint32_t` write or null.
 */
enum LiflStatus lifl_network_add_synapse(struct LiflNetwork *net,
                                         uint32_t pre,
                                         uint32_t post,
                                         double initial_x,
                                         bool plastic,
                                         uint32_t *out_id);

/**
 * Schedule an external spike of the given amplitude at `time_ms`.
 *
 * # Safety
 * `net` must be a live network handle.
 */
enum LiflStatus lifl_network_add_stimulus(struct LiflNetwork *net,
                                          uint32_t target,
                                          double time_ms,
                                          double amplitude);

/**
 * Run the network until `t_end_ms` and hand back a trace handle through
 * `out_trace`. Every run replays the stimulus schedule from rest while
 * synaptic weights persist, so repeated calls continue learning from
 * where the previous run left the weights. Free the trace with
 * `lifl_trace_free`.
 *
 * # Safety
 * `net` must be a live network handle; `out_trace` must be valid for one
 * pointer write.
 */
enum LiflStatus lifl_network_run(struct LiflNetwork *net,
                                 double t_end_ms,
                                 struct LiflTrace **out_trace);

/**
 * Number of neurons in the network; 0 for a null handle.
 *
 * # Safety
 * `net` must be null or a live network handle.
 */
uintptr_t lifl_network_neuron_count(const struct LiflNetwork *net);

/**
 * Current weight of a synapse in [0, 1], written to `out_weight`.
 *
 * # Safety
 * `net` must be a live network handle; `out_weight` must be valid for
 * one `double` write.
 */
enum LiflStatus lifl_network_synapse_weight(const struct LiflNetwork *net,
                                            uint32_t synapse,
                                            double *out_weight);

/**
 * Destroy a trace returned by `lifl_network_run`. A null pointer is a
 * no-op.
 *
 * # Safety
 * `trace` must be null or a pointer previously returned through
 * `lifl_network_run` that has not been freed yet.
 */
void lifl_trace_free(struct LiflTrace *trace);

/**
 * Number of spikes in the trace; 0 for a null handle.
 *
 * # Safety
 * `trace` must be null or a live trace handle.
 */
uintptr_t lifl_trace_spike_count(const struct LiflTrace *trace);

/**
 * Fetch one spike by index: its time (ms) and the neuron that fired.
 *
 * # Safety
 * `trace` must be a live trace handle; the out-pointers must each be
 * valid for one write or null.
 */
enum LiflStatus lifl_trace_spike(const struct LiflTrace *trace,
                                 uintptr_t index,
                                 double *out_time_ms,
                                 uint32_t *out_neuron);

/**
 * Number of weight samples in the trace; 0 for a null handle.
 *
 * # Safety
 * `trace` must be null or a live trace handle.
 */
uintptr_t lifl_trace_weight_count(const struct LiflTrace *trace);

/**
 * Fetch one weight sample by index: time (ms), synapse id, and the
 * weight right after the update.
 *
 * # Safety
 * `trace` must be a live trace handle; the out-pointers must each be
 * valid for one write or null.
 */
enum LiflStatus lifl_trace_weight_sample(const struct LiflTrace *trace,
                                         uintptr_t index,
                                         double *out_time_ms,
                                         uint32_t *out_synapse,
                                         double *out_weight);

/**
 * Last sampled weight of a synapse in the trace, written to `out_weight`.
 *
 * # Safety
 * `trace` must be a live trace handle; `out_weight` must be valid for
 * one `double` write.
 */
enum LiflStatus lifl_trace_final_weight(const struct LiflTrace *trace,
                                        uint32_t synapse,
                                        double *out_weight);

/**
 * Static description of a status code.
 */
const char *lifl_status_message(enum LiflStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LIFL_SIM_H */
