/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef NISQ_LAB_H
#define NISQ_LAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum NlStatus {
  NL_STATUS_OK = 0,
  NL_STATUS_NULL_POINTER = 1,
  NL_STATUS_INVALID_ARGUMENT = 2,
  NL_STATUS_PARSE = 3,
  NL_STATUS_RUNTIME = 4,
  NL_STATUS_PANIC = 5,
} NlStatus;

typedef enum NlGeometry {
  NL_GEOMETRY_LINEAR3_CCT = 0,
  NL_GEOMETRY_LINEAR3_CTC = 1,
  NL_GEOMETRY_STAR4 = 2,
  NL_GEOMETRY_RING6_THREE_CHAIN = 3,
  NL_GEOMETRY_RING6_ONE_CHAINS = 4,
} NlGeometry;

typedef enum NlResetStrategy {
  NL_RESET_STRATEGY_NONE = 0,
  NL_RESET_STRATEGY_X_RESET = 1,
  NL_RESET_STRATEGY_CNOT_RESET = 2,
} NlResetStrategy;

typedef enum NlControlPrep {
  NL_CONTROL_PREP_ZERO = 0,
  NL_CONTROL_PREP_ONE = 1,
  NL_CONTROL_PREP_PLUS = 2,
} NlControlPrep;

// Device calibration handle.
typedef struct NlCalibration NlCalibration;

// Built circuit handle, carrying the desired ancilla and output strings.
typedef struct NlCircuit NlCircuit;

// Coupling graph handle.
typedef struct NlGraph NlGraph;

// Exponential fit `p(t) = e^{-t/T}`.
typedef struct NlExpFit {
  double t;
  double t_stderr;
  double r_squared;
  int32_t converged;
} NlExpFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the previous call on this thread if it failed, or null. Valid
// until the next call into the library on the same thread.
const char *nl_last_error_message(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void nl_string_free(char *s);

// Static, nul-terminated library version.
const char *nl_version(void);

// The shipped 20-qubit coupling map.
//
// # Safety
// `out` must be valid for writes.
enum NlStatus nl_graph_poughkeepsie(struct NlGraph **out);

// Parses a `{"n_qubits": n, "edges": [[a, b], ...]}` document.
//
// # Safety
// `json` must be a nul-terminated string and `out` valid for writes.
enum NlStatus nl_graph_from_json(const char *json, struct NlGraph **out);

// # Safety
// `graph` must come from this library and not have been freed.
void nl_graph_free(struct NlGraph *graph);

// Counts linear triples, stars and six-rings.
//
// # Safety
// `graph` must be a live handle; the out pointers must be valid for writes.
enum NlStatus nl_graph_counts(const struct NlGraph *graph,
                              size_t *triples,
                              size_t *stars,
                              size_t *six_rings);

// The shipped default calibration.
//
// # Safety
// `out` must be valid for writes.
enum NlStatus nl_calibration_default(struct NlCalibration **out);

// Parses a calibration document.
//
// # Safety
// `json` must be a nul-terminated string and `out` valid for writes.
enum NlStatus nl_calibration_from_json(const char *json, struct NlCalibration **out);

// Noiseless copy of a calibration, keeping gate durations.
//
// # Safety
// `cal` must be a live handle and `out` valid for writes.
enum NlStatus nl_calibration_noiseless(const struct NlCalibration *cal, struct NlCalibration **out);

// # Safety
// `cal` must come from this library and not have been freed.
void nl_calibration_free(struct NlCalibration *cal);

// Number of placements of `kind` on `graph`, counting every target choice.
//
// # Safety
// `graph` must be a live handle and `out` valid for writes.
enum NlStatus nl_placement_count(const struct NlGraph *graph, enum NlGeometry kind, size_t *out);

// CNOT chain along `path[0..len]`, control first and target last.
//
// # Safety
// `graph` must be a live handle, `path` must point to `len` values and `out`
// must be valid for writes.
enum NlStatus nl_circuit_cnot_chain(const struct NlGraph *graph,
                                    const size_t *path,
                                    size_t len,
                                    enum NlResetStrategy reset,
                                    enum NlControlPrep prep,
                                    struct NlCircuit **out);

// Toffoli on the `index`-th placement of `kind`. `basis_input` in `0..8`
// prepends the preparation of `|Q1 Q2 Q3⟩` (Q1 high bit); a negative value
// builds the bare gate.
//
// # Safety
// `graph` must be a live handle and `out` valid for writes.
enum NlStatus nl_circuit_ccnot(const struct NlGraph *graph,
                               enum NlGeometry kind,
                               size_t index,
                               enum NlResetStrategy reset,
                               int32_t basis_input,
                               struct NlCircuit **out);

// Circuit from its JSON form (`n_qubits`, `ops`, optional `physical`).
//
// # Safety
// `json` must be a nul-terminated string and `out` valid for writes.
enum NlStatus nl_circuit_from_json(const char *json, struct NlCircuit **out);

// JSON form of a circuit. Free the result with [`nl_string_free`].
//
// # Safety
// `circuit` must be a live handle and `out` valid for writes.
enum NlStatus nl_circuit_to_json(const struct NlCircuit *circuit, char **out);

// Qubit, CNOT and depth counts of a circuit. Any out pointer may be null.
//
// # Safety
// `circuit` must be a live handle; non-null out pointers must be valid.
enum NlStatus nl_circuit_stats(const struct NlCircuit *circuit,
                               size_t *n_qubits,
                               size_t *cnots,
                               size_t *depth);

// Number of two-qubit gates of `circuit` that act on uncoupled device qubits.
//
// # Safety
// Both handles must be live and `out` valid for writes.
enum NlStatus nl_circuit_violations(const struct NlGraph *graph,
                                    const struct NlCircuit *circuit,
                                    size_t *out);

// Desired output string of the computational wires, if the input was
// classical; writes null otherwise.
//
// # Safety
// `circuit` must be a live handle and `out` valid for writes.
enum NlStatus nl_circuit_expected(const struct NlCircuit *circuit, char **out);

// # Safety
// `circuit` must come from this library and not have been freed.
void nl_circuit_free(struct NlCircuit *circuit);

// Samples `shots` noisy runs and writes the counts as a JSON object mapping
// bitstrings (wire 0 first) to counts. Unmeasured circuits are measured on
// every wire.
//
// # Safety
// Handles must be live and `out` valid for writes.
enum NlStatus nl_simulate_counts_json(const struct NlCircuit *circuit,
                                      const struct NlCalibration *cal,
                                      uint64_t shots,
                                      uint64_t seed,
                                      char **out);

// Noiseless outcome distribution of 3-bit phase estimation at phase `phi`.
//
// # Safety
// `out` must point to 8 writable doubles.
enum NlStatus nl_qpe_distribution(double phi, double *out);

// Weighted fit of `e^{-t/T}` to `n` points.
//
// # Safety
// `t`, `p` and `shots` must each point to `n` values; `out` must be valid.
enum NlStatus nl_fit_exponential(const double *t,
                                 const double *p,
                                 const uint64_t *shots,
                                 size_t n,
                                 struct NlExpFit *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NISQ_LAB_H */
