/* Copyright 2026 The povmsim Developers
 * SPDX-License-Identifier: Apache-2.0 */

#ifndef POVMSIM_H
#define POVMSIM_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum PovmsimStatus {
  POVMSIM_STATUS_OK = 0,
  POVMSIM_STATUS_NULL_POINTER = 1,
  POVMSIM_STATUS_INVALID_ARGUMENT = 2,
  POVMSIM_STATUS_DIMENSION_MISMATCH = 3,
  POVMSIM_STATUS_INVARIANT_VIOLATION = 4,
  POVMSIM_STATUS_PRECONDITION = 5,
  POVMSIM_STATUS_DECOMPOSITION = 6,
  POVMSIM_STATUS_FORMAT = 7,
  POVMSIM_STATUS_BUFFER_TOO_SMALL = 8,
  POVMSIM_STATUS_PANIC = 9,
} PovmsimStatus;

/**
 * Dilation variants, mirroring `DilationMode`.
 */
typedef enum PovmsimDilationMode {
  POVMSIM_DILATION_MODE_ABSTRACT = 0,
  POVMSIM_DILATION_MODE_QUBIT_REGISTER = 1,
} PovmsimDilationMode;

/**
 * Opaque Naimark dilation handle.
 */
typedef struct PovmsimDilation PovmsimDilation;

/**
 * Opaque measurement handle.
 */
typedef struct PovmsimPovm PovmsimPovm;

/**
 * Opaque postselection scheme handle.
 */
typedef struct PovmsimScheme PovmsimScheme;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, empty after a success.
 * Valid until the next call into this library from the same thread.
 */
const char *povmsim_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *povmsim_version(void);

/**
 * Loads a shipped fixture (`tetrahedral`, `trine`, `random4`, `trivial`).
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PovmsimStatus povmsim_povm_from_fixture(const char *name, struct PovmsimPovm **out);

/**
 * Parses a measurement JSON document.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PovmsimStatus povmsim_povm_from_json(const char *json, struct PovmsimPovm **out);

/**
 * Builds a measurement from `outcomes` effects of size `dim x dim`, stored
 * one after the other as `outcomes * dim * dim` interleaved complex numbers.
 *
 * # Safety
 * `effects` must point to `2 * outcomes * dim * dim` doubles.
 */
enum PovmsimStatus povmsim_povm_from_effects(size_t dim,
                                             size_t outcomes,
                                             const double *effects,
                                             struct PovmsimPovm **out);

/**
 * # Safety
 * `povm` must come from this library and not be used afterwards.
 */
void povmsim_povm_free(struct PovmsimPovm *povm);

/**
 * Hilbert-space dimension, or 0 for a null handle.
 *
 * # Safety
 * `povm` must be null or a live handle.
 */
size_t povmsim_povm_dim(const struct PovmsimPovm *povm);

/**
 * Number of outcomes, or 0 for a null handle.
 *
 * # Safety
 * `povm` must be null or a live handle.
 */
size_t povmsim_povm_outcomes(const struct PovmsimPovm *povm);

/**
 * Born probabilities of the pure state `state` (`dim` complex amplitudes,
 * normalized internally) into `out[0..outcomes]`.
 *
 * # Safety
 * `state` must hold `2 * dim` doubles and `out` at least `out_len` doubles.
 */
enum PovmsimStatus povmsim_born_probabilities(const struct PovmsimPovm *povm,
                                              const double *state,
                                              size_t dim,
                                              double *out,
                                              size_t out_len);

/**
 * Operational distance between two measurements on the same space.
 *
 * # Safety
 * Both handles must be live and `out` valid.
 */
enum PovmsimStatus povmsim_operational_distance(const struct PovmsimPovm *a,
                                                const struct PovmsimPovm *b,
                                                double *out);

/**
 * Postselection scheme with success probability `1/d`.
 *
 * # Safety
 * `povm` must be live and `out` valid.
 */
enum PovmsimStatus povmsim_scheme_new(const struct PovmsimPovm *povm, struct PovmsimScheme **out);

/**
 * # Safety
 * `scheme` must come from this library and not be used afterwards.
 */
void povmsim_scheme_free(struct PovmsimScheme *scheme);

/**
 * Success probability of the scheme, or 0 for a null handle.
 *
 * # Safety
 * `scheme` must be null or a live handle.
 */
double povmsim_scheme_success_probability(const struct PovmsimScheme *scheme);

/**
 * Number of binary projective components of the scheme.
 *
 * # Safety
 * `scheme` must be null or a live handle.
 */
size_t povmsim_scheme_components(const struct PovmsimScheme *scheme);

/**
 * Runs `shots` rounds of the scheme on a pure state and writes the counts
 * of the `outcomes + 1` results (failure last) into `counts`.
 *
 * # Safety
 * `state` must hold `2 * dim` doubles and `counts` at least `counts_len`
 * integers.
 */
enum PovmsimStatus povmsim_scheme_sample(const struct PovmsimScheme *scheme,
                                         const double *state,
                                         size_t dim,
                                         uint64_t shots,
                                         uint64_t seed,
                                         uint64_t *counts,
                                         size_t counts_len);

/**
 * Naimark dilation of a measurement.
 *
 * # Safety
 * `povm` must be live and `out` valid.
 */
enum PovmsimStatus povmsim_dilation_new(const struct PovmsimPovm *povm,
                                        enum PovmsimDilationMode mode,
                                        struct PovmsimDilation **out);

/**
 * # Safety
 * `dilation` must come from this library and not be used afterwards.
 */
void povmsim_dilation_free(struct PovmsimDilation *dilation);

/**
 * Dimension of the dilated space, or 0 for a null handle.
 *
 * # Safety
 * `dilation` must be null or a live handle.
 */
size_t povmsim_dilation_extended_dim(const struct PovmsimDilation *dilation);

/**
 * Copies the dilation unitary as `2 * D * D` doubles, row-major and
 * interleaved.
 *
 * # Safety
 * `out` must hold at least `out_len` doubles.
 */
enum PovmsimStatus povmsim_dilation_unitary(const struct PovmsimDilation *dilation,
                                            double *out,
                                            size_t out_len);

/**
 * Noisy-device tomography of both realizations of a qubit measurement.
 * Writes the operational distances of the postselection and Naimark
 * reconstructions to the target.
 *
 * # Safety
 * `povm` must be live and both outputs valid.
 */
enum PovmsimStatus povmsim_compare(const struct PovmsimPovm *povm,
                                   double cnot_depolarizing,
                                   double su2_depolarizing,
                                   double readout_bias,
                                   uint64_t shot_cap,
                                   uint64_t seed,
                                   double *out_postselection,
                                   double *out_naimark);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POVMSIM_H */
