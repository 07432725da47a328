#ifndef PVE_H
#define PVE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PveStatus {
  PVE_STATUS_OK = 0,
  PVE_STATUS_NULL_POINTER = 1,
  PVE_STATUS_INVALID_ARGUMENT = 2,
  PVE_STATUS_IO = 3,
  PVE_STATUS_INVALID_MODEL = 4,
  PVE_STATUS_INVALID_IMAGE = 5,
  PVE_STATUS_INFERENCE = 6,
  PVE_STATUS_PANIC = 7,
} PveStatus;

typedef enum PveLabel {
  PVE_LABEL_HUMAN = 0,
  PVE_LABEL_AI = 1,
} PveLabel;

typedef enum PveColormap {
  PVE_COLORMAP_INFERNO = 0,
  PVE_COLORMAP_JET = 1,
  PVE_COLORMAP_GRAYSCALE = 2,
} PveColormap;

/**
 * Loaded detector.
 */
typedef struct PveModel PveModel;

/**
 * RGB8 overlay image, row-major.
 */
typedef struct PveOverlay PveOverlay;

typedef struct PveModelInfo {
  uint32_t format_version;
  uint64_t n_ai;
  uint64_t n_human;
  size_t param_count;
  size_t input_height;
  size_t input_width;
  size_t input_channels;
} PveModelInfo;

typedef struct PvePrediction {
  /**
   * Probability of the ai class.
   */
  double probability;
  enum PveLabel label;
  double threshold;
  /**
   * Preprocess + forward wall time.
   */
  double inference_micros;
} PvePrediction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *pve_version(void);

/**
 * Message for the last failed call on this thread, or NULL after a
 * successful call. Valid until the next call on this thread.
 */
const char *pve_last_error_message(void);

/**
 * `ln(n_ai) - ln(n_human)`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum PveStatus pve_init_output_bias(uint64_t n_ai, uint64_t n_human, double *out);

/**
 * Loads a model container from a file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum PveStatus pve_model_load_file(const char *path, struct PveModel **out);

/**
 * Loads a model container from memory.
 *
 * # Safety
 * `data` must point to `len` readable bytes; `out` must be valid for writes.
 */
enum PveStatus pve_model_load_bytes(const uint8_t *data, size_t len, struct PveModel **out);

/**
 * Zero-weight compact detector whose prediction is the class prior.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum PveStatus pve_model_prior(uint64_t n_ai, uint64_t n_human, struct PveModel **out);

/**
 * # Safety
 * `model` must be NULL or a handle from a `pve_model_*` constructor that has
 * not been freed.
 */
void pve_model_free(struct PveModel *model);

/**
 * Model name, valid for the lifetime of the handle. NULL for a NULL handle.
 *
 * # Safety
 * `model` must be NULL or a live handle.
 */
const char *pve_model_name(const struct PveModel *model);

/**
 * # Safety
 * `model` must be a live handle; `out` must be valid for writes.
 */
enum PveStatus pve_model_info(const struct PveModel *model, struct PveModelInfo *out);

/**
 * Classifies an encoded PNG or JPEG image.
 *
 * # Safety
 * `model` must be a live handle, `data` must point to `len` readable bytes
 * and `out` must be valid for writes.
 */
enum PveStatus pve_detect(const struct PveModel *model,
                          const uint8_t *data,
                          size_t len,
                          double threshold,
                          struct PvePrediction *out);

/**
 * Classifies an image and, when it is labelled ai or `force` is set, builds
 * a saliency overlay at the original resolution. `*out_overlay` is set to
 * NULL when no overlay was made. `colormap` is a [`PveColormap`] value.
 *
 * # Safety
 * `model` must be a live handle, `data` must point to `len` readable bytes;
 * `out_prediction` and `out_overlay` must be valid for writes.
 */
enum PveStatus pve_explain(const struct PveModel *model,
                           const uint8_t *data,
                           size_t len,
                           double threshold,
                           double alpha,
                           uint32_t colormap,
                           bool force,
                           struct PvePrediction *out_prediction,
                           struct PveOverlay **out_overlay);

/**
 * # Safety
 * `overlay` must be NULL or a live handle.
 */
size_t pve_overlay_width(const struct PveOverlay *overlay);

/**
 * # Safety
 * `overlay` must be NULL or a live handle.
 */
size_t pve_overlay_height(const struct PveOverlay *overlay);

/**
 * RGB8 pixels, `width * height * 3` bytes, valid until the handle is freed.
 *
 * # Safety
 * `overlay` must be NULL or a live handle.
 */
const uint8_t *pve_overlay_pixels(const struct PveOverlay *overlay);

/**
 * # Safety
 * `overlay` must be NULL or a handle from [`pve_explain`] that has not been
 * freed.
 */
void pve_overlay_free(struct PveOverlay *overlay);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PVE_H */
