#ifndef FFD_H
#define FFD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Length of a feature vector.
 */
#define FFD_FEATURE_LEN 50

/**
 * Number of conditions; probability arrays use the order control,
 * alcohol, drug, sleep.
 */
#define FFD_CONDITION_COUNT 4

typedef enum FfdStatus {
  FFD_STATUS_OK = 0,
  FFD_STATUS_NULL_ARGUMENT = 1,
  /**
   * Wrong length, non-finite value, bad UTF-8 or similar.
   */
  FFD_STATUS_INVALID_ARGUMENT = 2,
  FFD_STATUS_IO = 3,
  /**
   * A file exists but does not have the expected format or version.
   */
  FFD_STATUS_PARSE = 4,
  FFD_STATUS_MISSING_INPUT = 5,
  /**
   * The input is well formed but cannot be analysed (too short, too
   * many gaps, degenerate geometry).
   */
  FFD_STATUS_UNUSABLE = 6,
  /**
   * A panic inside the library.
   */
  FFD_STATUS_INTERNAL = 7,
} FfdStatus;

/**
 * Per-condition baseline curves loaded from a baselines JSON file.
 */
typedef struct FfdBaselines FfdBaselines;

/**
 * Trained classifier loaded from a model JSON file.
 */
typedef struct FfdModel FfdModel;

typedef struct FfdPrediction {
  /**
   * Index into control, alcohol, drug, sleep.
   */
  uint32_t condition;
  double probabilities[FFD_CONDITION_COUNT];
  bool fit;
  /**
   * One minus the control probability.
   */
  double unfit_score;
} FfdPrediction;

/**
 * One frame of eye geometry in pixels; `valid` is 0 for blinks and
 * failed localisations.
 */
typedef struct FfdFrame {
  double t;
  double pupil_rx;
  double pupil_ry;
  double iris_rx;
  double iris_ry;
  double pupil_cx;
  double pupil_cy;
  double iris_cx;
  double iris_cy;
  uint8_t valid;
} FfdFrame;

typedef struct FfdCircle {
  double cx;
  double cy;
  double r;
  double rms_error;
} FfdCircle;

typedef struct FfdTrend {
  double m;
  double b;
} FfdTrend;

/**
 * The line through `point` with direction `(1, m_x, m_y)`.
 */
typedef struct FfdLine {
  double point[3];
  double m_x;
  double m_y;
} FfdLine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ffd_version(void);

/**
 * Message of the most recent failure on the calling thread, or NULL if no
 * call has failed yet. Valid until the next failing call on this thread.
 */
const char *ffd_last_error_message(void);

/**
 * Static lowercase name of a condition index, or NULL when out of range.
 */
const char *ffd_condition_name(uint32_t condition);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum FfdStatus ffd_model_load(const char *path, struct FfdModel **out);

/**
 * # Safety
 * `model` must come from [`ffd_model_load`] and not be used afterwards.
 * NULL is ignored.
 */
void ffd_model_free(struct FfdModel *model);

/**
 * Static name of the model family, or NULL for a NULL model.
 *
 * # Safety
 * `model` must be NULL or a live handle.
 */
const char *ffd_model_family(const struct FfdModel *model);

/**
 * Classifies one feature vector of `len` values.
 *
 * # Safety
 * `model` must be a live handle, `features` must point to `len` doubles
 * and `out` must be writable.
 */
enum FfdStatus ffd_model_predict(const struct FfdModel *model,
                                 const double *features,
                                 size_t len,
                                 struct FfdPrediction *out);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum FfdStatus ffd_baselines_load(const char *path, struct FfdBaselines **out);

/**
 * # Safety
 * `baselines` must come from [`ffd_baselines_load`] and not be used
 * afterwards. NULL is ignored.
 */
void ffd_baselines_free(struct FfdBaselines *baselines);

/**
 * Feature vector of one eye sequence with the default preprocessing.
 * `out` receives [`FFD_FEATURE_LEN`] values; `out_len` must be at least
 * that.
 *
 * # Safety
 * `baselines` must be a live handle, `frames` must point to `n_frames`
 * frames and `out` to `out_len` writable doubles.
 */
enum FfdStatus ffd_extract_features(const struct FfdBaselines *baselines,
                                    const struct FfdFrame *frames,
                                    size_t n_frames,
                                    double fps,
                                    double *out,
                                    size_t out_len);

/**
 * Least-squares circle through `n` points.
 *
 * # Safety
 * `xs` and `ys` must each point to `n` doubles and `out` must be writable.
 */
enum FfdStatus ffd_fit_circle(const double *xs, const double *ys, size_t n, struct FfdCircle *out);

/**
 * Least-squares line through samples taken at `t0 + i * dt`. `mask` may be
 * NULL (all valid); otherwise samples with a zero mask byte are ignored.
 *
 * # Safety
 * `values` (and `mask` when not NULL) must point to `n` elements and `out`
 * must be writable.
 */
enum FfdStatus ffd_linear_trend(const double *values,
                                const uint8_t *mask,
                                size_t n,
                                double t0,
                                double dt,
                                struct FfdTrend *out);

/**
 * Shortest distance between two lines, with a parallel-line fallback.
 *
 * # Safety
 * `a` and `b` must point to readable lines and `out` must be writable.
 */
enum FfdStatus ffd_skew_distance(const struct FfdLine *a, const struct FfdLine *b, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FFD_H */
