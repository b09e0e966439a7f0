#ifndef NGN_MOTION_H
#define NGN_MOTION_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NgnStatus {
  NGN_STATUS_OK = 0,
  NGN_STATUS_NULL_POINTER = 1,
  NGN_STATUS_INVALID_UTF8 = 2,
  NGN_STATUS_PARSE = 3,
  NGN_STATUS_INVALID_ARGUMENT = 4,
  NGN_STATUS_TRAINING = 5,
  NGN_STATUS_GENERATION = 6,
  NGN_STATUS_BUFFER_TOO_SMALL = 7,
  NGN_STATUS_PANIC = 8,
} NgnStatus;

// A trained class network with its standardization.
typedef struct NgnModel NgnModel;

// A parsed BVH document: skeleton plus motion.
typedef struct NgnMotion NgnMotion;

// Training hyperparameters. Start from [`ngn_train_config_default`].
typedef struct NgnTrainConfig {
  size_t neuron_count;
  size_t iterations;
  double epsilon_initial;
  double epsilon_final;
  double lambda_initial;
  double lambda_final;
  double noise_std;
  double smoothing_sigma;
  uint64_t seed;
} NgnTrainConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. The pointer
// stays valid until the next library call on the same thread.
const char *ngn_last_error(void);

// # Safety
// `s` must come from this library, or be NULL.
void ngn_string_free(char *s);

// Parse a NUL-terminated BVH document.
//
// # Safety
// `text` must be a valid C string and `out` writable.
enum NgnStatus ngn_motion_parse(const char *text, struct NgnMotion **out);

// Serialize back to BVH text; free the result with [`ngn_string_free`].
//
// # Safety
// `motion` must be a live handle and `out` writable.
enum NgnStatus ngn_motion_to_bvh(const struct NgnMotion *motion, char **out);

// Number of frames; 0 for NULL.
//
// # Safety
// `motion` must be a live handle or NULL.
size_t ngn_motion_frame_count(const struct NgnMotion *motion);

// Channels per frame; 0 for NULL.
//
// # Safety
// `motion` must be a live handle or NULL.
size_t ngn_motion_channel_count(const struct NgnMotion *motion);

// Joints, end sites included; 0 for NULL.
//
// # Safety
// `motion` must be a live handle or NULL.
size_t ngn_motion_joint_count(const struct NgnMotion *motion);

// Seconds per frame; 0 for NULL.
//
// # Safety
// `motion` must be a live handle or NULL.
double ngn_motion_frame_time(const struct NgnMotion *motion);

// Copy all frames row-major into `buf`, which holds `len` doubles and needs
// frames × channels of them.
//
// # Safety
// `motion` must be a live handle and `buf` valid for `len` writes.
enum NgnStatus ngn_motion_copy_frames(const struct NgnMotion *motion, double *buf, size_t len);

// # Safety
// `motion` must come from this library, or be NULL.
void ngn_motion_free(struct NgnMotion *motion);

struct NgnTrainConfig ngn_train_config_default(void);

// Train a class network on `count` clips sharing one channel layout.
//
// # Safety
// `clips` must point to `count` live handles; `config`, `label` and `out`
// must be valid.
enum NgnStatus ngn_model_train(const struct NgnMotion *const *clips,
                               size_t count,
                               const struct NgnTrainConfig *config,
                               const char *label,
                               struct NgnModel **out);

// Generate one clip conditioned on `reference`. The result reuses the
// reference skeleton; equal seeds give equal output.
//
// # Safety
// `model` and `reference` must be live handles and `out` writable.
enum NgnStatus ngn_model_generate(const struct NgnModel *model,
                                  const struct NgnMotion *reference,
                                  uint64_t seed,
                                  struct NgnMotion **out);

// Number of recorded training iterations; 0 for NULL.
//
// # Safety
// `model` must be a live handle or NULL.
size_t ngn_model_error_len(const struct NgnModel *model);

// Copy the per-iteration average error into `buf` (capacity `len`).
//
// # Safety
// `model` must be a live handle and `buf` valid for `len` writes.
enum NgnStatus ngn_model_error_history(const struct NgnModel *model, double *buf, size_t len);

// Serialize to the JSON artifact format; free with [`ngn_string_free`].
//
// # Safety
// `model` must be a live handle and `out` writable.
enum NgnStatus ngn_model_to_json(const struct NgnModel *model, char **out);

// # Safety
// `json` must be a valid C string and `out` writable.
enum NgnStatus ngn_model_from_json(const char *json, struct NgnModel **out);

// # Safety
// `model` must come from this library, or be NULL.
void ngn_model_free(struct NgnModel *model);

// Dynamic time warping distance between the raw channel frames of two
// clips with equal channel counts.
//
// # Safety
// `a` and `b` must be live handles and `out` writable.
enum NgnStatus ngn_dtw(const struct NgnMotion *a, const struct NgnMotion *b, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NGN_MOTION_H */
