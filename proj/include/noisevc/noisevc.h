// Copyright 2026  NoiseVC contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

/* C interface to the noisevc library.
 *
 * Every fallible call returns an nvc_status; on failure the message is
 * available from nvc_last_error() until the next call on the same thread.
 * Objects are opaque and released with their matching *_free function.
 * Passing NULL to a *_free function is a no-op.
 */
#ifndef NOISEVC_NOISEVC_H_
#define NOISEVC_NOISEVC_H_

#include <stddef.h>

#if defined(NVC_BUILDING_LIBRARY)
#define NVC_API __attribute__((visibility("default")))
#else
#define NVC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  NVC_OK = 0,
  NVC_ERR_USAGE = 1,
  NVC_ERR_CONFIG = 2,
  NVC_ERR_DATA = 3,
  NVC_ERR_NUMERICAL = 4
} nvc_status;

typedef struct nvc_config nvc_config;
typedef struct nvc_model nvc_model;
typedef struct nvc_mel nvc_mel;

NVC_API const char *nvc_last_error(void);
NVC_API const char *nvc_version(void);

/* ---- configuration */

/* `path` may be NULL for preset defaults. Overrides are "key=value" strings
 * applied last; "preset=paper" selects the paper-scale preset. */
NVC_API nvc_status nvc_config_load(const char *path, const char *const *overrides,
                                   size_t n_overrides, nvc_config **out);
NVC_API void nvc_config_free(nvc_config *cfg);
NVC_API nvc_status nvc_config_set(nvc_config *cfg, const char *key, const char *value);
/* String getters copy into `buf` (NUL-terminated, truncated to `cap`) and
 * report the full length including the terminator in `needed`. */
NVC_API nvc_status nvc_config_get(const nvc_config *cfg, const char *key, char *buf, size_t cap,
                                  size_t *needed);
NVC_API nvc_status nvc_config_serialize(const nvc_config *cfg, char *buf, size_t cap,
                                        size_t *needed);

/* ---- pipeline stages */

/* Extracts mels from <in_dir>/<speaker>/...wav into out_dir and writes
 * out_dir/manifest.jsonl, using features.* keys. */
NVC_API nvc_status nvc_features(const char *in_dir, const char *out_dir, const nvc_config *cfg,
                                size_t *n_utterances, size_t *n_skipped);

/* Writes a synthetic corpus (mels, labels.txt, manifest.jsonl) using synth.*
 * keys. */
NVC_API nvc_status nvc_synth(const char *out_dir, const nvc_config *cfg, size_t *n_utterances);

typedef struct {
  int step;
  double reconstruction;
  double codebook;
  double commitment;
  double cpc;
  double total;
} nvc_step_metrics;

typedef void (*nvc_step_callback)(const nvc_step_metrics *metrics, void *user);

/* Trains on the manifest's train split. `resume` (checkpoint.json) may be
 * NULL. The final checkpoint path is copied to `ckpt_buf`. */
NVC_API nvc_status nvc_train(const char *manifest_path, const nvc_config *cfg, const char *out_dir,
                             const char *resume, nvc_step_callback callback, void *user,
                             char *ckpt_buf, size_t cap);

typedef struct {
  double content_probe_speaker_acc;
  double speaker_probe_acc;
  double l1_reconstruction;
  double alpha;
  double silhouette;
  int has_silhouette;
} nvc_report;

/* Runs the disentanglement probes (eval.* keys from `cfg`, which may be
 * NULL) and writes a key = value report. `map_path` may be NULL. */
NVC_API nvc_status nvc_eval(const char *checkpoint, const char *manifest_path,
                            const nvc_config *cfg, const char *report_path, const char *map_path,
                            nvc_report *out);

/* ---- inference */

NVC_API nvc_status nvc_model_load(const char *checkpoint, nvc_model **out);
NVC_API void nvc_model_free(nvc_model *model);

/* Loads a .mel tensor or computes the mel of a .wav file. */
NVC_API nvc_status nvc_mel_load(const char *path, nvc_mel **out);
/* `data` is n_mels x frames, row-major. */
NVC_API nvc_status nvc_mel_create(int n_mels, int frames, const float *data, nvc_mel **out);
NVC_API nvc_status nvc_mel_shape(const nvc_mel *mel, int *n_mels, int *frames);
NVC_API nvc_status nvc_mel_copy_data(const nvc_mel *mel, float *out, size_t cap);
NVC_API nvc_status nvc_mel_save(const nvc_mel *mel, const char *path);
NVC_API void nvc_mel_free(nvc_mel *mel);

/* Content from `source`, speaker from the mean embedding of `targets`.
 * Calls on one model are serialized internally. */
NVC_API nvc_status nvc_convert(nvc_model *model, const nvc_mel *source,
                               const nvc_mel *const *targets, size_t n_targets, nvc_mel **out);

NVC_API nvc_status nvc_invert_to_wav(const nvc_mel *mel, int n_iters, const char *wav_path);

#ifdef __cplusplus
}
#endif

#endif /* NOISEVC_NOISEVC_H_ */
