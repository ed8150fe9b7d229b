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

#include "noisevc/noisevc.h"

#include <cstring>
#include <exception>
#include <filesystem>
#include <memory>
#include <mutex>
#include <new>
#include <string>
#include <vector>

#include "noisevc/config.hpp"
#include "noisevc/convert.hpp"
#include "noisevc/error.hpp"
#include "noisevc/evalsuite.hpp"
#include "noisevc/features.hpp"
#include "noisevc/synth.hpp"
#include "noisevc/tensor_io.hpp"
#include "noisevc/trainer.hpp"

struct nvc_config {
  noisevc::RunConfig rc;
};

struct nvc_model {
  std::unique_ptr<noisevc::NoiseVC> net;
  std::mutex mu;
};

struct nvc_mel {
  noisevc::MelSpectrogram mel;
};

namespace {

thread_local std::string g_last_error;

template <class F>
nvc_status guarded(F &&f) {
  try {
    g_last_error.clear();
    f();
    return NVC_OK;
  } catch (const noisevc::Error &e) {
    g_last_error = e.what();
    return static_cast<nvc_status>(static_cast<int>(e.kind()));
  } catch (const std::bad_alloc &) {
    g_last_error = "out of memory";
    return NVC_ERR_NUMERICAL;
  } catch (const std::filesystem::filesystem_error &e) {
    g_last_error = e.what();
    return NVC_ERR_DATA;
  } catch (const std::exception &e) {
    g_last_error = e.what();
    return NVC_ERR_DATA;
  }
}

void require(const void *p, const char *what) {
  if (!p) throw noisevc::UsageError(std::string(what) + " must not be NULL");
}

void copy_out(const std::string &s, char *buf, std::size_t cap, std::size_t *needed) {
  if (needed) *needed = s.size() + 1;
  if (!buf || cap == 0) return;
  const std::size_t n = std::min(cap - 1, s.size());
  std::memcpy(buf, s.data(), n);
  buf[n] = '\0';
}

noisevc::RunConfig config_or_default(const nvc_config *cfg) {
  return cfg ? cfg->rc : noisevc::RunConfig::defaults();
}

}  // namespace

extern "C" {

const char *nvc_last_error(void) { return g_last_error.c_str(); }

const char *nvc_version(void) { return "0.1.0"; }

nvc_status nvc_config_load(const char *path, const char *const *overrides, size_t n_overrides,
                           nvc_config **out) {
  return guarded([&] {
    require(out, "out");
    std::vector<std::string> ov;
    for (size_t i = 0; i < n_overrides; ++i) {
      require(overrides[i], "override");
      ov.emplace_back(overrides[i]);
    }
    auto cfg = std::make_unique<nvc_config>();
    cfg->rc = path ? noisevc::load_config(path, ov) : noisevc::RunConfig::parse("", ov);
    *out = cfg.release();
  });
}

void nvc_config_free(nvc_config *cfg) { delete cfg; }

nvc_status nvc_config_set(nvc_config *cfg, const char *key, const char *value) {
  return guarded([&] {
    require(cfg, "cfg");
    require(key, "key");
    require(value, "value");
    cfg->rc.set(key, value);
  });
}

nvc_status nvc_config_get(const nvc_config *cfg, const char *key, char *buf, size_t cap,
                          size_t *needed) {
  return guarded([&] {
    require(cfg, "cfg");
    require(key, "key");
    copy_out(std::string(key) == "preset" ? cfg->rc.preset() : cfg->rc.value_text(key), buf, cap,
             needed);
  });
}

nvc_status nvc_config_serialize(const nvc_config *cfg, char *buf, size_t cap, size_t *needed) {
  return guarded([&] {
    require(cfg, "cfg");
    copy_out(cfg->rc.serialize(), buf, cap, needed);
  });
}

nvc_status nvc_features(const char *in_dir, const char *out_dir, const nvc_config *cfg,
                        size_t *n_utterances, size_t *n_skipped) {
  return guarded([&] {
    require(in_dir, "in_dir");
    require(out_dir, "out_dir");
    const noisevc::RunConfig rc = config_or_default(cfg);
    noisevc::FeatureOptions opts;
    opts.mel = rc.mel();
    opts.trim.threshold_db = rc.get_real("features.trim_db");
    opts.trim.frame_samples = opts.mel.window_samples;
    opts.n_unseen = static_cast<int>(rc.get_int("features.unseen"));
    opts.seed = static_cast<std::uint64_t>(rc.get_int("features.seed"));
    const noisevc::FeatureRun run = noisevc::extract_features(in_dir, out_dir, opts);
    noisevc::write_file_atomic(std::filesystem::path(out_dir) / "resolved_config.ini", rc.serialize());
    if (n_utterances) *n_utterances = run.manifest.entries.size();
    if (n_skipped) *n_skipped = run.skipped.size();
    if (!run.skipped.empty()) {
      std::string msg;
      for (const std::string &s : run.skipped) msg += s + "\n";
      g_last_error = msg;
    }
  });
}

nvc_status nvc_synth(const char *out_dir, const nvc_config *cfg, size_t *n_utterances) {
  return guarded([&] {
    require(out_dir, "out_dir");
    const noisevc::RunConfig rc = config_or_default(cfg);
    const noisevc::DatasetManifest m = noisevc::generate_corpus(
        rc.synth(), static_cast<int>(rc.get_int("synth.utts")), out_dir);
    noisevc::write_file_atomic(std::filesystem::path(out_dir) / "resolved_config.ini", rc.serialize());
    if (n_utterances) *n_utterances = m.entries.size();
  });
}

nvc_status nvc_train(const char *manifest_path, const nvc_config *cfg, const char *out_dir,
                     const char *resume, nvc_step_callback callback, void *user, char *ckpt_buf,
                     size_t cap) {
  return guarded([&] {
    require(manifest_path, "manifest_path");
    require(out_dir, "out_dir");
    const noisevc::RunConfig rc = config_or_default(cfg);
    const noisevc::DatasetManifest m = noisevc::read_manifest(manifest_path);
    noisevc::FitOptions opts;
    if (resume) opts.resume_from = std::filesystem::path(resume);
    if (callback) {
      opts.on_step = [callback, user](const noisevc::MetricsRecord &r) {
        const nvc_step_metrics sm{r.step,        r.loss.reconstruction, r.loss.codebook_term,
                                  r.loss.commitment_term, r.loss.cpc,  r.loss.total};
        callback(&sm, user);
      };
    }
    const std::filesystem::path ckpt = noisevc::fit(m, rc.train(), out_dir, opts);
    copy_out(ckpt.string(), ckpt_buf, cap, nullptr);
  });
}

nvc_status nvc_eval(const char *checkpoint, const char *manifest_path, const nvc_config *cfg,
                    const char *report_path, const char *map_path, nvc_report *out) {
  return guarded([&] {
    require(checkpoint, "checkpoint");
    require(manifest_path, "manifest_path");
    const noisevc::EvalConfig ec = config_or_default(cfg).eval();
    const noisevc::DatasetManifest m = noisevc::read_manifest(manifest_path);
    const std::filesystem::path map = map_path ? std::filesystem::path(map_path) : std::filesystem::path();
    const noisevc::DisentanglementReport r =
        noisevc::evaluate(checkpoint, m, ec, map_path ? &map : nullptr);
    if (report_path) noisevc::write_file_atomic(report_path, noisevc::format_report(r));
    if (out) {
      out->content_probe_speaker_acc = r.content_probe_speaker_acc;
      out->speaker_probe_acc = r.speaker_probe_acc;
      out->l1_reconstruction = r.l1_reconstruction;
      out->alpha = r.alpha.value_or(0.0);
      out->has_silhouette = r.silhouette.has_value();
      out->silhouette = r.silhouette.value_or(0.0);
    }
  });
}

nvc_status nvc_model_load(const char *checkpoint, nvc_model **out) {
  return guarded([&] {
    require(checkpoint, "checkpoint");
    require(out, "out");
    auto m = std::make_unique<nvc_model>();
    m->net = noisevc::load_model(checkpoint);
    *out = m.release();
  });
}

void nvc_model_free(nvc_model *model) { delete model; }

nvc_status nvc_mel_load(const char *path, nvc_mel **out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto m = std::make_unique<nvc_mel>();
    m->mel = noisevc::load_mel_or_wav(path);
    *out = m.release();
  });
}

nvc_status nvc_mel_create(int n_mels, int frames, const float *data, nvc_mel **out) {
  return guarded([&] {
    require(data, "data");
    require(out, "out");
    if (n_mels < 1 || frames < 1) throw noisevc::ShapeError("mel shape must be positive");
    auto m = std::make_unique<nvc_mel>();
    m->mel.values = Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
                        data, n_mels, frames)
                        .cast<double>();
    if (!m->mel.values.allFinite()) throw noisevc::DataError("mel values must be finite");
    *out = m.release();
  });
}

nvc_status nvc_mel_shape(const nvc_mel *mel, int *n_mels, int *frames) {
  return guarded([&] {
    require(mel, "mel");
    if (n_mels) *n_mels = mel->mel.n_mels();
    if (frames) *frames = mel->mel.frames();
  });
}

nvc_status nvc_mel_copy_data(const nvc_mel *mel, float *out, size_t cap) {
  return guarded([&] {
    require(mel, "mel");
    require(out, "out");
    const auto n = static_cast<size_t>(mel->mel.values.size());
    if (cap < n) throw noisevc::UsageError("output buffer holds " + std::to_string(cap) +
                                           " floats, need " + std::to_string(n));
    Eigen::Map<Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        out, mel->mel.n_mels(), mel->mel.frames()) = mel->mel.values.cast<float>();
  });
}

nvc_status nvc_mel_save(const nvc_mel *mel, const char *path) {
  return guarded([&] {
    require(mel, "mel");
    require(path, "path");
    noisevc::write_mel(path, mel->mel);
  });
}

void nvc_mel_free(nvc_mel *mel) { delete mel; }

nvc_status nvc_convert(nvc_model *model, const nvc_mel *source, const nvc_mel *const *targets,
                       size_t n_targets, nvc_mel **out) {
  return guarded([&] {
    require(model, "model");
    require(source, "source");
    require(targets, "targets");
    require(out, "out");
    noisevc::ConversionRequest req;
    req.source = source->mel;
    for (size_t i = 0; i < n_targets; ++i) {
      require(targets[i], "target");
      req.targets.push_back(targets[i]->mel);
    }
    auto m = std::make_unique<nvc_mel>();
    {
      std::lock_guard<std::mutex> lock(model->mu);
      m->mel = noisevc::convert(*model->net, req);
    }
    *out = m.release();
  });
}

nvc_status nvc_invert_to_wav(const nvc_mel *mel, int n_iters, const char *wav_path) {
  return guarded([&] {
    require(mel, "mel");
    require(wav_path, "wav_path");
    noisevc::write_wav(wav_path, noisevc::invert_mel(mel->mel, n_iters));
  });
}

}  // extern "C"
