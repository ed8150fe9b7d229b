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

// nvc: command-line front end over the noisevc C API.
//
//   nvc features --in <dir> --out <dir> [--unseen 20] [--seed 0]
//   nvc synth    --out <dir> [--speakers 10] [--utts 40] [--seed 0]
//   nvc train    --manifest <file> --out <dir> [--config <file>] [--resume <ckpt>]
//   nvc eval     --ckpt <file> --manifest <file> --report <file> [--map <file>]
//   nvc convert  --ckpt <file> --source <wav|mel> --target <wav|mel> --out <mel>
//                [--wav <path>] [--gl-iters 60]
//
// Every subcommand also takes --config <file> and repeated --set key=value.
// Exit status: 0 ok, 1 usage, 2 config, 3 data, 4 numerical.

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "noisevc/noisevc.h"

namespace {

struct Failure {
  nvc_status status;
};

void check(nvc_status s) {
  if (s != NVC_OK) throw Failure{s};
}

struct ConfigArgs {
  std::string config_path;
  std::vector<std::string> sets;

  void add_to(CLI::App *app) {
    app->add_option("--config", config_path, "Config file (key = value, [section] headers)")
        ->check(CLI::ExistingFile);
    app->add_option("--set", sets, "Override a config key, e.g. --set augment.alpha=0.7")
        ->type_name("KEY=VALUE");
  }

  // Flag values land after file settings and --set overrides.
  nvc_config *load(const std::vector<std::string> &extra = {}) const {
    std::vector<std::string> all = sets;
    all.insert(all.end(), extra.begin(), extra.end());
    std::vector<const char *> ptrs;
    for (const auto &s : all) ptrs.push_back(s.c_str());
    nvc_config *cfg = nullptr;
    check(nvc_config_load(config_path.empty() ? nullptr : config_path.c_str(), ptrs.data(),
                          ptrs.size(), &cfg));
    return cfg;
  }
};

struct ConfigHandle {
  nvc_config *p;
  ~ConfigHandle() { nvc_config_free(p); }
};

template <class T>
void maybe(std::vector<std::string> &out, const std::string &key, const std::optional<T> &v) {
  if (v) out.push_back(key + "=" + std::to_string(*v));
}

void print_progress(const nvc_step_metrics *m, void *user) {
  const int every = *static_cast<int *>(user);
  if (every > 0 && m->step % every == 0)
    std::fprintf(stderr, "step %d  rec %.4f  codebook %.4f  commit %.4f  cpc %.4f  total %.4f\n",
                 m->step, m->reconstruction, m->codebook, m->commitment, m->cpc, m->total);
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"nvc: zero-shot voice conversion toolkit (features, synth, train, eval, convert)"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(nvc_version()));

  // features
  auto *features = app.add_subcommand("features", "Extract log-mel features and a speaker-split manifest");
  ConfigArgs features_cfg;
  std::string f_in, f_out;
  std::optional<long long> f_unseen, f_seed;
  features->add_option("--in", f_in, "Input directory: <in>/<speaker>/**/*.wav")->required()
      ->check(CLI::ExistingDirectory);
  features->add_option("--out", f_out, "Output directory for <speaker>/<utt>.mel and manifest.jsonl")->required();
  features->add_option("--unseen", f_unseen, "Speakers held out entirely (default 20)");
  features->add_option("--seed", f_seed, "Split seed (default 0)");
  features_cfg.add_to(features);

  // synth
  auto *synth = app.add_subcommand("synth", "Generate the synthetic speaker/content corpus");
  ConfigArgs synth_cfg;
  std::string s_out;
  std::optional<long long> s_speakers, s_utts, s_seed;
  synth->add_option("--out", s_out, "Output corpus directory")->required();
  synth->add_option("--speakers", s_speakers, "Number of speakers (default 10)");
  synth->add_option("--utts", s_utts, "Utterances per speaker (default 40)");
  synth->add_option("--seed", s_seed, "Corpus seed (default 0)");
  synth_cfg.add_to(synth);

  // train
  auto *train = app.add_subcommand("train", "Train a model on a manifest's train split");
  ConfigArgs train_cfg;
  std::string t_manifest, t_out, t_resume;
  int t_log_every = 100;
  train->add_option("--manifest", t_manifest, "Manifest (manifest.jsonl)")->required()
      ->check(CLI::ExistingFile);
  train->add_option("--out", t_out, "Run directory (metrics.jsonl, ckpt-<step>/)")->required();
  train->add_option("--resume", t_resume, "Resume from a checkpoint.json")->check(CLI::ExistingFile);
  train->add_option("--log-every", t_log_every, "Print losses every N steps (0 = quiet)");
  train_cfg.add_to(train);

  // eval
  auto *eval = app.add_subcommand("eval", "Run disentanglement probes on a checkpoint");
  ConfigArgs eval_cfg;
  std::string e_ckpt, e_manifest, e_report, e_map;
  eval->add_option("--ckpt", e_ckpt, "checkpoint.json")->required()->check(CLI::ExistingFile);
  eval->add_option("--manifest", e_manifest, "Manifest (manifest.jsonl)")->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--report", e_report, "Report output (key = value lines)")->required();
  eval->add_option("--map", e_map, "Also write the speaker embedding map (JSON lines)");
  eval_cfg.add_to(eval);

  // convert
  auto *conv = app.add_subcommand("convert", "Convert a source utterance to a target speaker");
  ConfigArgs conv_cfg;
  std::string c_ckpt, c_source, c_out, c_wav;
  std::vector<std::string> c_targets;
  std::optional<int> c_gl;
  conv->add_option("--ckpt", c_ckpt, "checkpoint.json")->required()->check(CLI::ExistingFile);
  conv->add_option("--source", c_source, "Source utterance (.wav or .mel)")->required()
      ->check(CLI::ExistingFile);
  conv->add_option("--target", c_targets,
                   "Target-speaker utterance (.wav or .mel); repeat to average embeddings")
      ->required()->check(CLI::ExistingFile);
  conv->add_option("--out", c_out, "Converted mel output (.mel)")->required();
  conv->add_option("--wav", c_wav, "Also write a waveform via phase reconstruction");
  conv->add_option("--gl-iters", c_gl, "Phase reconstruction iterations (default 60)");
  conv_cfg.add_to(conv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return NVC_ERR_USAGE;
  }

  try {
    if (*features) {
      std::vector<std::string> extra;
      maybe(extra, "features.unseen", f_unseen);
      maybe(extra, "features.seed", f_seed);
      ConfigHandle cfg{features_cfg.load(extra)};
      size_t n = 0, skipped = 0;
      check(nvc_features(f_in.c_str(), f_out.c_str(), cfg.p, &n, &skipped));
      if (skipped > 0) std::fprintf(stderr, "skipped %zu clip(s):\n%s", skipped, nvc_last_error());
      std::printf("%zu utterances -> %s/manifest.jsonl\n", n, f_out.c_str());
    } else if (*synth) {
      std::vector<std::string> extra;
      maybe(extra, "synth.speakers", s_speakers);
      maybe(extra, "synth.utts", s_utts);
      maybe(extra, "synth.seed", s_seed);
      ConfigHandle cfg{synth_cfg.load(extra)};
      size_t n = 0;
      check(nvc_synth(s_out.c_str(), cfg.p, &n));
      std::printf("%zu utterances -> %s/manifest.jsonl\n", n, s_out.c_str());
    } else if (*train) {
      ConfigHandle cfg{train_cfg.load()};
      char ckpt[4096];
      check(nvc_train(t_manifest.c_str(), cfg.p, t_out.c_str(),
                      t_resume.empty() ? nullptr : t_resume.c_str(), print_progress, &t_log_every,
                      ckpt, sizeof ckpt));
      std::printf("%s\n", ckpt);
    } else if (*eval) {
      ConfigHandle cfg{eval_cfg.load()};
      nvc_report r{};
      check(nvc_eval(e_ckpt.c_str(), e_manifest.c_str(), cfg.p, e_report.c_str(),
                     e_map.empty() ? nullptr : e_map.c_str(), &r));
      std::printf("content probe (speaker acc on Q): %.2f%%\n", r.content_probe_speaker_acc);
      std::printf("speaker probe (acc on S):         %.2f%%\n", r.speaker_probe_acc);
      std::printf("L1 reconstruction:                %.4f\n", r.l1_reconstruction);
      if (r.has_silhouette) std::printf("silhouette:                       %.3f\n", r.silhouette);
    } else if (*conv) {
      std::vector<std::string> extra;
      maybe(extra, "convert.gl_iters", c_gl);
      ConfigHandle cfg{conv_cfg.load(extra)};
      nvc_model *model = nullptr;
      check(nvc_model_load(c_ckpt.c_str(), &model));
      std::vector<nvc_mel *> mels;
      nvc_mel *out = nullptr;
      auto cleanup = [&] {
        for (nvc_mel *m : mels) nvc_mel_free(m);
        nvc_mel_free(out);
        nvc_model_free(model);
      };
      try {
        nvc_mel *src = nullptr;
        check(nvc_mel_load(c_source.c_str(), &src));
        mels.push_back(src);
        for (const std::string &t : c_targets) {
          nvc_mel *m = nullptr;
          check(nvc_mel_load(t.c_str(), &m));
          mels.push_back(m);
        }
        check(nvc_convert(model, src, mels.data() + 1, mels.size() - 1, &out));
        check(nvc_mel_save(out, c_out.c_str()));
        if (!c_wav.empty()) {
          char buf[32];
          check(nvc_config_get(cfg.p, "convert.gl_iters", buf, sizeof buf, nullptr));
          check(nvc_invert_to_wav(out, std::stoi(buf), c_wav.c_str()));
        }
      } catch (...) {
        cleanup();
        throw;
      }
      cleanup();
    }
  } catch (const Failure &f) {
    std::fprintf(stderr, "nvc: %s\n", nvc_last_error());
    return static_cast<int>(f.status);
  }
  return 0;
}
