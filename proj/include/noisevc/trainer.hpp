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

#ifndef NOISEVC_TRAINER_HPP_
#define NOISEVC_TRAINER_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "noisevc/augment.hpp"
#include "noisevc/manifest.hpp"
#include "noisevc/model.hpp"

namespace noisevc {

struct TrainConfig {
  int batch_size = 8;
  int steps = 5000;
  Real learning_rate = 1e-3;
  int lr_half_life = 2000;  // steps per halving of the learning rate; 0 keeps it constant
  Real beta = 0.25;
  AugmentPolicy policy;
  std::string preset = "desk";
  std::uint64_t seed = 0;
  int checkpoint_every = 1000;
  int crop_frames = 128;
  Real cpc_weight = 1.0;
  LossTerms terms;
  ModelConfig model;

  void validate() const;
};

// One training example: the same crop in original and noise-augmented form,
// both time-major (T x n_mels).
struct TrainExample {
  Matrix original;
  Matrix augmented;
  int speaker_id = 0;
};

// Learning rate for the update that follows `completed_steps` updates.
Real learning_rate_at(const TrainConfig &cfg, int completed_steps);

class Adam {
 public:
  explicit Adam(Real lr, Real beta1 = 0.9, Real beta2 = 0.999, Real eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}
  void step(const std::vector<Param *> &params);
  long long steps_taken() const { return t_; }
  void set_learning_rate(Real lr) { lr_ = lr; }

  // Moment estimates keyed by parameter name, for checkpointing.
  std::map<std::string, Matrix> &first_moments() { return m_; }
  std::map<std::string, Matrix> &second_moments() { return v_; }
  const std::map<std::string, Matrix> &first_moments() const { return m_; }
  const std::map<std::string, Matrix> &second_moments() const { return v_; }
  void set_steps_taken(long long t) { t_ = t; }

 private:
  Real lr_, beta1_, beta2_, eps_;
  long long t_ = 0;
  std::map<std::string, Matrix> m_, v_;
};

class Trainer {
 public:
  explicit Trainer(const TrainConfig &cfg);

  // One update on total = reconstruction + codebook + commitment + cpc.
  // Each example draws its own augmentation plan from `rng`; the returned
  // bundle is the pre-update loss. Throws NumericalError naming the first
  // non-finite term.
  LossBundle train_step(const std::vector<TrainExample> &batch, Rng &rng);

  NoiseVC &net() { return *net_; }
  const TrainConfig &config() const { return cfg_; }
  int step() const { return step_; }
  void set_total_steps(int steps) { cfg_.steps = steps; }

  // Checkpoint directory layout: checkpoint.json plus tensors/<name>.nvcm
  // (float64) for every parameter, running statistic and optimizer moment.
  std::filesystem::path save_checkpoint(const std::filesystem::path &dir) const;
  static Trainer load_checkpoint(const std::filesystem::path &checkpoint_file);

 private:
  TrainConfig cfg_;
  std::unique_ptr<NoiseVC> net_;
  Adam adam_;
  int step_ = 0;
};

struct MetricsRecord {
  int step = 0;
  LossBundle loss;
};
std::string metrics_line(const MetricsRecord &r);
std::vector<MetricsRecord> read_metrics(const std::filesystem::path &path);

struct FitOptions {
  std::optional<std::filesystem::path> resume_from;  // checkpoint.json
  std::function<void(const MetricsRecord &)> on_step;
};

// Trains on the manifest's train split with seeded crops, augmentation and
// data order; writes <out>/metrics.jsonl and <out>/ckpt-<step>/ every
// `checkpoint_every` steps and at the end. Returns the final checkpoint file.
// Every random draw of step s derives from (seed, s), so a resumed run
// replays the uninterrupted run exactly.
std::filesystem::path fit(const DatasetManifest &manifest, const TrainConfig &cfg,
                          const std::filesystem::path &out_dir, const FitOptions &opts = {});

// Loads a checkpoint for inference.
std::unique_ptr<NoiseVC> load_model(const std::filesystem::path &checkpoint_file);
std::string checkpoint_config_text(const std::filesystem::path &checkpoint_file);

}  // namespace noisevc

#endif  // NOISEVC_TRAINER_HPP_
