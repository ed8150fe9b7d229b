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

#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "noisevc/augment.hpp"
#include "noisevc/error.hpp"
#include "noisevc/evalsuite.hpp"
#include "noisevc/synth.hpp"
#include "noisevc/trainer.hpp"

using namespace noisevc;

namespace {

ModelConfig tiny() {
  ModelConfig c;
  c.n_mels = 6;
  c.kernel = 3;
  c.content_layers = 2;
  c.content_channels = 5;
  c.speaker_layers = 2;
  c.speaker_channels = 4;
  c.decoder_layers = 2;
  c.decoder_channels = 5;
  c.decoder_lstm = 4;
  c.codebook_size = 7;
  c.code_dim = 3;
  c.context_dim = 4;
  c.cpc_steps = 2;
  c.negatives = 3;
  return c;
}

}  // namespace

TEST_CASE("noisy version is chosen with probability alpha") {
  for (double alpha : {0.0, 0.3, 0.5, 1.0}) {
    AugmentPolicy p;
    p.alpha = alpha;
    Rng rng(1);
    int noisy = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const StepPlan s = plan_step(p, rng);
      CHECK(s.speaker_input == s.target);
      if (s.speaker_input == MelVersion::kAugmented) ++noisy;
    }
    const double freq = static_cast<double>(noisy) / n;
    // Four binomial standard errors.
    CHECK(std::abs(freq - alpha) <= 4 * std::sqrt(alpha * (1 - alpha) / n) + 1e-12);
  }
  CHECK(StepPlan::content_input() == MelVersion::kOriginal);
}

TEST_CASE("alpha outside [0, 1] is rejected") {
  AugmentPolicy p;
  p.alpha = 1.5;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.alpha = -0.1;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.alpha = 0.7;
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("additive noise has the requested spread") {
  Rng rng(2);
  const Matrix x = Matrix::Zero(200, 80);
  const Matrix y = add_noise(x, 0.1, rng);
  const double mean = y.mean();
  const double sd = std::sqrt((y.array() - mean).square().mean());
  CHECK(std::abs(mean) < 0.002);
  CHECK(std::abs(sd - 0.1) < 0.002);
  CHECK(add_noise(x, 0.0, rng) == x);
}

TEST_CASE("train_step feeds the original to the content path and the plan's version elsewhere") {
  TrainConfig cfg;
  cfg.model = tiny();
  cfg.crop_frames = 8;
  cfg.policy.alpha = 1.0;
  Rng data(3);
  std::vector<TrainExample> batch(2);
  for (auto &ex : batch) {
    ex.original = normal_matrix(8, 6, 1.0, data);
    ex.augmented = ex.original.array() + 5.0;
  }
  Trainer t(cfg);
  Rng r1(4);
  const LossBundle got = t.train_step(batch, r1);

  // Same step done by hand with content = original, speaker = target = augmented.
  NoiseVC ref(cfg.model);
  Matrix xc(16, 6), xa(16, 6);
  xc << batch[0].original, batch[1].original;
  xa << batch[0].augmented, batch[1].augmented;
  Rng r2(4);
  for (int i = 0; i < 2; ++i) plan_step(cfg.policy, r2);
  ref.zero_grad();
  const LossBundle want = ref.loss_and_backward(SeqBatch(xc, 2, 8), SeqBatch(xa, 2, 8),
                                                SeqBatch(xa, 2, 8), cfg.beta, cfg.cpc_weight, r2);
  CHECK(got.total == want.total);
  CHECK(got.reconstruction == want.reconstruction);

  // With alpha = 0 the augmented version is never read.
  cfg.policy.alpha = 0.0;
  Trainer a(cfg), b(cfg);
  auto garbage = batch;
  for (auto &ex : garbage) ex.augmented.setConstant(1e6);
  Rng ra(5), rb(5);
  CHECK(a.train_step(batch, ra).total == b.train_step(garbage, rb).total);
}

TEST_CASE("default sigma perturbs the pitch band but keeps content readable") {
  const SyntheticCorpus corpus(SyntheticSpec{});
  const SyntheticSpec &spec = corpus.spec();
  const AugmentPolicy policy;
  Rng rng(12);
  Matrix train_x(0, spec.n_mels), clean_x(0, spec.n_mels), noisy_x(0, spec.n_mels);
  std::vector<int> train_y, test_y;
  long frames = 0, moved = 0;
  auto append = [](Matrix &m, const Matrix &rows) {
    m.conservativeResize(m.rows() + rows.rows(), Eigen::NoChange);
    m.bottomRows(rows.rows()) = rows;
  };
  for (int spk = 0; spk < spec.n_speakers; ++spk) {
    for (int utt = 0; utt < 6; ++utt) {
      const SyntheticSample s = corpus.utterance(spk, utt);
      if (utt < 4) {
        append(train_x, s.mel.time_major());
        train_y.insert(train_y.end(), s.content_labels.begin(), s.content_labels.end());
        continue;
      }
      const MelSpectrogram noisy = add_noise(s.mel, policy.sigma, rng);
      append(clean_x, s.mel.time_major());
      append(noisy_x, noisy.time_major());
      test_y.insert(test_y.end(), s.content_labels.begin(), s.content_labels.end());
      const int band = spec.contour_hi - spec.contour_lo;
      for (int t = 0; t < s.mel.frames(); ++t) {
        Eigen::Index a = 0, b = 0;
        s.mel.values.col(t).segment(spec.contour_lo, band).maxCoeff(&a);
        noisy.values.col(t).segment(spec.contour_lo, band).maxCoeff(&b);
        moved += a != b;
        ++frames;
      }
    }
  }
  ProbeConfig pc;
  pc.kind = ProbeKind::kLinear1;
  pc.epochs = 5;
  pc.batch = 64;
  pc.learning_rate = 1e-2;
  LinearProbe probe(spec.n_mels, spec.n_content_symbols, pc);
  probe.fit(train_x, train_y);
  const double clean = probe.accuracy(clean_x, test_y);
  const double noisy = probe.accuracy(noisy_x, test_y);
  const double moved_pct = 100.0 * static_cast<double>(moved) / static_cast<double>(frames);
  MESSAGE("pitch-band argmax moved on " << moved_pct << "% of frames; content acc clean " << clean
                                        << " noisy " << noisy);
  CHECK(moved_pct > 25.0);
  CHECK(std::abs(clean - noisy) <= 5.0);
}
