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

#ifndef NOISEVC_MODEL_HPP_
#define NOISEVC_MODEL_HPP_

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "noisevc/layers.hpp"
#include "noisevc/mel.hpp"
#include "noisevc/nn_blocks.hpp"

namespace noisevc {

struct ModelConfig {
  int n_mels = 80;
  int kernel = 5;
  int content_layers = 5;
  int content_channels = 128;
  int speaker_layers = 3;
  int speaker_channels = 64;
  int decoder_layers = 5;
  int decoder_channels = 128;
  int decoder_lstm = 128;
  int codebook_size = 256;  // V
  int code_dim = 64;        // D; also the speaker embedding width
  int context_dim = 64;
  int cpc_steps = 12;       // K
  int negatives = 8;
  bool negatives_same_utterance = false;
  bool use_cpc = true;
  Real leaky_slope = 0.2;
  std::uint64_t seed = 0;   // parameter initialization

  static ModelConfig desk();
  static ModelConfig paper();
  void validate() const;
};

struct SpeakerEmbedding {
  RowVector vector;
  Matrix replicated;  // target_len x D, every row equal to `vector`
};

// Everything one training pass produces; rows are batch-major.
struct ForwardResult {
  SeqBatch x_hat;
  SeqBatch encoded;          // E, after instance normalization
  ContentEmbedding content;  // Q
  Matrix speaker;            // batch x D
  SeqBatch context;          // CPC context (empty when CPC is off)
};

class NoiseVC {
 public:
  explicit NoiseVC(const ModelConfig &cfg);

  const ModelConfig &config() const { return cfg_; }

  // ---- inference (single utterance, batch-norm running statistics)
  std::pair<Matrix, ContentEmbedding> encode_content(const MelSpectrogram &x);
  SpeakerEmbedding encode_speaker(const MelSpectrogram &x, int target_len);
  MelSpectrogram decode(const ContentEmbedding &content, const SpeakerEmbedding &speaker);

  // ---- training
  // Full pass. `x_content` feeds the content encoder, `x_speaker` the
  // speaker encoder; both are B x T x n_mels batches.
  ForwardResult forward(const SeqBatch &x_content, const SeqBatch &x_speaker, bool training,
                        Rng *cpc_rng = nullptr, Real *cpc_loss = nullptr);

  // Loss for reconstructing `target`, with gradients accumulated into every
  // parameter according to `terms`. Call zero_grad() first.
  LossBundle loss_and_backward(const SeqBatch &x_content, const SeqBatch &x_speaker,
                               const SeqBatch &target, Real beta, Real cpc_weight,
                               Rng &cpc_rng, const LossTerms &terms = {});

  // Gradients of the last loss_and_backward() at the quantizer: w.r.t. the
  // decoder-facing view of Q (decoder plus CPC), and w.r.t. E from those
  // same downstream terms (the commitment term excluded).
  struct QuantizerGrads {
    Matrix content_view;
    Matrix encoded;
  };
  const QuantizerGrads &last_quantizer_grads() const { return tap_; }

  std::vector<Param *> parameters();
  std::vector<Buffer> buffers();
  void zero_grad();
  Codebook &codebook() { return codebook_; }
  CpcModule &cpc() { return cpc_; }

 private:
  struct ConvStack {
    std::vector<Conv1d> convs;
    std::vector<LeakyRelu> acts;  // after every conv except the last
    SeqBatch forward(const SeqBatch &x);
    Matrix backward(Matrix g);
  };
  struct DecoderBlock {
    Conv1d conv;
    BatchNorm1d bn;
    Relu act;
    bool residual = false;
  };

  SeqBatch decoder_forward(const SeqBatch &z, bool training);
  Matrix decoder_backward(const Matrix &g);
  Matrix speaker_pool(const SeqBatch &h) const;

  ModelConfig cfg_;
  ConvStack content_stack_;
  InstanceNorm in_;
  Codebook codebook_;
  CpcModule cpc_;
  ConvStack speaker_stack_;
  std::vector<DecoderBlock> decoder_;
  Lstm decoder_lstm_;
  Linear decoder_out_;

  int speaker_len_ = 0;  // frames seen by the speaker stack in forward()
  QuantizerGrads tap_;
};

// Parameter groups used for checkpoints and gradient-reach checks.
std::map<std::string, std::vector<Param *>> parameter_groups(NoiseVC &net);

}  // namespace noisevc

#endif  // NOISEVC_MODEL_HPP_
