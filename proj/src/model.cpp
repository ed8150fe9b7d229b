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

#include "noisevc/model.hpp"

#include "noisevc/error.hpp"

namespace noisevc {

ModelConfig ModelConfig::desk() { return ModelConfig{}; }

ModelConfig ModelConfig::paper() {
  ModelConfig c;
  c.content_channels = 512;
  c.speaker_channels = 256;
  c.decoder_channels = 512;
  c.decoder_lstm = 512;
  c.codebook_size = 2048;
  c.code_dim = 512;
  c.context_dim = 256;
  c.cpc_steps = 34;
  c.negatives = 20;
  return c;
}

void ModelConfig::validate() const {
  auto fail = [](const std::string &m) { throw ConfigError("model: " + m); };
  if (n_mels < 1) fail("n_mels must be >= 1");
  if (kernel < 1 || kernel % 2 == 0) fail("kernel must be odd and >= 1");
  if (content_layers < 1 || speaker_layers < 1 || decoder_layers < 1) fail("layer counts must be >= 1");
  if (content_channels < 1 || speaker_channels < 1 || decoder_channels < 1 || decoder_lstm < 1)
    fail("channel widths must be >= 1");
  if (codebook_size < 1 || code_dim < 1 || context_dim < 1) fail("V, D and context dim must be >= 1");
  if (cpc_steps < 1) fail("cpc_steps must be >= 1");
  if (negatives < 1) fail("negatives must be >= 1");
  if (leaky_slope < 0) fail("leaky_slope must be >= 0");
}

// ------------------------------------------------------------------ stacks

SeqBatch NoiseVC::ConvStack::forward(const SeqBatch &x) {
  SeqBatch h = x;
  for (std::size_t i = 0; i < convs.size(); ++i) {
    h = convs[i].forward(h);
    if (i < acts.size()) h = acts[i].forward(h);
  }
  return h;
}

Matrix NoiseVC::ConvStack::backward(Matrix g) {
  for (std::size_t i = convs.size(); i-- > 0;) {
    if (i < acts.size()) g = acts[i].backward(g);
    g = convs[i].backward(g);
  }
  return g;
}

NoiseVC::NoiseVC(const ModelConfig &cfg) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(derive_seed(cfg.seed, 0x6d6f64656cULL));
  auto build_stack = [&](ConvStack &s, const std::string &name, int in, int hidden, int out,
                         int layers) {
    for (int i = 0; i < layers; ++i) {
      const int ci = i == 0 ? in : hidden;
      const int co = i == layers - 1 ? out : hidden;
      s.convs.emplace_back(name + ".conv" + std::to_string(i), ci, co, cfg.kernel, rng);
      if (i < layers - 1) s.acts.emplace_back(cfg.leaky_slope);
    }
  };
  build_stack(content_stack_, "content", cfg.n_mels, cfg.content_channels, cfg.code_dim,
              cfg.content_layers);
  codebook_ = Codebook::random(cfg.codebook_size, cfg.code_dim, rng);
  cpc_ = CpcModule("cpc", cfg.code_dim, cfg.context_dim,
                   CpcOptions{cfg.cpc_steps, cfg.negatives, cfg.negatives_same_utterance}, rng);
  build_stack(speaker_stack_, "speaker", cfg.n_mels, cfg.speaker_channels, cfg.code_dim,
              cfg.speaker_layers);
  int width = 2 * cfg.code_dim;
  for (int i = 0; i < cfg.decoder_layers; ++i) {
    DecoderBlock blk;
    const std::string name = "decoder.block" + std::to_string(i);
    blk.conv = Conv1d(name + ".conv", width, cfg.decoder_channels, cfg.kernel, rng);
    blk.bn = BatchNorm1d(name + ".bn", cfg.decoder_channels);
    blk.residual = width == cfg.decoder_channels;
    decoder_.push_back(std::move(blk));
    width = cfg.decoder_channels;
  }
  decoder_lstm_ = Lstm("decoder.lstm", width, cfg.decoder_lstm, rng);
  decoder_out_ = Linear("decoder.out", cfg.decoder_lstm, cfg.n_mels, rng);
}

std::vector<Param *> NoiseVC::parameters() {
  std::vector<Param *> out;
  for (auto &c : content_stack_.convs) c.collect(out);
  out.push_back(&codebook_.codes);
  cpc_.collect(out);
  for (auto &c : speaker_stack_.convs) c.collect(out);
  for (auto &b : decoder_) {
    b.conv.collect(out);
    b.bn.collect(out);
  }
  decoder_lstm_.collect(out);
  decoder_out_.collect(out);
  return out;
}

std::vector<Buffer> NoiseVC::buffers() {
  std::vector<Buffer> out;
  for (auto &b : decoder_) b.bn.collect_buffers(out);
  return out;
}

void NoiseVC::zero_grad() {
  for (Param *p : parameters()) p->zero_grad();
}

std::map<std::string, std::vector<Param *>> parameter_groups(NoiseVC &net) {
  std::map<std::string, std::vector<Param *>> groups;
  for (Param *p : net.parameters()) {
    std::string g;
    if (p->name == "codebook") g = "codebook";
    else if (p->name.rfind("cpc.pred", 0) == 0) g = "cpc_predictors";
    else if (p->name.rfind("cpc.", 0) == 0) g = "cpc_context";
    else if (p->name.rfind("content.", 0) == 0) g = "content_encoder";
    else if (p->name.rfind("speaker.", 0) == 0) g = "speaker_encoder";
    else g = "decoder";
    groups[g].push_back(p);
  }
  return groups;
}

// ------------------------------------------------------------------ decoder

SeqBatch NoiseVC::decoder_forward(const SeqBatch &z, bool training) {
  SeqBatch h = z;
  for (auto &blk : decoder_) {
    SeqBatch y = blk.act.forward(blk.bn.forward(blk.conv.forward(h), training));
    if (blk.residual) y.data += h.data;
    h = std::move(y);
  }
  h = decoder_lstm_.forward(h);
  return SeqBatch(decoder_out_.forward(h.data), h.batch, h.length);
}

Matrix NoiseVC::decoder_backward(const Matrix &g_out) {
  Matrix g = decoder_lstm_.backward(decoder_out_.backward(g_out));
  for (std::size_t i = decoder_.size(); i-- > 0;) {
    auto &blk = decoder_[i];
    Matrix gi = blk.conv.backward(blk.bn.backward(blk.act.backward(g)));
    if (blk.residual) gi += g;
    g = std::move(gi);
  }
  return g;
}

Matrix NoiseVC::speaker_pool(const SeqBatch &h) const {
  Matrix s(h.batch, h.channels());
  for (int b = 0; b < h.batch; ++b) s.row(b) = h.seq(b).colwise().mean();
  return s;
}

// ------------------------------------------------------------------ forward

ForwardResult NoiseVC::forward(const SeqBatch &x_content, const SeqBatch &x_speaker,
                               bool training, Rng *cpc_rng, Real *cpc_loss) {
  if (x_content.channels() != cfg_.n_mels || x_speaker.channels() != cfg_.n_mels)
    throw ShapeError("forward: inputs must have " + std::to_string(cfg_.n_mels) + " mel bins");
  if (x_content.batch != x_speaker.batch)
    throw ShapeError("forward: content and speaker batches differ in size");
  if (x_content.length < 2) throw DataError("forward: content input needs >= 2 frames");

  ForwardResult r;
  r.encoded = in_.forward(content_stack_.forward(x_content));
  r.content = quantize(r.encoded.data, codebook_);

  const SeqBatch hs = speaker_stack_.forward(x_speaker);
  speaker_len_ = hs.length;
  r.speaker = speaker_pool(hs);

  const int B = x_content.batch, T = x_content.length, D = cfg_.code_dim;
  Matrix z(static_cast<Eigen::Index>(B) * T, 2 * D);
  z.leftCols(D) = r.content.straight_through;
  for (int b = 0; b < B; ++b)
    z.block(static_cast<Eigen::Index>(b) * T, D, T, D).rowwise() = r.speaker.row(b);
  r.x_hat = decoder_forward(SeqBatch(std::move(z), B, T), training);

  if (cfg_.use_cpc && cpc_rng) {
    const Real l = cpc_.forward(SeqBatch(r.content.straight_through, B, T), *cpc_rng);
    if (cpc_loss) *cpc_loss = l;
    r.context = cpc_.context();
  }
  return r;
}

LossBundle NoiseVC::loss_and_backward(const SeqBatch &x_content, const SeqBatch &x_speaker,
                                      const SeqBatch &target, Real beta, Real cpc_weight,
                                      Rng &cpc_rng, const LossTerms &terms) {
  if (target.data.rows() != x_content.data.rows() || target.channels() != cfg_.n_mels)
    throw ShapeError("loss: target shape differs from content input");
  Real cpc_raw = 0.0;
  ForwardResult r = forward(x_content, x_speaker, true, &cpc_rng, &cpc_raw);

  LossBundle loss = vq_loss(target.data, r.x_hat.data, r.encoded.data, r.content, beta);
  loss.cpc = cfg_.use_cpc ? cpc_weight * cpc_raw : 0.0;
  loss.finalize();

  const VqGradients vg =
      vq_loss_backward(target.data, r.x_hat.data, r.encoded.data, r.content, codebook_, beta, terms);
  const Matrix dz = decoder_backward(vg.x_hat);
  const int D = cfg_.code_dim;
  Matrix dq = dz.leftCols(D);
  if (cfg_.use_cpc && terms.cpc) dq += cpc_.backward(cpc_weight);

  tap_.content_view = dq;
  tap_.encoded = straight_through_backward(dq);
  const Matrix de = tap_.encoded + vg.encoded;
  codebook_.codes.grad += vg.codes;
  content_stack_.backward(in_.backward(de));

  const int B = x_speaker.batch, T = x_content.length;
  Matrix dhs(static_cast<Eigen::Index>(B) * speaker_len_, D);
  for (int b = 0; b < B; ++b) {
    const RowVector ds = dz.block(static_cast<Eigen::Index>(b) * T, D, T, D).colwise().sum();
    dhs.middleRows(static_cast<Eigen::Index>(b) * speaker_len_, speaker_len_).rowwise() =
        ds / static_cast<Real>(speaker_len_);
  }
  speaker_stack_.backward(dhs);
  return loss;
}

// ------------------------------------------------------------------ inference

std::pair<Matrix, ContentEmbedding> NoiseVC::encode_content(const MelSpectrogram &x) {
  if (x.n_mels() != cfg_.n_mels)
    throw ShapeError("encode_content: expected " + std::to_string(cfg_.n_mels) + " mel rows");
  if (x.frames() < 2) throw DataError("encode_content: need at least 2 frames");
  SeqBatch in(x.time_major(), 1, x.frames());
  SeqBatch e = in_.forward(content_stack_.forward(in));
  ContentEmbedding q = quantize(e.data, codebook_);
  return {std::move(e.data), std::move(q)};
}

SpeakerEmbedding NoiseVC::encode_speaker(const MelSpectrogram &x, int target_len) {
  if (x.n_mels() != cfg_.n_mels)
    throw ShapeError("encode_speaker: expected " + std::to_string(cfg_.n_mels) + " mel rows");
  if (target_len < 1) throw ShapeError("encode_speaker: target length must be >= 1");
  SeqBatch h = speaker_stack_.forward(SeqBatch(x.time_major(), 1, x.frames()));
  SpeakerEmbedding s;
  s.vector = h.data.colwise().mean();
  s.replicated = s.vector.replicate(target_len, 1);
  return s;
}

MelSpectrogram NoiseVC::decode(const ContentEmbedding &content, const SpeakerEmbedding &speaker) {
  const Eigen::Index T = content.straight_through.rows();
  if (speaker.replicated.rows() != T)
    throw ShapeError("decode: content has " + std::to_string(T) + " frames, speaker view has " +
                     std::to_string(speaker.replicated.rows()));
  const int D = cfg_.code_dim;
  if (content.straight_through.cols() != D || speaker.replicated.cols() != D)
    throw ShapeError("decode: embedding width must be " + std::to_string(D));
  Matrix z(T, 2 * D);
  z.leftCols(D) = content.straight_through;
  z.rightCols(D) = speaker.replicated;
  SeqBatch out = decoder_forward(SeqBatch(std::move(z), 1, static_cast<int>(T)), false);
  MelConfig mc;
  mc.n_mels = cfg_.n_mels;
  return MelSpectrogram::from_time_major(out.data, mc);
}

}  // namespace noisevc
