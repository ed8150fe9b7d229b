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

#include "noisevc/trainer.hpp"

#include "json.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "noisevc/config.hpp"
#include "noisevc/error.hpp"
#include "noisevc/mel.hpp"
#include "noisevc/tensor_io.hpp"

namespace noisevc {

namespace fs = std::filesystem;
using nlohmann::json;

void TrainConfig::validate() const {
  auto fail = [](const std::string &m) { throw ConfigError("train: " + m); };
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (steps < 0) fail("steps must be >= 0");
  if (!(learning_rate >= 0)) fail("learning_rate must be >= 0");
  if (lr_half_life < 0) fail("lr_half_life must be >= 0");
  if (!(beta >= 0)) fail("beta must be >= 0");
  if (checkpoint_every < 1) fail("checkpoint_every must be >= 1");
  if (crop_frames < 2) fail("crop_frames must be >= 2");
  if (model.use_cpc && crop_frames <= model.cpc_steps) fail("crop_frames must exceed model.cpc_steps");
  policy.validate();
  model.validate();
}

Real learning_rate_at(const TrainConfig &cfg, int completed_steps) {
  if (cfg.lr_half_life == 0) return cfg.learning_rate;
  return cfg.learning_rate * std::exp2(-static_cast<Real>(completed_steps) / cfg.lr_half_life);
}

void Adam::step(const std::vector<Param *> &params) {
  ++t_;
  const Real c1 = 1.0 - std::pow(beta1_, static_cast<Real>(t_));
  const Real c2 = 1.0 - std::pow(beta2_, static_cast<Real>(t_));
  for (Param *p : params) {
    auto [mi, new_m] = m_.try_emplace(p->name, Matrix::Zero(p->value.rows(), p->value.cols()));
    auto [vi, new_v] = v_.try_emplace(p->name, Matrix::Zero(p->value.rows(), p->value.cols()));
    Matrix &m = mi->second;
    Matrix &v = vi->second;
    m = beta1_ * m + (1.0 - beta1_) * p->grad;
    v = beta2_ * v + (1.0 - beta2_) * p->grad.cwiseProduct(p->grad);
    p->value.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + eps_);
  }
}

Trainer::Trainer(const TrainConfig &cfg)
    : cfg_(cfg), net_(std::make_unique<NoiseVC>(cfg.model)), adam_(cfg.learning_rate) {
  cfg_.validate();
}

LossBundle Trainer::train_step(const std::vector<TrainExample> &batch, Rng &rng) {
  if (batch.empty()) throw DataError("train_step: empty batch");
  const int B = static_cast<int>(batch.size());
  const Eigen::Index T = batch.front().original.rows();
  const Eigen::Index C = batch.front().original.cols();
  if (cfg_.model.use_cpc && T <= cfg_.model.cpc_steps)
    throw DataError("train_step: crops must have more than K=" +
                    std::to_string(cfg_.model.cpc_steps) + " frames");
  Matrix xc(B * T, C), xs(B * T, C);
  for (int b = 0; b < B; ++b) {
    const TrainExample &ex = batch[b];
    if (ex.original.rows() != T || ex.augmented.rows() != T || ex.original.cols() != C ||
        ex.augmented.cols() != C)
      throw ShapeError("train_step: all examples must share one shape");
    const StepPlan plan = plan_step(cfg_.policy, rng);
    xc.middleRows(b * T, T) = ex.original;
    xs.middleRows(b * T, T) =
        plan.speaker_input == MelVersion::kAugmented ? ex.augmented : ex.original;
  }
  const SeqBatch content(std::move(xc), B, static_cast<int>(T));
  const SeqBatch speaker(std::move(xs), B, static_cast<int>(T));

  net_->zero_grad();
  // The reconstruction target is whatever the speaker encoder received.
  const LossBundle loss = net_->loss_and_backward(content, speaker, speaker, cfg_.beta,
                                                  cfg_.cpc_weight, rng, cfg_.terms);
  const std::string bad = loss.first_non_finite();
  if (!bad.empty())
    throw NumericalError("training aborted at step " + std::to_string(step_ + 1) +
                         ": non-finite " + bad + " loss");
  adam_.set_learning_rate(learning_rate_at(cfg_, step_));
  adam_.step(net_->parameters());
  ++step_;
  return loss;
}

// ------------------------------------------------------------------ checkpoints

namespace {

std::string tensor_file_name(const std::string &name) {
  std::string s = name;
  for (char &c : s)
    if (c == '/') c = '_';
  return "tensors/" + s + ".nvcm";
}

}  // namespace

fs::path Trainer::save_checkpoint(const fs::path &dir) const {
  RunConfig rc = RunConfig::defaults(cfg_.preset);
  rc.set_train(cfg_);
  json j;
  j["step"] = step_;
  j["adam_steps"] = adam_.steps_taken();
  j["rng"] = {{"train_seed", cfg_.seed}, {"augment_seed", cfg_.policy.seed},
              {"scheme", "per-step streams derived from (seed, step)"}};
  j["config"] = rc.serialize();
  json tensors = json::object();
  auto put = [&](const std::string &name, const Matrix &m) {
    const std::string file = tensor_file_name(name);
    write_tensor(dir / file, m, DType::kFloat64);
    tensors[name] = file;
  };
  for (Param *p : net_->parameters()) put(p->name, p->value);
  for (const Buffer &b : net_->buffers()) put(b.name, *b.value);
  for (const auto &[name, m] : adam_.first_moments()) put("adam.m." + name, m);
  for (const auto &[name, v] : adam_.second_moments()) put("adam.v." + name, v);
  j["tensors"] = tensors;
  const fs::path file = dir / "checkpoint.json";
  write_file_atomic(file, j.dump(2) + "\n");
  return file;
}

namespace {

json read_checkpoint_json(const fs::path &file) {
  try {
    return json::parse(read_text_file(file));
  } catch (const json::exception &e) {
    throw DataError("corrupt checkpoint " + file.string() + ": " + e.what());
  }
}

Matrix load_named(const fs::path &dir, const json &tensors, const std::string &name,
                  Eigen::Index rows, Eigen::Index cols) {
  if (!tensors.contains(name)) throw DataError("checkpoint is missing tensor '" + name + "'");
  Matrix m = read_tensor(dir / tensors.at(name).get<std::string>());
  if (m.rows() != rows || m.cols() != cols)
    throw ShapeError("checkpoint tensor '" + name + "' has the wrong shape");
  return m;
}

void load_weights(NoiseVC &net, const fs::path &dir, const json &tensors) {
  for (Param *p : net.parameters())
    p->value = load_named(dir, tensors, p->name, p->value.rows(), p->value.cols());
  for (const Buffer &b : net.buffers())
    *b.value = load_named(dir, tensors, b.name, b.value->rows(), b.value->cols());
}

}  // namespace

std::string checkpoint_config_text(const fs::path &checkpoint_file) {
  return read_checkpoint_json(checkpoint_file).at("config").get<std::string>();
}

Trainer Trainer::load_checkpoint(const fs::path &checkpoint_file) {
  const json j = read_checkpoint_json(checkpoint_file);
  const RunConfig rc = RunConfig::parse(j.at("config").get<std::string>());
  Trainer t(rc.train());
  const fs::path dir = checkpoint_file.parent_path();
  const json &tensors = j.at("tensors");
  load_weights(*t.net_, dir, tensors);
  for (Param *p : t.net_->parameters()) {
    const std::string m = "adam.m." + p->name, v = "adam.v." + p->name;
    if (tensors.contains(m)) {
      t.adam_.first_moments()[p->name] = load_named(dir, tensors, m, p->value.rows(), p->value.cols());
      t.adam_.second_moments()[p->name] = load_named(dir, tensors, v, p->value.rows(), p->value.cols());
    }
  }
  t.adam_.set_steps_taken(j.at("adam_steps").get<long long>());
  t.step_ = j.at("step").get<int>();
  return t;
}

std::unique_ptr<NoiseVC> load_model(const fs::path &checkpoint_file) {
  if (!fs::exists(checkpoint_file))
    throw DataError("checkpoint not found: " + checkpoint_file.string());
  const json j = read_checkpoint_json(checkpoint_file);
  const RunConfig rc = RunConfig::parse(j.at("config").get<std::string>());
  auto net = std::make_unique<NoiseVC>(rc.model());
  load_weights(*net, checkpoint_file.parent_path(), j.at("tensors"));
  return net;
}

// ------------------------------------------------------------------ metrics

std::string metrics_line(const MetricsRecord &r) {
  json j;
  j["step"] = r.step;
  j["rec"] = r.loss.reconstruction;
  j["codebook"] = r.loss.codebook_term;
  j["commit"] = r.loss.commitment_term;
  j["cpc"] = r.loss.cpc;
  j["total"] = r.loss.total;
  return j.dump();
}

std::vector<MetricsRecord> read_metrics(const fs::path &path) {
  std::istringstream in(read_text_file(path));
  std::vector<MetricsRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    MetricsRecord r;
    r.step = j.at("step").get<int>();
    r.loss.reconstruction = j.at("rec").get<double>();
    r.loss.codebook_term = j.at("codebook").get<double>();
    r.loss.commitment_term = j.at("commit").get<double>();
    r.loss.cpc = j.at("cpc").get<double>();
    r.loss.total = j.at("total").get<double>();
    out.push_back(r);
  }
  return out;
}

// ------------------------------------------------------------------ fit

namespace {

struct Utterance {
  Matrix frames;  // T x n_mels
  int speaker = 0;
};

constexpr std::uint64_t kOrderStream = 0x6f72646572ULL;
constexpr std::uint64_t kStepStream = 0x73746570ULL;

}  // namespace

fs::path fit(const DatasetManifest &manifest, const TrainConfig &cfg_in, const fs::path &out_dir,
             const FitOptions &opts) {
  Trainer trainer = opts.resume_from ? Trainer::load_checkpoint(*opts.resume_from) : Trainer(cfg_in);
  // A resumed run keeps the stored configuration except for the step budget.
  trainer.set_total_steps(cfg_in.steps);
  const TrainConfig &cfg = trainer.config();

  // Load everything up front so missing files fail before any training.
  std::map<std::string, int> speaker_index;
  for (const auto &e : manifest.entries) speaker_index.emplace(e.speaker_id, 0);
  int next = 0;
  for (auto &kv : speaker_index) kv.second = next++;
  std::vector<Utterance> data;
  for (const ManifestEntry *e : manifest.select(Split::kTrain)) {
    const fs::path p = manifest.mel_file(*e);
    if (!fs::exists(p)) throw DataError("missing mel file: " + p.string());
    MelSpectrogram mel = read_mel(p);
    if (mel.n_mels() != cfg.model.n_mels)
      throw DataError("mel file " + p.string() + " has " + std::to_string(mel.n_mels()) +
                      " bins; model expects " + std::to_string(cfg.model.n_mels));
    if (mel.frames() < cfg.crop_frames) continue;
    data.push_back({mel.time_major(), speaker_index[e->speaker_id]});
  }
  if (data.empty() && cfg.steps > trainer.step())
    throw DataError("no training utterances with at least " + std::to_string(cfg.crop_frames) +
                    " frames");

  fs::create_directories(out_dir);
  {
    RunConfig rc = RunConfig::defaults(cfg.preset);
    rc.set_train(cfg);
    write_file_atomic(out_dir / "resolved_config.ini", rc.serialize());
  }
  std::ostringstream metrics;
  const fs::path metrics_path = out_dir / "metrics.jsonl";
  if (opts.resume_from) {
    // Carry over the history up to the resumed step so the log matches an
    // uninterrupted run.
    const fs::path prior = opts.resume_from->parent_path().parent_path() / "metrics.jsonl";
    if (fs::exists(prior))
      for (const MetricsRecord &r : read_metrics(prior))
        if (r.step <= trainer.step()) metrics << metrics_line(r) << '\n';
  }

  const std::size_t n = data.size();
  long long cached_epoch = -1;
  std::vector<std::size_t> order;
  fs::path last_ckpt;
  auto checkpoint = [&]() {
    write_file_atomic(metrics_path, metrics.str());
    last_ckpt = trainer.save_checkpoint(out_dir / ("ckpt-" + std::to_string(trainer.step())));
  };
  if (trainer.step() == cfg.steps) checkpoint();

  while (trainer.step() < cfg.steps) {
    const int s = trainer.step() + 1;
    Rng crop_rng(derive_seed(cfg.seed, kStepStream, static_cast<std::uint64_t>(s)));
    Rng noise_rng(derive_seed(cfg.policy.seed, kStepStream + 1, static_cast<std::uint64_t>(s)));
    std::vector<TrainExample> batch;
    batch.reserve(cfg.batch_size);
    for (int i = 0; i < cfg.batch_size; ++i) {
      const long long c = static_cast<long long>(s - 1) * cfg.batch_size + i;
      const long long epoch = c / static_cast<long long>(n);
      if (epoch != cached_epoch) {
        order.resize(n);
        std::iota(order.begin(), order.end(), 0);
        Rng orng(derive_seed(cfg.seed, kOrderStream, static_cast<std::uint64_t>(epoch)));
        shuffle(order, orng);
        cached_epoch = epoch;
      }
      const Utterance &u = data[order[static_cast<std::size_t>(c % static_cast<long long>(n))]];
      const Eigen::Index off = static_cast<Eigen::Index>(
          uniform_index(crop_rng, static_cast<std::uint64_t>(u.frames.rows() - cfg.crop_frames + 1)));
      TrainExample ex;
      ex.original = u.frames.middleRows(off, cfg.crop_frames);
      ex.augmented = add_noise(ex.original, cfg.policy.sigma, noise_rng);
      ex.speaker_id = u.speaker;
      batch.push_back(std::move(ex));
    }
    Rng plan_rng(derive_seed(cfg.seed, kStepStream + 2, static_cast<std::uint64_t>(s)));
    const LossBundle loss = trainer.train_step(batch, plan_rng);
    MetricsRecord rec{trainer.step(), loss};
    metrics << metrics_line(rec) << '\n';
    if (opts.on_step) opts.on_step(rec);
    if (trainer.step() % cfg.checkpoint_every == 0 || trainer.step() == cfg.steps) checkpoint();
  }
  if (last_ckpt.empty()) checkpoint();
  return last_ckpt;
}

}  // namespace noisevc
