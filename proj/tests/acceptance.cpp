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

// Acceptance checks: one PASS/FAIL line per criterion.
//
//   acceptance [--only 1,2,...] [--work DIR] [--reuse]
//
// --reuse keeps finished training runs found under the work directory
// instead of retraining them.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "noisevc/config.hpp"
#include "noisevc/convert.hpp"
#include "noisevc/error.hpp"
#include "noisevc/evalsuite.hpp"
#include "noisevc/mel.hpp"
#include "noisevc/model.hpp"
#include "noisevc/nn_blocks.hpp"
#include "noisevc/synth.hpp"
#include "noisevc/tensor_io.hpp"
#include "noisevc/trainer.hpp"

using namespace noisevc;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char *f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char *f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double central_diff(Matrix &m, Eigen::Index i, Eigen::Index j, const std::function<double()> &f,
                    double h = 1e-6) {
  const double keep = m(i, j);
  m(i, j) = keep + h;
  const double up = f();
  m(i, j) = keep - h;
  const double down = f();
  m(i, j) = keep;
  return (up - down) / (2 * h);
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1e-8, std::abs(a), std::abs(b)});
}

// ------------------------------------------------------------ 1. VQ

std::vector<int> exhaustive_nn(const Matrix &e, const Matrix &codes) {
  std::vector<int> out;
  for (Eigen::Index t = 0; t < e.rows(); ++t) {
    int best = 0;
    double bd = INFINITY;
    for (Eigen::Index v = 0; v < codes.rows(); ++v) {
      double d = 0;
      for (Eigen::Index j = 0; j < e.cols(); ++j) d += (e(t, j) - codes(v, j)) * (e(t, j) - codes(v, j));
      if (d < bd) {
        bd = d;
        best = static_cast<int>(v);
      }
    }
    out.push_back(best);
  }
  return out;
}

Outcome vq_correctness() {
  Rng rng(101);
  int mismatched = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int T = 1 + static_cast<int>(uniform_index(rng, 64));
    const int V = 1 + static_cast<int>(uniform_index(rng, 128));
    const int D = 1 + static_cast<int>(uniform_index(rng, 32));
    const Codebook book(normal_matrix(V, D, 1.0, rng));
    const Matrix e = normal_matrix(T, D, 1.0, rng);
    if (quantize(e, book).indices != exhaustive_nn(e, book.codes.value)) ++mismatched;
  }
  // Exact ties: small integer grids make equal distances exact in floating
  // point, so duplicate codes and equidistant points are common.
  int tie_failures = 0, tie_rows = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int V = 2 + static_cast<int>(uniform_index(rng, 30));
    const int D = 1 + static_cast<int>(uniform_index(rng, 4));
    Matrix codes(V, D), e(16, D);
    for (Eigen::Index i = 0; i < codes.size(); ++i)
      codes(i) = static_cast<double>(uniform_index(rng, 5)) - 2.0;
    for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = 0.5 * (static_cast<double>(uniform_index(rng, 9)) - 4.0);
    const std::vector<int> want = exhaustive_nn(e, codes);
    for (Eigen::Index t = 0; t < e.rows(); ++t) {
      int at_min = 0;
      const double best = (codes.rowwise() - e.row(t)).rowwise().squaredNorm().minCoeff();
      for (Eigen::Index v = 0; v < V; ++v)
        at_min += (codes.row(v) - e.row(t)).squaredNorm() == best;
      tie_rows += at_min > 1;
    }
    if (quantize(e, Codebook(codes)).indices != want) ++tie_failures;
  }
  return {mismatched == 0 && tie_failures == 0,
          fmt("%d/200 random instances mismatched; %d/50 tie instances wrong (%d tied rows, lowest index expected)",
              mismatched, tie_failures, tie_rows)};
}

// ------------------------------------------------------------ 2. stop-gradient

ModelConfig tiny_model() {
  ModelConfig c;
  c.n_mels = 8;
  c.kernel = 3;
  c.content_layers = 2;
  c.content_channels = 6;
  c.speaker_layers = 2;
  c.speaker_channels = 6;
  c.decoder_layers = 2;
  c.decoder_channels = 6;
  c.decoder_lstm = 6;
  c.codebook_size = 12;
  c.code_dim = 4;
  c.context_dim = 4;
  c.cpc_steps = 2;
  c.negatives = 3;
  return c;
}

Outcome stop_gradient() {
  Rng rng(202);
  const int T = 24, V = 32, D = 8;
  Codebook book(normal_matrix(V, D, 1.0, rng));
  Matrix e = normal_matrix(T, D, 1.0, rng);
  const ContentEmbedding q = quantize(e, book);
  const Matrix x = normal_matrix(T, 5, 1.0, rng), xh = normal_matrix(T, 5, 1.0, rng);
  const VqGradients cb = vq_loss_backward(x, xh, e, q, book, 0.25, {false, true, false, false});
  const VqGradients cm = vq_loss_backward(x, xh, e, q, book, 0.25, {false, false, true, false});
  double leak = std::max(cb.encoded.cwiseAbs().maxCoeff(), cm.codes.cwiseAbs().maxCoeff());

  // Same routing through the whole model: the codebook term alone leaves the
  // content encoder untouched, the commitment term alone leaves the codebook.
  NoiseVC net(tiny_model());
  const SeqBatch xb(normal_matrix(2 * 10, 8, 1.0, rng), 2, 10);
  auto group_grad = [&](const LossTerms &terms, const std::string &group) {
    net.zero_grad();
    Rng r(1);
    net.loss_and_backward(xb, xb, xb, 0.25, 1.0, r, terms);
    double m = 0;
    const auto groups = parameter_groups(net);
    for (Param *p : groups.at(group)) m = std::max(m, p->grad.cwiseAbs().maxCoeff());
    return m;
  };
  const double enc_from_cb = group_grad({false, true, false, false}, "content_encoder");
  const double cb_from_commit = group_grad({false, false, true, false}, "codebook");
  leak = std::max({leak, enc_from_cb, cb_from_commit});

  // Finite differences with the code assignment held fixed.
  auto terms_at = [&](const Matrix &enc, const Matrix &codes) {
    ContentEmbedding qq = q;
    for (int t = 0; t < T; ++t) qq.quantized.row(t) = codes.row(qq.indices[t]);
    return vq_loss(x, xh, enc, qq, 0.25);
  };
  Matrix codes = book.codes.value;
  double worst = 0;
  for (int i = 0; i < 5; ++i) {
    const int v = q.indices[uniform_index(rng, T)];
    const auto j = static_cast<Eigen::Index>(uniform_index(rng, D));
    const double num = central_diff(codes, v, j, [&] { return terms_at(e, codes).codebook_term; });
    worst = std::max(worst, rel_err(num, cb.codes(v, j)));
  }
  for (int i = 0; i < 5; ++i) {
    const auto t = static_cast<Eigen::Index>(uniform_index(rng, T));
    const auto j = static_cast<Eigen::Index>(uniform_index(rng, D));
    const double num = central_diff(e, t, j, [&] { return terms_at(e, codes).commitment_term; });
    worst = std::max(worst, rel_err(num, cm.encoded(t, j)));
  }
  return {leak < 1e-8 && worst < 1e-4,
          fmt("max forbidden gradient %.3g (< 1e-8), worst FD relative error %.3g over 10 coords (< 1e-4)",
              leak, worst)};
}

// ------------------------------------------------------------ 3. straight-through

Outcome straight_through() {
  Rng rng(303);
  // Model level: decoder plus CPC are the downstream terms.
  NoiseVC net(tiny_model());
  const SeqBatch xb(normal_matrix(3 * 12, 8, 1.0, rng), 3, 12);
  net.zero_grad();
  Rng r(2);
  net.loss_and_backward(xb, xb, xb, 0.25, 1.0, r, LossTerms{true, false, false, true});
  const auto &tap = net.last_quantizer_grads();
  const double model_gap = (tap.encoded - tap.content_view).cwiseAbs().maxCoeff();

  // Block level oracle: f(view) with view = E + sg[q - E]; d f / d E by finite
  // differences must equal d f / d view.
  const Codebook book(normal_matrix(16, 4, 1.0, rng));
  Matrix e = normal_matrix(10, 4, 1.0, rng);
  const ContentEmbedding q = quantize(e, book);
  const Matrix offset = q.quantized - e;
  const Matrix w = normal_matrix(10, 4, 1.0, rng);
  auto f = [&] {
    const Matrix view = e + offset;
    return (view.array().sin() * w.array()).sum() + 0.5 * view.squaredNorm();
  };
  const Matrix g_view = (q.straight_through.array().cos() * w.array()).matrix() + q.straight_through;
  const Matrix g_e = straight_through_backward(g_view);
  double fd_gap = 0;
  for (Eigen::Index t = 0; t < e.rows(); ++t)
    for (Eigen::Index j = 0; j < e.cols(); ++j)
      fd_gap = std::max(fd_gap, std::abs(central_diff(e, t, j, f) - g_view(t, j)));
  const double block_gap = (g_e - g_view).cwiseAbs().maxCoeff();
  const double gap = std::max({model_gap, block_gap, fd_gap});
  return {gap < 1e-6 && tap.content_view.cwiseAbs().maxCoeff() > 0,
          fmt("max |dL/dE - dL/dview| %.3g in the model, %.3g by finite differences (< 1e-6)",
              std::max(model_gap, block_gap), fd_gap)};
}

// ------------------------------------------------------------ 4. instance norm

Outcome instance_norm_check() {
  Rng rng(404);
  double worst_mean = 0, worst_std = 0, worst_affine = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Matrix x(64, 16);
    for (int c = 0; c < 16; ++c) {
      const double sd = std::exp(uniform(rng, std::log(1e-2), std::log(10.0)));
      x.col(c) = (normal_matrix(64, 1, sd, rng).array() + uniform(rng, -5, 5)).matrix();
    }
    const Matrix y = instance_norm(x);
    const RowVector mean = y.colwise().mean();
    const RowVector sd = (y.rowwise() - mean).array().square().colwise().mean().sqrt();
    worst_mean = std::max(worst_mean, mean.cwiseAbs().maxCoeff());
    worst_std = std::max(worst_std, (sd.array() - 1.0).abs().maxCoeff());
    for (double a : {0.1, 10.0, std::exp(uniform(rng, std::log(0.1), std::log(10.0)))}) {
      const double b = uniform(rng, -10, 10);
      const Matrix ya = instance_norm((a * x).array() + b);
      worst_affine = std::max(worst_affine, (ya - y).cwiseAbs().maxCoeff());
    }
  }
  return {worst_mean < 1e-6 && worst_std < 1e-3 && worst_affine < 1e-5,
          fmt("max |mean| %.3g (< 1e-6), max |std-1| %.3g (< 1e-3), max affine gap %.3g (< 1e-5)",
              worst_mean, worst_std, worst_affine)};
}

// ------------------------------------------------------------ 5. CPC chance floor

SeqBatch synthetic_batch(const SyntheticCorpus &corpus, int batch, int frames, Rng &rng) {
  Matrix x(static_cast<Eigen::Index>(batch) * frames, corpus.spec().n_mels);
  for (int b = 0; b < batch; ++b) {
    const int spk = static_cast<int>(uniform_index(rng, corpus.spec().n_speakers));
    const SyntheticSample s = corpus.render(spk, rng);
    const int off = static_cast<int>(uniform_index(rng, s.mel.frames() - frames + 1));
    x.middleRows(static_cast<Eigen::Index>(b) * frames, frames) = s.mel.time_major().middleRows(off, frames);
  }
  return SeqBatch(std::move(x), batch, frames);
}

Outcome cpc_chance() {
  const SyntheticCorpus corpus(SyntheticSpec{});
  std::string detail;
  bool ok = true;
  for (int negatives : {20, 8}) {
    ModelConfig c = ModelConfig::desk();
    c.negatives = negatives;
    NoiseVC net(c);
    Rng rng(505 + negatives);
    double sum = 0;
    const int n_batches = 100;
    for (int i = 0; i < n_batches; ++i) {
      const SeqBatch x = synthetic_batch(corpus, 8, 128, rng);
      Real l = 0;
      net.forward(x, x, true, &rng, &l);
      sum += l;
    }
    const double mean = sum / n_batches, floor = std::log(negatives + 1.0);
    ok = ok && std::abs(mean - floor) <= 0.2;
    detail += fmt("%s%d negatives: mean %.4f vs ln(%d) = %.4f", detail.empty() ? "" : "; ",
                  negatives, mean, negatives + 1, floor);
  }
  return {ok, detail + " (tolerance 0.2, 100 batches each)"};
}

// ------------------------------------------------------------ training runs

struct Run {
  fs::path checkpoint;
  std::vector<MetricsRecord> metrics;
  double seconds = 0;
};

struct Context {
  fs::path work;
  bool reuse = false;
  std::optional<DatasetManifest> corpus;
  std::map<std::string, Run> runs;  // finished in this invocation

  const DatasetManifest &manifest() {
    if (!corpus) {
      const fs::path dir = work / "corpus";
      if (reuse && fs::exists(dir / "manifest.jsonl")) {
        corpus = read_manifest(dir / "manifest.jsonl");
      } else {
        fs::remove_all(dir);
        corpus = generate_corpus(SyntheticSpec{}, 40, dir);
      }
    }
    return *corpus;
  }

  Run train(const std::string &name, const std::vector<std::string> &overrides) {
    if (const auto it = runs.find(name); it != runs.end()) return it->second;
    const TrainConfig cfg = RunConfig::parse("", overrides).train();
    const fs::path dir = work / name;
    const fs::path ckpt = dir / ("ckpt-" + std::to_string(cfg.steps)) / "checkpoint.json";
    Run run;
    if (reuse && fs::exists(ckpt) && fs::exists(dir / "seconds.txt")) {
      run.checkpoint = ckpt;
      run.seconds = std::stod(read_text_file(dir / "seconds.txt"));
    } else {
      fs::remove_all(dir);
      std::cerr << "training " << name << " (" << cfg.steps << " steps)" << std::endl;
      const auto t0 = Clock::now();
      FitOptions opts;
      opts.on_step = [&](const MetricsRecord &r) {
        if (r.step % 500 == 0)
          std::cerr << "  " << name << " step " << r.step << " rec " << r.loss.reconstruction
                    << " cpc " << r.loss.cpc << std::endl;
      };
      run.checkpoint = fit(manifest(), cfg, dir, opts);
      run.seconds = seconds_since(t0);
      write_file_atomic(dir / "seconds.txt", fmt("%.3f\n", run.seconds));
    }
    run.metrics = read_metrics(dir / "metrics.jsonl");
    runs[name] = run;
    return run;
  }

  // The desk default: IN + VQ + CPC with noise augmentation at alpha = 0.5.
  Run full() { return train("full", {}); }
  Run no_aug() { return train("cpc", {"augment.alpha=0"}); }
  Run vq_only() { return train("vq", {"augment.alpha=0", "model.use_cpc=false"}); }
};

double window_mean(const std::vector<MetricsRecord> &m, std::size_t begin, std::size_t end,
                   Real LossBundle::*field) {
  double s = 0;
  for (std::size_t i = begin; i < end; ++i) s += m[i].loss.*field;
  return s / static_cast<double>(end - begin);
}

// ------------------------------------------------------------ 6. training sanity

Outcome training_sanity(Context &ctx) {
  const Run run = ctx.full();
  const auto &m = run.metrics;
  if (m.size() < 100) return {false, "metrics log too short"};
  const double rec0 = window_mean(m, 0, 50, &LossBundle::reconstruction);
  const double rec1 = window_mean(m, m.size() - 50, m.size(), &LossBundle::reconstruction);
  const double cpc1 = window_mean(m, m.size() - 50, m.size(), &LossBundle::cpc);
  const double floor = std::log(ModelConfig::desk().negatives + 1.0);
  const double drop = 1.0 - rec1 / rec0;
  const bool ok = drop >= 0.5 && cpc1 < floor - 0.3 && run.seconds < 30 * 60;
  return {ok, fmt("reconstruction %.4f -> %.4f (%.1f%% drop, need >= 50%%); cpc %.4f vs chance-0.3 = "
                  "%.4f; %zu steps in %.1f min (< 30)",
                  rec0, rec1, 100 * drop, cpc1, floor - 0.3, m.size(), run.seconds / 60)};
}

// ------------------------------------------------------------ 7. ordering

Outcome ordering(Context &ctx) {
  const EvalConfig ec = RunConfig::defaults().eval();
  double total_seconds = 0;
  auto content_acc = [&](const Run &run) {
    const auto t0 = Clock::now();
    auto net = load_model(run.checkpoint);
    const double acc = probe_content(*net, ctx.manifest(), ec);
    total_seconds += run.seconds + seconds_since(t0);
    return acc;
  };
  const double a_vq = content_acc(ctx.vq_only());
  const double a_cpc = content_acc(ctx.no_aug());
  const double a_aug = content_acc(ctx.full());
  // Reference point: the same probe on an untrained encoder.
  NoiseVC untrained(RunConfig::defaults().model());
  const double a_rand = probe_content(untrained, ctx.manifest(), ec);
  const bool ok = a_vq - a_cpc >= 3.0 && a_cpc - a_aug >= 3.0 && total_seconds < 2 * 3600;
  return {ok, fmt("content-probe speaker acc: IN+VQ %.2f, +CPC %.2f, +aug(alpha=0.5) %.2f "
                  "(gaps %.2f, %.2f; need >= 3); untrained encoder %.2f; %.1f min total (< 120)",
                  a_vq, a_cpc, a_aug, a_vq - a_cpc, a_cpc - a_aug, a_rand, total_seconds / 60)};
}

// ------------------------------------------------------------ 8. speaker encoder

Outcome speaker_quality(Context &ctx) {
  const Run run = ctx.full();
  auto net = load_model(run.checkpoint);
  const EvalConfig ec = RunConfig::defaults().eval();
  const double acc = probe_speaker(*net, ctx.manifest(), ec);
  const EmbeddingMap map = export_embedding_map(*net, ctx.manifest(), ctx.work / "unseen_map.jsonl", ec);
  const bool ok = acc >= 90.0 && map.silhouette && *map.silhouette > 0.3;
  return {ok, fmt("linear probe on S %.2f%% (>= 90) over held-out seen utterances; unseen map "
                  "silhouette %s (> 0.3, %zu speakers)",
                  acc, map.silhouette ? fmt("%.3f", *map.silhouette).c_str() : "n/a",
                  map.centroids.size())};
}

// ------------------------------------------------------------ 9. conversion

struct PairStats {
  double src_acc = 0, conv_acc = 0, target_hits = 0;
};

Outcome conversion(Context &ctx) {
  const DatasetManifest &m = ctx.manifest();
  const auto labels = read_labels(m.root / "labels.txt");
  auto net = load_model(ctx.full().checkpoint);
  Rng rng(909);

  // Frame-wise content oracle on raw mels of seen-speaker training utterances.
  Matrix frames(0, 80);
  std::vector<int> frame_labels;
  std::map<std::string, std::vector<const ManifestEntry *>> by_speaker;
  for (const ManifestEntry &e : m.entries) by_speaker[e.speaker_id].push_back(&e);
  for (const ManifestEntry &e : m.entries) {
    if (e.speaker_set != SpeakerSet::kSeen || e.split != Split::kTrain) continue;
    if (uniform01(rng) > 0.3) continue;
    const Matrix tm = read_mel(m.mel_file(e)).time_major();
    const Eigen::Index r0 = frames.rows();
    frames.conservativeResize(r0 + tm.rows(), Eigen::NoChange);
    frames.bottomRows(tm.rows()) = tm;
    const auto &l = labels.at(e.utterance_id);
    frame_labels.insert(frame_labels.end(), l.begin(), l.end());
  }
  ProbeConfig pc;
  pc.kind = ProbeKind::kLinear1;
  pc.epochs = 10;
  pc.batch = 64;
  pc.learning_rate = 1e-2;
  pc.seed = 9;
  LinearProbe content(80, SyntheticSpec{}.n_content_symbols, pc);
  content.fit(frames, frame_labels);

  auto speaker_vec = [&](const MelSpectrogram &x) { return net->encode_speaker(x, 1).vector; };

  // Runs `n` random cross-speaker pairs drawn from `pool` and scores them with
  // a speaker probe trained on `probe_train`.
  auto evaluate_pairs = [&](const std::vector<const ManifestEntry *> &pool,
                            const std::vector<const ManifestEntry *> &probe_train, int n) {
    std::vector<std::string> names;
    for (auto *e : probe_train) names.push_back(e->speaker_id);
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    auto label_of = [&](const std::string &s) {
      return static_cast<int>(std::lower_bound(names.begin(), names.end(), s) - names.begin());
    };
    Matrix xs(static_cast<Eigen::Index>(probe_train.size()), net->config().code_dim);
    std::vector<int> ys;
    for (std::size_t i = 0; i < probe_train.size(); ++i) {
      xs.row(static_cast<Eigen::Index>(i)) = speaker_vec(read_mel(m.mel_file(*probe_train[i])));
      ys.push_back(label_of(probe_train[i]->speaker_id));
    }
    ProbeConfig sp = pc;
    sp.epochs = 50;
    LinearProbe spk(static_cast<int>(xs.cols()), static_cast<int>(names.size()), sp);
    spk.fit(xs, ys);

    PairStats st;
    long src_hits = 0, conv_hits = 0, total = 0;
    int hits = 0;
    for (int p = 0; p < n; ++p) {
      const ManifestEntry *a = pool[uniform_index(rng, pool.size())];
      const ManifestEntry *b = nullptr;
      do b = pool[uniform_index(rng, pool.size())];
      while (b->speaker_id == a->speaker_id);
      const MelSpectrogram src = read_mel(m.mel_file(*a));
      const MelSpectrogram tgt = read_mel(m.mel_file(*b));
      const MelSpectrogram out = convert(*net, {src, {tgt}});
      const auto &lab = labels.at(a->utterance_id);
      const auto ps = content.predict(src.time_major());
      const auto pcv = content.predict(out.time_major());
      for (std::size_t t = 0; t < lab.size(); ++t) {
        src_hits += ps[t] == lab[t];
        conv_hits += pcv[t] == lab[t];
        ++total;
      }
      Matrix s(1, xs.cols());
      s.row(0) = speaker_vec(out);
      hits += spk.predict(s)[0] == label_of(b->speaker_id);
    }
    st.src_acc = 100.0 * src_hits / total;
    st.conv_acc = 100.0 * conv_hits / total;
    st.target_hits = 100.0 * hits / n;
    return st;
  };

  // Seen speakers: sources and targets are held-out utterances; the speaker
  // probe learns from the training utterances.
  std::vector<const ManifestEntry *> seen_pool, seen_train, unseen_pool, unseen_train;
  for (const ManifestEntry &e : m.entries) {
    if (e.speaker_set == SpeakerSet::kSeen) {
      (e.split == Split::kTest ? seen_pool : seen_train).push_back(&e);
    } else {
      // Unseen speakers: half of each speaker's utterances teach the probe.
      const int idx = std::stoi(e.utterance_id.substr(e.utterance_id.rfind('_') + 1));
      (idx % 2 == 0 ? unseen_train : unseen_pool).push_back(&e);
    }
  }
  const PairStats seen = evaluate_pairs(seen_pool, seen_train, 50);
  const PairStats unseen = evaluate_pairs(unseen_pool, unseen_train, 50);
  const double gap_s = std::abs(seen.src_acc - seen.conv_acc);
  const double gap_u = std::abs(unseen.src_acc - unseen.conv_acc);
  const bool ok = gap_s <= 10 && seen.target_hits > 60 && gap_u <= 15 && unseen.target_hits > 50;
  return {ok, fmt("seen: content acc source %.1f / converted %.1f (gap %.1f <= 10), target speaker "
                  "%.0f%% (> 60); unseen: %.1f / %.1f (gap %.1f <= 15), target %.0f%% (> 50)",
                  seen.src_acc, seen.conv_acc, gap_s, seen.target_hits, unseen.src_acc,
                  unseen.conv_acc, gap_u, unseen.target_hits)};
}

// ------------------------------------------------------------ 10. determinism

Outcome determinism(Context &ctx) {
  const DatasetManifest &m = ctx.manifest();
  TrainConfig cfg = RunConfig::defaults().train();
  cfg.steps = 100;
  cfg.checkpoint_every = 50;
  const fs::path root = ctx.work / "determinism";
  fs::remove_all(root);
  fit(m, cfg, root / "a");
  fit(m, cfg, root / "b");
  const bool same = read_text_file(root / "a/metrics.jsonl") == read_text_file(root / "b/metrics.jsonl");

  TrainConfig half = cfg;
  half.steps = 50;
  fit(m, half, root / "c");
  FitOptions opts;
  opts.resume_from = root / "c/ckpt-50/checkpoint.json";
  fit(m, cfg, root / "d", opts);
  const bool resumed = read_text_file(root / "a/metrics.jsonl") == read_text_file(root / "d/metrics.jsonl");
  int tensors_differ = 0, tensors = 0;
  for (const auto &f : fs::directory_iterator(root / "a/ckpt-100/tensors")) {
    ++tensors;
    if (read_text_file(f.path()) != read_text_file(root / "d/ckpt-100/tensors" / f.path().filename()))
      ++tensors_differ;
  }
  return {same && resumed && tensors_differ == 0,
          fmt("repeat run metrics %s; resumed-at-50 metrics %s; %d/%d checkpoint tensors differ",
              same ? "identical" : "DIFFER", resumed ? "identical" : "DIFFER", tensors_differ, tensors)};
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> only;
  std::string work = std::string(NVC_TEST_TMP) + "/acceptance";
  bool reuse = false;
  app.add_option("--only", only, "Criteria to run (default: all)")->delimiter(',');
  app.add_option("--work", work, "Scratch directory for corpora and runs");
  app.add_flag("--reuse", reuse, "Reuse finished runs in the work directory");
  CLI11_PARSE(app, argc, argv);

  Context ctx;
  ctx.work = work;
  ctx.reuse = reuse;
  fs::create_directories(ctx.work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"VQ correctness", vq_correctness},
      {"stop-gradient routing", stop_gradient},
      {"straight-through identity", straight_through},
      {"instance normalization", instance_norm_check},
      {"CPC chance floor", cpc_chance},
      {"training sanity", [&] { return training_sanity(ctx); }},
      {"content-probe ordering", [&] { return ordering(ctx); }},
      {"speaker encoder quality", [&] { return speaker_quality(ctx); }},
      {"conversion behavior", [&] { return conversion(ctx); }},
      {"determinism and resume", [&] { return determinism(ctx); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception &e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << "criterion " << id << " (" << criteria[i].first << "): " << (o.pass ? "PASS" : "FAIL")
              << "  " << o.detail << fmt("  [%.1fs]", seconds_since(t0)) << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
