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

#include "noisevc/evalsuite.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "noisevc/config.hpp"
#include "noisevc/error.hpp"
#include "noisevc/tensor_io.hpp"
#include "noisevc/trainer.hpp"

namespace noisevc {

namespace fs = std::filesystem;
using nlohmann::json;

ProbeConfig ProbeConfig::from(const EvalConfig &e, ProbeKind kind) {
  ProbeConfig p;
  p.kind = kind;
  p.epochs = e.probe_epochs;
  p.learning_rate = e.probe_lr;
  p.seed = e.probe_seed;
  p.channels = e.probe_channels;
  p.batch = e.probe_batch;
  return p;
}

namespace {

// Row-wise softmax cross-entropy; returns d loss / d logits (mean over rows).
Matrix softmax_xent_grad(const Matrix &logits, const std::vector<int> &labels) {
  Matrix g(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const Real m = logits.row(r).maxCoeff();
    RowVector e = (logits.row(r).array() - m).exp().matrix();
    e /= e.sum();
    e(labels[r]) -= 1.0;
    g.row(r) = e / static_cast<Real>(logits.rows());
  }
  return g;
}

int argmax(const Eigen::Ref<const RowVector> &r) {
  Eigen::Index i = 0;
  r.maxCoeff(&i);
  return static_cast<int>(i);
}

void check_labels(const std::vector<int> &labels, std::size_t n, int n_classes) {
  if (labels.size() != n) throw ShapeError("probe: label count does not match example count");
  for (int l : labels)
    if (l < 0 || l >= n_classes) throw DataError("probe: label out of range");
}

std::uint64_t fnv1a(std::uint64_t h, const void *data, std::size_t n) {
  const auto *p = static_cast<const unsigned char *>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

// ------------------------------------------------------------------ probes

void FeatureScaler::fit(const Matrix &x) {
  mean = x.colwise().mean();
  const RowVector var = (x.rowwise() - mean).array().square().colwise().mean();
  inv_std = (var.array().sqrt() + 1e-6).inverse().matrix();
}

Matrix FeatureScaler::apply(const Matrix &x) const {
  if (!fitted()) throw UsageError("probe: predict before fit");
  return ((x.rowwise() - mean).array().rowwise() * inv_std.array()).matrix();
}

LinearProbe::LinearProbe(int in_features, int n_classes, const ProbeConfig &cfg)
    : cfg_(cfg), n_classes_(n_classes) {
  if (in_features < 1 || n_classes < 1) throw ConfigError("probe: sizes must be >= 1");
  Rng rng(derive_seed(cfg.seed, 0x11));
  layer_ = Linear("probe.linear", in_features, n_classes, rng);
}

void LinearProbe::fit(const Matrix &x, const std::vector<int> &labels) {
  check_labels(labels, static_cast<std::size_t>(x.rows()), n_classes_);
  if (x.rows() == 0) throw DataError("probe: no training examples");
  scaler_.fit(x);
  const Matrix xs = scaler_.apply(x);
  Adam adam(cfg_.learning_rate);
  std::vector<Param *> params;
  layer_.collect(params);
  Rng rng(derive_seed(cfg_.seed, 0x12));
  std::vector<int> order(static_cast<std::size_t>(x.rows()));
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    shuffle(order, rng);
    for (std::size_t s = 0; s < order.size(); s += cfg_.batch) {
      const std::size_t e = std::min(order.size(), s + cfg_.batch);
      Matrix xb(static_cast<Eigen::Index>(e - s), xs.cols());
      std::vector<int> yb;
      for (std::size_t i = s; i < e; ++i) {
        xb.row(static_cast<Eigen::Index>(i - s)) = xs.row(order[i]);
        yb.push_back(labels[order[i]]);
      }
      for (Param *p : params) p->zero_grad();
      layer_.backward(softmax_xent_grad(layer_.forward(xb), yb));
      adam.step(params);
    }
  }
}

std::vector<int> LinearProbe::predict(const Matrix &x) const {
  const Matrix logits = layer_.apply(scaler_.apply(x));
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index r = 0; r < logits.rows(); ++r) out[r] = argmax(logits.row(r));
  return out;
}

Real LinearProbe::accuracy(const Matrix &x, const std::vector<int> &labels) const {
  check_labels(labels, static_cast<std::size_t>(x.rows()), n_classes_);
  if (labels.empty()) throw DataError("probe: no evaluation examples");
  const std::vector<int> p = predict(x);
  int hit = 0;
  for (std::size_t i = 0; i < p.size(); ++i) hit += p[i] == labels[i];
  return 100.0 * hit / static_cast<Real>(labels.size());
}

ConvProbe::ConvProbe(int in_channels, int n_classes, const ProbeConfig &cfg)
    : cfg_(cfg), n_classes_(n_classes) {
  if (in_channels < 1 || n_classes < 1) throw ConfigError("probe: sizes must be >= 1");
  Rng rng(derive_seed(cfg.seed, 0x21));
  c1_ = Conv1d("probe.c1", in_channels, cfg.channels, cfg.kernel, rng);
  c2_ = Conv1d("probe.c2", cfg.channels, cfg.channels, cfg.kernel, rng);
  c3_ = Conv1d("probe.c3", cfg.channels, n_classes, cfg.kernel, rng);
}

Matrix ConvProbe::logits(const SeqBatch &x) {
  const SeqBatch h = c3_.forward(r2_.forward(c2_.forward(r1_.forward(c1_.forward(x)))));
  Matrix out(h.batch, h.channels());
  for (int b = 0; b < h.batch; ++b) out.row(b) = h.seq(b).colwise().mean();
  return out;
}

namespace {
SeqBatch stack(const std::vector<Matrix> &seqs, const std::vector<int> &idx,
               const FeatureScaler &st) {
  const Eigen::Index T = seqs[idx.front()].rows();
  Matrix x(static_cast<Eigen::Index>(idx.size()) * T, seqs[idx.front()].cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (seqs[idx[i]].rows() != T) throw ShapeError("probe: segments must share one length");
    x.middleRows(static_cast<Eigen::Index>(i) * T, T) = st.apply(seqs[idx[i]]);
  }
  return SeqBatch(std::move(x), static_cast<int>(idx.size()), static_cast<int>(T));
}
}  // namespace

void ConvProbe::fit(const std::vector<Matrix> &seqs, const std::vector<int> &labels) {
  check_labels(labels, seqs.size(), n_classes_);
  if (seqs.empty()) throw DataError("probe: no training examples");
  Eigen::Index rows = 0;
  for (const Matrix &s : seqs) rows += s.rows();
  Matrix all(rows, seqs.front().cols());
  rows = 0;
  for (const Matrix &s : seqs) {
    all.middleRows(rows, s.rows()) = s;
    rows += s.rows();
  }
  scaler_.fit(all);

  Adam adam(cfg_.learning_rate);
  std::vector<Param *> params;
  c1_.collect(params);
  c2_.collect(params);
  c3_.collect(params);
  Rng rng(derive_seed(cfg_.seed, 0x22));
  std::vector<int> order(seqs.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    shuffle(order, rng);
    for (std::size_t s = 0; s < order.size(); s += cfg_.batch) {
      const std::vector<int> idx(order.begin() + s,
                                 order.begin() + std::min(order.size(), s + cfg_.batch));
      const SeqBatch x = stack(seqs, idx, scaler_);
      std::vector<int> yb;
      for (int i : idx) yb.push_back(labels[i]);
      for (Param *p : params) p->zero_grad();
      const Matrix g = softmax_xent_grad(logits(x), yb);
      Matrix gf(x.rows(), n_classes_);
      for (int b = 0; b < x.batch; ++b)
        gf.middleRows(static_cast<Eigen::Index>(b) * x.length, x.length) =
            (g.row(b) / static_cast<Real>(x.length)).replicate(x.length, 1);
      c1_.backward(r1_.backward(c2_.backward(r2_.backward(c3_.backward(gf)))));
      adam.step(params);
    }
  }
}

int ConvProbe::predict(const Matrix &seq) {
  const SeqBatch x(scaler_.apply(seq), 1, static_cast<int>(seq.rows()));
  return argmax(logits(x).row(0));
}

Real ConvProbe::accuracy(const std::vector<Matrix> &seqs, const std::vector<int> &labels) {
  check_labels(labels, seqs.size(), n_classes_);
  if (seqs.empty()) throw DataError("probe: no evaluation examples");
  int hit = 0;
  for (std::size_t i = 0; i < seqs.size(); ++i) hit += predict(seqs[i]) == labels[i];
  return 100.0 * hit / static_cast<Real>(seqs.size());
}

// ------------------------------------------------------------------ splits

int ProbeSplit::label(const std::string &speaker) const {
  const auto it = std::lower_bound(speakers.begin(), speakers.end(), speaker);
  if (it == speakers.end() || *it != speaker) throw DataError("probe: unknown speaker " + speaker);
  return static_cast<int>(it - speakers.begin());
}

ProbeSplit probe_split(const DatasetManifest &m, Real holdout_fraction, std::uint64_t seed) {
  if (!(holdout_fraction >= 0 && holdout_fraction <= 1))
    throw ConfigError("eval.holdout_fraction must be in [0, 1]");
  ProbeSplit split;
  const auto seen = m.seen_speakers();
  split.speakers.assign(seen.begin(), seen.end());
  if (split.speakers.empty()) throw DataError("probe: manifest has no seen speakers");
  std::map<std::string, std::vector<const ManifestEntry *>> train_by_spk;
  for (const ManifestEntry &e : m.entries) {
    if (e.speaker_set != SpeakerSet::kSeen) continue;
    if (e.split == Split::kTest)
      split.test.push_back(&e);
    else
      train_by_spk[e.speaker_id].push_back(&e);
  }
  for (std::size_t s = 0; s < split.speakers.size(); ++s) {
    auto &v = train_by_spk[split.speakers[s]];
    std::sort(v.begin(), v.end(), [](auto *a, auto *b) { return a->utterance_id < b->utterance_id; });
    Rng rng(derive_seed(seed, 0x5b117, s));
    shuffle(v, rng);
    std::size_t n_hold = static_cast<std::size_t>(std::lround(holdout_fraction * v.size()));
    if (n_hold >= v.size() && !v.empty()) n_hold = v.size() - 1;
    split.test.insert(split.test.end(), v.begin(), v.begin() + n_hold);
    split.train.insert(split.train.end(), v.begin() + n_hold, v.end());
  }
  if (split.train.empty()) throw DataError("probe: no training utterances");
  if (split.test.empty()) throw DataError("probe: no held-out utterances");
  return split;
}

namespace {

void segment(const Matrix &q, int len, int label, std::vector<Matrix> &out, std::vector<int> &labels) {
  for (Eigen::Index s = 0; s + len <= q.rows(); s += len) {
    out.push_back(q.middleRows(s, len));
    labels.push_back(label);
  }
}

}  // namespace

Real probe_content(NoiseVC &net, const DatasetManifest &m, const EvalConfig &cfg) {
  if (cfg.segment_frames < 1) throw ConfigError("eval.segment_frames must be >= 1");
  const ProbeSplit split = probe_split(m, cfg.holdout_fraction, cfg.probe_seed);
  std::vector<Matrix> tr, te;
  std::vector<int> ytr, yte;
  auto encode = [&](const std::vector<const ManifestEntry *> &es, std::vector<Matrix> &out,
                    std::vector<int> &y) {
    for (const ManifestEntry *e : es) {
      const MelSpectrogram mel = read_mel(m.mel_file(*e));
      segment(net.encode_content(mel).second.quantized, cfg.segment_frames,
              split.label(e->speaker_id), out, y);
    }
  };
  encode(split.train, tr, ytr);
  encode(split.test, te, yte);
  if (tr.empty() || te.empty())
    throw DataError("probe: utterances are shorter than eval.segment_frames");
  ConvProbe probe(static_cast<int>(tr.front().cols()), static_cast<int>(split.speakers.size()),
                  ProbeConfig::from(cfg, ProbeKind::kConv3));
  probe.fit(tr, ytr);
  return probe.accuracy(te, yte);
}

Real probe_speaker(NoiseVC &net, const DatasetManifest &m, const EvalConfig &cfg) {
  const ProbeSplit split = probe_split(m, cfg.holdout_fraction, cfg.probe_seed);
  auto encode = [&](const std::vector<const ManifestEntry *> &es, std::vector<int> &y) {
    Matrix x(static_cast<Eigen::Index>(es.size()), net.config().code_dim);
    for (std::size_t i = 0; i < es.size(); ++i) {
      x.row(static_cast<Eigen::Index>(i)) = net.encode_speaker(read_mel(m.mel_file(*es[i])), 1).vector;
      y.push_back(split.label(es[i]->speaker_id));
    }
    return x;
  };
  std::vector<int> ytr, yte;
  const Matrix xtr = encode(split.train, ytr);
  const Matrix xte = encode(split.test, yte);
  LinearProbe probe(static_cast<int>(xtr.cols()), static_cast<int>(split.speakers.size()),
                    ProbeConfig::from(cfg, ProbeKind::kLinear1));
  probe.fit(xtr, ytr);
  return probe.accuracy(xte, yte);
}

Real l1_reconstruction(NoiseVC &net, const DatasetManifest &m) {
  Real sum = 0;
  double count = 0;
  for (const ManifestEntry &e : m.entries) {
    if (e.split != Split::kTest) continue;
    const MelSpectrogram mel = read_mel(m.mel_file(e));
    const ContentEmbedding q = net.encode_content(mel).second;
    const MelSpectrogram y = net.decode(q, net.encode_speaker(mel, mel.frames()));
    sum += (y.values - mel.values).cwiseAbs().sum();
    count += static_cast<double>(mel.values.size());
  }
  if (count == 0) throw DataError("l1_reconstruction: manifest has no test utterances");
  return sum / count;
}

// ------------------------------------------------------------------ embedding map

Matrix tsne(const Matrix &x, Real perplexity, int iterations, std::uint64_t seed) {
  const Eigen::Index n = x.rows();
  if (n < 2) throw DataError("t-SNE: need at least 2 points");
  if (iterations < 1) throw ConfigError("t-SNE: iterations must be >= 1");
  perplexity = std::clamp(perplexity, 1.0, std::max<Real>(1.0, (n - 1) / 3.0));

  Matrix d2(n, n);
  const Vector sq = x.rowwise().squaredNorm();
  d2 = (sq.replicate(1, n) + sq.transpose().replicate(n, 1) - 2.0 * x * x.transpose()).cwiseMax(0.0);

  // Conditional affinities with per-point precision found by bisection.
  Matrix p = Matrix::Zero(n, n);
  const Real target = std::log(perplexity);
  for (Eigen::Index i = 0; i < n; ++i) {
    Real beta = 1.0, lo = 0.0, hi = HUGE_VAL;
    RowVector row(n);
    for (int it = 0; it < 100; ++it) {
      Real sum = 0, wsum = 0;
      for (Eigen::Index j = 0; j < n; ++j) {
        row(j) = j == i ? 0.0 : std::exp(-beta * d2(i, j));
        sum += row(j);
        wsum += row(j) * d2(i, j);
      }
      sum = std::max(sum, 1e-300);
      const Real h = std::log(sum) + beta * wsum / sum;
      row /= sum;
      if (std::abs(h - target) < 1e-5) break;
      if (h > target) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2 : (beta + hi) / 2;
      } else {
        hi = beta;
        beta = (beta + lo) / 2;
      }
    }
    p.row(i) = row;
  }
  p = ((p + p.transpose()) / (2.0 * n)).cwiseMax(1e-12).eval();

  Rng rng(derive_seed(seed, 0x75e));
  Matrix y = normal_matrix(n, 2, 1e-4, rng);
  Matrix velocity = Matrix::Zero(n, 2), gains = Matrix::Ones(n, 2);
  const int exaggerate_until = std::min(250, iterations / 4);
  const Real lr = std::max<Real>(n / 12.0 / 4.0, 50.0);
  Matrix num(n, n), grad(n, 2);
  for (int it = 0; it < iterations; ++it) {
    const Real exag = it < exaggerate_until ? 12.0 : 1.0;
    const Real momentum = it < exaggerate_until ? 0.5 : 0.8;
    const Vector ys = y.rowwise().squaredNorm();
    num = (1.0 + (ys.replicate(1, n) + ys.transpose().replicate(n, 1) - 2.0 * y * y.transpose())
                     .cwiseMax(0.0)
                     .array())
              .inverse()
              .matrix();
    num.diagonal().setZero();
    const Real qsum = std::max(num.sum(), 1e-300);
    const Matrix w = ((exag * p).array() - num.array() / qsum).matrix().cwiseProduct(num);
    grad = 4.0 * (w.rowwise().sum().asDiagonal() * y - w * y);
    for (Eigen::Index k = 0; k < grad.size(); ++k) {
      Real &g = gains.data()[k];
      g = (grad.data()[k] > 0) != (velocity.data()[k] > 0) ? g + 0.2 : std::max(g * 0.8, 0.01);
    }
    velocity = momentum * velocity - lr * gains.cwiseProduct(grad);
    y += velocity;
    y.rowwise() -= y.colwise().mean();
  }
  return y;
}

std::optional<Real> silhouette_score(const Matrix &points, const std::vector<int> &labels) {
  const Eigen::Index n = points.rows();
  if (static_cast<Eigen::Index>(labels.size()) != n) throw ShapeError("silhouette: label count mismatch");
  std::map<int, std::vector<Eigen::Index>> clusters;
  for (Eigen::Index i = 0; i < n; ++i) clusters[labels[i]].push_back(i);
  if (clusters.size() < 2 || static_cast<Eigen::Index>(clusters.size()) >= n) return std::nullopt;
  Real total = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto &own = clusters[labels[i]];
    if (own.size() < 2) continue;  // singletons score 0
    Real a = 0, b = HUGE_VAL;
    for (const auto &[lab, members] : clusters) {
      Real s = 0;
      for (Eigen::Index j : members) s += (points.row(i) - points.row(j)).norm();
      if (lab == labels[i])
        a = s / static_cast<Real>(members.size() - 1);
      else
        b = std::min(b, s / static_cast<Real>(members.size()));
    }
    const Real denom = std::max(a, b);
    total += denom > 0 ? (b - a) / denom : 0.0;
  }
  return total / static_cast<Real>(n);
}

EmbeddingMap export_embedding_map(NoiseVC &net, const DatasetManifest &m, const fs::path &out_path,
                                  const EvalConfig &cfg) {
  std::vector<const ManifestEntry *> es;
  for (const ManifestEntry &e : m.entries)
    if (e.speaker_set == SpeakerSet::kUnseen) es.push_back(&e);
  if (es.empty())
    for (const ManifestEntry &e : m.entries) es.push_back(&e);
  if (es.size() < 2) throw DataError("embedding map: need at least 2 utterances");

  Matrix s(static_cast<Eigen::Index>(es.size()), net.config().code_dim);
  EmbeddingMap map;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < es.size(); ++i) {
    s.row(static_cast<Eigen::Index>(i)) = net.encode_speaker(read_mel(m.mel_file(*es[i])), 1).vector;
    map.labels.push_back(es[i]->speaker_id);
  }
  map.points = tsne(s, cfg.tsne_perplexity, cfg.tsne_iters, cfg.probe_seed);

  names = map.labels;
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  std::vector<int> ids;
  for (const std::string &l : map.labels)
    ids.push_back(static_cast<int>(std::lower_bound(names.begin(), names.end(), l) - names.begin()));
  for (std::size_t c = 0; c < names.size(); ++c) {
    RowVector sum = RowVector::Zero(2);
    int k = 0;
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (ids[i] == static_cast<int>(c)) {
        sum += map.points.row(static_cast<Eigen::Index>(i));
        ++k;
      }
    map.centroids.emplace_back(names[c], sum / k);
  }
  map.silhouette = silhouette_score(map.points, ids);

  std::ostringstream os;
  for (std::size_t i = 0; i < es.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    os << json{{"x", map.points(r, 0)}, {"y", map.points(r, 1)}, {"speaker_id", map.labels[i]}}.dump()
       << '\n';
  }
  for (const auto &[name, c] : map.centroids)
    os << json{{"x", c(0)}, {"y", c(1)}, {"speaker_id", name}, {"centroid", true}}.dump() << '\n';
  json tail;
  tail["silhouette"] = map.silhouette ? json(*map.silhouette) : json(nullptr);
  os << tail.dump() << '\n';
  write_file_atomic(out_path, os.str());
  return map;
}

// ------------------------------------------------------------------ report

std::string format_report(const DisentanglementReport &r) {
  auto num = [](Real v) {
    std::ostringstream os;
    os.precision(6);
    os << std::fixed << v;
    return os.str();
  };
  std::ostringstream os;
  os << "model_tag = " << r.model_tag << '\n'
     << "content_probe_speaker_acc = " << num(r.content_probe_speaker_acc) << '\n'
     << "speaker_probe_acc = " << num(r.speaker_probe_acc) << '\n'
     << "l1_reconstruction = " << num(r.l1_reconstruction) << '\n'
     << "alpha = " << (r.alpha ? num(*r.alpha) : "n/a") << '\n'
     << "silhouette = " << (r.silhouette ? num(*r.silhouette) : "n/a") << '\n';
  return os.str();
}

std::uint64_t parameter_hash(NoiseVC &net) {
  std::uint64_t h = 1469598103934665603ULL;
  for (Param *p : net.parameters()) {
    h = fnv1a(h, p->name.data(), p->name.size());
    h = fnv1a(h, p->value.data(), sizeof(Real) * static_cast<std::size_t>(p->value.size()));
  }
  for (const Buffer &b : net.buffers())
    h = fnv1a(h, b.value->data(), sizeof(Real) * static_cast<std::size_t>(b.value->size()));
  return h;
}

std::string model_tag(const ModelConfig &m, Real alpha) {
  std::string t = "IN+VQ";
  if (m.use_cpc) t += "+CPC";
  if (alpha > 0) {
    std::ostringstream os;
    os << "+aug(alpha=" << alpha << ")";
    t += os.str();
  }
  return t;
}

DisentanglementReport evaluate(const fs::path &checkpoint_file, const DatasetManifest &m,
                               const EvalConfig &cfg, const fs::path *map_out) {
  const RunConfig rc = RunConfig::parse(checkpoint_config_text(checkpoint_file));
  std::unique_ptr<NoiseVC> net = load_model(checkpoint_file);
  const std::uint64_t before = parameter_hash(*net);
  DisentanglementReport r;
  r.alpha = rc.get_real("augment.alpha");
  r.model_tag = model_tag(net->config(), *r.alpha);
  r.content_probe_speaker_acc = probe_content(*net, m, cfg);
  r.speaker_probe_acc = probe_speaker(*net, m, cfg);
  r.l1_reconstruction = l1_reconstruction(*net, m);
  if (map_out) r.silhouette = export_embedding_map(*net, m, *map_out, cfg).silhouette;
  if (parameter_hash(*net) != before)
    throw NumericalError("evaluation modified model parameters");
  return r;
}

}  // namespace noisevc
