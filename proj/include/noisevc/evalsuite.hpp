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

#ifndef NOISEVC_EVALSUITE_HPP_
#define NOISEVC_EVALSUITE_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "noisevc/layers.hpp"
#include "noisevc/manifest.hpp"
#include "noisevc/model.hpp"

namespace noisevc {

struct EvalConfig {
  int probe_epochs = 20;
  Real probe_lr = 1e-3;
  int probe_channels = 64;
  int probe_batch = 16;
  std::uint64_t probe_seed = 0;
  int segment_frames = 32;        // content-probe examples are fixed-length segments
  Real holdout_fraction = 0.25;   // per-speaker share of utterances held out for scoring
  Real tsne_perplexity = 15.0;
  int tsne_iters = 500;
};

enum class ProbeKind { kConv3, kLinear1 };

struct ProbeConfig {
  ProbeKind kind = ProbeKind::kConv3;
  int epochs = 20;
  Real learning_rate = 1e-3;
  std::uint64_t seed = 0;
  int channels = 64;
  int kernel = 5;
  int batch = 16;

  static ProbeConfig from(const EvalConfig &e, ProbeKind kind);
};

// Per-channel standardization fitted on training data.
struct FeatureScaler {
  RowVector mean, inv_std;
  bool fitted() const { return mean.size() > 0; }
  void fit(const Matrix &x);
  Matrix apply(const Matrix &x) const;
};

// Softmax classifier on fixed-size vectors.
class LinearProbe {
 public:
  LinearProbe(int in_features, int n_classes, const ProbeConfig &cfg);
  void fit(const Matrix &x, const std::vector<int> &labels);
  std::vector<int> predict(const Matrix &x) const;
  Real accuracy(const Matrix &x, const std::vector<int> &labels) const;  // percent

 private:
  ProbeConfig cfg_;
  int n_classes_;
  FeatureScaler scaler_;
  Linear layer_;
};

// Three stride-1 convolutions (ReLU between), logits averaged over time.
class ConvProbe {
 public:
  ConvProbe(int in_channels, int n_classes, const ProbeConfig &cfg);
  // All sequences must share one length.
  void fit(const std::vector<Matrix> &seqs, const std::vector<int> &labels);
  int predict(const Matrix &seq);
  Real accuracy(const std::vector<Matrix> &seqs, const std::vector<int> &labels);  // percent

 private:
  Matrix logits(const SeqBatch &x);
  ProbeConfig cfg_;
  int n_classes_;
  FeatureScaler scaler_;
  Conv1d c1_, c2_, c3_;
  Relu r1_, r2_;
};

// Probe train/test partition over a manifest's utterances. Test-split
// entries of seen speakers are always held out; `holdout_fraction` of every
// seen speaker's train entries joins them.
struct ProbeSplit {
  std::vector<const ManifestEntry *> train, test;
  std::vector<std::string> speakers;  // class index -> speaker id
  int label(const std::string &speaker) const;
};
ProbeSplit probe_split(const DatasetManifest &m, Real holdout_fraction, std::uint64_t seed);

// Speaker accuracy (percent) of a conv3 probe on Q segments. Lower means
// better disentanglement.
Real probe_content(NoiseVC &net, const DatasetManifest &m, const EvalConfig &cfg);
// Speaker accuracy (percent) of a linear probe on S vectors. Higher is better.
Real probe_speaker(NoiseVC &net, const DatasetManifest &m, const EvalConfig &cfg);
// Mean |x - x_hat| over the test split, speaker input = original.
Real l1_reconstruction(NoiseVC &net, const DatasetManifest &m);

struct EmbeddingMap {
  Matrix points;  // N x 2
  std::vector<std::string> labels;
  std::vector<std::pair<std::string, RowVector>> centroids;
  std::optional<Real> silhouette;  // empty when undefined
};

// Exact t-SNE to two dimensions.
Matrix tsne(const Matrix &x, Real perplexity, int iterations, std::uint64_t seed);
// Mean silhouette coefficient; empty when no cluster has two members or
// there are fewer than two clusters.
std::optional<Real> silhouette_score(const Matrix &points, const std::vector<int> &labels);

// S for every unseen-speaker utterance (all speakers when none are unseen),
// embedded in 2-D; writes JSON lines {x, y, speaker_id}, then centroid lines
// and a final {"silhouette": value|null} record.
EmbeddingMap export_embedding_map(NoiseVC &net, const DatasetManifest &m,
                                  const std::filesystem::path &out_path, const EvalConfig &cfg);

struct DisentanglementReport {
  Real content_probe_speaker_acc = 0;
  Real speaker_probe_acc = 0;
  Real l1_reconstruction = 0;
  std::string model_tag;
  std::optional<Real> alpha;
  std::optional<Real> silhouette;
};

std::string format_report(const DisentanglementReport &r);

std::uint64_t parameter_hash(NoiseVC &net);
std::string model_tag(const ModelConfig &m, Real alpha);

// Loads a checkpoint and runs every probe plus the reconstruction metric;
// also writes the embedding map when `map_out` is given. Throws if the
// model's parameters change along the way.
DisentanglementReport evaluate(const std::filesystem::path &checkpoint_file,
                               const DatasetManifest &m, const EvalConfig &cfg,
                               const std::filesystem::path *map_out = nullptr);

}  // namespace noisevc

#endif  // NOISEVC_EVALSUITE_HPP_
