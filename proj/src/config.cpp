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

#include "noisevc/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <sstream>

#include "noisevc/error.hpp"
#include "noisevc/evalsuite.hpp"
#include "noisevc/tensor_io.hpp"
#include "noisevc/trainer.hpp"

namespace noisevc {

namespace {

enum class Kind { kInt, kReal, kBool, kString };

struct KeySpec {
  Kind kind;
  RunConfig::Value desk;
  RunConfig::Value paper;
  // Returns an error message or empty.
  std::function<std::string(const RunConfig::Value &)> check;
};

using V = RunConfig::Value;

std::function<std::string(const V &)> int_at_least(long long lo) {
  return [lo](const V &v) {
    return std::get<long long>(v) >= lo ? std::string() : "must be >= " + std::to_string(lo);
  };
}

std::function<std::string(const V &)> real_in(double lo, double hi) {
  return [lo, hi](const V &v) {
    const double x = std::get<double>(v);
    if (!std::isfinite(x) || x < lo || x > hi) {
      std::ostringstream os;
      os << "must be in [" << lo << ", " << hi << "]";
      return os.str();
    }
    return std::string();
  };
}

std::function<std::string(const V &)> real_at_least(double lo) {
  return real_in(lo, HUGE_VAL);
}

std::string odd_kernel(const V &v) {
  const long long k = std::get<long long>(v);
  return (k >= 1 && k % 2 == 1) ? std::string() : "must be odd and >= 1";
}

std::string any(const V &) { return {}; }

std::string loss_terms(const V &v) {
  std::stringstream ss(std::get<std::string>(v));
  std::string t;
  while (std::getline(ss, t, ',')) {
    if (t != "rec" && t != "codebook" && t != "commit" && t != "cpc")
      return "unknown loss term '" + t + "' (expected rec, codebook, commit, cpc)";
  }
  return {};
}

const std::map<std::string, KeySpec> &schema() {
  static const std::map<std::string, KeySpec> s = [] {
    const ModelConfig d = ModelConfig::desk();
    const ModelConfig p = ModelConfig::paper();
    const SyntheticSpec sy;
    std::map<std::string, KeySpec> m;
    auto same = [&](const std::string &key, Kind kind, V v, auto check) {
      m[key] = KeySpec{kind, v, v, check};
    };
    auto both = [&](const std::string &key, Kind kind, V dv, V pv, auto check) {
      m[key] = KeySpec{kind, dv, pv, check};
    };

    same("features.sample_rate", Kind::kInt, 22050LL, int_at_least(1));
    same("features.n_mels", Kind::kInt, 80LL, int_at_least(1));
    same("features.window", Kind::kInt, 1024LL, int_at_least(2));
    same("features.hop", Kind::kInt, 128LL, int_at_least(1));
    same("features.trim_db", Kind::kReal, -40.0, real_in(-200.0, 0.0));
    same("features.unseen", Kind::kInt, 20LL, int_at_least(0));
    same("features.seed", Kind::kInt, 0LL, int_at_least(0));

    same("synth.speakers", Kind::kInt, static_cast<long long>(sy.n_speakers), int_at_least(2));
    same("synth.symbols", Kind::kInt, static_cast<long long>(sy.n_content_symbols), int_at_least(1));
    same("synth.utts", Kind::kInt, 40LL, int_at_least(1));
    same("synth.min_len", Kind::kInt, static_cast<long long>(sy.min_len), int_at_least(1));
    same("synth.max_len", Kind::kInt, static_cast<long long>(sy.max_len), int_at_least(1));
    same("synth.min_dur", Kind::kInt, static_cast<long long>(sy.min_dur), int_at_least(1));
    same("synth.max_dur", Kind::kInt, static_cast<long long>(sy.max_dur), int_at_least(1));
    same("synth.seed", Kind::kInt, 0LL, int_at_least(0));
    same("synth.unseen_fraction", Kind::kReal, sy.unseen_fraction, real_in(0.0, 1.0));
    same("synth.contour_amplitude", Kind::kReal, sy.contour_amplitude, real_at_least(0.0));
    same("synth.gain_spread", Kind::kReal, sy.gain_spread, real_at_least(0.0));
    same("synth.offset_spread", Kind::kReal, sy.offset_spread, real_at_least(0.0));
    same("synth.frame_noise", Kind::kReal, sy.frame_noise, real_at_least(0.0));
    same("synth.template_scale", Kind::kReal, sy.template_scale, real_at_least(0.0));

    same("model.kernel", Kind::kInt, static_cast<long long>(d.kernel), odd_kernel);
    same("model.content_layers", Kind::kInt, static_cast<long long>(d.content_layers), int_at_least(1));
    both("model.content_channels", Kind::kInt, static_cast<long long>(d.content_channels),
         static_cast<long long>(p.content_channels), int_at_least(1));
    same("model.speaker_layers", Kind::kInt, static_cast<long long>(d.speaker_layers), int_at_least(1));
    both("model.speaker_channels", Kind::kInt, static_cast<long long>(d.speaker_channels),
         static_cast<long long>(p.speaker_channels), int_at_least(1));
    same("model.decoder_layers", Kind::kInt, static_cast<long long>(d.decoder_layers), int_at_least(1));
    both("model.decoder_channels", Kind::kInt, static_cast<long long>(d.decoder_channels),
         static_cast<long long>(p.decoder_channels), int_at_least(1));
    both("model.decoder_lstm", Kind::kInt, static_cast<long long>(d.decoder_lstm),
         static_cast<long long>(p.decoder_lstm), int_at_least(1));
    both("model.codebook_size", Kind::kInt, static_cast<long long>(d.codebook_size),
         static_cast<long long>(p.codebook_size), int_at_least(1));
    both("model.code_dim", Kind::kInt, static_cast<long long>(d.code_dim),
         static_cast<long long>(p.code_dim), int_at_least(1));
    both("model.context_dim", Kind::kInt, static_cast<long long>(d.context_dim),
         static_cast<long long>(p.context_dim), int_at_least(1));
    both("model.cpc_steps", Kind::kInt, static_cast<long long>(d.cpc_steps),
         static_cast<long long>(p.cpc_steps), int_at_least(1));
    both("model.negatives", Kind::kInt, static_cast<long long>(d.negatives),
         static_cast<long long>(p.negatives), int_at_least(1));
    same("model.negatives_same_utterance", Kind::kBool, false, any);
    same("model.use_cpc", Kind::kBool, true, any);
    same("model.leaky_slope", Kind::kReal, d.leaky_slope, real_in(0.0, 1.0));
    same("model.seed", Kind::kInt, 0LL, int_at_least(0));

    same("augment.alpha", Kind::kReal, 0.5, real_in(0.0, 1.0));
    same("augment.sigma", Kind::kReal, 0.1, real_at_least(0.0));
    same("augment.seed", Kind::kInt, 0LL, int_at_least(0));

    same("train.batch_size", Kind::kInt, 8LL, int_at_least(1));
    same("train.steps", Kind::kInt, 5000LL, int_at_least(0));
    both("train.learning_rate", Kind::kReal, 1e-3, 1e-4, real_at_least(0.0));
    same("train.lr_half_life", Kind::kInt, 2000LL, int_at_least(0));
    same("train.beta", Kind::kReal, 0.25, real_at_least(0.0));
    same("train.seed", Kind::kInt, 0LL, int_at_least(0));
    same("train.checkpoint_every", Kind::kInt, 1000LL, int_at_least(1));
    same("train.crop_frames", Kind::kInt, 128LL, int_at_least(2));
    same("train.cpc_weight", Kind::kReal, 1.0, real_at_least(0.0));
    same("train.terms", Kind::kString, std::string("rec,codebook,commit,cpc"), loss_terms);

    same("eval.probe_epochs", Kind::kInt, 20LL, int_at_least(1));
    same("eval.probe_lr", Kind::kReal, 1e-3, real_at_least(0.0));
    same("eval.probe_channels", Kind::kInt, 64LL, int_at_least(1));
    same("eval.probe_batch", Kind::kInt, 16LL, int_at_least(1));
    same("eval.probe_seed", Kind::kInt, 0LL, int_at_least(0));
    same("eval.segment_frames", Kind::kInt, 32LL, int_at_least(1));
    same("eval.holdout_fraction", Kind::kReal, 0.25, real_in(0.0, 1.0));
    same("eval.tsne_perplexity", Kind::kReal, 15.0, real_at_least(1.0));
    same("eval.tsne_iters", Kind::kInt, 500LL, int_at_least(1));

    same("convert.gl_iters", Kind::kInt, 60LL, int_at_least(1));
    return m;
  }();
  return s;
}

const KeySpec &spec_for(const std::string &key) {
  const auto &s = schema();
  const auto it = s.find(key);
  if (it == s.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

V parse_value(const std::string &key, Kind kind, const std::string &text) {
  auto bad = [&](const char *what) {
    return ConfigError("config key '" + key + "': expected " + what + ", got '" + text + "'");
  };
  switch (kind) {
    case Kind::kInt: {
      if (text.empty()) throw bad("an integer");
      char *end = nullptr;
      errno = 0;
      const long long v = std::strtoll(text.c_str(), &end, 10);
      if (*end != '\0' || errno == ERANGE) throw bad("an integer");
      return v;
    }
    case Kind::kReal: {
      if (text.empty()) throw bad("a number");
      char *end = nullptr;
      errno = 0;
      const double v = std::strtod(text.c_str(), &end);
      if (*end != '\0' || errno == ERANGE || !std::isfinite(v)) throw bad("a finite number");
      return v;
    }
    case Kind::kBool:
      if (text == "true" || text == "1") return true;
      if (text == "false" || text == "0") return false;
      throw bad("true or false");
    case Kind::kString:
      return text;
  }
  throw bad("a value");
}

std::string format_value(const V &v) {
  if (const auto *i = std::get_if<long long>(&v)) return std::to_string(*i);
  if (const auto *b = std::get_if<bool>(&v)) return *b ? "true" : "false";
  if (const auto *s = std::get_if<std::string>(&v)) return *s;
  // Shortest text that parses back to the same double.
  const double x = std::get<double>(v);
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

void check_preset(const std::string &p) {
  if (p != "desk" && p != "paper")
    throw ConfigError("config key 'preset': expected desk or paper, got '" + p + "'");
}

}  // namespace

RunConfig RunConfig::defaults(const std::string &preset) {
  check_preset(preset);
  RunConfig c;
  c.preset_ = preset;
  for (const auto &[key, spec] : schema()) c.values_[key] = preset == "paper" ? spec.paper : spec.desk;
  return c;
}

RunConfig RunConfig::parse(const std::string &text, const std::vector<std::string> &overrides) {
  struct Line {
    int number;
    std::string key, value;
  };
  std::vector<Line> lines;
  std::string preset = "desk";
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int n = 0;
  while (std::getline(in, raw)) {
    ++n;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3)
        throw ConfigError("config line " + std::to_string(n) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(n) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty() && key == "preset") {
      check_preset(value);
      preset = value;
      continue;
    }
    if (!section.empty()) key = section + "." + key;
    lines.push_back({n, key, value});
  }
  for (const auto &o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "': expected key=value");
    const std::string key = trim(o.substr(0, eq));
    const std::string value = trim(o.substr(eq + 1));
    if (key == "preset") {
      check_preset(value);
      preset = value;
    } else {
      lines.push_back({0, key, value});
    }
  }
  RunConfig c = defaults(preset);
  for (const auto &l : lines) c.set(l.key, l.value);
  return c;
}

void RunConfig::set(const std::string &key, const std::string &value) {
  const KeySpec &spec = spec_for(key);
  V v = parse_value(key, spec.kind, value);
  const std::string err = spec.check(v);
  if (!err.empty()) throw ConfigError("config key '" + key + "' " + err + ", got '" + value + "'");
  // The "paper" preset fixes the quantizer, CPC and commitment constants.
  static const char *const kPinned[] = {"model.codebook_size", "model.code_dim", "model.cpc_steps",
                                        "model.negatives", "train.beta"};
  if (preset_ == "paper" && std::find(std::begin(kPinned), std::end(kPinned), key) != std::end(kPinned) &&
      v != spec.paper)
    throw ConfigError("config key '" + key + "' is pinned to " + format_value(spec.paper) +
                      " by the paper preset, got '" + value + "'");
  values_[key] = std::move(v);
}

long long RunConfig::get_int(const std::string &key) const {
  spec_for(key);
  return std::get<long long>(values_.at(key));
}

double RunConfig::get_real(const std::string &key) const {
  spec_for(key);
  return std::get<double>(values_.at(key));
}

bool RunConfig::get_bool(const std::string &key) const {
  spec_for(key);
  return std::get<bool>(values_.at(key));
}

const std::string &RunConfig::get_string(const std::string &key) const {
  spec_for(key);
  return std::get<std::string>(values_.at(key));
}

std::string RunConfig::value_text(const std::string &key) const {
  spec_for(key);
  return format_value(values_.at(key));
}

std::string RunConfig::serialize() const {
  std::ostringstream os;
  os << "preset = " << preset_ << '\n';
  for (const auto &[key, v] : values_) os << key << " = " << format_value(v) << '\n';
  return os.str();
}

std::vector<std::string> RunConfig::keys() {
  std::vector<std::string> k;
  for (const auto &[key, spec] : schema()) k.push_back(key);
  return k;
}

MelConfig RunConfig::mel() const {
  MelConfig m;
  m.sample_rate = static_cast<int>(get_int("features.sample_rate"));
  m.n_mels = static_cast<int>(get_int("features.n_mels"));
  m.window_samples = static_cast<int>(get_int("features.window"));
  m.hop_samples = static_cast<int>(get_int("features.hop"));
  return m;
}

SyntheticSpec RunConfig::synth() const {
  SyntheticSpec s;
  s.n_speakers = static_cast<int>(get_int("synth.speakers"));
  s.n_content_symbols = static_cast<int>(get_int("synth.symbols"));
  s.min_len = static_cast<int>(get_int("synth.min_len"));
  s.max_len = static_cast<int>(get_int("synth.max_len"));
  s.min_dur = static_cast<int>(get_int("synth.min_dur"));
  s.max_dur = static_cast<int>(get_int("synth.max_dur"));
  s.seed = static_cast<std::uint64_t>(get_int("synth.seed"));
  s.unseen_fraction = get_real("synth.unseen_fraction");
  s.contour_amplitude = get_real("synth.contour_amplitude");
  s.gain_spread = get_real("synth.gain_spread");
  s.offset_spread = get_real("synth.offset_spread");
  s.frame_noise = get_real("synth.frame_noise");
  s.template_scale = get_real("synth.template_scale");
  s.n_mels = static_cast<int>(get_int("features.n_mels"));
  s.validate();
  return s;
}

ModelConfig RunConfig::model() const {
  ModelConfig m = preset_ == "paper" ? ModelConfig::paper() : ModelConfig::desk();
  m.n_mels = static_cast<int>(get_int("features.n_mels"));
  m.kernel = static_cast<int>(get_int("model.kernel"));
  m.content_layers = static_cast<int>(get_int("model.content_layers"));
  m.content_channels = static_cast<int>(get_int("model.content_channels"));
  m.speaker_layers = static_cast<int>(get_int("model.speaker_layers"));
  m.speaker_channels = static_cast<int>(get_int("model.speaker_channels"));
  m.decoder_layers = static_cast<int>(get_int("model.decoder_layers"));
  m.decoder_channels = static_cast<int>(get_int("model.decoder_channels"));
  m.decoder_lstm = static_cast<int>(get_int("model.decoder_lstm"));
  m.codebook_size = static_cast<int>(get_int("model.codebook_size"));
  m.code_dim = static_cast<int>(get_int("model.code_dim"));
  m.context_dim = static_cast<int>(get_int("model.context_dim"));
  m.cpc_steps = static_cast<int>(get_int("model.cpc_steps"));
  m.negatives = static_cast<int>(get_int("model.negatives"));
  m.negatives_same_utterance = get_bool("model.negatives_same_utterance");
  m.use_cpc = get_bool("model.use_cpc");
  m.leaky_slope = get_real("model.leaky_slope");
  m.seed = static_cast<std::uint64_t>(get_int("model.seed"));
  m.validate();
  return m;
}

AugmentPolicy RunConfig::augment() const {
  AugmentPolicy p;
  p.alpha = get_real("augment.alpha");
  p.sigma = get_real("augment.sigma");
  p.seed = static_cast<std::uint64_t>(get_int("augment.seed"));
  p.validate();
  return p;
}

TrainConfig RunConfig::train() const {
  TrainConfig t;
  t.batch_size = static_cast<int>(get_int("train.batch_size"));
  t.steps = static_cast<int>(get_int("train.steps"));
  t.learning_rate = get_real("train.learning_rate");
  t.lr_half_life = static_cast<int>(get_int("train.lr_half_life"));
  t.beta = get_real("train.beta");
  t.seed = static_cast<std::uint64_t>(get_int("train.seed"));
  t.checkpoint_every = static_cast<int>(get_int("train.checkpoint_every"));
  t.crop_frames = static_cast<int>(get_int("train.crop_frames"));
  t.cpc_weight = get_real("train.cpc_weight");
  t.preset = preset_;
  t.policy = augment();
  t.model = model();
  LossTerms terms{false, false, false, false};
  std::stringstream ss(get_string("train.terms"));
  std::string term;
  while (std::getline(ss, term, ',')) {
    if (term == "rec") terms.reconstruction = true;
    if (term == "codebook") terms.codebook = true;
    if (term == "commit") terms.commitment = true;
    if (term == "cpc") terms.cpc = true;
  }
  t.terms = terms;
  t.validate();
  return t;
}

EvalConfig RunConfig::eval() const {
  EvalConfig e;
  e.probe_epochs = static_cast<int>(get_int("eval.probe_epochs"));
  e.probe_lr = get_real("eval.probe_lr");
  e.probe_channels = static_cast<int>(get_int("eval.probe_channels"));
  e.probe_batch = static_cast<int>(get_int("eval.probe_batch"));
  e.probe_seed = static_cast<std::uint64_t>(get_int("eval.probe_seed"));
  e.segment_frames = static_cast<int>(get_int("eval.segment_frames"));
  e.holdout_fraction = get_real("eval.holdout_fraction");
  e.tsne_perplexity = get_real("eval.tsne_perplexity");
  e.tsne_iters = static_cast<int>(get_int("eval.tsne_iters"));
  return e;
}

void RunConfig::set_model(const ModelConfig &m) {
  m.validate();
  values_["features.n_mels"] = static_cast<long long>(m.n_mels);
  values_["model.kernel"] = static_cast<long long>(m.kernel);
  values_["model.content_layers"] = static_cast<long long>(m.content_layers);
  values_["model.content_channels"] = static_cast<long long>(m.content_channels);
  values_["model.speaker_layers"] = static_cast<long long>(m.speaker_layers);
  values_["model.speaker_channels"] = static_cast<long long>(m.speaker_channels);
  values_["model.decoder_layers"] = static_cast<long long>(m.decoder_layers);
  values_["model.decoder_channels"] = static_cast<long long>(m.decoder_channels);
  values_["model.decoder_lstm"] = static_cast<long long>(m.decoder_lstm);
  values_["model.codebook_size"] = static_cast<long long>(m.codebook_size);
  values_["model.code_dim"] = static_cast<long long>(m.code_dim);
  values_["model.context_dim"] = static_cast<long long>(m.context_dim);
  values_["model.cpc_steps"] = static_cast<long long>(m.cpc_steps);
  values_["model.negatives"] = static_cast<long long>(m.negatives);
  values_["model.negatives_same_utterance"] = m.negatives_same_utterance;
  values_["model.use_cpc"] = m.use_cpc;
  values_["model.leaky_slope"] = m.leaky_slope;
  values_["model.seed"] = static_cast<long long>(m.seed);
}

void RunConfig::set_train(const TrainConfig &t) {
  t.validate();
  check_preset(t.preset);
  preset_ = t.preset;
  values_["train.batch_size"] = static_cast<long long>(t.batch_size);
  values_["train.steps"] = static_cast<long long>(t.steps);
  values_["train.learning_rate"] = t.learning_rate;
  values_["train.lr_half_life"] = static_cast<long long>(t.lr_half_life);
  values_["train.beta"] = t.beta;
  values_["train.seed"] = static_cast<long long>(t.seed);
  values_["train.checkpoint_every"] = static_cast<long long>(t.checkpoint_every);
  values_["train.crop_frames"] = static_cast<long long>(t.crop_frames);
  values_["train.cpc_weight"] = t.cpc_weight;
  std::string terms;
  auto add = [&](bool on, const char *name) {
    if (!on) return;
    if (!terms.empty()) terms += ',';
    terms += name;
  };
  add(t.terms.reconstruction, "rec");
  add(t.terms.codebook, "codebook");
  add(t.terms.commitment, "commit");
  add(t.terms.cpc, "cpc");
  values_["train.terms"] = terms;
  values_["augment.alpha"] = t.policy.alpha;
  values_["augment.sigma"] = t.policy.sigma;
  values_["augment.seed"] = static_cast<long long>(t.policy.seed);
  set_model(t.model);
}

RunConfig load_config(const std::filesystem::path &path, const std::vector<std::string> &overrides) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error &) {
    throw ConfigError("cannot read config file " + path.string());
  }
  return RunConfig::parse(text, overrides);
}

}  // namespace noisevc
