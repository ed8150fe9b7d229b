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

#ifndef NOISEVC_CONFIG_HPP_
#define NOISEVC_CONFIG_HPP_

#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "noisevc/augment.hpp"
#include "noisevc/mel.hpp"
#include "noisevc/model.hpp"
#include "noisevc/synth.hpp"

namespace noisevc {

struct TrainConfig;
struct EvalConfig;

// Flat, schema-checked key/value configuration. Keys are dotted
// (`section.name`); the file format is
//
//   # comment
//   preset = desk
//   [augment]
//   alpha = 0.5
//
// Section headers prefix the keys that follow them. Unknown keys, values of
// the wrong type and out-of-range values raise ConfigError naming the key.
class RunConfig {
 public:
  using Value = std::variant<long long, double, bool, std::string>;

  // All schema defaults for `preset` ("desk" or "paper").
  static RunConfig defaults(const std::string &preset = "desk");
  // Parses `text`, then applies `overrides` ("key=value") last.
  static RunConfig parse(const std::string &text, const std::vector<std::string> &overrides = {});

  const std::string &preset() const { return preset_; }

  long long get_int(const std::string &key) const;
  double get_real(const std::string &key) const;
  bool get_bool(const std::string &key) const;
  const std::string &get_string(const std::string &key) const;
  // Assigns from text with full type and range checking.
  void set(const std::string &key, const std::string &value);

  // Canonical text: preset line, then every key sorted; round-trips exactly.
  std::string serialize() const;
  std::string value_text(const std::string &key) const;

  MelConfig mel() const;
  SyntheticSpec synth() const;
  ModelConfig model() const;
  AugmentPolicy augment() const;
  TrainConfig train() const;
  EvalConfig eval() const;

  // Reflects struct values back into keys (used for checkpoint snapshots).
  void set_model(const ModelConfig &m);
  void set_train(const TrainConfig &t);

  static std::vector<std::string> keys();

 private:
  std::string preset_ = "desk";
  std::map<std::string, Value> values_;
};

RunConfig load_config(const std::filesystem::path &path,
                      const std::vector<std::string> &overrides = {});

}  // namespace noisevc

#endif  // NOISEVC_CONFIG_HPP_
