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

#include "noisevc/manifest.hpp"

#include "json.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <tuple>

#include "noisevc/error.hpp"
#include "noisevc/tensor.hpp"
#include "noisevc/tensor_io.hpp"

namespace noisevc {

namespace fs = std::filesystem;
using nlohmann::json;

std::set<std::string> DatasetManifest::seen_speakers() const {
  std::set<std::string> out;
  for (const auto &e : entries)
    if (e.speaker_set == SpeakerSet::kSeen) out.insert(e.speaker_id);
  return out;
}

std::set<std::string> DatasetManifest::unseen_speakers() const {
  std::set<std::string> out;
  for (const auto &e : entries)
    if (e.speaker_set == SpeakerSet::kUnseen) out.insert(e.speaker_id);
  return out;
}

std::vector<const ManifestEntry *> DatasetManifest::select(Split split) const {
  std::vector<const ManifestEntry *> out;
  for (const auto &e : entries)
    if (e.split == split) out.push_back(&e);
  return out;
}

std::vector<const ManifestEntry *> DatasetManifest::select(SpeakerSet set) const {
  std::vector<const ManifestEntry *> out;
  for (const auto &e : entries)
    if (e.speaker_set == set) out.push_back(&e);
  return out;
}

DatasetManifest split_speakers(std::vector<ManifestEntry> entries, int n_unseen,
                               std::uint64_t seed) {
  std::sort(entries.begin(), entries.end(), [](const auto &a, const auto &b) {
    return std::tie(a.speaker_id, a.utterance_id) < std::tie(b.speaker_id, b.utterance_id);
  });
  std::map<std::string, std::vector<std::size_t>> by_speaker;
  for (std::size_t i = 0; i < entries.size(); ++i)
    by_speaker[entries[i].speaker_id].push_back(i);
  if (n_unseen < 0) throw ConfigError("number of unseen speakers must be >= 0");
  if (static_cast<int>(by_speaker.size()) < n_unseen + 1)
    throw ConfigError("corpus has " + std::to_string(by_speaker.size()) +
                      " speakers; need at least " + std::to_string(n_unseen + 1) +
                      " for " + std::to_string(n_unseen) + " unseen");

  std::vector<std::string> speakers;
  for (const auto &kv : by_speaker) speakers.push_back(kv.first);
  Rng rng(derive_seed(seed, 0x73706c6974ULL));
  shuffle(speakers, rng);
  const std::set<std::string> unseen(speakers.begin(), speakers.begin() + n_unseen);

  for (const auto &[spk, idx] : by_speaker) {
    if (unseen.count(spk)) {
      for (std::size_t i : idx) {
        entries[i].split = Split::kTest;
        entries[i].speaker_set = SpeakerSet::kUnseen;
      }
      continue;
    }
    for (std::size_t i : idx) {
      entries[i].split = Split::kTrain;
      entries[i].speaker_set = SpeakerSet::kSeen;
    }
    entries[idx[uniform_index(rng, idx.size())]].split = Split::kTest;
  }
  DatasetManifest m;
  m.entries = std::move(entries);
  return m;
}

DatasetManifest build_manifest(const fs::path &corpus_dir, int n_unseen,
                               std::uint64_t seed) {
  if (!fs::is_directory(corpus_dir))
    throw DataError("corpus directory not found: " + corpus_dir.string());
  std::vector<ManifestEntry> entries;
  for (const auto &spk_dir : fs::directory_iterator(corpus_dir)) {
    if (!spk_dir.is_directory()) continue;
    for (const auto &f : fs::directory_iterator(spk_dir.path())) {
      if (f.path().extension() != ".mel") continue;
      TensorHeader h = read_tensor_header(f.path());
      if (h.dims.size() != 2) throw DataError("mel file must be rank 2: " + f.path().string());
      ManifestEntry e;
      e.speaker_id = spk_dir.path().filename().string();
      e.utterance_id = f.path().stem().string();
      e.mel_path = fs::relative(f.path(), corpus_dir).generic_string();
      e.n_frames = static_cast<int>(h.dims[1]);
      entries.push_back(std::move(e));
    }
  }
  DatasetManifest m = split_speakers(std::move(entries), n_unseen, seed);
  m.root = corpus_dir;
  return m;
}

std::string serialize_manifest(const DatasetManifest &m) {
  std::ostringstream out;
  for (const auto &e : m.entries) {
    json j;
    j["utterance_id"] = e.utterance_id;
    j["speaker_id"] = e.speaker_id;
    j["mel_path"] = e.mel_path;
    j["n_frames"] = e.n_frames;
    j["split"] = e.split == Split::kTrain ? "train" : "test";
    j["speaker_set"] = e.speaker_set == SpeakerSet::kSeen ? "seen" : "unseen";
    out << j.dump() << '\n';
  }
  return out.str();
}

void write_manifest(const fs::path &path, const DatasetManifest &m) {
  write_file_atomic(path, serialize_manifest(m));
}

DatasetManifest read_manifest(const fs::path &path) {
  const std::string text = read_text_file(path);
  DatasetManifest m;
  m.root = path.parent_path();
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      ManifestEntry e;
      e.utterance_id = j.at("utterance_id").get<std::string>();
      e.speaker_id = j.at("speaker_id").get<std::string>();
      e.mel_path = j.at("mel_path").get<std::string>();
      e.n_frames = j.at("n_frames").get<int>();
      const std::string split = j.at("split").get<std::string>();
      if (split != "train" && split != "test") throw DataError("bad split '" + split + "'");
      e.split = split == "train" ? Split::kTrain : Split::kTest;
      const std::string set = j.value("speaker_set", std::string("seen"));
      if (set != "seen" && set != "unseen") throw DataError("bad speaker_set '" + set + "'");
      e.speaker_set = set == "seen" ? SpeakerSet::kSeen : SpeakerSet::kUnseen;
      m.entries.push_back(std::move(e));
    } catch (const json::exception &ex) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + ex.what());
    } catch (const DataError &ex) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return m;
}

void validate_manifest(const DatasetManifest &m) {
  const auto seen = m.seen_speakers();
  for (const auto &s : m.unseen_speakers())
    if (seen.count(s)) throw DataError("speaker '" + s + "' is both seen and unseen");
  for (const auto &e : m.entries) {
    const fs::path p = m.mel_file(e);
    if (!fs::exists(p)) throw DataError("missing mel file: " + p.string());
    const TensorHeader h = read_tensor_header(p);
    if (h.dims.size() != 2 || static_cast<int>(h.dims[1]) != e.n_frames)
      throw DataError("frame count mismatch for " + p.string());
  }
}

}  // namespace noisevc
