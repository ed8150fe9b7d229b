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

#ifndef NOISEVC_MANIFEST_HPP_
#define NOISEVC_MANIFEST_HPP_

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace noisevc {

enum class Split { kTrain, kTest };
enum class SpeakerSet { kSeen, kUnseen };

struct ManifestEntry {
  std::string utterance_id;
  std::string speaker_id;
  std::string mel_path;  // relative to the manifest's directory
  int n_frames = 0;
  Split split = Split::kTrain;
  SpeakerSet speaker_set = SpeakerSet::kSeen;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::filesystem::path root;  // directory mel paths are resolved against

  std::set<std::string> seen_speakers() const;
  std::set<std::string> unseen_speakers() const;
  std::filesystem::path mel_file(const ManifestEntry &e) const { return root / e.mel_path; }
  std::vector<const ManifestEntry *> select(Split split) const;
  std::vector<const ManifestEntry *> select(SpeakerSet set) const;
};

// Assigns splits to a list of utterances: `n_unseen` speakers are held out
// entirely (test split), and one randomly chosen utterance of every seen
// speaker moves to the test split. Deterministic in `seed`.
DatasetManifest split_speakers(std::vector<ManifestEntry> entries, int n_unseen,
                               std::uint64_t seed);

// Scans <corpus_dir>/<speaker>/<utterance>.mel and splits the result.
DatasetManifest build_manifest(const std::filesystem::path &corpus_dir, int n_unseen,
                               std::uint64_t seed);

// One JSON object per line, entries in stored order.
std::string serialize_manifest(const DatasetManifest &m);
void write_manifest(const std::filesystem::path &path, const DatasetManifest &m);
DatasetManifest read_manifest(const std::filesystem::path &path);

// Checks speaker-set disjointness and that every mel file exists, parses and
// has the recorded frame count. Throws DataError on the first problem.
void validate_manifest(const DatasetManifest &m);

}  // namespace noisevc

#endif  // NOISEVC_MANIFEST_HPP_
