// Copyright 2026 The MTCN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mtcn::data {

struct ActionRecord {
  std::string video_id;
  std::uint32_t order_index = 0;
  double start_sec = 0.0;
  double stop_sec = 0.0;
  int verb = 0;
  int noun = 0;
  std::string participant_id;
};

// num_actions x clips x dim, row-major.
struct FeatureArray {
  std::size_t num_actions = 0;
  std::size_t clips = 0;
  std::size_t dim = 0;
  std::vector<float> values;

  std::span<const float> clip(std::size_t action, std::size_t clip_index) const {
    return std::span<const float>(values).subspan((action * clips + clip_index) * dim, dim);
  }
};

struct Splits {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> unseen;
  std::vector<std::size_t> tail;
  std::vector<int> tail_verbs;
  std::vector<int> tail_nouns;
};

class FeatureStore {
 public:
  FeatureStore() = default;
  FeatureStore(std::vector<ActionRecord> manifest, FeatureArray visual, std::optional<FeatureArray> audio);

  std::size_t size() const { return manifest_.size(); }
  const std::vector<ActionRecord>& manifest() const { return manifest_; }
  const ActionRecord& record(std::size_t row) const { return manifest_.at(row); }
  const FeatureArray& visual() const { return visual_; }
  bool has_audio() const { return audio_.has_value(); }
  const FeatureArray& audio() const;
  std::size_t clips_per_action() const { return visual_.clips; }

  // Rows of each video ordered by order_index.
  const std::map<std::string, std::vector<std::size_t>>& videos() const { return videos_; }
  // Position of a row within its video's ordered row list.
  std::size_t position_in_video(std::size_t row) const { return position_.at(row); }
  const std::vector<std::size_t>& video_rows(std::size_t row) const;

  int num_verbs() const;
  int num_nouns() const;

 private:
  void index();

  std::vector<ActionRecord> manifest_;
  FeatureArray visual_;
  std::optional<FeatureArray> audio_;
  std::map<std::string, std::vector<std::size_t>> videos_;
  std::vector<std::size_t> position_;
};

// Feature file: "MTCNFEAT", u32 version, u32 num_actions, u32 clips, u32 dim,
// f32 values, then CRC32 (zlib polynomial) over all preceding bytes.
void write_feature_file(const std::filesystem::path& path, const FeatureArray& features);
FeatureArray read_feature_file(const std::filesystem::path& path);

void write_manifest(const std::filesystem::path& path, const std::vector<ActionRecord>& records);
std::vector<ActionRecord> read_manifest(const std::filesystem::path& path);

void write_splits(const std::filesystem::path& path, const Splits& splits);
Splits read_splits(const std::filesystem::path& path);

// Directory layout: visual.feat, optional audio.feat, manifest.csv.
void save_store(const std::filesystem::path& dir, const FeatureStore& store);
FeatureStore load_store(const std::filesystem::path& dir);

}  // namespace mtcn::data
