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

#include "data/importer.hpp"

#include "common/binary_io.hpp"
#include "common/error.hpp"

namespace mtcn::data {

namespace {

FeatureArray read_blob(const RawBlob& blob, std::size_t rows, std::size_t clips) {
  if (blob.dim == 0) throw InvalidArgument(blob.path.string() + ": feature dim must be positive");
  const auto bytes = io::read_file(blob.path.string());
  const std::size_t expected = rows * clips * blob.dim * 4;
  if (bytes.size() != expected) {
    throw DimensionError("feature alignment: " + blob.path.string() + " has " + std::to_string(bytes.size()) +
                         " bytes, manifest implies " + std::to_string(expected) + " (" + std::to_string(rows) +
                         " rows x " + std::to_string(clips) + " clips x " + std::to_string(blob.dim) + " dims)");
  }
  FeatureArray f;
  f.num_actions = rows;
  f.clips = clips;
  f.dim = blob.dim;
  f.values.resize(rows * clips * blob.dim);
  io::ByteReader in(bytes, blob.path.string());
  for (auto& v : f.values) v = in.f32("values");
  return f;
}

}  // namespace

FeatureStore import_raw(const ImportRequest& req) {
  if (req.clips_per_action == 0) throw InvalidArgument("clips_per_action must be positive");
  auto manifest = read_manifest(req.manifest_csv);
  const std::size_t rows = manifest.size();
  auto visual = read_blob(req.visual, rows, req.clips_per_action);
  std::optional<FeatureArray> audio;
  if (req.audio) audio = read_blob(*req.audio, rows, req.clips_per_action);
  return FeatureStore(std::move(manifest), std::move(visual), std::move(audio));
}

FeatureStore import_to_store(const ImportRequest& req, const std::filesystem::path& out_dir) {
  auto store = import_raw(req);
  save_store(out_dir, store);
  return store;
}

}  // namespace mtcn::data
