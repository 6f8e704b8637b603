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

#include "data/store.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

#include "common/binary_io.hpp"
#include "common/error.hpp"

namespace mtcn::data {

namespace {

constexpr std::string_view kFeatureMagic = "MTCNFEAT";
constexpr std::uint32_t kFeatureVersion = 1;
constexpr std::size_t kFeatureHeaderBytes = 8 + 4 * 4;

const std::vector<std::string> kManifestColumns = {"video_id", "order_index", "start", "stop",
                                                   "verb",     "noun",        "participant"};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string format_seconds(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

FeatureStore::FeatureStore(std::vector<ActionRecord> manifest, FeatureArray visual, std::optional<FeatureArray> audio)
    : manifest_(std::move(manifest)), visual_(std::move(visual)), audio_(std::move(audio)) {
  if (visual_.num_actions != manifest_.size()) {
    throw DimensionError("feature alignment: manifest has " + std::to_string(manifest_.size()) +
                         " records but visual features have " + std::to_string(visual_.num_actions) + " rows");
  }
  if (audio_) {
    if (audio_->num_actions != visual_.num_actions || audio_->clips != visual_.clips) {
      throw DimensionError("feature alignment: audio features (" + std::to_string(audio_->num_actions) + " x " +
                           std::to_string(audio_->clips) + ") do not match visual (" +
                           std::to_string(visual_.num_actions) + " x " + std::to_string(visual_.clips) + ")");
    }
  }
  index();
}

const FeatureArray& FeatureStore::audio() const {
  if (!audio_) throw StateError("feature store has no audio modality");
  return *audio_;
}

void FeatureStore::index() {
  videos_.clear();
  for (std::size_t r = 0; r < manifest_.size(); ++r) {
    const auto& rec = manifest_[r];
    if (!(rec.start_sec < rec.stop_sec)) {
      throw FormatError("manifest row " + std::to_string(r) + ": start " + format_seconds(rec.start_sec) +
                        " is not before stop " + format_seconds(rec.stop_sec));
    }
    if (rec.verb < 0 || rec.noun < 0) {
      throw FormatError("manifest row " + std::to_string(r) + ": negative class label");
    }
    videos_[rec.video_id].push_back(r);
  }
  position_.assign(manifest_.size(), 0);
  for (auto& [video, rows] : videos_) {
    std::sort(rows.begin(), rows.end(),
              [&](std::size_t a, std::size_t b) { return manifest_[a].order_index < manifest_[b].order_index; });
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i > 0) {
        const auto& prev = manifest_[rows[i - 1]];
        const auto& cur = manifest_[rows[i]];
        if (prev.order_index == cur.order_index) {
          throw FormatError("duplicate (video_id, order_index) = (" + video + ", " +
                            std::to_string(cur.order_index) + ")");
        }
        if (!(prev.start_sec <= cur.start_sec)) {
          throw FormatError("video " + video + ": order_index " + std::to_string(cur.order_index) +
                            " starts before its predecessor");
        }
      }
      position_[rows[i]] = i;
    }
  }
}

const std::vector<std::size_t>& FeatureStore::video_rows(std::size_t row) const {
  return videos_.at(manifest_.at(row).video_id);
}

int FeatureStore::num_verbs() const {
  int n = 0;
  for (const auto& r : manifest_) n = std::max(n, r.verb + 1);
  return n;
}

int FeatureStore::num_nouns() const {
  int n = 0;
  for (const auto& r : manifest_) n = std::max(n, r.noun + 1);
  return n;
}

void write_feature_file(const std::filesystem::path& path, const FeatureArray& f) {
  if (f.values.size() != f.num_actions * f.clips * f.dim) {
    throw DimensionError("feature array holds " + std::to_string(f.values.size()) + " values, header implies " +
                         std::to_string(f.num_actions * f.clips * f.dim));
  }
  std::vector<std::uint8_t> out;
  out.reserve(kFeatureHeaderBytes + 4 * f.values.size() + 4);
  io::put_bytes(out, kFeatureMagic);
  io::put_u32(out, kFeatureVersion);
  io::put_u32(out, static_cast<std::uint32_t>(f.num_actions));
  io::put_u32(out, static_cast<std::uint32_t>(f.clips));
  io::put_u32(out, static_cast<std::uint32_t>(f.dim));
  for (float v : f.values) io::put_f32(out, v);
  const auto crc = ::crc32(0L, out.data(), static_cast<uInt>(out.size()));
  io::put_u32(out, static_cast<std::uint32_t>(crc));
  io::write_file(path.string(), out);
}

FeatureArray read_feature_file(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path.string());
  io::ByteReader in(bytes, path.string());
  if (in.str(kFeatureMagic.size(), "magic") != kFeatureMagic) {
    throw FormatError(path.string() + ": bad magic, not a feature file");
  }
  const auto version = in.u32("version");
  if (version != kFeatureVersion) {
    throw FormatError(path.string() + ": unsupported feature file version " + std::to_string(version));
  }
  FeatureArray f;
  f.num_actions = in.u32("num_actions");
  f.clips = in.u32("clips_per_action");
  f.dim = in.u32("dim");
  const std::size_t n = f.num_actions * f.clips * f.dim;
  const std::size_t expected = kFeatureHeaderBytes + 4 * n + 4;
  if (bytes.size() != expected) {
    throw FormatError(path.string() + ": size mismatch, expected " + std::to_string(expected) + " bytes, found " +
                      std::to_string(bytes.size()));
  }
  f.values.resize(n);
  for (auto& v : f.values) v = in.f32("values");
  const auto stored = in.u32("crc32");
  const auto computed = static_cast<std::uint32_t>(::crc32(0L, bytes.data(), static_cast<uInt>(bytes.size() - 4)));
  if (stored != computed) throw FormatError(path.string() + ": CRC32 checksum mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(f.values[i])) {
      throw NumericError(path.string() + ": non-finite feature value at index " + std::to_string(i));
    }
  }
  return f;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ActionRecord>& records) {
  std::ostringstream os;
  for (std::size_t i = 0; i < kManifestColumns.size(); ++i) os << (i ? "," : "") << kManifestColumns[i];
  os << '\n';
  for (const auto& r : records) {
    os << r.video_id << ',' << r.order_index << ',' << format_seconds(r.start_sec) << ','
       << format_seconds(r.stop_sec) << ',' << r.verb << ',' << r.noun << ',' << r.participant_id << '\n';
  }
  io::write_text(path.string(), os.str());
}

std::vector<ActionRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty manifest");
  const auto header = split_csv_line(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const auto& name : kManifestColumns) {
    if (!col.count(name)) throw FormatError(path.string() + ": missing column '" + name + "'");
  }
  std::vector<ActionRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " columns, found " + std::to_string(cells.size()));
    }
    try {
      ActionRecord r;
      r.video_id = cells[col["video_id"]];
      r.order_index = static_cast<std::uint32_t>(std::stoul(cells[col["order_index"]]));
      r.start_sec = std::stod(cells[col["start"]]);
      r.stop_sec = std::stod(cells[col["stop"]]);
      r.verb = std::stoi(cells[col["verb"]]);
      r.noun = std::stoi(cells[col["noun"]]);
      r.participant_id = cells[col["participant"]];
      out.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": unparsable value");
    }
  }
  return out;
}

void write_splits(const std::filesystem::path& path, const Splits& s) {
  nlohmann::ordered_json j;
  j["train"] = s.train;
  j["val"] = s.val;
  j["unseen"] = s.unseen;
  j["tail"] = s.tail;
  j["tail_verbs"] = s.tail_verbs;
  j["tail_nouns"] = s.tail_nouns;
  io::write_text(path.string(), j.dump(1) + "\n");
}

Splits read_splits(const std::filesystem::path& path) {
  try {
    const auto j = nlohmann::json::parse(io::read_text(path.string()));
    Splits s;
    s.train = j.at("train").get<std::vector<std::size_t>>();
    s.val = j.at("val").get<std::vector<std::size_t>>();
    s.unseen = j.value("unseen", std::vector<std::size_t>{});
    s.tail = j.value("tail", std::vector<std::size_t>{});
    s.tail_verbs = j.value("tail_verbs", std::vector<int>{});
    s.tail_nouns = j.value("tail_nouns", std::vector<int>{});
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_store(const std::filesystem::path& dir, const FeatureStore& store) {
  std::filesystem::create_directories(dir);
  write_manifest(dir / "manifest.csv", store.manifest());
  write_feature_file(dir / "visual.feat", store.visual());
  if (store.has_audio()) write_feature_file(dir / "audio.feat", store.audio());
}

FeatureStore load_store(const std::filesystem::path& dir) {
  auto manifest = read_manifest(dir / "manifest.csv");
  auto visual = read_feature_file(dir / "visual.feat");
  std::optional<FeatureArray> audio;
  if (std::filesystem::exists(dir / "audio.feat")) audio = read_feature_file(dir / "audio.feat");
  return FeatureStore(std::move(manifest), std::move(visual), std::move(audio));
}

}  // namespace mtcn::data
