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

#include "numcore/params.hpp"

#include "common/binary_io.hpp"
#include "common/error.hpp"

namespace mtcn::numcore {

namespace {

constexpr std::string_view kCheckpointMagic = "MTCNCKPT";
constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace

Tensor& ParamSet::add(const std::string& name, Tensor tensor, bool trainable) {
  if (index_.count(name)) throw InvalidArgument("duplicate parameter name '" + name + "'");
  tensor.set_requires_grad(trainable);
  index_[name] = entries_.size();
  entries_.push_back({name, std::move(tensor), trainable});
  return entries_.back().tensor;
}

bool ParamSet::contains(const std::string& name) const { return index_.count(name) != 0; }

Tensor& ParamSet::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw InvalidArgument("unknown parameter '" + name + "'");
  return entries_[it->second].tensor;
}

const Tensor& ParamSet::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw InvalidArgument("unknown parameter '" + name + "'");
  return entries_[it->second].tensor;
}

std::size_t ParamSet::scalar_count(bool trainable_only) const {
  std::size_t n = 0;
  for (const auto& e : entries_) {
    if (!trainable_only || e.trainable) n += e.tensor.numel();
  }
  return n;
}

void ParamSet::zero_grad() {
  for (auto& e : entries_) e.tensor.zero_grad();
}

void save_checkpoint(const ParamSet& params, const std::filesystem::path& path) {
  std::vector<std::uint8_t> out;
  io::put_bytes(out, kCheckpointMagic);
  io::put_u32(out, kCheckpointVersion);
  for (const auto& e : params.entries()) {
    io::put_u32(out, static_cast<std::uint32_t>(e.name.size()));
    io::put_bytes(out, e.name);
    const auto& shape = e.tensor.shape();
    io::put_u32(out, static_cast<std::uint32_t>(shape.size()));
    for (auto d : shape) io::put_u32(out, static_cast<std::uint32_t>(d));
    for (float v : e.tensor.data()) io::put_f32(out, v);
  }
  io::write_file(path.string(), out);
}

std::vector<ParamSet::Entry> read_checkpoint(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path.string());
  io::ByteReader in(bytes, path.string());
  if (in.str(kCheckpointMagic.size(), "magic") != kCheckpointMagic) {
    throw FormatError(path.string() + ": not a checkpoint (bad magic)");
  }
  const auto version = in.u32("version");
  if (version != kCheckpointVersion) {
    throw FormatError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  }
  std::vector<ParamSet::Entry> entries;
  while (!in.at_end()) {
    const auto name_len = in.u32("name length");
    auto name = in.str(name_len, "name");
    const auto rank = in.u32("rank");
    Shape shape;
    for (std::uint32_t i = 0; i < rank; ++i) shape.push_back(in.u32("dims"));
    const std::size_t n = shape_numel(shape);
    in.need(4 * n, "values");
    std::vector<float> values(n);
    for (auto& v : values) v = in.f32("values");
    entries.push_back({std::move(name), Tensor::from(std::move(shape), std::move(values)), true});
  }
  return entries;
}

void load_checkpoint(ParamSet& params, const std::filesystem::path& path) {
  auto entries = read_checkpoint(path);
  if (entries.size() != params.size()) {
    throw DimensionError(path.string() + ": checkpoint holds " + std::to_string(entries.size()) +
                         " parameters, model expects " + std::to_string(params.size()));
  }
  for (const auto& e : entries) {
    if (!params.contains(e.name)) {
      throw DimensionError(path.string() + ": unexpected parameter '" + e.name + "'");
    }
    auto& dst = params.get(e.name);
    if (dst.shape() != e.tensor.shape()) {
      throw DimensionError(path.string() + ": parameter '" + e.name + "' has shape " + shape_str(e.tensor.shape()) +
                           ", model expects " + shape_str(dst.shape()));
    }
    auto src = e.tensor.data();
    std::copy(src.begin(), src.end(), dst.mutable_data().begin());
  }
}

}  // namespace mtcn::numcore
