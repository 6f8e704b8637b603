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
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "numcore/tensor.hpp"

namespace mtcn::numcore {

// Named parameters in registration order. A tensor registered once may be
// referenced from many places in a model (layer-wise weight sharing).
class ParamSet {
 public:
  struct Entry {
    std::string name;
    Tensor tensor;
    bool trainable = true;
  };

  Tensor& add(const std::string& name, Tensor tensor, bool trainable = true);
  bool contains(const std::string& name) const;
  Tensor& get(const std::string& name);
  const Tensor& get(const std::string& name) const;

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  std::size_t scalar_count(bool trainable_only = true) const;
  void zero_grad();

 private:
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t> index_;
};

// "MTCNCKPT", u32 version, then (u32 name length, name, u32 rank, u32 dims[rank],
// f32 values) records to end of file, all little-endian.
void save_checkpoint(const ParamSet& params, const std::filesystem::path& path);
std::vector<ParamSet::Entry> read_checkpoint(const std::filesystem::path& path);
// Copies values into an existing set; names and shapes must match exactly.
void load_checkpoint(ParamSet& params, const std::filesystem::path& path);

}  // namespace mtcn::numcore
