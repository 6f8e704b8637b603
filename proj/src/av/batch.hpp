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

#include <span>
#include <vector>

#include "av/model.hpp"
#include "data/store.hpp"
#include "data/windows.hpp"
#include "numcore/rng.hpp"

namespace mtcn::av {

enum class ClipPolicy {
  sampled,  // one clip per action, same index for both modalities (training)
  all,      // every clip becomes a token sharing the action's position
  first,    // clip 0 only; training shape without randomness
};

AvInput build_input(const data::FeatureStore& store, std::span<const data::ContextWindow> windows,
                    const AvConfig& cfg, ClipPolicy policy, numcore::Rng* rng = nullptr);

// One-hot targets; throws if a label is outside the configured vocabulary.
AvTargets build_targets(const data::FeatureStore& store, std::span<const data::ContextWindow> windows,
                        const AvConfig& cfg);

// Mixes window b with window partner[b]: x = lam*x_b + (1-lam)*x_partner, and the
// same for every target row. A slot stays real if either side contributes a real
// action with non-zero weight.
void mix_pairs(AvInput& in, AvTargets& targets, std::span<const std::size_t> partner, std::span<const float> lambda);

// Draws a permutation and one Beta(alpha, alpha) weight per window.
void mixup(AvInput& in, AvTargets& targets, float alpha, numcore::Rng& rng);

}  // namespace mtcn::av
