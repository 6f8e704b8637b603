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

#include <cstdint>
#include <random>

namespace mtcn::numcore {

// Every stochastic op takes one of these explicitly; nothing reads a global RNG.
using Rng = std::mt19937_64;

inline float uniform01(Rng& rng) { return std::uniform_real_distribution<float>(0.0f, 1.0f)(rng); }

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline float normal(Rng& rng, float mean, float stddev) {
  return std::normal_distribution<float>(mean, stddev)(rng);
}

// Beta(a, b) via the ratio of two gamma draws.
inline double beta_sample(Rng& rng, double a, double b) {
  const double x = std::gamma_distribution<double>(a, 1.0)(rng);
  const double y = std::gamma_distribution<double>(b, 1.0)(rng);
  if (x + y == 0.0) return 0.5;
  return x / (x + y);
}

}  // namespace mtcn::numcore
