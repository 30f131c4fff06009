// Copyright 2026 The jointrl Authors.
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

#include <complex>
#include <cstdint>
#include <random>

namespace jointrl {

using Rng = std::mt19937_64;

// Named sub-streams derived from one master seed. Each purpose gets an
// independent generator so components can be replayed in isolation.
enum class Stream : std::uint64_t {
  kDeployment = 1,
  kShadowing = 2,
  kFadingInit = 3,
  kInnovation = 4,
  kExploration = 5,
  kReplay = 6,
  kNetworkInit = 7,
  kBootstrap = 8,
  kRandomBaseline = 9,
  kTestDeployment = 10,
};

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

std::uint64_t derive_seed(std::uint64_t master, Stream stream,
                          std::uint64_t index = 0);

Rng make_stream(std::uint64_t master, Stream stream, std::uint64_t index = 0);

// Circularly symmetric complex Gaussian with unit variance.
std::complex<double> complex_gaussian(Rng& rng);

double uniform01(Rng& rng);

}  // namespace jointrl
