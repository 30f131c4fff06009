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

#include <gtest/gtest.h>

#include <set>

#include "jointrl/rng.hpp"

namespace jointrl {
namespace {

TEST(Rng, DerivedSeedsDifferByStreamAndIndex) {
  std::set<std::uint64_t> seen;
  for (auto s : {Stream::kDeployment, Stream::kShadowing, Stream::kFadingInit, Stream::kInnovation,
                 Stream::kExploration, Stream::kReplay}) {
    for (std::uint64_t i = 0; i < 8; ++i) seen.insert(derive_seed(42, s, i));
  }
  EXPECT_EQ(seen.size(), 48u);
  EXPECT_NE(derive_seed(1, Stream::kReplay), derive_seed(2, Stream::kReplay));
}

TEST(Rng, StreamsReplay) {
  Rng a = make_stream(7, Stream::kExploration, 3);
  Rng b = make_stream(7, Stream::kExploration, 3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(Rng, ComplexGaussianHasUnitVariance) {
  Rng rng(5);
  const int n = 200000;
  double power = 0.0, re = 0.0, im = 0.0, cross = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto z = complex_gaussian(rng);
    power += std::norm(z);
    re += z.real();
    im += z.imag();
    cross += z.real() * z.imag();
  }
  EXPECT_NEAR(power / n, 1.0, 0.01);
  EXPECT_NEAR(re / n, 0.0, 0.01);
  EXPECT_NEAR(im / n, 0.0, 0.01);
  EXPECT_NEAR(cross / n, 0.0, 0.01);
}

TEST(Rng, Uniform01InRange) {
  Rng rng(9);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = uniform01(rng);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}

}  // namespace
}  // namespace jointrl
