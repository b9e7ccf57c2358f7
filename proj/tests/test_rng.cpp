// Copyright 2026 The qcollapse authors
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

#include <cmath>
#include <vector>

#include <doctest.h>

#include "qcollapse/rng.hpp"

using namespace qcollapse;

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("philox matches the published 10-round vectors") {
  // Reference vectors from the Random123 known-answer set.
  std::uint32_t out[4];

  Philox zero(0, 0);
  zero.block(0, out);
  CHECK(out[0] == 0x6627e8d5u);
  CHECK(out[1] == 0xe169c58du);
  CHECK(out[2] == 0xbc57ac4cu);
  CHECK(out[3] == 0x9b00dbd8u);

  Philox ones(0xffffffffffffffffULL, 0xffffffffffffffffULL);
  ones.block(0xffffffffffffffffULL, out);
  CHECK(out[0] == 0x408f276du);
  CHECK(out[1] == 0x41c83b0eu);
  CHECK(out[2] == 0xa20bc7c6u);
  CHECK(out[3] == 0x6d5451fdu);

  Philox pi(0x299f31d0a4093822ULL, 0x0370734413198a2eULL);
  pi.block(0x85a308d3243f6a88ULL, out);
  CHECK(out[0] == 0xd16cfe09u);
  CHECK(out[1] == 0x94fdccebu);
  CHECK(out[2] == 0x5001e420u);
  CHECK(out[3] == 0x24126ea1u);
}

TEST_CASE("streams are reproducible and tag-separated") {
  Philox a(42, kJumpStream);
  Philox b(42, kJumpStream);
  Philox c(42, kWienerStream);
  bool all_equal = true;
  bool any_differ = false;
  for (int i = 0; i < 64; ++i) {
    const std::uint64_t xa = a.next_u64();
    if (xa != b.next_u64()) all_equal = false;
    if (xa != c.next_u64()) any_differ = true;
  }
  CHECK(all_equal);
  CHECK(any_differ);
}

TEST_CASE("uniform doubles stay inside the open interval") {
  Philox rng(7, 0);
  const int n = 200000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.next_double();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  const double mean = sum / n;
  const double sigma = 1.0 / std::sqrt(12.0 * n);
  CHECK(std::abs(mean - 0.5) < 4.0 * sigma);
}

TEST_CASE("inverse normal cdf round-trips against erfc") {
  for (double p : {1e-12, 1e-6, 0.001, 0.02, 0.2, 0.5, 0.8, 0.99, 1 - 1e-9}) {
    const double x = inverse_normal_cdf(p);
    CHECK(std::abs(normal_cdf(x) - p) <= 1e-14 + 1e-12 * p);
  }
  CHECK(inverse_normal_cdf(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(inverse_normal_cdf(0.975) ==
        doctest::Approx(1.959963984540054).epsilon(1e-12));
}

TEST_CASE("exponential sampling has the right mean") {
  Philox rng(11, kJumpStream);
  const int n = 100000;
  const double rate = 2.5;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += rng.next_exponential(rate);
  const double mean = sum / n;
  const double sigma = 1.0 / (rate * std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(mean - 1.0 / rate) < 4.0 * sigma);
}

TEST_CASE("normal sampling has unit variance") {
  Philox rng(13, kWienerStream);
  const int n = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.next_normal();
    sum += z;
    sum2 += z * z;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / n));
}
