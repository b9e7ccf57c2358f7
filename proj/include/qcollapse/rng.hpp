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

#pragma once

#include <cstdint>

namespace qcollapse {

/// Stream tags keep the jump sampler and the Wiener sampler on disjoint
/// Philox streams even when they share a seed.
inline constexpr std::uint64_t kJumpStream = 0x6a756d7073ULL;    // "jumps"
inline constexpr std::uint64_t kWienerStream = 0x7769656e6572ULL;  // "wiener"

/// Counter-based generator: Philox4x32 with 10 rounds (Salmon et al.,
/// SC 2011).  State layout, so other implementations can match streams
/// bit for bit:
///
///   key     = (seed lo32, seed hi32)
///   counter = (block lo32, block hi32, stream lo32, stream hi32)
///
/// Each block of the keyed counter yields four 32-bit words w0..w3; the
/// generator emits them as the two 64-bit values w0 | w1<<32 and
/// w2 | w3<<32, then advances the block index.  Doubles in (0,1) are
/// u = ((x >> 11) + 0.5) * 2^-53, exponentials use -log1p(-u)/lambda,
/// and normals use the inverse CDF (Acklam's rational approximation
/// followed by one Halley step).
class Philox {
 public:
  Philox(std::uint64_t seed, std::uint64_t stream)
      : seed_(seed), stream_(stream) {}

  std::uint64_t next_u64();

  /// Uniform on the open interval (0, 1); both endpoints excluded.
  double next_double();

  /// Exponential inter-arrival time with the given rate (inverse CDF).
  double next_exponential(double rate);

  /// Standard normal via the inverse CDF.
  double next_normal();

  /// Raw 4x32 block for the given block index; does not disturb the
  /// sequential state.
  void block(std::uint64_t index, std::uint32_t out[4]) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::uint64_t cached_ = 0;
  bool has_cached_ = false;
};

/// Inverse of the standard normal CDF, accurate to ~1e-15.
double inverse_normal_cdf(double p);

}  // namespace qcollapse
