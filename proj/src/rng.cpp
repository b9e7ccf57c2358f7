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

#include "qcollapse/rng.hpp"

#include <cmath>

namespace qcollapse {

namespace {

constexpr std::uint32_t kPhiloxW32A = 0x9E3779B9;
constexpr std::uint32_t kPhiloxW32B = 0xBB67AE85;
constexpr std::uint32_t kPhiloxM4x32A = 0xD2511F53;
constexpr std::uint32_t kPhiloxM4x32B = 0xCD9E8D57;

inline void mul_hi_lo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo,
                      std::uint32_t& hi) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(product);
  hi = static_cast<std::uint32_t>(product >> 32);
}

inline void philox_round(std::uint32_t ctr[4], const std::uint32_t key[2]) {
  std::uint32_t lo0, hi0, lo1, hi1;
  mul_hi_lo(kPhiloxM4x32A, ctr[0], lo0, hi0);
  mul_hi_lo(kPhiloxM4x32B, ctr[2], lo1, hi1);
  const std::uint32_t r0 = hi1 ^ ctr[1] ^ key[0];
  const std::uint32_t r1 = lo1;
  const std::uint32_t r2 = hi0 ^ ctr[3] ^ key[1];
  const std::uint32_t r3 = lo0;
  ctr[0] = r0;
  ctr[1] = r1;
  ctr[2] = r2;
  ctr[3] = r3;
}

}  // namespace

void Philox::block(std::uint64_t index, std::uint32_t out[4]) const {
  out[0] = static_cast<std::uint32_t>(index);
  out[1] = static_cast<std::uint32_t>(index >> 32);
  out[2] = static_cast<std::uint32_t>(stream_);
  out[3] = static_cast<std::uint32_t>(stream_ >> 32);
  std::uint32_t key[2] = {static_cast<std::uint32_t>(seed_),
                          static_cast<std::uint32_t>(seed_ >> 32)};
  for (int round = 0; round < 10; ++round) {
    philox_round(out, key);
    if (round < 9) {
      key[0] += kPhiloxW32A;
      key[1] += kPhiloxW32B;
    }
  }
}

std::uint64_t Philox::next_u64() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  std::uint32_t words[4];
  block(block_, words);
  ++block_;
  cached_ = static_cast<std::uint64_t>(words[2]) |
            (static_cast<std::uint64_t>(words[3]) << 32);
  has_cached_ = true;
  return static_cast<std::uint64_t>(words[0]) |
         (static_cast<std::uint64_t>(words[1]) << 32);
}

double Philox::next_double() {
  // 53 high bits, offset by half an ulp: strictly inside (0, 1).
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Philox::next_exponential(double rate) {
  const double u = next_double();
  return -std::log1p(-u) / rate;
}

double Philox::next_normal() { return inverse_normal_cdf(next_double()); }

double inverse_normal_cdf(double p) {
  // Acklam's rational approximation with one Halley refinement.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // Halley step against the exact CDF.
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  x = x - u / (1.0 + x * u / 2.0);
  return x;
}

}  // namespace qcollapse
