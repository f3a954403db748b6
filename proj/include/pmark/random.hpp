// Copyright 2026 The pmark Authors. All Rights Reserved.
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

#include <array>
#include <cstdint>
#include <string_view>

namespace pmark {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
/// as easy as 1, 2, 3"). Pure: the same counter and key always produce the
/// same four output words.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Identifies an independent stream under one 64-bit seed.
///
/// The Philox counter is laid out as {block, domain, a, b}: the first word
/// walks through the stream, the other three name it. Streams used by the
/// library:
///   {0, 0, 0}        pivot matrix
///   {1, t, j}        channel seed bit r(t, j)
///   {2, trial, k}    simulation trial k-th sub-stream
///   {3, doc, t}      selection randomness during generation
///   {4, purpose, i}  mock endpoint draws
struct StreamId {
  std::uint32_t domain = 0;
  std::uint32_t a = 0;
  std::uint32_t b = 0;
};

namespace stream_domain {
inline constexpr std::uint32_t kPivots = 0;
inline constexpr std::uint32_t kChannelSeeds = 1;
inline constexpr std::uint32_t kTrial = 2;
inline constexpr std::uint32_t kSelection = 3;
inline constexpr std::uint32_t kMock = 4;
}  // namespace stream_domain

/// Counter-based generator over one Philox stream.
///
/// Gaussian draws use Box-Muller on two uniforms so that the whole chain from
/// seed to normal deviate is portable. Integer ranges use rejection, never
/// the implementation-defined std:: distributions.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, StreamId stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64();
  std::uint32_t next_u32();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1].
  double uniform_open_low();
  /// Standard normal.
  double gaussian();
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  bool bit() { return (next_u32() & 1U) != 0; }

  std::uint64_t seed() const { return seed_; }
  StreamId stream() const { return stream_; }

 private:
  void refill();

  std::uint64_t seed_;
  StreamId stream_;
  std::uint32_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer; used to decorrelate derived seeds.
std::uint64_t mix64(std::uint64_t x);

/// 64-bit FNV-1a, stable across platforms.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace pmark
