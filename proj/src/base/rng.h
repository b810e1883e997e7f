// base/rng.h
//
// Copyright 2026  spkpt authors

// See ../../COPYING for clarification regarding multiple authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef SPKPT_BASE_RNG_H_
#define SPKPT_BASE_RNG_H_

#include <cstdint>
#include <random>

namespace spkpt {

/// SplitMix64 finalizer; used to derive independent stream seeds.
uint64_t MixBits(uint64_t x);

/// Derived seeds for (seed, index...) tuples, e.g. per-batch or per-frame
/// streams. Order of the arguments matters.
uint64_t DeriveSeed(uint64_t seed, uint64_t a);
uint64_t DeriveSeed(uint64_t seed, uint64_t a, uint64_t b);
uint64_t DeriveSeed(uint64_t seed, uint64_t a, uint64_t b, uint64_t c);

/// Seeded generator. The std:: distributions are implementation defined, so
/// every mapping from raw bits to a distribution lives here to keep results
/// identical across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }
  /// Uniform on [0, 1) with 53 bits of resolution.
  double Uniform();
  /// Uniform on the open interval (0, 1).
  double UniformOpen();
  /// Uniform over the integers lo..hi inclusive.
  int64_t UniformInt(int64_t lo, int64_t hi);
  bool Bernoulli(double p) { return Uniform() < p; }
  double Gaussian();
  double Gumbel();

 private:
  std::mt19937_64 engine_;
};

}  // namespace spkpt

#endif  // SPKPT_BASE_RNG_H_
