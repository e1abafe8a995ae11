/*
 * Copyright 2026 The drltr Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
// Seeded, splittable random number generation. Every stochastic operation in
// drltr takes an explicit Rng& so runs are reproducible.

#ifndef DRLTR_RANDOM_H_
#define DRLTR_RANDOM_H_

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace drltr {

// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr uint64_t MixSeed(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministically combines a base seed with a sequence of stream keys.
inline uint64_t DeriveSeed(uint64_t base, std::initializer_list<uint64_t> keys) {
  uint64_t s = MixSeed(base);
  for (uint64_t k : keys) s = MixSeed(s ^ MixSeed(k + 0x632be59bd9b4e019ULL));
  return s;
}

class Rng {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit Rng(uint64_t seed) : seed_(seed), engine_(MixSeed(seed)) {}

  // Independent child stream; does not advance this generator.
  Rng Split(uint64_t stream) const { return Rng(DeriveSeed(seed_, {stream})); }

  uint64_t seed() const { return seed_; }

  // Uniform on [0, 1).
  double Uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double Normal() { return normal_(engine_); }
  bool Bernoulli(double p) { return Uniform() < p; }
  // Uniform integer on [0, n).
  int UniformInt(int n) { return std::uniform_int_distribution<int>(0, n - 1)(engine_); }
  // Standard Gumbel variate.
  double Gumbel() {
    double u = Uniform();
    while (u <= 0.0) u = Uniform();
    return -std::log(-std::log(u));
  }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

 private:
  uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace drltr

#endif  // DRLTR_RANDOM_H_
