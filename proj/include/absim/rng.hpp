#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace absim {

/// Derives the seed for sub-task `index` from a master seed (SplitMix64 of
/// seed + (index+1)*golden). Every random consumer in the project takes its
/// seed through this scheme so runs replay exactly from a single --seed.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index);

/// mt19937_64 plus hand-written draw helpers. The standard only pins the
/// raw generator output, not the distribution adapters, so the adapters
/// live here to keep sampled artifacts byte-stable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer in [0, n), n >= 1. Rejection-free modulo of a wide draw
  /// is biased; this uses rejection sampling on the top range.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via Box-Muller.
  double gaussian();

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Counts per category after `shots` independent draws from `probs`
/// (probabilities need not be normalised; they are scaled by their sum).
std::vector<std::int64_t> sample_multinomial(const std::vector<double>& probs,
                                             std::int64_t shots, Rng& rng);

}  // namespace absim
