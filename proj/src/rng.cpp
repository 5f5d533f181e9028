#include <absim/rng.hpp>

#include <cmath>
#include <stdexcept>

#include <absim/types.hpp>

namespace absim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed + 0x9E3779B97F4A7C15ull * (index + 1));
}

double Rng::uniform() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::below(0)");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t draw;
  do {
    draw = gen_();
  } while (draw >= limit);
  return draw % n;
}

double Rng::gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  spare_ = radius * std::sin(2.0 * kPi * u2);
  have_spare_ = true;
  return radius * std::cos(2.0 * kPi * u2);
}

std::vector<std::int64_t> sample_multinomial(const std::vector<double>& probs,
                                             std::int64_t shots, Rng& rng) {
  std::vector<double> cumulative(probs.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    total += probs[i] > 0.0 ? probs[i] : 0.0;
    cumulative[i] = total;
  }
  if (total <= 0.0)
    throw std::invalid_argument("sample_multinomial: no positive mass");

  std::vector<std::int64_t> counts(probs.size(), 0);
  for (std::int64_t s = 0; s < shots; ++s) {
    const double u = rng.uniform() * total;
    const auto it =
        std::upper_bound(cumulative.begin(), cumulative.end(), u);
    std::size_t idx = static_cast<std::size_t>(it - cumulative.begin());
    if (idx >= counts.size()) idx = counts.size() - 1;
    ++counts[idx];
  }
  return counts;
}

}  // namespace absim
