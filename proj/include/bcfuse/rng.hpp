#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace bcfuse {

// Self-contained draws on top of mt19937_64. All distributions are derived
// from raw 64-bit words through fixed arithmetic, so streams are bit-identical
// across platforms and standard-library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // uniform on the open interval (0,1)
  double uniform() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // standard normal by inverse CDF
  double normal();

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // uniform integer in [0, n)
  int uniform_int(int n);

  // gamma(shape, 1), shape > 0
  double gamma(double shape);

  // Dirichlet with concentration vector; sampled in log space so very small
  // shapes do not underflow to an all-zero vector
  std::vector<double> dirichlet(const std::vector<double>& conc);

  // index draw from unnormalized log weights (log-sum-exp + inverse CDF)
  int categorical_log(const std::vector<double>& logw);

  // Fisher-Yates
  void shuffle(std::vector<int>& v);

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

// splitmix64 step, used to derive per-replicate/per-chain seeds
std::uint64_t hash_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b);

} // namespace bcfuse
