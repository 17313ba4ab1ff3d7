#include "bcfuse/rng.hpp"

#include <cmath>
#include <stdexcept>

#include "bcfuse/normal.hpp"

namespace bcfuse {

double Rng::normal() { return std_normal_quantile(uniform()); }

int Rng::uniform_int(int n) {
  if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
  int k = static_cast<int>(uniform() * n);
  return k < n ? k : n - 1;
}

// Marsaglia-Tsang; shapes below 1 are boosted and rescaled
double Rng::gamma(double shape) {
  if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape must be > 0");
  if (shape < 1.0) {
    const double u = uniform();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

std::vector<double> Rng::dirichlet(const std::vector<double>& conc) {
  const std::size_t L = conc.size();
  std::vector<double> lg(L);
  for (std::size_t i = 0; i < L; ++i) {
    const double a = conc[i];
    if (!(a > 0.0)) throw std::invalid_argument("dirichlet: concentrations must be > 0");
    if (a < 1.0) {
      // log of the boosted draw keeps tiny shapes finite
      const double u = uniform();
      lg[i] = std::log(gamma(a + 1.0)) + std::log(u) / a;
    } else {
      lg[i] = std::log(gamma(a));
    }
  }
  double m = lg[0];
  for (std::size_t i = 1; i < L; ++i) m = std::max(m, lg[i]);
  double s = 0.0;
  for (std::size_t i = 0; i < L; ++i) s += std::exp(lg[i] - m);
  const double logz = m + std::log(s);
  std::vector<double> out(L);
  for (std::size_t i = 0; i < L; ++i) out[i] = std::exp(lg[i] - logz);
  return out;
}

int Rng::categorical_log(const std::vector<double>& logw) {
  const std::size_t L = logw.size();
  double m = logw[0];
  for (std::size_t i = 1; i < L; ++i) m = std::max(m, logw[i]);
  std::vector<double> w(L);
  double s = 0.0;
  for (std::size_t i = 0; i < L; ++i) {
    w[i] = std::exp(logw[i] - m);
    s += w[i];
  }
  const double u = uniform() * s;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < L; ++i) {
    acc += w[i];
    if (u <= acc) return static_cast<int>(i);
  }
  return static_cast<int>(L - 1);
}

void Rng::shuffle(std::vector<int>& v) {
  for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
    const int j = uniform_int(i + 1);
    std::swap(v[i], v[j]);
  }
}

std::uint64_t hash_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(master) ^ a) ^ b);
}

} // namespace bcfuse
