// Independent reference implementations used to pin expected values.
// Deliberately avoids the library's own special functions: erf comes from a
// Maclaurin series / continued fraction in long double, log-gamma from a
// Lanczos expansion.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

// absolute-difference assertion
#define CHECK_CLOSE(a, b, tol) CHECK(std::fabs((a) - (b)) <= (tol))
#define REQUIRE_CLOSE(a, b, tol) REQUIRE(std::fabs((a) - (b)) <= (tol))

namespace oracle {

inline long double erf_series(long double z) {
  // 2/sqrt(pi) * sum (-1)^n z^(2n+1) / (n! (2n+1))
  const long double two_over_sqrt_pi = 1.1283791670955125738961589031215452L;
  long double term = z, sum = z;
  for (int n = 1; n < 300; ++n) {
    term *= -z * z / n;
    const long double add = term / (2 * n + 1);
    sum += add;
    if (std::fabs((double)add) < 1e-25 * (std::fabs((double)sum) + 1e-300)) break;
  }
  return two_over_sqrt_pi * sum;
}

// erfc(z) = exp(-z^2)/sqrt(pi) * 1/(z + 1/2/(z + 1/(z + 3/2/(z + ...)))) for z > 0
inline long double erfc_cf(long double z) {
  long double f = 0.0L;
  for (int i = 160; i >= 1; --i) f = (i * 0.5L) / (z + f);
  const long double sqrt_pi = 1.77245385090551602729816748334114518L;
  return std::exp(-z * z) / sqrt_pi / (z + f);
}

// standard normal CDF
inline double phi(double x) {
  const long double sqrt2 = 1.41421356237309504880168872420969808L;
  const long double z = (long double)x / sqrt2;
  if (std::fabs((double)z) <= 2.5) return (double)(0.5L * (1.0L + erf_series(z)));
  const long double tail = 0.5L * erfc_cf(std::fabs((double)z));
  return x >= 0 ? (double)(1.0L - tail) : (double)tail;
}

// log-gamma via Lanczos (g=7, n=9)
inline double lgamma_ref(double x) {
  static const long double coef[9] = {
      0.99999999999980993227684700473478L,  676.520368121885098567009190444019L,
      -1259.13921672240287047156078755283L, 771.3234287776530788486528258894L,
      -176.61502916214059906584551354L,     12.507343278686904814458936853L,
      -0.13857109526572011689554707L,       9.984369578019570859563e-6L,
      1.50563273514931155834e-7L};
  if (x < 0.5) {
    const long double pi = 3.14159265358979323846264338327950288L;
    return (double)(std::log(pi / std::sin(pi * (long double)x)) - lgamma_ref(1.0 - x));
  }
  const long double xx = (long double)x - 1.0L;
  long double a = coef[0];
  const long double t = xx + 7.5L;
  for (int i = 1; i < 9; ++i) a += coef[i] / (xx + i);
  const long double half_log_2pi = 0.91893853320467274178032973640561764L;
  return (double)(half_log_2pi + (xx + 0.5L) * std::log(t) - t + std::log(a));
}

inline double beta_logpdf(double x, double a, double b) {
  return (a - 1) * std::log(x) + (b - 1) * std::log1p(-x) + lgamma_ref(a + b) - lgamma_ref(a) -
         lgamma_ref(b);
}

inline double dirichlet_logpdf(const std::vector<double>& x, const std::vector<double>& conc) {
  double tot = 0, lp = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    tot += conc[i];
    lp += (conc[i] - 1) * std::log(x[i]) - lgamma_ref(conc[i]);
  }
  return lp + lgamma_ref(tot);
}

// bisection root of f on [lo, hi]
template <typename F>
double bisect(F f, double lo, double hi, int iters = 200) {
  double flo = f(lo);
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((flo <= 0) == (fm <= 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// two-sided KS statistic of a sample against an analytic CDF
template <typename CDF>
double ks_statistic(std::vector<double> sample, CDF cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double F = cdf(sample[i]);
    d = std::max(d, std::fabs(F - (i + 1) / n));
    d = std::max(d, std::fabs(F - i / n));
  }
  return d;
}

} // namespace oracle
