#include "bcfuse/normal.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bcfuse {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kLogSqrt2Pi = 0.9189385332046727; // log(sqrt(2*pi))
} // namespace

double std_normal_cdf(double x) {
  return 0.5 * std::erfc(-x / kSqrt2);
}

double std_normal_sf(double x) {
  return 0.5 * std::erfc(x / kSqrt2);
}

double std_normal_logpdf(double x) {
  return -0.5 * x * x - kLogSqrt2Pi;
}

// AS241 algorithm PPND16 (Wichura 1988).
double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("std_normal_quantile: p must be in (0,1)");
  }
  const double q = p - 0.5;
  double r, val;
  if (std::fabs(q) <= 0.425) {
    r = 0.180625 - q * q;
    val = q *
          (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
              1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
            1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
          (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
              5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
            4.2313330701600911252e+1) * r + 1.0);
  } else {
    r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    if (r <= 5.0) {
      r -= 1.6;
      val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
              4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
              2.05319162663775882187e+0) * r + 1.0);
    } else {
      r -= 5.0;
      val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
              5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
    }
    if (q < 0.0) val = -val;
  }
  // one Newton step against the erfc-based CDF
  const double err = std_normal_cdf(val) - p;
  val -= err * std::exp(0.5 * val * val + kLogSqrt2Pi);
  return val;
}

double std_normal_interval(double a, double b) {
  if (a > b) throw std::invalid_argument("std_normal_interval: a > b");
  if (a == b) return 0.0;
  // evaluate in whichever tail keeps the operands small
  if (a + b > 0.0) {
    const double hi = std::isinf(a) ? 0.0 : std_normal_sf(a);
    const double lo = std::isinf(b) ? 0.0 : std_normal_sf(b);
    return hi - lo;
  }
  const double hi = std::isinf(b) ? 1.0 : std_normal_cdf(b);
  const double lo = std::isinf(a) ? 0.0 : std_normal_cdf(a);
  return hi - lo;
}

} // namespace bcfuse
