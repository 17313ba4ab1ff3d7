#pragma once

namespace bcfuse {

// Standard normal CDF via erfc; absolute accuracy ~1e-16, keeps relative
// accuracy in the lower tail.
double std_normal_cdf(double x);

// Upper tail P(X > x).
double std_normal_sf(double x);

// Inverse CDF (Wichura AS241 + one Newton refinement). Accurate to ~1e-15.
// p must lie in (0, 1).
double std_normal_quantile(double p);

double std_normal_logpdf(double x);

// P(a < X <= b) evaluated to preserve accuracy when the interval sits in a
// far tail. Requires a <= b; either bound may be infinite.
double std_normal_interval(double a, double b);

} // namespace bcfuse
