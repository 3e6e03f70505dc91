// Independent brute-force oracles for cross-checking the library. These
// deliberately avoid the implementation's code paths: Taylor series and
// continued fractions instead of std::erfc, raw-power Cramer solves
// instead of pivoted elimination on a centered basis, direct summation
// throughout. long double everywhere.
#pragma once

#include <cstddef>
#include <vector>

namespace oracle {

long double normal_cdf(long double x);
long double normal_quantile(long double q); // bisection on oracle::normal_cdf

struct LineFit {
  long double intercept = 0;
  long double slope = 0;
  long double sse = 0;
};

struct QuadFit {
  long double c0 = 0, c1 = 0, c2 = 0;
  long double sse = 0;
};

// OLS of y on x via explicit normal equations + Cramer's rule.
LineFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);
QuadFit quadratic_fit(const std::vector<double>& x,
                      const std::vector<double>& y);

struct SegFit {
  int breakpoint = 0; // left segment = indices 0..breakpoint-1
  long double sse = 0;
};

// Brute force, y already sorted ascending, x = 1..n.
SegFit segmented_fit(const std::vector<double>& ranked_y);

// One-sample KS statistic against Uniform(0,1); sorts a copy.
long double ks_statistic(std::vector<double> values);

struct Pool {
  std::vector<long double> weights; // normalized
  long double pooled_effect = 0;
  long double pooled_se = 0;
  long double q = 0;
  long double i_squared = 0;
};

Pool pool_fixed(const std::vector<double>& effects,
                const std::vector<double>& ses);

struct Egger {
  long double intercept = 0;
  long double intercept_se = 0;
  long double t = 0;
  long double slope = 0;
};

Egger egger(const std::vector<double>& z, const std::vector<double>& se);

} // namespace oracle
