#pragma once

#include <optional>
#include <string>
#include <vector>

#include "metaudit/ingest.hpp"

namespace metaudit::pplot {

struct PlotPoint {
  int rank = 0;
  double p = 0.0;
};

// Ranked p-values against the integers 1..n, with the uniform reference.
struct RankedSeries {
  std::vector<PlotPoint> points;
  std::vector<double> uniform_reference; // expected order statistics i/(n+1)
  std::string reference_convention = "order_statistic i/(n+1)";
  double naive_min_level = 0.0; // the 1/n convention, surfaced alongside
};

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double sse = 0.0;
};

struct QuadraticFit {
  double c0 = 0.0; // p ~ c0 + c1*rank + c2*rank^2
  double c1 = 0.0;
  double c2 = 0.0;
  double sse = 0.0;
};

// Two independent least-squares lines split after `breakpoint`:
// left covers ranks 1..breakpoint, right covers breakpoint+1..n.
struct SegmentedFit {
  int breakpoint = 0;
  double left_intercept = 0.0;
  double left_slope = 0.0;
  double right_intercept = 0.0;
  double right_slope = 0.0;
  double sse = 0.0;
};

struct NestedComparison {
  double f_statistic = 0.0;
  double p = 1.0;
  bool degenerate = false; // sse_quad == 0 with a real improvement
};

struct KsResult {
  double statistic = 0.0;
  double p = 1.0;
};

// Adjacent ranked points whose spacing exceeds the gap threshold.
struct Gap {
  int lower_rank = 0; // gap sits between lower_rank and lower_rank+1
  double size = 0.0;
};

enum class Verdict { random, consistent_effect, bilinear, ambiguous };

const char* to_string(Verdict v);

// Verdict thresholds. The defaults for fit_alpha and blade_p are calibrated
// on null simulations (n = 15, 10k replications): the nested F-test is
// anti-conservative on ranked order statistics, so a 0.05 cut would flag a
// quarter of pure-noise meta-analyses as bilinear. At 0.01/0.01 the null
// bilinear rate is ~4% and `random` stays the modal null verdict. All four
// are configurable and echoed in every report.
struct Thresholds {
  double fit_alpha = 0.01;  // quadratic-vs-linear significance
  double ks_alpha = 0.05;   // uniformity significance
  double blade_p = 0.01;    // "at least one p <= blade_p" for bilinear
  double handle_p = 0.20;   // "at least one p > handle_p" for bilinear
  double gap_spacing_multiplier = 3.0;
};

struct Diagnosis {
  RankedSeries series;
  LinearFit linear_fit;
  QuadraticFit quadratic_fit;
  std::optional<SegmentedFit> segmented_fit; // present when n >= 6
  NestedComparison quad_vs_linear;
  KsResult ks_uniform;
  std::vector<Gap> gaps;
  Verdict verdict = Verdict::ambiguous;
  Thresholds thresholds;
};

// Ranks the p-values 1..n ascending. Requires n >= 2, every p finite and
// in (0,1]. Order of the input is irrelevant.
RankedSeries build_plot(std::vector<double> pvalues);
RankedSeries build_plot(const std::vector<ingest::TestedStudy>& tests);

LinearFit fit_linear(const std::vector<PlotPoint>& points);       // n >= 3
QuadraticFit fit_quadratic(const std::vector<PlotPoint>& points); // n >= 4

// F-test on the added quadratic term: F = (sse_lin - sse_quad) /
// (sse_quad / (n - 3)), p from F(1, n-3). Zero improvement gives p = 1;
// sse_quad == 0 with improvement reports p = kMinP and the degenerate flag.
NestedComparison compare_nested(const LinearFit& lin, const QuadraticFit& quad,
                                int n);

// Exhaustive breakpoint search over 2..n-2, n >= 6. Total SSE ties (within
// 1e-12 of the total sum of squares) keep the earliest breakpoint.
SegmentedFit fit_segmented(const std::vector<PlotPoint>& points);

// One-sample Kolmogorov-Smirnov against Uniform(0,1); p-value from the
// Kolmogorov asymptotic series at lambda = (sqrt(n)+0.12+0.11/sqrt(n))*D.
KsResult ks_uniform(const std::vector<PlotPoint>& points); // n >= 2

// Flags spacings above multiplier/(n+1), i.e. `multiplier` mean uniform
// spacings. n >= 3.
std::vector<Gap> detect_gaps(const std::vector<PlotPoint>& points,
                             double spacing_multiplier = 3.0);

// Total classification rule; every input yields exactly one verdict.
Verdict classify(double quad_vs_linear_p, double ks_uniform_p, double min_p,
                 double max_p, const Thresholds& t = {});

// Runs the whole pipeline. Requires n >= 4 (the nested comparison needs a
// quadratic fit); the segmented fit is included from n >= 6.
Diagnosis diagnose(std::vector<double> pvalues, const Thresholds& t = {});
Diagnosis diagnose(const std::vector<ingest::TestedStudy>& tests,
                   const Thresholds& t = {});

} // namespace metaudit::pplot
