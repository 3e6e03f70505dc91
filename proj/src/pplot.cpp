#include "metaudit/pplot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace metaudit::pplot {

namespace {

struct Line {
  double intercept = 0.0;
  double slope = 0.0;
  double sse = 0.0;
};

// OLS of p on rank over points[lo..hi] inclusive, long double accumulation.
Line line_fit(const std::vector<PlotPoint>& pts, size_t lo, size_t hi) {
  const long double n = static_cast<long double>(hi - lo + 1);
  long double sx = 0, sy = 0;
  for (size_t i = lo; i <= hi; ++i) {
    sx += pts[i].rank;
    sy += pts[i].p;
  }
  const long double mx = sx / n, my = sy / n;
  long double sxx = 0, sxy = 0;
  for (size_t i = lo; i <= hi; ++i) {
    const long double dx = pts[i].rank - mx;
    sxx += dx * dx;
    sxy += dx * (pts[i].p - my);
  }
  Line out;
  const long double slope = sxx == 0 ? 0 : sxy / sxx;
  const long double intercept = my - slope * mx;
  out.slope = static_cast<double>(slope);
  out.intercept = static_cast<double>(intercept);
  long double sse = 0;
  for (size_t i = lo; i <= hi; ++i) {
    const long double r = pts[i].p - (intercept + slope * pts[i].rank);
    sse += r * r;
  }
  out.sse = static_cast<double>(sse);
  return out;
}

// Solves the 3x3 system A x = b in place (partial pivoting).
void solve3(long double a[3][3], long double b[3]) {
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r) {
      if (std::fabs(static_cast<double>(a[r][col])) >
          std::fabs(static_cast<double>(a[pivot][col]))) {
        pivot = r;
      }
    }
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    if (a[col][col] == 0) throw AnalysisError("singular quadratic fit");
    for (int r = col + 1; r < 3; ++r) {
      const long double f = a[r][col] / a[col][col];
      for (int c = col; c < 3; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  for (int col = 2; col >= 0; --col) {
    for (int c = col + 1; c < 3; ++c) b[col] -= a[col][c] * b[c];
    b[col] /= a[col][col];
  }
}

void require_points(const std::vector<PlotPoint>& pts, size_t n,
                    const char* what) {
  if (pts.size() < n) {
    throw AnalysisError(std::string(what) + " needs at least " +
                        std::to_string(n) + " points, found " +
                        std::to_string(pts.size()));
  }
}

std::vector<PlotPoint> sorted_by_p(std::vector<PlotPoint> pts) {
  std::sort(pts.begin(), pts.end(),
            [](const PlotPoint& a, const PlotPoint& b) { return a.p < b.p; });
  return pts;
}

} // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::random: return "random";
    case Verdict::consistent_effect: return "consistent_effect";
    case Verdict::bilinear: return "bilinear";
    default: return "ambiguous";
  }
}

RankedSeries build_plot(std::vector<double> pvalues) {
  if (pvalues.size() < 2) {
    throw AnalysisError("a p-value plot needs at least 2 p-values, found " +
                        std::to_string(pvalues.size()));
  }
  for (double p : pvalues) {
    if (!std::isfinite(p) || p <= 0.0 || p > 1.0) {
      throw DomainError("p-values must lie in (0,1]");
    }
  }
  std::sort(pvalues.begin(), pvalues.end());
  RankedSeries s;
  const size_t n = pvalues.size();
  s.points.reserve(n);
  s.uniform_reference.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    s.points.push_back({static_cast<int>(i) + 1, pvalues[i]});
    s.uniform_reference.push_back(static_cast<double>(i + 1) /
                                  static_cast<double>(n + 1));
  }
  s.naive_min_level = 1.0 / static_cast<double>(n);
  return s;
}

RankedSeries build_plot(const std::vector<ingest::TestedStudy>& tests) {
  std::vector<double> p;
  p.reserve(tests.size());
  for (const auto& t : tests) p.push_back(t.test.p);
  return build_plot(std::move(p));
}

LinearFit fit_linear(const std::vector<PlotPoint>& points) {
  require_points(points, 3, "fit_linear");
  const Line l = line_fit(points, 0, points.size() - 1);
  return LinearFit{l.intercept, l.slope, l.sse};
}

QuadraticFit fit_quadratic(const std::vector<PlotPoint>& points) {
  require_points(points, 4, "fit_quadratic");
  // centered basis u = rank - mean(rank) keeps the normal equations tame
  long double mx = 0;
  for (const auto& pt : points) mx += pt.rank;
  mx /= static_cast<long double>(points.size());

  long double a[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  long double b[3] = {0, 0, 0};
  for (const auto& pt : points) {
    const long double u = pt.rank - mx;
    const long double basis[3] = {1.0L, u, u * u};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) a[i][j] += basis[i] * basis[j];
      b[i] += basis[i] * pt.p;
    }
  }
  solve3(a, b);

  QuadraticFit q;
  q.c2 = static_cast<double>(b[2]);
  q.c1 = static_cast<double>(b[1] - 2.0L * b[2] * mx);
  q.c0 = static_cast<double>(b[0] - b[1] * mx + b[2] * mx * mx);
  long double sse = 0;
  for (const auto& pt : points) {
    const long double u = pt.rank - mx;
    const long double r = pt.p - (b[0] + b[1] * u + b[2] * u * u);
    sse += r * r;
  }
  q.sse = static_cast<double>(sse);
  return q;
}

NestedComparison compare_nested(const LinearFit& lin, const QuadraticFit& quad,
                                int n) {
  if (n < 4) {
    throw AnalysisError("compare_nested needs n >= 4, found " +
                        std::to_string(n));
  }
  NestedComparison cmp;
  // p-values live in (0,1]; an SSE this small is an exact fit at double
  // precision, and ratios of such roundoff residuals carry no signal
  constexpr double kExactFitSse = 1e-24;
  const double sse_lin = lin.sse < kExactFitSse ? 0.0 : lin.sse;
  const double sse_quad = quad.sse < kExactFitSse ? 0.0 : quad.sse;
  const double improvement = sse_lin - sse_quad;
  if (improvement <= 0.0) {
    cmp.f_statistic = 0.0;
    cmp.p = 1.0;
    return cmp;
  }
  if (sse_quad == 0.0) {
    cmp.f_statistic = std::numeric_limits<double>::infinity();
    cmp.p = stats::kMinP;
    cmp.degenerate = true;
    return cmp;
  }
  cmp.f_statistic = improvement / (sse_quad / static_cast<double>(n - 3));
  cmp.p = std::max(stats::f_upper_tail(cmp.f_statistic, 1.0,
                                       static_cast<double>(n - 3)),
                   stats::kMinP);
  return cmp;
}

SegmentedFit fit_segmented(const std::vector<PlotPoint>& points) {
  require_points(points, 6, "fit_segmented");
  const size_t n = points.size();
  const auto pts = sorted_by_p(points);

  long double my = 0;
  for (const auto& pt : pts) my += pt.p;
  my /= static_cast<long double>(n);
  long double sst = 0;
  for (const auto& pt : pts) {
    const long double d = pt.p - my;
    sst += d * d;
  }
  // SSE ties within 1e-12 of the data scale keep the earliest breakpoint
  const double tie_tol = 1e-12 * std::max(static_cast<double>(sst), 1e-30);

  SegmentedFit best;
  double best_sse = std::numeric_limits<double>::infinity();
  for (size_t b = 2; b + 2 <= n; ++b) { // left = 1..b, right = b+1..n
    const Line left = line_fit(pts, 0, b - 1);
    const Line right = line_fit(pts, b, n - 1);
    const double total = left.sse + right.sse;
    if (total < best_sse - tie_tol) {
      best_sse = total;
      best.breakpoint = static_cast<int>(b);
      best.left_intercept = left.intercept;
      best.left_slope = left.slope;
      best.right_intercept = right.intercept;
      best.right_slope = right.slope;
      best.sse = total;
    }
  }
  return best;
}

KsResult ks_uniform(const std::vector<PlotPoint>& points) {
  require_points(points, 2, "ks_uniform");
  const auto pts = sorted_by_p(points);
  const double n = static_cast<double>(pts.size());
  double d = 0.0;
  for (size_t i = 0; i < pts.size(); ++i) {
    const double p = pts[i].p;
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - p,
                  p - static_cast<double>(i) / n});
  }
  // Kolmogorov series with the Stephens small-sample lambda
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    sign = -sign;
    if (term < 1e-18) break;
  }
  KsResult r;
  r.statistic = d;
  r.p = std::clamp(2.0 * sum, stats::kMinP, 1.0);
  return r;
}

std::vector<Gap> detect_gaps(const std::vector<PlotPoint>& points,
                             double spacing_multiplier) {
  require_points(points, 3, "detect_gaps");
  const auto pts = sorted_by_p(points);
  const double threshold =
      spacing_multiplier / (static_cast<double>(pts.size()) + 1.0);
  std::vector<Gap> gaps;
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    const double size = pts[i + 1].p - pts[i].p;
    if (size > threshold) {
      gaps.push_back({static_cast<int>(i) + 1, size});
    }
  }
  return gaps;
}

Verdict classify(double quad_vs_linear_p, double ks_uniform_p, double min_p,
                 double max_p, const Thresholds& t) {
  if (quad_vs_linear_p <= t.fit_alpha && min_p <= t.blade_p &&
      max_p > t.handle_p) {
    return Verdict::bilinear;
  }
  if (ks_uniform_p <= t.ks_alpha && max_p <= t.blade_p) {
    return Verdict::consistent_effect;
  }
  if (ks_uniform_p > t.ks_alpha && quad_vs_linear_p > t.fit_alpha) {
    return Verdict::random;
  }
  return Verdict::ambiguous;
}

Diagnosis diagnose(std::vector<double> pvalues, const Thresholds& t) {
  if (pvalues.size() < 4) {
    throw AnalysisError("diagnosis needs at least 4 p-values, found " +
                        std::to_string(pvalues.size()));
  }
  Diagnosis d;
  d.thresholds = t;
  d.series = build_plot(std::move(pvalues));
  const int n = static_cast<int>(d.series.points.size());
  d.linear_fit = fit_linear(d.series.points);
  d.quadratic_fit = fit_quadratic(d.series.points);
  // enforce the nesting invariant against roundoff
  d.quadratic_fit.sse = std::min(d.quadratic_fit.sse, d.linear_fit.sse);
  d.quad_vs_linear = compare_nested(d.linear_fit, d.quadratic_fit, n);
  if (n >= 6) d.segmented_fit = fit_segmented(d.series.points);
  d.ks_uniform = ks_uniform(d.series.points);
  d.gaps = detect_gaps(d.series.points, t.gap_spacing_multiplier);
  d.verdict = classify(d.quad_vs_linear.p, d.ks_uniform.p,
                       d.series.points.front().p, d.series.points.back().p, t);
  return d;
}

Diagnosis diagnose(const std::vector<ingest::TestedStudy>& tests,
                   const Thresholds& t) {
  std::vector<double> p;
  p.reserve(tests.size());
  for (const auto& ts : tests) p.push_back(ts.test.p);
  return diagnose(std::move(p), t);
}

} // namespace metaudit::pplot
