#include "metaudit/pooling.hpp"

#include <cmath>

namespace metaudit::pooling {

namespace {

double working_effect(const ingest::TestedStudy& t, stats::ScaleMode mode) {
  if (mode == stats::ScaleMode::linear) return t.study.effect;
  if (t.study.effect <= 0.0) {
    throw DomainError("study '" + t.study.label +
                      "': log scale requires a positive effect");
  }
  return std::log(t.study.effect);
}

void require_tests(const std::vector<ingest::TestedStudy>& tests, size_t n,
                   const char* what) {
  if (tests.size() < n) {
    throw AnalysisError(std::string(what) + " needs at least " +
                        std::to_string(n) + " studies, found " +
                        std::to_string(tests.size()));
  }
  for (const auto& t : tests) {
    if (!(t.test.se > 0.0)) {
      throw DomainError("study '" + t.study.label +
                        "': standard error must be positive");
    }
  }
}

} // namespace

FixedEffect pool_inverse_variance(
    const std::vector<ingest::TestedStudy>& tests, stats::ScaleMode mode) {
  require_tests(tests, 2, "pool_inverse_variance");
  long double weight_sum = 0, weighted_effect = 0;
  std::vector<double> raw;
  raw.reserve(tests.size());
  for (const auto& t : tests) {
    const long double w = 1.0L / (static_cast<long double>(t.test.se) *
                                  static_cast<long double>(t.test.se));
    raw.push_back(static_cast<double>(w));
    weight_sum += w;
    weighted_effect += w * working_effect(t, mode);
  }
  FixedEffect fe;
  const double pooled = static_cast<double>(weighted_effect / weight_sum);
  fe.pooled_effect =
      mode == stats::ScaleMode::linear ? pooled : std::exp(pooled);
  fe.pooled_se = static_cast<double>(std::sqrt(1.0L / weight_sum));
  fe.weights.reserve(raw.size());
  for (double w : raw) {
    fe.weights.push_back(static_cast<double>(w / weight_sum));
  }
  return fe;
}

Heterogeneity heterogeneity(const std::vector<ingest::TestedStudy>& tests,
                            stats::ScaleMode mode) {
  require_tests(tests, 2, "heterogeneity");
  long double weight_sum = 0, weighted_effect = 0;
  for (const auto& t : tests) {
    const long double w = 1.0L / (static_cast<long double>(t.test.se) *
                                  static_cast<long double>(t.test.se));
    weight_sum += w;
    weighted_effect += w * working_effect(t, mode);
  }
  const long double pooled = weighted_effect / weight_sum;
  // Q = 0 iff all effects are equal; honor that exactly
  bool all_equal = true;
  for (const auto& t : tests) {
    all_equal = all_equal &&
                working_effect(t, mode) == working_effect(tests.front(), mode);
  }
  long double q = 0;
  if (!all_equal) {
    for (const auto& t : tests) {
      const long double w = 1.0L / (static_cast<long double>(t.test.se) *
                                    static_cast<long double>(t.test.se));
      const long double d = working_effect(t, mode) - pooled;
      q += w * d * d;
    }
  }
  Heterogeneity h;
  h.q = static_cast<double>(q);
  h.df = static_cast<int>(tests.size()) - 1;
  h.i_squared = h.q > 0.0 ? std::max(0.0, (h.q - h.df) / h.q) : 0.0;
  return h;
}

EggerResult egger_test(const std::vector<ingest::TestedStudy>& tests) {
  require_tests(tests, 3, "egger_test");
  const size_t n = tests.size();
  long double sx = 0, sy = 0;
  for (const auto& t : tests) {
    sx += 1.0L / t.test.se;
    sy += t.test.z;
  }
  const long double mx = sx / static_cast<long double>(n);
  const long double my = sy / static_cast<long double>(n);
  long double sxx = 0, sxy = 0;
  for (const auto& t : tests) {
    const long double dx = 1.0L / t.test.se - mx;
    sxx += dx * dx;
    sxy += dx * (t.test.z - my);
  }
  if (sxx == 0) {
    throw AnalysisError(
        "egger_test: all precisions equal, slope unidentifiable");
  }
  const long double slope = sxy / sxx;
  const long double intercept = my - slope * mx;
  long double sse = 0, syy = 0;
  for (const auto& t : tests) {
    const long double r =
        t.test.z - (intercept + slope * (1.0L / t.test.se));
    sse += r * r;
    const long double dy = t.test.z - my;
    syy += dy * dy;
  }
  // residuals this far below the response variance are pure roundoff
  if (sse <= 1e-20L * syy) sse = 0;
  const long double s2 = sse / static_cast<long double>(n - 2);
  const long double se_intercept =
      std::sqrt(s2 * (1.0L / static_cast<long double>(n) + mx * mx / sxx));

  EggerResult e;
  e.intercept = static_cast<double>(intercept);
  e.slope = static_cast<double>(slope);
  e.intercept_se = static_cast<double>(se_intercept);
  e.t = se_intercept > 0 ? static_cast<double>(intercept / se_intercept) : 0.0;
  e.p = se_intercept > 0
            ? stats::student_t_two_sided(e.t, static_cast<double>(n - 2))
            : 1.0;
  return e;
}

PooledSummary pool(const std::vector<ingest::TestedStudy>& tests,
                   stats::ScaleMode mode, bool with_random_effects) {
  PooledSummary s;
  s.scale = mode;
  s.fixed = pool_inverse_variance(tests, mode);
  s.heterogeneity = heterogeneity(tests, mode);
  s.egger = egger_test(tests);
  if (with_random_effects) {
    // DerSimonian-Laird
    long double w_sum = 0, w2_sum = 0;
    for (const auto& t : tests) {
      const long double w = 1.0L / (static_cast<long double>(t.test.se) *
                                    static_cast<long double>(t.test.se));
      w_sum += w;
      w2_sum += w * w;
    }
    const double denom = static_cast<double>(w_sum - w2_sum / w_sum);
    RandomEffects re;
    re.tau_squared =
        denom > 0.0
            ? std::max(0.0, (s.heterogeneity.q - s.heterogeneity.df) / denom)
            : 0.0;
    long double rw_sum = 0, rw_effect = 0;
    for (const auto& t : tests) {
      const long double v = static_cast<long double>(t.test.se) *
                                static_cast<long double>(t.test.se) +
                            re.tau_squared;
      rw_sum += 1.0L / v;
      rw_effect += working_effect(t, mode) / v;
    }
    const double pooled = static_cast<double>(rw_effect / rw_sum);
    re.pooled_effect =
        mode == stats::ScaleMode::linear ? pooled : std::exp(pooled);
    re.pooled_se = static_cast<double>(std::sqrt(1.0L / rw_sum));
    s.random_effects = re;
  }
  return s;
}

} // namespace metaudit::pooling
