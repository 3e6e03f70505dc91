#pragma once

#include <optional>
#include <vector>

#include "metaudit/ingest.hpp"

namespace metaudit::pooling {

// Fixed-effect inverse-variance pool. pooled_effect is reported on the raw
// effect scale (back-transformed in log mode); pooled_se and weights live
// on the working scale.
struct FixedEffect {
  double pooled_effect = 0.0;
  double pooled_se = 0.0;
  std::vector<double> weights; // normalized, sum to 1
};

struct Heterogeneity {
  double q = 0.0;
  int df = 0;
  double i_squared = 0.0; // max(0, (Q - df) / Q)
};

struct EggerResult {
  double intercept = 0.0;
  double intercept_se = 0.0;
  double t = 0.0;
  double p = 1.0; // two-sided, t(n-2)
  double slope = 0.0;
};

// DerSimonian-Laird random effects. Experimental; reported only on request.
struct RandomEffects {
  double tau_squared = 0.0;
  double pooled_effect = 0.0;
  double pooled_se = 0.0;
};

struct PooledSummary {
  stats::ScaleMode scale = stats::ScaleMode::linear;
  FixedEffect fixed;
  Heterogeneity heterogeneity;
  EggerResult egger;
  std::optional<RandomEffects> random_effects;
};

// Weights proportional to 1/se^2. Requires n >= 2 and all se > 0.
FixedEffect pool_inverse_variance(
    const std::vector<ingest::TestedStudy>& tests,
    stats::ScaleMode mode = stats::ScaleMode::linear);

// Cochran's Q about the fixed-effect pool, df = n - 1, I^2 clamped at 0.
Heterogeneity heterogeneity(const std::vector<ingest::TestedStudy>& tests,
                            stats::ScaleMode mode = stats::ScaleMode::linear);

// OLS of the standardized effect z_i on precision 1/se_i; the intercept is
// the bias signal. Requires n >= 3 and non-constant precisions.
EggerResult egger_test(const std::vector<ingest::TestedStudy>& tests);

PooledSummary pool(const std::vector<ingest::TestedStudy>& tests,
                   stats::ScaleMode mode = stats::ScaleMode::linear,
                   bool with_random_effects = false);

} // namespace metaudit::pooling
