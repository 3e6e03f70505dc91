#pragma once

#include <limits>
#include <string>

#include "metaudit/errors.hpp"

namespace metaudit::stats {

// Scale on which interval widths and distances from the null are measured.
// `linear` works on the raw ratio scale, which is what reproduces published
// SE/Z columns reconstructed from (RR, CL_low, CL_high) tables. `log_effect`
// is the conventional meta-analytic alternative and is never the default.
enum class ScaleMode { linear, log_effect };

const char* to_string(ScaleMode mode);
ScaleMode scale_mode_from_string(const std::string& name);

// One study result as published: an effect estimate with its confidence
// interval, plus the table-wide confidence level and no-effect value.
struct EffectEstimate {
  double effect = 1.0;
  double cl_low = 0.0;
  double cl_high = 0.0;
  double confidence_level = 0.95;
  double null_value = 1.0; // 1.0 for ratio scales, 0.0 for difference scales
};

// Statistics reconstructed from one EffectEstimate.
struct TestResult {
  double se = 0.0;
  double z = 0.0;
  double p = 1.0;
  double neg_log10_p = 0.0;
};

// p-values are clamped to this before taking log10 so neg_log10_p is always
// finite. The clamp is part of the output metadata.
inline constexpr double kMinP = std::numeric_limits<double>::denorm_min();

// Standard normal CDF. Absolute error below 1e-15 for |x| <= 8.
// Throws DomainError on non-finite input.
double normal_cdf(double x);

// Inverse of normal_cdf for q in (0,1). Throws DomainError outside.
double normal_quantile(double q);

// Two-sided tail probability 2*(1 - Phi(|z|)), clamped into [kMinP, 1].
double two_sided_p(double z);

// Critical value z_crit = normal_quantile((1 + confidence_level) / 2).
double critical_z(double confidence_level);

// Throws DomainError naming the violated invariant; the cl_high <= cl_low
// case is reported as an invalid interval.
void validate(const EffectEstimate& e);

// SE = (cl_high - cl_low) / (2 * z_crit), on the requested scale.
double se_from_ci(const EffectEstimate& e, ScaleMode mode = ScaleMode::linear);

// z = (effect - null_value) / se, p = two_sided_p(z), sign of z preserved.
TestResult test_against_null(const EffectEstimate& e,
                             ScaleMode mode = ScaleMode::linear);

// Replication assurance per the 0.001 / 0.05 rule of thumb.
enum class ReplicationStrength { strong, weak, none };

ReplicationStrength replication_strength(double p);
const char* to_string(ReplicationStrength s);

// Regularized incomplete beta function I_x(a, b), x in [0,1], a,b > 0.
double incomplete_beta(double a, double b, double x);

// Upper tail P(F > f) for the F(d1, d2) distribution.
double f_upper_tail(double f, double d1, double d2);

// Two-sided tail 2*P(T > |t|) for Student's t with df degrees of freedom.
double student_t_two_sided(double t, double df);

} // namespace metaudit::stats
