#include "metaudit/stats.hpp"

#include <algorithm>
#include <cmath>

namespace metaudit::stats {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;

// Wichura's AS 241 (PPND16) rational approximations for the normal
// quantile; relative error around 1e-16 across (0,1).
double ppnd16(double p) {
  static const double a[8] = {
      3.3871328727963666080e0,  1.3314166789178437745e2,
      1.9715909503065514427e3,  1.3731693765509461125e4,
      4.5921953931549871457e4,  6.7265770927008700853e4,
      3.3430575583588128105e4,  2.5090809287301226727e3};
  static const double b[8] = {
      1.0,                      4.2313330701600911252e1,
      6.8718700749205790830e2,  5.3941960214247511077e3,
      2.1213794301586595867e4,  3.9307895800092710610e4,
      2.8729085735721942674e4,  5.2264952788528545610e3};
  static const double c[8] = {
      1.42343711074968357734e0, 4.63033784615654529590e0,
      5.76949722146069140550e0, 3.64784832476320460504e0,
      1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static const double d[8] = {
      1.0,                      2.05319162663775882187e0,
      1.67638483018380384940e0, 6.89767334985100004550e-1,
      1.48103976427480074590e-1, 1.51986665636164571966e-2,
      5.47593808499534494600e-4, 1.05075007164441684324e-9};
  static const double e[8] = {
      6.65790464350110377720e0, 5.46378491116411436990e0,
      1.78482653991729133580e0, 2.96560571828504891230e-1,
      2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static const double f[8] = {
      1.0,                      5.99832206555887937690e-1,
      1.36929880922735805310e-1, 1.48753612908506148525e-2,
      7.86869131145613259100e-4, 1.84631831751005468180e-5,
      1.42151175831644588870e-7, 2.04426310338993978564e-15};

  auto ratio = [](const double* num, const double* den, double r) {
    double n = num[7], m = den[7];
    for (int i = 6; i >= 0; --i) {
      n = n * r + num[i];
      m = m * r + den[i];
    }
    return n / m;
  };

  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * ratio(a, b, r);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    value = ratio(c, d, r - 1.6);
  } else {
    value = ratio(e, f, r - 5.0);
  }
  return q < 0.0 ? -value : value;
}

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 400;
  const double eps = std::numeric_limits<double>::epsilon();
  const double fpmin = std::numeric_limits<double>::min() / eps;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 10.0 * eps) return h;
  }
  throw AnalysisError("incomplete_beta: continued fraction did not converge");
}

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) {
    throw DomainError(std::string(what) + " must be finite");
  }
}

} // namespace

const char* to_string(ScaleMode mode) {
  return mode == ScaleMode::linear ? "linear" : "log";
}

ScaleMode scale_mode_from_string(const std::string& name) {
  if (name == "linear") return ScaleMode::linear;
  if (name == "log") return ScaleMode::log_effect;
  throw DomainError("unknown scale mode '" + name + "' (expected linear or log)");
}

double normal_cdf(double x) {
  require_finite(x, "normal_cdf argument");
  return 0.5 * std::erfc(-x / kSqrt2);
}

double normal_quantile(double q) {
  if (!std::isfinite(q) || q <= 0.0 || q >= 1.0) {
    throw DomainError("normal_quantile requires a probability in (0,1)");
  }
  return ppnd16(q);
}

double two_sided_p(double z) {
  require_finite(z, "two_sided_p argument");
  return std::max(std::erfc(std::fabs(z) / kSqrt2), kMinP);
}

double critical_z(double confidence_level) {
  if (!std::isfinite(confidence_level) || confidence_level <= 0.0 ||
      confidence_level >= 1.0) {
    throw DomainError("confidence_level must lie strictly between 0 and 1");
  }
  return normal_quantile(0.5 * (1.0 + confidence_level));
}

void validate(const EffectEstimate& e) {
  require_finite(e.effect, "effect");
  require_finite(e.cl_low, "cl_low");
  require_finite(e.cl_high, "cl_high");
  require_finite(e.null_value, "null_value");
  if (!(e.confidence_level > 0.0) || !(e.confidence_level < 1.0)) {
    throw DomainError("confidence_level must lie strictly between 0 and 1");
  }
  if (!(e.cl_low < e.cl_high)) {
    throw DomainError("invalid interval: cl_high must exceed cl_low");
  }
  if (e.effect < e.cl_low || e.effect > e.cl_high) {
    throw DomainError("effect must lie inside [cl_low, cl_high]");
  }
}

double se_from_ci(const EffectEstimate& e, ScaleMode mode) {
  validate(e);
  double width;
  if (mode == ScaleMode::linear) {
    width = e.cl_high - e.cl_low;
  } else {
    if (e.cl_low <= 0.0) {
      throw DomainError("log scale requires positive confidence limits");
    }
    width = std::log(e.cl_high) - std::log(e.cl_low);
  }
  return width / (2.0 * critical_z(e.confidence_level));
}

TestResult test_against_null(const EffectEstimate& e, ScaleMode mode) {
  TestResult r;
  r.se = se_from_ci(e, mode);
  if (mode == ScaleMode::linear) {
    r.z = (e.effect - e.null_value) / r.se;
  } else {
    if (e.effect <= 0.0 || e.null_value <= 0.0) {
      throw DomainError("log scale requires a positive effect and null value");
    }
    r.z = (std::log(e.effect) - std::log(e.null_value)) / r.se;
  }
  r.p = two_sided_p(r.z);
  r.neg_log10_p = -std::log10(r.p);
  return r;
}

ReplicationStrength replication_strength(double p) {
  if (!std::isfinite(p) || p <= 0.0 || p > 1.0) {
    throw DomainError("replication_strength requires p in (0,1]");
  }
  if (p <= 0.001) return ReplicationStrength::strong;
  if (p <= 0.05) return ReplicationStrength::weak;
  return ReplicationStrength::none;
}

const char* to_string(ReplicationStrength s) {
  switch (s) {
    case ReplicationStrength::strong: return "strong";
    case ReplicationStrength::weak: return "weak";
    default: return "none";
  }
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw DomainError("incomplete_beta requires a > 0 and b > 0");
  }
  if (!std::isfinite(x) || x < 0.0 || x > 1.0) {
    throw DomainError("incomplete_beta requires x in [0,1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                          std::lgamma(b) + a * std::log(x) +
                          b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cf(a, b, x) / a;
  }
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double f_upper_tail(double f, double d1, double d2) {
  if (!(d1 > 0.0) || !(d2 > 0.0)) {
    throw DomainError("f_upper_tail requires positive degrees of freedom");
  }
  require_finite(f, "F statistic");
  if (f <= 0.0) return 1.0;
  const double x = d2 / (d2 + d1 * f);
  return std::clamp(incomplete_beta(0.5 * d2, 0.5 * d1, x), 0.0, 1.0);
}

double student_t_two_sided(double t, double df) {
  if (!(df > 0.0)) {
    throw DomainError("student_t_two_sided requires positive df");
  }
  require_finite(t, "t statistic");
  if (t == 0.0) return 1.0;
  const double x = df / (df + t * t);
  return std::clamp(incomplete_beta(0.5 * df, 0.5, x), kMinP, 1.0);
}

} // namespace metaudit::stats
