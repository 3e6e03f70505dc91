#include "metaudit/volcano.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace metaudit::volcano {

const char* to_string(Direction d) {
  switch (d) {
    case Direction::increase: return "increase";
    case Direction::decrease: return "decrease";
    default: return "at_null";
  }
}

VolcanoReport build_volcano(const std::vector<ingest::TestedStudy>& tests,
                            double alpha, long long m_tests,
                            double null_value) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw DomainError("alpha must lie strictly between 0 and 1");
  }
  if (m_tests < 1) {
    throw DomainError("m_tests must be a positive integer");
  }
  if (m_tests < static_cast<long long>(tests.size())) {
    throw DomainError("m_tests must be at least the number of tests (" +
                      std::to_string(tests.size()) + ")");
  }
  VolcanoReport r;
  r.alpha = alpha;
  r.m_tests = m_tests;
  r.corrected_alpha = alpha / static_cast<double>(m_tests);
  r.nominal_line = -std::log10(alpha);
  // sum rather than -log10(alpha/m) so the line spacing is exactly log10(m)
  r.bonferroni_line = r.nominal_line + std::log10(static_cast<double>(m_tests));
  r.null_value = null_value;
  r.points.reserve(tests.size());
  for (const auto& t : tests) {
    VolcanoPoint pt;
    pt.label = t.study.label;
    pt.effect = t.study.effect;
    pt.p = t.test.p;
    pt.neg_log10_p = t.test.neg_log10_p;
    if (t.study.effect > null_value) {
      pt.direction = Direction::increase;
    } else if (t.study.effect < null_value) {
      pt.direction = Direction::decrease;
    } else {
      pt.direction = Direction::at_null;
    }
    const bool significant = pt.p < alpha; // strict: p == alpha is not
    if (significant && pt.direction == Direction::increase) {
      ++r.counts.significant_increase;
    } else if (significant && pt.direction == Direction::decrease) {
      ++r.counts.significant_decrease;
    } else {
      ++r.counts.nonsignificant;
    }
    r.points.push_back(std::move(pt));
  }
  return r;
}

QuestionCount count_questions(
    const std::vector<std::vector<long long>>& families) {
  if (families.empty()) {
    throw DomainError("count_questions requires at least one family");
  }
  QuestionCount qc;
  for (const auto& family : families) {
    if (family.empty()) {
      throw DomainError("count_questions: empty factor list");
    }
    long long product = 1;
    for (long long f : family) {
      if (f < 1) {
        throw DomainError("count_questions: factor sizes must be >= 1");
      }
      if (product > std::numeric_limits<long long>::max() / f) {
        throw DomainError("count_questions: factor product overflows");
      }
      product *= f;
    }
    qc.per_family.push_back(product);
    if (qc.total > std::numeric_limits<long long>::max() - product) {
      throw DomainError("count_questions: total overflows");
    }
    qc.total += product;
  }
  return qc;
}

NullGapReport gap_around_null(const std::vector<ingest::TestedStudy>& tests,
                              double null_value, double window) {
  if (tests.size() < 3) {
    throw AnalysisError("gap_around_null needs at least 3 points, found " +
                        std::to_string(tests.size()));
  }
  if (!(window > 0.0)) {
    throw DomainError("window must be positive");
  }
  NullGapReport r;
  r.window = window;
  r.nearest_distance = std::numeric_limits<double>::infinity();
  for (const auto& t : tests) {
    const double dist = std::fabs(t.study.effect - null_value);
    r.nearest_distance = std::min(r.nearest_distance, dist);
    if (t.study.effect > null_value) ++r.above_null;
    if (t.study.effect < null_value) ++r.below_null;
  }
  r.gap = r.nearest_distance >= window;
  return r;
}

} // namespace metaudit::volcano
