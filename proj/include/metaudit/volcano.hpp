#pragma once

#include <string>
#include <vector>

#include "metaudit/ingest.hpp"

namespace metaudit::volcano {

enum class Direction { increase, decrease, at_null };

const char* to_string(Direction d);

struct VolcanoPoint {
  std::string label;
  double effect = 1.0;
  double p = 1.0;
  double neg_log10_p = 0.0;
  Direction direction = Direction::at_null;
};

struct Counts {
  int significant_increase = 0;
  int significant_decrease = 0;
  int nonsignificant = 0;
};

struct VolcanoReport {
  std::vector<VolcanoPoint> points;
  double alpha = 0.05;
  long long m_tests = 1;
  double corrected_alpha = 0.05;  // alpha / m_tests
  double nominal_line = 0.0;      // -log10(alpha)
  double bonferroni_line = 0.0;   // nominal_line + log10(m_tests)
  double null_value = 1.0;
  Counts counts;
};

// One point per test; significance at the nominal alpha is strict (p ==
// alpha does not count). Requires alpha in (0,1) and m_tests >= max(1, n).
VolcanoReport build_volcano(const std::vector<ingest::TestedStudy>& tests,
                            double alpha, long long m_tests,
                            double null_value);

// Analysis-search-space counting: one factor list per outcome family,
// per-family product and grand total.
struct QuestionCount {
  std::vector<long long> per_family;
  long long total = 0;
};

QuestionCount count_questions(
    const std::vector<std::vector<long long>>& families);

// True when no effect lies within `window` of the null; also reports the
// positive/negative split around the null. Requires >= 3 points.
struct NullGapReport {
  bool gap = false;
  double window = 0.05;
  double nearest_distance = 0.0; // min |effect - null| over all points
  int above_null = 0;
  int below_null = 0;
};

NullGapReport gap_around_null(const std::vector<ingest::TestedStudy>& tests,
                              double null_value, double window = 0.05);

} // namespace metaudit::volcano
