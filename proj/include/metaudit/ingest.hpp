#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "metaudit/stats.hpp"

namespace metaudit::ingest {

// One base study as published.
struct StudyRecord {
  std::string label;
  std::optional<int> year;
  double effect = 1.0;
  double cl_low = 0.0;
  double cl_high = 0.0;
  std::optional<long long> cases;
};

// All base studies of one meta-analysis, with the table-wide parameters.
struct StudyTable {
  std::vector<StudyRecord> records;
  double confidence_level = 0.95;
  double null_value = 1.0;
  std::string source;
};

// A StudyRecord with its reconstructed statistics and its rank by
// ascending p (ties broken by input order).
struct TestedStudy {
  StudyRecord study;
  stats::TestResult test;
  int rank = 0;
};

stats::EffectEstimate to_estimate(const StudyRecord& r, const StudyTable& t);

// Parses comma- or tab-delimited text with a header row. Required columns:
// label, rr, cl_low, cl_high. Optional: year, cases, ref (ref is accepted
// and ignored; row identity is positional). Unknown columns are ignored so
// emitted per-study tables can be re-read. Rows are validated against the
// StudyRecord invariants; errors cite the 1-based data row.
StudyTable parse_table(std::string_view text, double confidence_level,
                       double null_value, std::string source = "");

StudyTable load_table(const std::filesystem::path& path,
                      double confidence_level, double null_value);

// Serializes a table back to the same delimited format, full precision.
// parse_table(write_table(t)) is the identity on every field.
std::string write_table(const StudyTable& t);

// One TestedStudy per record, input order preserved; ranks are a
// permutation of 1..n by ascending p, stable in input order on ties.
std::vector<TestedStudy> derive_tests(
    const StudyTable& t, stats::ScaleMode mode = stats::ScaleMode::linear);

} // namespace metaudit::ingest
