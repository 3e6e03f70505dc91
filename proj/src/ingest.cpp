#include "metaudit/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "numfmt.hpp"

namespace metaudit::ingest {

namespace {

std::string trim(std::string_view s) {
  size_t first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return "";
  size_t last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split_fields(std::string_view line, char delim) {
  std::vector<std::string> fields;
  std::string cur;
  bool in_quotes = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"' && cur.empty()) {
      in_quotes = true;
    } else if (c == delim) {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (in_quotes) throw InputError("unterminated quoted field");
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& field, int row, const char* column) {
  std::string t = trim(field);
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (first != last && *first == '+') ++first;
  double value = 0.0;
  auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last || t.empty()) {
    throw InputError("row " + std::to_string(row) + ": column '" + column +
                     "': not a number: '" + t + "'");
  }
  return value;
}

long long parse_integer(const std::string& field, int row,
                        const char* column) {
  std::string t = trim(field);
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (first != last && *first == '+') ++first;
  long long value = 0;
  auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last || t.empty()) {
    throw InputError("row " + std::to_string(row) + ": column '" + column +
                     "': not an integer: '" + t + "'");
  }
  return value;
}

bool needs_quoting(const std::string& s) {
  return s.find_first_of(",\t\"\n") != std::string::npos;
}

std::string quoted(const std::string& s) {
  if (!needs_quoting(s)) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

} // namespace

stats::EffectEstimate to_estimate(const StudyRecord& r, const StudyTable& t) {
  return stats::EffectEstimate{r.effect, r.cl_low, r.cl_high,
                               t.confidence_level, t.null_value};
}

StudyTable parse_table(std::string_view text, double confidence_level,
                       double null_value, std::string source) {
  if (!(confidence_level > 0.0) || !(confidence_level < 1.0)) {
    throw DomainError("confidence_level must lie strictly between 0 and 1");
  }
  if (!std::isfinite(null_value)) {
    throw DomainError("null_value must be finite");
  }

  // UTF-8 BOM, if any
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") {
    text.remove_prefix(3);
  }

  std::vector<std::string> lines;
  {
    size_t start = 0;
    while (start <= text.size()) {
      size_t nl = text.find('\n', start);
      std::string_view line = nl == std::string_view::npos
                                  ? text.substr(start)
                                  : text.substr(start, nl - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (!trim(line).empty()) lines.emplace_back(line);
      if (nl == std::string_view::npos) break;
      start = nl + 1;
    }
  }
  const std::string where = source.empty() ? "input" : source;
  if (lines.empty()) throw InputError(where + ": empty table, header row required");

  const char delim =
      lines[0].find('\t') != std::string::npos ? '\t' : ',';

  std::map<std::string, size_t> columns;
  const auto header = split_fields(lines[0], delim);
  for (size_t i = 0; i < header.size(); ++i) {
    columns.emplace(lower(trim(header[i])), i);
  }
  for (const char* required : {"label", "rr", "cl_low", "cl_high"}) {
    if (!columns.count(required)) {
      throw InputError(where + ": missing required column '" +
                       std::string(required) + "'");
    }
  }
  auto column = [&](const char* name) -> std::optional<size_t> {
    auto it = columns.find(name);
    if (it == columns.end()) return std::nullopt;
    return it->second;
  };
  const size_t col_label = *column("label");
  const size_t col_rr = *column("rr");
  const size_t col_lo = *column("cl_low");
  const size_t col_hi = *column("cl_high");
  const auto col_year = column("year");
  const auto col_cases = column("cases");

  StudyTable table;
  table.confidence_level = confidence_level;
  table.null_value = null_value;
  table.source = std::move(source);

  std::map<std::string, int> seen_labels;
  for (size_t li = 1; li < lines.size(); ++li) {
    const int row = static_cast<int>(li); // 1-based data row
    auto fields = split_fields(lines[li], delim);
    if (fields.size() != header.size()) {
      throw InputError(where + ": row " + std::to_string(row) + ": expected " +
                       std::to_string(header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    }
    auto field = [&](size_t idx) { return trim(fields[idx]); };

    StudyRecord rec;
    rec.label = field(col_label);
    if (rec.label.empty()) {
      throw InputError(where + ": row " + std::to_string(row) +
                       ": label must not be empty");
    }
    rec.effect = parse_double(fields[col_rr], row, "rr");
    rec.cl_low = parse_double(fields[col_lo], row, "cl_low");
    rec.cl_high = parse_double(fields[col_hi], row, "cl_high");
    if (col_year && !field(*col_year).empty()) {
      long long y = parse_integer(fields[*col_year], row, "year");
      if (y < 1800 || y > 2100) {
        throw InputError(where + ": row " + std::to_string(row) +
                         ": year " + std::to_string(y) +
                         " outside [1800, 2100]");
      }
      rec.year = static_cast<int>(y);
    }
    if (col_cases && !field(*col_cases).empty()) {
      long long c = parse_integer(fields[*col_cases], row, "cases");
      if (c < 0) {
        throw InputError(where + ": row " + std::to_string(row) +
                         ": cases must be nonnegative");
      }
      rec.cases = c;
    }

    try {
      stats::validate(to_estimate(rec, table));
    } catch (const DomainError& e) {
      throw InputError(where + ": row " + std::to_string(row) + ": " +
                       e.what());
    }
    auto [it, inserted] = seen_labels.emplace(rec.label, row);
    if (!inserted) {
      throw InputError(where + ": duplicate label '" + rec.label + "' (rows " +
                       std::to_string(it->second) + " and " +
                       std::to_string(row) + ")");
    }
    table.records.push_back(std::move(rec));
  }

  if (table.records.size() < 2) {
    throw InputError(where + ": a study table needs at least 2 records, found " +
                     std::to_string(table.records.size()));
  }
  return table;
}

StudyTable load_table(const std::filesystem::path& path,
                      double confidence_level, double null_value) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open input file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_table(buf.str(), confidence_level, null_value, path.string());
}

std::string write_table(const StudyTable& t) {
  using detail::fmt_full;
  const bool any_year = std::any_of(t.records.begin(), t.records.end(),
                                    [](const auto& r) { return r.year.has_value(); });
  const bool any_cases = std::any_of(t.records.begin(), t.records.end(),
                                     [](const auto& r) { return r.cases.has_value(); });
  std::string out = "label";
  if (any_year) out += ",year";
  if (any_cases) out += ",cases";
  out += ",rr,cl_low,cl_high\n";
  for (const auto& r : t.records) {
    out += quoted(r.label);
    if (any_year) out += "," + (r.year ? std::to_string(*r.year) : std::string());
    if (any_cases) out += "," + (r.cases ? std::to_string(*r.cases) : std::string());
    out += "," + fmt_full(r.effect);
    out += "," + fmt_full(r.cl_low);
    out += "," + fmt_full(r.cl_high);
    out += "\n";
  }
  return out;
}

std::vector<TestedStudy> derive_tests(const StudyTable& t,
                                      stats::ScaleMode mode) {
  std::vector<TestedStudy> tests;
  tests.reserve(t.records.size());
  for (const auto& rec : t.records) {
    try {
      TestedStudy ts;
      ts.study = rec;
      ts.test = stats::test_against_null(to_estimate(rec, t), mode);
      tests.push_back(std::move(ts));
    } catch (const DomainError& e) {
      throw DomainError("study '" + rec.label + "': " + e.what());
    }
  }
  // rank by ascending p, ties stable in input order
  std::vector<size_t> order(tests.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return tests[a].test.p < tests[b].test.p;
  });
  for (size_t pos = 0; pos < order.size(); ++pos) {
    tests[order[pos]].rank = static_cast<int>(pos) + 1;
  }
  return tests;
}

} // namespace metaudit::ingest
