#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "metaudit/nullsim.hpp"
#include "metaudit/pooling.hpp"
#include "metaudit/pplot.hpp"
#include "metaudit/volcano.hpp"

namespace metaudit::render {

enum class PlotKind { pvalue, volcano, simulation_grid };

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Series {
  std::string name;
  std::string color = "#333333";
  std::vector<Point> points;
  double radius = 3.0;
};

struct RefLine {
  enum class Kind { horizontal, vertical, segment };
  Kind kind = Kind::horizontal;
  double value = 0.0; // y for horizontal, x for vertical
  Point a, b;         // endpoints for segment
  std::string label;
  std::string color = "#888888";
  bool dashed = false;
};

struct PlotSpec {
  PlotKind kind = PlotKind::pvalue;
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::vector<RefLine> lines;
  double width = 640.0;
  double height = 440.0;
  std::vector<PlotSpec> panels; // simulation_grid only
};

// Deterministic, self-contained SVG 1.1 text: identical spec, identical
// bytes. Throws AnalysisError when there is nothing to draw.
std::string render_svg(const PlotSpec& spec);

// Geometry builders.
PlotSpec pvalue_plot_spec(const pplot::Diagnosis& d, std::string title);
PlotSpec pvalue_panel_spec(const std::vector<double>& ranked_p,
                           std::string title);
PlotSpec volcano_plot_spec(const volcano::VolcanoReport& v, std::string title);
PlotSpec simulation_grid_spec(const nullsim::SimulationReport& sim);
PlotSpec simulation_pooled_spec(const nullsim::SimulationReport& sim);

// Everything one run produced; absent analyses are omitted from reports.
struct AuditResult {
  std::string source;
  double confidence_level = 0.95;
  double null_value = 1.0;
  stats::ScaleMode scale = stats::ScaleMode::linear;
  double alpha = 0.05;
  long long m_tests = 0;
  double p_clamp = stats::kMinP;
  std::vector<ingest::TestedStudy> tests;
  std::optional<pplot::Diagnosis> diagnosis;
  std::optional<volcano::VolcanoReport> volcano_report;
  std::optional<volcano::NullGapReport> null_gap;
  std::optional<volcano::QuestionCount> questions;
  std::optional<pooling::PooledSummary> pooled;
  std::optional<nullsim::SimulationReport> simulation;
};

// Per-study table in the same delimited format ingest reads (plus derived
// columns, which ingest ignores). Full precision round-trip.
std::string study_table_csv(const std::vector<ingest::TestedStudy>& tests);

// Line-oriented, header-keyed text report; numbers shown at 4 decimals.
// Requires at least one analysis (tests or simulation) to be present.
std::string render_report(const AuditResult& r);

// Hierarchical machine-readable variant, full precision.
nlohmann::json report_json(const AuditResult& r);

} // namespace metaudit::render
