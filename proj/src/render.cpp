#include "metaudit/render.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "numfmt.hpp"

namespace metaudit::render {

namespace {

using detail::fmt_fixed;
using detail::fmt_full;

std::string fmt_coord(double v) { return fmt_fixed(v, 2); }

// tick label: fixed 3 decimals with trailing zeros stripped
std::string fmt_tick(double v) {
  std::string s = fmt_fixed(v, 3);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;

  void include(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
};

void check_finite(double v) {
  if (!std::isfinite(v)) {
    throw DomainError("plot geometry must be finite");
  }
}

// Renders one plot into `out` inside the box (ox, oy, w, h).
void render_plot_into(std::string& out, const PlotSpec& spec, double ox,
                      double oy, double w, double h) {
  size_t n_points = 0;
  for (const auto& s : spec.series) n_points += s.points.size();
  if (n_points == 0) {
    throw AnalysisError("empty plot: no points to draw");
  }

  const bool compact = w < 300.0;
  const double ml = compact ? 38.0 : 54.0;
  const double mr = compact ? 10.0 : 16.0;
  const double mt = compact ? 20.0 : 28.0;
  const double mb = compact ? 28.0 : 42.0;
  const double px0 = ox + ml, py0 = oy + mt;
  const double pw = w - ml - mr, ph = h - mt - mb;

  bool have_x = false, have_y = false;
  Range xr, yr;
  auto seed_x = [&](double v) {
    check_finite(v);
    if (!have_x) { xr.lo = xr.hi = v; have_x = true; } else xr.include(v);
  };
  auto seed_y = [&](double v) {
    check_finite(v);
    if (!have_y) { yr.lo = yr.hi = v; have_y = true; } else yr.include(v);
  };
  for (const auto& s : spec.series) {
    for (const auto& p : s.points) {
      seed_x(p.x);
      seed_y(p.y);
    }
  }
  for (const auto& l : spec.lines) {
    switch (l.kind) {
      case RefLine::Kind::horizontal: seed_y(l.value); break;
      case RefLine::Kind::vertical: seed_x(l.value); break;
      case RefLine::Kind::segment:
        seed_x(l.a.x); seed_x(l.b.x);
        seed_y(l.a.y); seed_y(l.b.y);
        break;
    }
  }
  auto pad = [](Range& r) {
    double span = r.hi - r.lo;
    if (span <= 0.0) span = std::max(std::fabs(r.hi), 1.0);
    r.lo -= 0.06 * span;
    r.hi += 0.06 * span;
  };
  pad(xr);
  pad(yr);

  auto sx = [&](double v) { return px0 + (v - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto sy = [&](double v) { return py0 + (yr.hi - v) / (yr.hi - yr.lo) * ph; };

  const char* font = compact ? "9" : "12";
  // frame
  out += "<rect x=\"" + fmt_coord(px0) + "\" y=\"" + fmt_coord(py0) +
         "\" width=\"" + fmt_coord(pw) + "\" height=\"" + fmt_coord(ph) +
         "\" fill=\"none\" stroke=\"#222222\" stroke-width=\"1\"/>\n";
  // title
  if (!spec.title.empty()) {
    out += "<text x=\"" + fmt_coord(ox + w / 2) + "\" y=\"" +
           fmt_coord(oy + mt - 7) + "\" text-anchor=\"middle\" font-size=\"" +
           font + "\">" + xml_escape(spec.title) + "</text>\n";
  }
  // ticks
  const int n_ticks = compact ? 3 : 5;
  for (int i = 0; i < n_ticks; ++i) {
    const double fx = xr.lo + (xr.hi - xr.lo) * i / (n_ticks - 1);
    const double fy = yr.lo + (yr.hi - yr.lo) * i / (n_ticks - 1);
    out += "<line x1=\"" + fmt_coord(sx(fx)) + "\" y1=\"" +
           fmt_coord(py0 + ph) + "\" x2=\"" + fmt_coord(sx(fx)) + "\" y2=\"" +
           fmt_coord(py0 + ph + 4) + "\" stroke=\"#222222\"/>\n";
    out += "<text x=\"" + fmt_coord(sx(fx)) + "\" y=\"" +
           fmt_coord(py0 + ph + (compact ? 12 : 16)) +
           "\" text-anchor=\"middle\" font-size=\"" + font + "\">" +
           fmt_tick(fx) + "</text>\n";
    out += "<line x1=\"" + fmt_coord(px0 - 4) + "\" y1=\"" +
           fmt_coord(sy(fy)) + "\" x2=\"" + fmt_coord(px0) + "\" y2=\"" +
           fmt_coord(sy(fy)) + "\" stroke=\"#222222\"/>\n";
    out += "<text x=\"" + fmt_coord(px0 - 6) + "\" y=\"" +
           fmt_coord(sy(fy) + 3) + "\" text-anchor=\"end\" font-size=\"" +
           font + "\">" + fmt_tick(fy) + "</text>\n";
  }
  // axis labels
  if (!spec.x_label.empty()) {
    out += "<text x=\"" + fmt_coord(px0 + pw / 2) + "\" y=\"" +
           fmt_coord(py0 + ph + (compact ? 24 : 34)) +
           "\" text-anchor=\"middle\" font-size=\"" + font + "\">" +
           xml_escape(spec.x_label) + "</text>\n";
  }
  if (!spec.y_label.empty()) {
    out += "<text x=\"" + fmt_coord(ox + 12) + "\" y=\"" +
           fmt_coord(py0 + ph / 2) + "\" text-anchor=\"middle\" font-size=\"" +
           font + "\" transform=\"rotate(-90 " + fmt_coord(ox + 12) + " " +
           fmt_coord(py0 + ph / 2) + ")\">" + xml_escape(spec.y_label) +
           "</text>\n";
  }
  // reference lines
  for (const auto& l : spec.lines) {
    std::string dash = l.dashed ? " stroke-dasharray=\"6,4\"" : "";
    if (l.kind == RefLine::Kind::horizontal) {
      out += "<line class=\"refline\" data-kind=\"horizontal\" data-value=\"" +
             fmt_fixed(l.value, 6) + "\" x1=\"" + fmt_coord(px0) + "\" y1=\"" +
             fmt_coord(sy(l.value)) + "\" x2=\"" + fmt_coord(px0 + pw) +
             "\" y2=\"" + fmt_coord(sy(l.value)) + "\" stroke=\"" + l.color +
             "\"" + dash + "/>\n";
    } else if (l.kind == RefLine::Kind::vertical) {
      out += "<line class=\"refline\" data-kind=\"vertical\" data-value=\"" +
             fmt_fixed(l.value, 6) + "\" x1=\"" + fmt_coord(sx(l.value)) +
             "\" y1=\"" + fmt_coord(py0) + "\" x2=\"" +
             fmt_coord(sx(l.value)) + "\" y2=\"" + fmt_coord(py0 + ph) +
             "\" stroke=\"" + l.color + "\"" + dash + "/>\n";
    } else {
      out += "<line class=\"refline\" data-kind=\"segment\" x1=\"" +
             fmt_coord(sx(l.a.x)) + "\" y1=\"" + fmt_coord(sy(l.a.y)) +
             "\" x2=\"" + fmt_coord(sx(l.b.x)) + "\" y2=\"" +
             fmt_coord(sy(l.b.y)) + "\" stroke=\"" + l.color + "\"" + dash +
             "/>\n";
    }
    if (!l.label.empty() && !compact) {
      const double ly = l.kind == RefLine::Kind::horizontal ? sy(l.value) - 4
                        : l.kind == RefLine::Kind::segment  ? sy(l.b.y) - 4
                                                            : py0 + 12;
      const double lx = l.kind == RefLine::Kind::vertical ? sx(l.value) + 4
                                                          : px0 + pw - 4;
      out += "<text x=\"" + fmt_coord(lx) + "\" y=\"" + fmt_coord(ly) +
             "\" text-anchor=\"" +
             (l.kind == RefLine::Kind::vertical ? "start" : "end") +
             "\" font-size=\"" + font + "\" fill=\"" + l.color + "\">" +
             xml_escape(l.label) + "</text>\n";
    }
  }
  // data points
  for (const auto& s : spec.series) {
    const double r = compact ? std::min(s.radius, 2.0) : s.radius;
    for (const auto& p : s.points) {
      out += "<circle cx=\"" + fmt_coord(sx(p.x)) + "\" cy=\"" +
             fmt_coord(sy(p.y)) + "\" r=\"" + fmt_coord(r) + "\" fill=\"" +
             s.color + "\"/>\n";
    }
  }
}

} // namespace

std::string render_svg(const PlotSpec& spec) {
  double width = spec.width;
  double height = spec.height;
  if (spec.kind == PlotKind::simulation_grid) {
    if (spec.panels.empty()) {
      throw AnalysisError("empty plot: simulation grid has no panels");
    }
    const int k = static_cast<int>(spec.panels.size());
    const int cols = std::min(k, 5);
    const int rows = (k + cols - 1) / cols;
    const double pw = 280.0, ph = 200.0;
    width = cols * pw + 16.0;
    height = rows * ph + 30.0;
    std::string body;
    body += "<text x=\"" + fmt_coord(width / 2) +
            "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">" +
            xml_escape(spec.title) + "</text>\n";
    for (int i = 0; i < k; ++i) {
      const double ox = 8.0 + (i % cols) * pw;
      const double oy = 26.0 + (i / cols) * ph;
      render_plot_into(body, spec.panels[i], ox, oy, pw, ph);
    }
    std::string out =
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
        fmt_coord(width) + "\" height=\"" + fmt_coord(height) +
        "\" viewBox=\"0 0 " + fmt_coord(width) + " " + fmt_coord(height) +
        "\" font-family=\"Menlo, monospace\">\n<rect width=\"100%\" "
        "height=\"100%\" fill=\"#ffffff\"/>\n" +
        body + "</svg>\n";
    return out;
  }
  std::string body;
  render_plot_into(body, spec, 0.0, 0.0, width, height);
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         fmt_coord(width) + "\" height=\"" + fmt_coord(height) +
         "\" viewBox=\"0 0 " + fmt_coord(width) + " " + fmt_coord(height) +
         "\" font-family=\"Menlo, monospace\">\n<rect width=\"100%\" "
         "height=\"100%\" fill=\"#ffffff\"/>\n" +
         body + "</svg>\n";
}

PlotSpec pvalue_panel_spec(const std::vector<double>& ranked_p,
                           std::string title) {
  PlotSpec spec;
  spec.kind = PlotKind::pvalue;
  spec.title = std::move(title);
  spec.x_label = "rank";
  spec.y_label = "p-value";
  Series s;
  s.name = "p-values";
  s.color = "#1f3552";
  const int n = static_cast<int>(ranked_p.size());
  for (int i = 0; i < n; ++i) {
    s.points.push_back({static_cast<double>(i + 1), ranked_p[i]});
  }
  spec.series.push_back(std::move(s));
  RefLine uniform;
  uniform.kind = RefLine::Kind::segment;
  uniform.a = {1.0, 1.0 / (n + 1.0)};
  uniform.b = {static_cast<double>(n), n / (n + 1.0)};
  uniform.label = "uniform i/(n+1)";
  uniform.color = "#999999";
  uniform.dashed = true;
  spec.lines.push_back(std::move(uniform));
  return spec;
}

PlotSpec pvalue_plot_spec(const pplot::Diagnosis& d, std::string title) {
  std::vector<double> p;
  p.reserve(d.series.points.size());
  for (const auto& pt : d.series.points) p.push_back(pt.p);
  PlotSpec spec = pvalue_panel_spec(p, std::move(title));
  return spec;
}

PlotSpec volcano_plot_spec(const volcano::VolcanoReport& v,
                           std::string title) {
  PlotSpec spec;
  spec.kind = PlotKind::volcano;
  spec.title = std::move(title);
  spec.x_label = "effect";
  spec.y_label = "-log10 p";
  Series s;
  s.name = "studies";
  s.color = "#1f3552";
  for (const auto& pt : v.points) {
    s.points.push_back({pt.effect, pt.neg_log10_p});
  }
  spec.series.push_back(std::move(s));

  RefLine nominal;
  nominal.kind = RefLine::Kind::horizontal;
  nominal.value = v.nominal_line;
  nominal.label = "alpha " + fmt_tick(v.alpha);
  nominal.color = "#1f5fbf"; // nominal line drawn blue
  spec.lines.push_back(nominal);

  RefLine corrected;
  corrected.kind = RefLine::Kind::horizontal;
  corrected.value = v.bonferroni_line;
  corrected.label = "alpha/" + std::to_string(v.m_tests);
  corrected.color = "#c03a2b"; // corrected line drawn red
  spec.lines.push_back(corrected);

  RefLine null_line;
  null_line.kind = RefLine::Kind::vertical;
  null_line.value = v.null_value;
  null_line.label = "null";
  null_line.color = "#999999";
  null_line.dashed = true;
  spec.lines.push_back(null_line);
  return spec;
}

PlotSpec simulation_grid_spec(const nullsim::SimulationReport& sim) {
  PlotSpec spec;
  spec.kind = PlotKind::simulation_grid;
  spec.title = "null simulations: " +
               std::to_string(sim.config.replications) + " x " +
               std::to_string(sim.config.n_per_study) +
               " uniform p-values, seed " + std::to_string(sim.config.seed);
  for (const auto& rep : sim.replications) {
    spec.panels.push_back(pvalue_panel_spec(
        rep.ranked_p, "rep " + std::to_string(rep.index) + " (min " +
                          fmt_fixed(rep.min_p, 4) + ")"));
  }
  return spec;
}

PlotSpec simulation_pooled_spec(const nullsim::SimulationReport& sim) {
  std::vector<double> all;
  for (const auto& rep : sim.replications) {
    all.insert(all.end(), rep.ranked_p.begin(), rep.ranked_p.end());
  }
  std::sort(all.begin(), all.end());
  PlotSpec spec = pvalue_panel_spec(
      all, "pooled p-values from " + std::to_string(sim.config.replications) +
               " null replications");
  return spec;
}

std::string study_table_csv(const std::vector<ingest::TestedStudy>& tests) {
  std::string out =
      "label,year,cases,rr,cl_low,cl_high,se,z,p,neg_log10_p,rank\n";
  for (const auto& t : tests) {
    out += t.study.label;
    out += ",";
    if (t.study.year) out += std::to_string(*t.study.year);
    out += ",";
    if (t.study.cases) out += std::to_string(*t.study.cases);
    out += "," + fmt_full(t.study.effect);
    out += "," + fmt_full(t.study.cl_low);
    out += "," + fmt_full(t.study.cl_high);
    out += "," + fmt_full(t.test.se);
    out += "," + fmt_full(t.test.z);
    out += "," + fmt_full(t.test.p);
    out += "," + fmt_full(t.test.neg_log10_p);
    out += "," + std::to_string(t.rank);
    out += "\n";
  }
  return out;
}

namespace {

std::string section_studies(const std::vector<ingest::TestedStudy>& tests) {
  std::ostringstream os;
  os << "[studies]\n";
  os << "label,year,cases,rr,cl_low,cl_high,se,z,p,neg_log10_p,rank,"
        "replication_strength\n";
  for (const auto& t : tests) {
    os << t.study.label << ",";
    if (t.study.year) os << *t.study.year;
    os << ",";
    if (t.study.cases) os << *t.study.cases;
    os << "," << fmt_fixed(t.study.effect, 4) << ","
       << fmt_fixed(t.study.cl_low, 4) << "," << fmt_fixed(t.study.cl_high, 4)
       << "," << fmt_fixed(t.test.se, 4) << "," << fmt_fixed(t.test.z, 4)
       << "," << fmt_fixed(t.test.p, 4) << ","
       << fmt_fixed(t.test.neg_log10_p, 4) << "," << t.rank << ","
       << stats::to_string(stats::replication_strength(t.test.p)) << "\n";
  }
  return os.str();
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

} // namespace

std::string render_report(const AuditResult& r) {
  if (r.tests.empty() && !r.simulation) {
    throw AnalysisError("report requires at least one analysis");
  }
  std::ostringstream os;
  os << "# metaudit report\n";
  os << "format_version: 1\n";
  if (!r.source.empty()) os << "source: " << r.source << "\n";
  if (!r.tests.empty()) {
    os << "confidence_level: " << fmt_full(r.confidence_level) << "\n";
    os << "null_value: " << fmt_full(r.null_value) << "\n";
    os << "scale: " << stats::to_string(r.scale) << "\n";
  }
  os << "p_clamp: " << fmt_full(r.p_clamp) << "\n";
  os << "\n";

  if (!r.tests.empty()) {
    os << section_studies(r.tests) << "\n";
  }

  if (r.diagnosis) {
    const auto& d = *r.diagnosis;
    os << "[pvalue_plot]\n";
    os << "n: " << d.series.points.size() << "\n";
    os << "verdict: " << pplot::to_string(d.verdict) << "\n";
    os << "linear_fit: intercept=" << fmt_fixed(d.linear_fit.intercept, 4)
       << " slope=" << fmt_fixed(d.linear_fit.slope, 4)
       << " sse=" << fmt_fixed(d.linear_fit.sse, 4) << "\n";
    os << "quadratic_fit: c0=" << fmt_fixed(d.quadratic_fit.c0, 4)
       << " c1=" << fmt_fixed(d.quadratic_fit.c1, 4)
       << " c2=" << fmt_fixed(d.quadratic_fit.c2, 4)
       << " sse=" << fmt_fixed(d.quadratic_fit.sse, 4) << "\n";
    if (d.segmented_fit) {
      os << "segmented_fit: breakpoint=" << d.segmented_fit->breakpoint
         << " left_slope=" << fmt_fixed(d.segmented_fit->left_slope, 4)
         << " right_slope=" << fmt_fixed(d.segmented_fit->right_slope, 4)
         << " sse=" << fmt_fixed(d.segmented_fit->sse, 4) << "\n";
    }
    os << "quad_vs_linear: f=";
    if (std::isfinite(d.quad_vs_linear.f_statistic)) {
      os << fmt_fixed(d.quad_vs_linear.f_statistic, 4);
    } else {
      os << "inf";
    }
    os << " p=" << fmt_full(d.quad_vs_linear.p)
       << " degenerate=" << yes_no(d.quad_vs_linear.degenerate) << "\n";
    os << "ks_uniform: d=" << fmt_fixed(d.ks_uniform.statistic, 4)
       << " p=" << fmt_full(d.ks_uniform.p) << "\n";
    if (d.gaps.empty()) {
      os << "gaps: none\n";
    } else {
      for (const auto& g : d.gaps) {
        os << "gap: between ranks " << g.lower_rank << " and "
           << g.lower_rank + 1 << " size=" << fmt_fixed(g.size, 4) << "\n";
      }
    }
    os << "reference: " << d.series.reference_convention
       << " naive_min_level=" << fmt_fixed(d.series.naive_min_level, 4)
       << "\n";
    os << "thresholds: fit_alpha=" << fmt_full(d.thresholds.fit_alpha)
       << " ks_alpha=" << fmt_full(d.thresholds.ks_alpha)
       << " blade_p=" << fmt_full(d.thresholds.blade_p)
       << " handle_p=" << fmt_full(d.thresholds.handle_p)
       << " gap_multiplier=" << fmt_full(d.thresholds.gap_spacing_multiplier)
       << "\n\n";
  }

  if (r.volcano_report) {
    const auto& v = *r.volcano_report;
    os << "[volcano]\n";
    os << "alpha: " << fmt_full(v.alpha) << "\n";
    os << "m_tests: " << v.m_tests << "\n";
    os << "corrected_alpha: " << fmt_full(v.corrected_alpha) << "\n";
    os << "nominal_line: " << fmt_fixed(v.nominal_line, 4) << "\n";
    os << "bonferroni_line: " << fmt_fixed(v.bonferroni_line, 4) << "\n";
    os << "significant_increase: " << v.counts.significant_increase << "\n";
    os << "significant_decrease: " << v.counts.significant_decrease << "\n";
    os << "nonsignificant: " << v.counts.nonsignificant << "\n";
    if (r.questions) {
      os << "questions_total: " << r.questions->total << " (families:";
      for (long long q : r.questions->per_family) os << " " << q;
      os << ")\n";
    }
    if (r.null_gap) {
      os << "null_gap: " << yes_no(r.null_gap->gap)
         << " window=" << fmt_full(r.null_gap->window)
         << " nearest=" << fmt_fixed(r.null_gap->nearest_distance, 4)
         << " above_null=" << r.null_gap->above_null
         << " below_null=" << r.null_gap->below_null << "\n";
    }
    os << "\n";
  }

  if (r.pooled) {
    const auto& p = *r.pooled;
    os << "[pooled]\n";
    os << "scale: " << stats::to_string(p.scale) << "\n";
    os << "pooled_effect: " << fmt_fixed(p.fixed.pooled_effect, 4) << "\n";
    os << "pooled_se: " << fmt_fixed(p.fixed.pooled_se, 4) << "\n";
    os << "q: " << fmt_fixed(p.heterogeneity.q, 4) << "\n";
    os << "df: " << p.heterogeneity.df << "\n";
    os << "i_squared: " << fmt_fixed(p.heterogeneity.i_squared, 4) << "\n";
    os << "egger: intercept=" << fmt_fixed(p.egger.intercept, 4)
       << " se=" << fmt_fixed(p.egger.intercept_se, 4)
       << " t=" << fmt_fixed(p.egger.t, 4)
       << " p=" << fmt_fixed(p.egger.p, 4) << "\n";
    os << "weights:";
    for (size_t i = 0; i < p.fixed.weights.size(); ++i) {
      os << " " << (i < r.tests.size() ? r.tests[i].study.label
                                       : std::to_string(i + 1))
         << "=" << fmt_fixed(p.fixed.weights[i], 4);
    }
    os << "\n";
    if (p.random_effects) {
      os << "random_effects (experimental): tau2="
         << fmt_fixed(p.random_effects->tau_squared, 4)
         << " pooled_effect=" << fmt_fixed(p.random_effects->pooled_effect, 4)
         << " pooled_se=" << fmt_fixed(p.random_effects->pooled_se, 4) << "\n";
    }
    os << "\n";
  }

  if (r.simulation) {
    const auto& s = *r.simulation;
    os << "[simulation]\n";
    os << "n_per_study: " << s.config.n_per_study << "\n";
    os << "replications: " << s.config.replications << "\n";
    os << "seed: " << s.config.seed << "\n";
    os << "min_p_mean: " << fmt_fixed(s.min_p_summary.mean, 5) << "\n";
    os << "min_p_min: " << fmt_fixed(s.min_p_summary.min, 5) << "\n";
    os << "min_p_max: " << fmt_fixed(s.min_p_summary.max, 5) << "\n";
    os << "expected_min_naive: " << fmt_fixed(s.expected_min_naive, 5)
       << " (1/n)\n";
    os << "expected_min_order_stat: "
       << fmt_fixed(s.expected_min_order_stat, 5) << " (1/(n+1))\n";
    for (const auto& rep : s.replications) {
      os << "replication " << rep.index << ": min_p="
         << fmt_fixed(rep.min_p, 5) << " null_cdf="
         << fmt_fixed(nullsim::min_p_cdf(s.config.n_per_study, rep.min_p), 4)
         << " strength="
         << stats::to_string(stats::replication_strength(rep.min_p)) << "\n";
    }
    os << "\n";
  }
  return os.str();
}

namespace {

nlohmann::json tests_json(const std::vector<ingest::TestedStudy>& tests) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& t : tests) {
    nlohmann::json j{{"label", t.study.label},
                     {"rr", t.study.effect},
                     {"cl_low", t.study.cl_low},
                     {"cl_high", t.study.cl_high},
                     {"se", t.test.se},
                     {"z", t.test.z},
                     {"p", t.test.p},
                     {"neg_log10_p", t.test.neg_log10_p},
                     {"rank", t.rank},
                     {"replication_strength",
                      stats::to_string(stats::replication_strength(t.test.p))}};
    if (t.study.year) j["year"] = *t.study.year;
    if (t.study.cases) j["cases"] = *t.study.cases;
    arr.push_back(std::move(j));
  }
  return arr;
}

} // namespace

nlohmann::json report_json(const AuditResult& r) {
  if (r.tests.empty() && !r.simulation) {
    throw AnalysisError("report requires at least one analysis");
  }
  nlohmann::json j;
  j["format_version"] = 1;
  nlohmann::json params{{"p_clamp", r.p_clamp}};
  if (!r.source.empty()) params["source"] = r.source;
  if (!r.tests.empty()) {
    params["confidence_level"] = r.confidence_level;
    params["null_value"] = r.null_value;
    params["scale"] = stats::to_string(r.scale);
    params["alpha"] = r.alpha;
    if (r.m_tests > 0) params["m_tests"] = r.m_tests;
  }
  j["parameters"] = std::move(params);
  if (!r.tests.empty()) j["studies"] = tests_json(r.tests);

  if (r.diagnosis) {
    const auto& d = *r.diagnosis;
    nlohmann::json dj;
    dj["n"] = d.series.points.size();
    dj["verdict"] = pplot::to_string(d.verdict);
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& pt : d.series.points) {
      pts.push_back({{"rank", pt.rank}, {"p", pt.p}});
    }
    dj["points"] = std::move(pts);
    dj["uniform_reference"] = d.series.uniform_reference;
    dj["reference_convention"] = d.series.reference_convention;
    dj["naive_min_level"] = d.series.naive_min_level;
    dj["linear_fit"] = {{"intercept", d.linear_fit.intercept},
                        {"slope", d.linear_fit.slope},
                        {"sse", d.linear_fit.sse}};
    dj["quadratic_fit"] = {{"c0", d.quadratic_fit.c0},
                           {"c1", d.quadratic_fit.c1},
                           {"c2", d.quadratic_fit.c2},
                           {"sse", d.quadratic_fit.sse}};
    if (d.segmented_fit) {
      dj["segmented_fit"] = {{"breakpoint", d.segmented_fit->breakpoint},
                             {"left_intercept", d.segmented_fit->left_intercept},
                             {"left_slope", d.segmented_fit->left_slope},
                             {"right_intercept", d.segmented_fit->right_intercept},
                             {"right_slope", d.segmented_fit->right_slope},
                             {"sse", d.segmented_fit->sse}};
    }
    dj["quad_vs_linear"] = {{"f", d.quad_vs_linear.f_statistic},
                            {"p", d.quad_vs_linear.p},
                            {"degenerate", d.quad_vs_linear.degenerate}};
    dj["ks_uniform"] = {{"statistic", d.ks_uniform.statistic},
                        {"p", d.ks_uniform.p}};
    nlohmann::json gaps = nlohmann::json::array();
    for (const auto& g : d.gaps) {
      gaps.push_back({{"lower_rank", g.lower_rank}, {"size", g.size}});
    }
    dj["gaps"] = std::move(gaps);
    dj["thresholds"] = {
        {"fit_alpha", d.thresholds.fit_alpha},
        {"ks_alpha", d.thresholds.ks_alpha},
        {"blade_p", d.thresholds.blade_p},
        {"handle_p", d.thresholds.handle_p},
        {"gap_multiplier", d.thresholds.gap_spacing_multiplier}};
    j["pvalue_plot"] = std::move(dj);
  }

  if (r.volcano_report) {
    const auto& v = *r.volcano_report;
    nlohmann::json vj;
    vj["alpha"] = v.alpha;
    vj["m_tests"] = v.m_tests;
    vj["corrected_alpha"] = v.corrected_alpha;
    vj["nominal_line"] = v.nominal_line;
    vj["bonferroni_line"] = v.bonferroni_line;
    vj["counts"] = {{"significant_increase", v.counts.significant_increase},
                    {"significant_decrease", v.counts.significant_decrease},
                    {"nonsignificant", v.counts.nonsignificant}};
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& pt : v.points) {
      pts.push_back({{"label", pt.label},
                     {"effect", pt.effect},
                     {"p", pt.p},
                     {"neg_log10_p", pt.neg_log10_p},
                     {"direction", to_string(pt.direction)}});
    }
    vj["points"] = std::move(pts);
    if (r.null_gap) {
      vj["null_gap"] = {{"gap", r.null_gap->gap},
                        {"window", r.null_gap->window},
                        {"nearest_distance", r.null_gap->nearest_distance},
                        {"above_null", r.null_gap->above_null},
                        {"below_null", r.null_gap->below_null}};
    }
    if (r.questions) {
      vj["questions"] = {{"per_family", r.questions->per_family},
                         {"total", r.questions->total}};
    }
    j["volcano"] = std::move(vj);
  }

  if (r.pooled) {
    const auto& p = *r.pooled;
    nlohmann::json pj;
    pj["scale"] = stats::to_string(p.scale);
    pj["pooled_effect"] = p.fixed.pooled_effect;
    pj["pooled_se"] = p.fixed.pooled_se;
    pj["weights"] = p.fixed.weights;
    pj["q"] = p.heterogeneity.q;
    pj["df"] = p.heterogeneity.df;
    pj["i_squared"] = p.heterogeneity.i_squared;
    pj["egger"] = {{"intercept", p.egger.intercept},
                   {"intercept_se", p.egger.intercept_se},
                   {"t", p.egger.t},
                   {"p", p.egger.p},
                   {"slope", p.egger.slope}};
    if (p.random_effects) {
      pj["random_effects"] = {
          {"experimental", true},
          {"tau_squared", p.random_effects->tau_squared},
          {"pooled_effect", p.random_effects->pooled_effect},
          {"pooled_se", p.random_effects->pooled_se}};
    }
    j["pooled"] = std::move(pj);
  }

  if (r.simulation) {
    const auto& s = *r.simulation;
    nlohmann::json sj;
    sj["config"] = {{"n_per_study", s.config.n_per_study},
                    {"replications", s.config.replications},
                    {"seed", s.config.seed}};
    sj["min_p_summary"] = {{"mean", s.min_p_summary.mean},
                           {"min", s.min_p_summary.min},
                           {"max", s.min_p_summary.max}};
    sj["expected_min_naive"] = s.expected_min_naive;
    sj["expected_min_order_stat"] = s.expected_min_order_stat;
    nlohmann::json reps = nlohmann::json::array();
    for (const auto& rep : s.replications) {
      reps.push_back({{"index", rep.index},
                      {"min_p", rep.min_p},
                      {"ranked_p", rep.ranked_p}});
    }
    sj["replications"] = std::move(reps);
    j["simulation"] = std::move(sj);
  }
  return j;
}

} // namespace metaudit::render
