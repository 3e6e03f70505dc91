#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "metaudit/ingest.hpp"
#include "metaudit/nullsim.hpp"
#include "metaudit/pooling.hpp"
#include "metaudit/pplot.hpp"
#include "metaudit/render.hpp"
#include "metaudit/stats.hpp"
#include "metaudit/volcano.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitInput = 3;
constexpr int kExitAnalysis = 4;

struct TableOpts {
  std::string input;
  double confidence_level = 0.95;
  double null_value = 1.0;
  std::string scale = "linear";
  std::string out = ".";
};

struct PlotOpts {
  double fit_alpha = 0.01;
  double ks_alpha = 0.05;
  double blade_p = 0.01;
  double handle_p = 0.20;
  double gap_multiplier = 3.0;
};

struct VolcanoOpts {
  double alpha = 0.05;
  long long m_tests = 0; // 0 = table size
  std::string questions; // e.g. "6x11,6x11"
  double null_window = 0.05;
};

struct SimOpts {
  int n = 15;
  int reps = 10;
  std::uint64_t seed = 0;
  bool export_tables = false;
};

void add_table_options(CLI::App* cmd, TableOpts& o) {
  cmd->add_option("--input", o.input, "study table (csv/tsv)")->required();
  cmd->add_option("--cl", o.confidence_level,
                  "confidence level of the published intervals")
      ->capture_default_str();
  cmd->add_option("--null", o.null_value, "no-effect value")
      ->capture_default_str();
  cmd->add_option("--scale", o.scale, "effect scale: linear or log")
      ->capture_default_str();
  cmd->add_option("--out", o.out, "output directory")->capture_default_str();
}

void add_plot_options(CLI::App* cmd, PlotOpts& o) {
  cmd->add_option("--fit-alpha", o.fit_alpha,
                  "quadratic-vs-linear significance threshold")
      ->capture_default_str();
  cmd->add_option("--ks-alpha", o.ks_alpha, "uniformity significance threshold")
      ->capture_default_str();
  cmd->add_option("--blade-p", o.blade_p,
                  "bilinear rule: at least one p at or below this")
      ->capture_default_str();
  cmd->add_option("--handle-p", o.handle_p,
                  "bilinear rule: at least one p above this")
      ->capture_default_str();
  cmd->add_option("--gap-mult", o.gap_multiplier,
                  "gap threshold, in mean uniform spacings")
      ->capture_default_str();
}

void add_volcano_options(CLI::App* cmd, VolcanoOpts& o) {
  cmd->add_option("--alpha", o.alpha, "nominal significance level")
      ->capture_default_str();
  cmd->add_option("--m-tests", o.m_tests,
                  "tests in the Bonferroni family (default: table size)");
  cmd->add_option("--questions", o.questions,
                  "question families, e.g. 6x11,6x11; overrides --m-tests");
  cmd->add_option("--null-window", o.null_window,
                  "effect window around the null for the gap check")
      ->capture_default_str();
}

void add_sim_options(CLI::App* cmd, SimOpts& o) {
  cmd->add_option("--n", o.n, "p-values per simulated meta-analysis")
      ->capture_default_str();
  cmd->add_option("--reps", o.reps, "number of replications")
      ->capture_default_str();
  cmd->add_option("--seed", o.seed, "generator seed")->capture_default_str();
}

void check_probability(double v, const char* flag) {
  if (!(v > 0.0) || !(v < 1.0)) {
    throw CLI::ValidationError(std::string(flag) +
                               ": must lie strictly between 0 and 1");
  }
}

void check_table_opts(const TableOpts& o) {
  check_probability(o.confidence_level, "--cl");
  try {
    metaudit::stats::scale_mode_from_string(o.scale);
  } catch (const metaudit::DomainError& e) {
    throw CLI::ValidationError(std::string("--scale: ") + e.what());
  }
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw metaudit::InputError("cannot open input file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? "."
                                                    : path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw metaudit::InputError("cannot write output file: " + path.string());
  }
  out << content;
  if (!out) {
    throw metaudit::InputError("failed writing output file: " + path.string());
  }
  std::cout << "wrote " << path.string() << "\n";
}

std::vector<std::vector<long long>> parse_questions(const std::string& spec) {
  std::vector<std::vector<long long>> families;
  std::vector<long long> current;
  std::string token;
  auto push_factor = [&]() {
    if (token.empty()) {
      throw metaudit::DomainError("--questions: empty factor in '" + spec +
                                  "'");
    }
    current.push_back(std::stoll(token));
    token.clear();
  };
  for (char c : spec) {
    if (c == 'x' || c == 'X') {
      push_factor();
    } else if (c == ',') {
      push_factor();
      families.push_back(std::move(current));
      current.clear();
    } else if (c >= '0' && c <= '9') {
      token += c;
    } else if (c != ' ') {
      throw metaudit::DomainError("--questions: unexpected character '" +
                                  std::string(1, c) + "'");
    }
  }
  push_factor();
  families.push_back(std::move(current));
  return families;
}

struct LoadedTable {
  metaudit::ingest::StudyTable table;
  std::vector<metaudit::ingest::TestedStudy> tests;
  metaudit::stats::ScaleMode mode = metaudit::stats::ScaleMode::linear;
};

LoadedTable load_and_derive(const TableOpts& o) {
  LoadedTable lt;
  lt.mode = metaudit::stats::scale_mode_from_string(o.scale);
  lt.table = metaudit::ingest::load_table(o.input, o.confidence_level,
                                          o.null_value);
  lt.tests = metaudit::ingest::derive_tests(lt.table, lt.mode);
  return lt;
}

metaudit::render::AuditResult base_result(const TableOpts& o,
                                          const LoadedTable& lt) {
  metaudit::render::AuditResult r;
  r.source = o.input;
  r.confidence_level = o.confidence_level;
  r.null_value = o.null_value;
  r.scale = lt.mode;
  r.tests = lt.tests;
  return r;
}

metaudit::pplot::Thresholds to_thresholds(const PlotOpts& o) {
  metaudit::pplot::Thresholds t;
  t.fit_alpha = o.fit_alpha;
  t.ks_alpha = o.ks_alpha;
  t.blade_p = o.blade_p;
  t.handle_p = o.handle_p;
  t.gap_spacing_multiplier = o.gap_multiplier;
  return t;
}

long long resolve_m_tests(const VolcanoOpts& o, size_t table_size,
                          const std::optional<metaudit::volcano::QuestionCount>&
                              questions) {
  if (questions) return questions->total;
  if (o.m_tests > 0) return o.m_tests;
  return static_cast<long long>(table_size);
}

std::string simulation_csv(const metaudit::nullsim::SimulationReport& sim) {
  std::string out = "replication,rank,p\n";
  char buf[64];
  for (const auto& rep : sim.replications) {
    for (size_t i = 0; i < rep.ranked_p.size(); ++i) {
      auto res = std::to_chars(buf, buf + sizeof(buf), rep.ranked_p[i]);
      out += std::to_string(rep.index) + "," + std::to_string(i + 1) + "," +
             std::string(buf, res.ptr) + "\n";
    }
  }
  return out;
}

void write_reports(const fs::path& dir, const std::string& stem,
                   const metaudit::render::AuditResult& result) {
  write_file(dir / (stem + "_report.txt"),
             metaudit::render::render_report(result));
  write_file(dir / (stem + "_report.json"),
             metaudit::render::report_json(result).dump(2) + "\n");
}

int run_compute(const TableOpts& to) {
  const auto lt = load_and_derive(to);
  const fs::path dir(to.out);
  write_file(dir / "tests.csv", metaudit::render::study_table_csv(lt.tests));
  const auto result = base_result(to, lt);
  write_reports(dir, "compute", result);
  std::cout << metaudit::render::render_report(result);
  return 0;
}

int run_pplot(const TableOpts& to, const PlotOpts& po) {
  const auto lt = load_and_derive(to);
  auto result = base_result(to, lt);
  result.diagnosis = metaudit::pplot::diagnose(lt.tests, to_thresholds(po));
  const fs::path dir(to.out);
  write_file(dir / "pplot.svg",
             metaudit::render::render_svg(metaudit::render::pvalue_plot_spec(
                 *result.diagnosis, "p-value plot: " + to.input)));
  write_reports(dir, "pplot", result);
  return 0;
}

int run_volcano(const TableOpts& to, const VolcanoOpts& vo) {
  check_probability(vo.alpha, "--alpha");
  const auto lt = load_and_derive(to);
  auto result = base_result(to, lt);
  result.alpha = vo.alpha;
  if (!vo.questions.empty()) {
    result.questions =
        metaudit::volcano::count_questions(parse_questions(vo.questions));
  }
  result.m_tests = resolve_m_tests(vo, lt.tests.size(), result.questions);
  result.volcano_report = metaudit::volcano::build_volcano(
      lt.tests, vo.alpha, result.m_tests, to.null_value);
  result.null_gap = metaudit::volcano::gap_around_null(
      lt.tests, to.null_value, vo.null_window);
  const fs::path dir(to.out);
  write_file(dir / "volcano.svg",
             metaudit::render::render_svg(metaudit::render::volcano_plot_spec(
                 *result.volcano_report, "volcano plot: " + to.input)));
  write_reports(dir, "volcano", result);
  return 0;
}

int run_pool(const TableOpts& to, bool random_effects) {
  const auto lt = load_and_derive(to);
  auto result = base_result(to, lt);
  result.pooled = metaudit::pooling::pool(lt.tests, lt.mode, random_effects);
  write_reports(fs::path(to.out), "pool", result);
  return 0;
}

int run_simulate(const SimOpts& so, const std::string& out) {
  if (so.n < 2) throw CLI::ValidationError("--n: must be at least 2");
  if (so.reps < 1) throw CLI::ValidationError("--reps: must be at least 1");
  metaudit::nullsim::SimulationConfig config{so.n, so.reps, so.seed};
  const auto sim = metaudit::nullsim::simulate(config);
  const fs::path dir(out);
  write_file(dir / "simulation.csv", simulation_csv(sim));
  write_file(dir / "simulation_grid.svg",
             metaudit::render::render_svg(
                 metaudit::render::simulation_grid_spec(sim)));
  write_file(dir / "simulation_pooled.svg",
             metaudit::render::render_svg(
                 metaudit::render::simulation_pooled_spec(sim)));
  if (so.export_tables) {
    for (const auto& rep : sim.replications) {
      char name[32];
      std::snprintf(name, sizeof(name), "replication_%03d.csv", rep.index);
      write_file(dir / name, metaudit::ingest::write_table(
                                 metaudit::nullsim::to_study_table(rep)));
    }
  }
  metaudit::render::AuditResult result;
  result.simulation = sim;
  write_reports(dir, "simulate", result);
  return 0;
}

json thresholds_manifest(const PlotOpts& po, const VolcanoOpts& vo) {
  return json{{"fit_alpha", po.fit_alpha},
              {"ks_alpha", po.ks_alpha},
              {"blade_p", po.blade_p},
              {"handle_p", po.handle_p},
              {"gap_multiplier", po.gap_multiplier},
              {"alpha", vo.alpha},
              {"null_window", vo.null_window}};
}

int run_audit(const TableOpts& to, const PlotOpts& po, const VolcanoOpts& vo,
              const SimOpts& so, bool random_effects) {
  check_probability(vo.alpha, "--alpha");
  if (so.reps < 1) throw CLI::ValidationError("--reps: must be at least 1");
  const auto lt = load_and_derive(to);
  auto result = base_result(to, lt);
  result.alpha = vo.alpha;
  result.diagnosis = metaudit::pplot::diagnose(lt.tests, to_thresholds(po));
  if (!vo.questions.empty()) {
    result.questions =
        metaudit::volcano::count_questions(parse_questions(vo.questions));
  }
  result.m_tests = resolve_m_tests(vo, lt.tests.size(), result.questions);
  result.volcano_report = metaudit::volcano::build_volcano(
      lt.tests, vo.alpha, result.m_tests, to.null_value);
  result.null_gap = metaudit::volcano::gap_around_null(
      lt.tests, to.null_value, vo.null_window);
  result.pooled = metaudit::pooling::pool(lt.tests, lt.mode, random_effects);
  // null calibration at the table's size
  metaudit::nullsim::SimulationConfig config{
      static_cast<int>(lt.tests.size()), so.reps, so.seed};
  result.simulation = metaudit::nullsim::simulate(config);

  const fs::path dir(to.out);
  write_file(dir / "tests.csv", metaudit::render::study_table_csv(lt.tests));
  write_file(dir / "pplot.svg",
             metaudit::render::render_svg(metaudit::render::pvalue_plot_spec(
                 *result.diagnosis, "p-value plot: " + to.input)));
  write_file(dir / "volcano.svg",
             metaudit::render::render_svg(metaudit::render::volcano_plot_spec(
                 *result.volcano_report, "volcano plot: " + to.input)));
  write_file(dir / "simulation_grid.svg",
             metaudit::render::render_svg(
                 metaudit::render::simulation_grid_spec(*result.simulation)));
  write_file(dir / "simulation_pooled.svg",
             metaudit::render::render_svg(metaudit::render::simulation_pooled_spec(
                 *result.simulation)));
  write_reports(dir, "audit", result);

  const std::string input_bytes = read_file(to.input);
  char hash[24];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(fnv1a64(input_bytes)));
  json manifest;
  manifest["format_version"] = 1;
  manifest["command"] = "audit";
  manifest["input"] = {{"path", to.input},
                       {"bytes", input_bytes.size()},
                       {"fnv1a64", hash}};
  manifest["parameters"] = {
      {"confidence_level", to.confidence_level},
      {"null_value", to.null_value},
      {"scale", to.scale},
      {"m_tests", result.m_tests},
      {"questions", vo.questions.empty() ? json() : json(vo.questions)},
      {"random_effects", random_effects},
      {"p_clamp", metaudit::stats::kMinP},
      {"thresholds", thresholds_manifest(po, vo)},
      {"simulation",
       {{"n_per_study", config.n_per_study},
        {"replications", config.replications},
        {"seed", config.seed}}}};
  manifest["artifacts"] = {"tests.csv",          "pplot.svg",
                           "volcano.svg",        "simulation_grid.svg",
                           "simulation_pooled.svg", "audit_report.txt",
                           "audit_report.json",  "manifest.json"};
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"metaudit: reliability diagnostics for meta-analyses of "
               "observational studies"};
  app.require_subcommand(1);

  TableOpts compute_to;
  auto* compute_cmd = app.add_subcommand(
      "compute", "reconstruct per-study SE, Z, p and -log10 p from a table");
  add_table_options(compute_cmd, compute_to);

  TableOpts pplot_to;
  PlotOpts pplot_po;
  auto* pplot_cmd = app.add_subcommand(
      "pplot", "p-value plot with shape fits, gaps and a verdict");
  add_table_options(pplot_cmd, pplot_to);
  add_plot_options(pplot_cmd, pplot_po);

  TableOpts volcano_to;
  VolcanoOpts volcano_vo;
  auto* volcano_cmd = app.add_subcommand(
      "volcano", "volcano plot with nominal and Bonferroni lines");
  add_table_options(volcano_cmd, volcano_to);
  add_volcano_options(volcano_cmd, volcano_vo);

  TableOpts pool_to;
  bool pool_re = false;
  auto* pool_cmd = app.add_subcommand(
      "pool", "inverse-variance pool, Q/I-squared, Egger regression");
  add_table_options(pool_cmd, pool_to);
  pool_cmd->add_flag("--random-effects", pool_re,
                     "also report DerSimonian-Laird (experimental)");

  SimOpts sim_so;
  std::string sim_out = ".";
  auto* sim_cmd = app.add_subcommand(
      "simulate", "seeded null meta-analyses of uniform p-values");
  add_sim_options(sim_cmd, sim_so);
  sim_cmd->add_flag("--export-tables", sim_so.export_tables,
                    "write each replication as an ingestible study table");
  sim_cmd->add_option("--out", sim_out, "output directory")
      ->capture_default_str();

  TableOpts audit_to;
  PlotOpts audit_po;
  VolcanoOpts audit_vo;
  SimOpts audit_so;
  bool audit_re = false;
  auto* audit_cmd = app.add_subcommand(
      "audit", "full audit: compute + pplot + volcano + pool + simulate");
  add_table_options(audit_cmd, audit_to);
  add_plot_options(audit_cmd, audit_po);
  add_volcano_options(audit_cmd, audit_vo);
  audit_cmd->add_option("--reps", audit_so.reps,
                        "null-simulation replications")
      ->capture_default_str();
  audit_cmd->add_option("--seed", audit_so.seed, "null-simulation seed")
      ->capture_default_str();
  audit_cmd->add_flag("--random-effects", audit_re,
                      "also report DerSimonian-Laird (experimental)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*compute_cmd) {
      check_table_opts(compute_to);
      return run_compute(compute_to);
    }
    if (*pplot_cmd) {
      check_table_opts(pplot_to);
      return run_pplot(pplot_to, pplot_po);
    }
    if (*volcano_cmd) {
      check_table_opts(volcano_to);
      return run_volcano(volcano_to, volcano_vo);
    }
    if (*pool_cmd) {
      check_table_opts(pool_to);
      return run_pool(pool_to, pool_re);
    }
    if (*sim_cmd) {
      return run_simulate(sim_so, sim_out);
    }
    if (*audit_cmd) {
      check_table_opts(audit_to);
      return run_audit(audit_to, audit_po, audit_vo, audit_so, audit_re);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const metaudit::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const metaudit::Error& e) {
    std::cerr << "analysis error: " << e.what() << "\n";
    return kExitAnalysis;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAnalysis;
  }
  return 0;
}
