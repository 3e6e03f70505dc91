#include "metaudit/nullsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace metaudit::nullsim {

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
  SplitMix64 g(seed + (index + 1) * 0x9E3779B97F4A7C15ULL);
  return g.next();
}

SimulationReport simulate(const SimulationConfig& config) {
  if (config.n_per_study < 2) {
    throw DomainError("n_per_study must be at least 2");
  }
  if (config.replications < 1) {
    throw DomainError("replications must be at least 1");
  }
  SimulationReport report;
  report.config = config;
  report.replications.reserve(config.replications);
  for (int r = 0; r < config.replications; ++r) {
    SplitMix64 gen(substream_seed(config.seed, static_cast<std::uint64_t>(r)));
    Replication rep;
    rep.index = r + 1;
    rep.ranked_p.reserve(config.n_per_study);
    for (int i = 0; i < config.n_per_study; ++i) {
      rep.ranked_p.push_back(gen.next_unit());
    }
    std::sort(rep.ranked_p.begin(), rep.ranked_p.end());
    rep.min_p = rep.ranked_p.front();
    report.replications.push_back(std::move(rep));
  }
  double sum = 0.0;
  double lo = report.replications.front().min_p;
  double hi = lo;
  for (const auto& rep : report.replications) {
    sum += rep.min_p;
    lo = std::min(lo, rep.min_p);
    hi = std::max(hi, rep.min_p);
  }
  report.min_p_summary = {sum / static_cast<double>(config.replications), lo,
                          hi};
  report.expected_min_naive = 1.0 / static_cast<double>(config.n_per_study);
  report.expected_min_order_stat =
      1.0 / static_cast<double>(config.n_per_study + 1);
  return report;
}

double min_p_envelope(int n, double quantile) {
  if (n < 1) throw DomainError("min_p_envelope requires n >= 1");
  if (!(quantile > 0.0) || !(quantile < 1.0)) {
    throw DomainError("min_p_envelope requires a quantile in (0,1)");
  }
  // quantile of Beta(1,n): 1 - (1-q)^(1/n)
  return 1.0 - std::pow(1.0 - quantile, 1.0 / static_cast<double>(n));
}

double min_p_cdf(int n, double x) {
  if (n < 1) throw DomainError("min_p_cdf requires n >= 1");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return 1.0 - std::pow(1.0 - x, static_cast<double>(n));
}

ingest::StudyTable to_study_table(const Replication& rep,
                                  double confidence_level, double null_value) {
  ingest::StudyTable table;
  table.confidence_level = confidence_level;
  table.null_value = null_value;
  table.source = "simulated replication " + std::to_string(rep.index);
  const double z_crit = stats::critical_z(confidence_level);
  const double se = 0.1; // arbitrary positive scale; p depends only on z
  for (size_t i = 0; i < rep.ranked_p.size(); ++i) {
    const double z = stats::normal_quantile(1.0 - rep.ranked_p[i] / 2.0);
    ingest::StudyRecord rec;
    char label[16];
    std::snprintf(label, sizeof(label), "sim%03zu", i + 1);
    rec.label = label;
    rec.effect = null_value + z * se;
    rec.cl_low = rec.effect - z_crit * se;
    rec.cl_high = rec.effect + z_crit * se;
    table.records.push_back(std::move(rec));
  }
  return table;
}

} // namespace metaudit::nullsim
