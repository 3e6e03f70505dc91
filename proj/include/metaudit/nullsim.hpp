#pragma once

#include <cstdint>
#include <vector>

#include "metaudit/ingest.hpp"

namespace metaudit::nullsim {

// Small, fully specified generator; one instance per substream.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform draw strictly inside (0,1).
  double next_unit() { return ((next() >> 11) + 0.5) * 0x1.0p-53; }

private:
  std::uint64_t state_;
};

// Derives the generator seed for one replication; replications are
// independent of each other and of evaluation order.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);

struct SimulationConfig {
  int n_per_study = 15;   // p-values per simulated meta-analysis
  int replications = 10;
  std::uint64_t seed = 0;
};

struct Replication {
  int index = 0; // 1-based
  std::vector<double> ranked_p;
  double min_p = 0.0;
};

struct MinPSummary {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct SimulationReport {
  SimulationConfig config;
  std::vector<Replication> replications;
  MinPSummary min_p_summary;
  double expected_min_naive = 0.0;      // 1/n
  double expected_min_order_stat = 0.0; // 1/(n+1), mean of Beta(1,n)
};

// Deterministic: identical config gives a bit-identical report.
SimulationReport simulate(const SimulationConfig& config);

// Quantile of the minimum of n uniforms: 1 - (1-q)^(1/n).
double min_p_envelope(int n, double quantile);

// CDF of the minimum of n uniforms (Beta(1,n)): 1 - (1-x)^n on [0,1].
double min_p_cdf(int n, double x);

// Synthesizes a study table whose derived p-values reproduce the
// replication's, so simulated series round-trip through ingest.
ingest::StudyTable to_study_table(const Replication& rep,
                                  double confidence_level = 0.95,
                                  double null_value = 1.0);

} // namespace metaudit::nullsim
