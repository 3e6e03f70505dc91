// Shared fixtures: the two bundled study tables with their published
// derived statistics, plus frozen oracle constants computed independently
// (50-digit arithmetic) before the implementation existed.
#pragma once

#include <string>
#include <vector>

#include "metaudit/ingest.hpp"

namespace fixtures {

struct Row {
  const char* label;
  double rr, cl_low, cl_high;
  // published derived values (rounded as printed)
  double se, z, p;
  int rank;
  double neg_log10_p; // <0 when the source table has no such column
};

// 11 ETS / lung-cancer studies, 90% confidence limits.
inline const std::vector<Row>& ets_rows() {
  static const std::vector<Row> rows = {
      {"Brownson", 1.52, 0.49, 4.79, 1.307, 0.398, 0.691, 10, 0.1607},
      {"Buffler", 0.81, 0.39, 1.66, 0.386, -0.492, 0.623, 8, 0.2058},
      {"Butler", 2.02, 0.48, 8.56, 2.456, 0.415, 0.678, 9, 0.1688},
      {"Correa", 2.07, 0.94, 4.52, 1.088, 0.983, 0.325, 3, 0.4875},
      {"Fontham", 1.29, 1.03, 1.62, 0.179, 1.617, 0.106, 1, 0.9753},
      {"Garfinkel1", 1.17, 0.85, 1.61, 0.231, 0.736, 0.462, 5, 0.3356},
      {"Garfinkel2", 1.31, 0.93, 1.85, 0.280, 1.109, 0.268, 2, 0.5725},
      {"Humble", 2.20, 0.90, 5.50, 1.398, 0.858, 0.391, 4, 0.4081},
      {"Janerich", 0.86, 0.57, 1.29, 0.219, -0.640, 0.522, 6, 0.2820},
      {"Kabat1", 0.79, 0.30, 2.04, 0.529, -0.397, 0.691, 11, 0.1603},
      {"Wu", 1.41, 0.63, 3.15, 0.766, 0.535, 0.592, 7, 0.2273},
  };
  return rows;
}

// 11 apathy / dementia studies, 95% confidence limits (no -log10 column).
inline const std::vector<Row>& apathy_rows() {
  static const std::vector<Row> rows = {
      {"Pink", 1.37, 0.98, 1.91, 0.2372, 1.5596, 0.1189, 5, -1},
      {"Robert", 1.57, 1.00, 2.46, 0.3724, 1.5304, 0.1259, 6, -1},
      {"Somme", 1.13, 0.66, 1.94, 0.3265, 0.3981, 0.6905, 9, -1},
      {"Sobow", 6.30, 3.38, 11.74, 2.1327, 2.4852, 0.0129, 2, -1},
      {"Peters", 0.91, 0.48, 1.71, 0.3138, -0.2868, 0.7742, 10, -1},
      {"Chilovi", 2.12, 1.12, 3.99, 0.7321, 1.5298, 0.1261, 7, -1},
      {"Palmer", 4.83, 2.09, 11.18, 2.3189, 1.6517, 0.0986, 4, -1},
      {"Teng", 2.92, 1.14, 7.48, 1.6173, 1.1871, 0.2352, 8, -1},
      {"Chan", 0.38, 0.12, 1.18, 0.2704, -2.2928, 0.0219, 3, -1},
      {"Brodyty", 1.47, 0.09, 23.41, 5.9490, 0.0790, 0.9370, 11, -1},
      {"Burke", 2.00, 1.78, 2.25, 0.1199, 8.3404, 0.0000, 1, -1},
  };
  return rows;
}

inline metaudit::ingest::StudyTable make_table(const std::vector<Row>& rows,
                                               double confidence_level,
                                               double null_value = 1.0) {
  metaudit::ingest::StudyTable t;
  t.confidence_level = confidence_level;
  t.null_value = null_value;
  for (const auto& r : rows) {
    metaudit::ingest::StudyRecord rec;
    rec.label = r.label;
    rec.effect = r.rr;
    rec.cl_low = r.cl_low;
    rec.cl_high = r.cl_high;
    t.records.push_back(std::move(rec));
  }
  return t;
}

inline metaudit::ingest::StudyTable ets_table() {
  return make_table(ets_rows(), 0.90);
}

inline metaudit::ingest::StudyTable apathy_table() {
  return make_table(apathy_rows(), 0.95);
}

inline std::string data_path(const char* name) {
  return std::string(METAUDIT_DATA_DIR) + "/" + name;
}

// --- frozen oracle constants (independent 50-digit computation) ----------

// normal distribution
inline constexpr double kPhi1959964 = 0.9750000009035576;
inline constexpr double kZ95 = 1.6448536269514727;
inline constexpr double kZ975 = 1.9599639845400542;

// apathy table ranked-p diagnostics
inline constexpr double kApathyFStat = 20.6546906831465;
inline constexpr double kApathyFP = 0.001887378075635;
inline constexpr double kApathyKsD = 0.510279563479712;
inline constexpr double kApathyKsP = 0.0037852523158184;
inline constexpr double kApathyLinSse = 0.256689346637514;
inline constexpr double kApathyQuadSse = 0.0716641751888777;
inline constexpr int kApathySegBreakpoint = 8;
inline constexpr double kApathySegSse = 0.0057173803824729;

// ets table ranked-p diagnostics
inline constexpr double kEtsFStat = 55.36880180798;
inline constexpr double kEtsFP = 7.3268833642079e-5;
inline constexpr double kEtsKsD = 0.308657341724704;
inline constexpr double kEtsKsP = 0.201521195024279;
inline constexpr double kEtsLinIntercept = 0.14421298168023;
inline constexpr double kEtsLinSlope = 0.0570123315251158;
inline constexpr double kEtsLinSse = 0.0222877614176533;
inline constexpr double kEtsQuadC0 = 0.0203453756646802;
inline constexpr double kEtsQuadC1 = 0.114181995839985;
inline constexpr double kEtsQuadC2 = -0.00476413869290574;
inline constexpr double kEtsQuadSse = 0.00281372041531599;

// pooling (apathy, linear scale)
inline constexpr double kApathyPooled = 1.5887025208907;
inline constexpr double kApathyPooledSe = 0.087562033544436;
inline constexpr double kApathyQ = 47.2890169223384;
inline constexpr double kApathyI2 = 0.788534407124116;
inline constexpr double kApathyEggerIntercept = -0.0907980444930158;
inline constexpr double kApathyEggerSe = 1.03661436274014;
inline constexpr double kApathyEggerP = 0.932119733143468;

// pooling (ets, linear scale)
inline constexpr double kEtsPooled = 1.1425040450416;
inline constexpr double kEtsQ = 5.53263590688499;
inline constexpr double kEtsEggerIntercept = 0.355750521537824;
inline constexpr double kEtsEggerP = 0.383664974538103;

// synthetic hockey stick {0.001,0.002,0.003,0.30,0.45,0.60,0.75,0.90}:
// the F improvement is real but modest
inline constexpr double kHockeyF = 2.33454799000606;
inline constexpr double kHockeyFP = 0.187069352005092;

// min-p envelope
inline constexpr double kEnvelope15At50 = 0.0451583960895834;
inline constexpr double kEnvelope15At32 = 0.02538312317485;

} // namespace fixtures
