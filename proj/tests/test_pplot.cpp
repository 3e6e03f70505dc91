#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "metaudit/nullsim.hpp"
#include "metaudit/pplot.hpp"
#include "oracles.hpp"

using namespace metaudit;
using pplot::PlotPoint;
using pplot::Verdict;

namespace {

std::vector<double> ranked_p(const ingest::StudyTable& table) {
  const auto tests = ingest::derive_tests(table);
  std::vector<double> p;
  for (const auto& t : tests) p.push_back(t.test.p);
  std::sort(p.begin(), p.end());
  return p;
}

std::vector<PlotPoint> to_points(const std::vector<double>& ranked) {
  std::vector<PlotPoint> pts;
  for (size_t i = 0; i < ranked.size(); ++i) {
    pts.push_back({static_cast<int>(i) + 1, ranked[i]});
  }
  return pts;
}

std::vector<double> ranks_of(const std::vector<PlotPoint>& pts) {
  std::vector<double> x;
  for (const auto& p : pts) x.push_back(p.rank);
  return x;
}

std::vector<double> values_of(const std::vector<PlotPoint>& pts) {
  std::vector<double> y;
  for (const auto& p : pts) y.push_back(p.p);
  return y;
}

} // namespace

TEST_CASE("build_plot ranks and references") {
  const auto series = pplot::build_plot(std::vector<double>{0.75, 0.25});
  REQUIRE(series.points.size() == 2);
  CHECK(series.points[0].rank == 1);
  CHECK(series.points[0].p == 0.25);
  CHECK(series.points[1].rank == 2);
  CHECK(series.points[1].p == 0.75);
  CHECK(series.uniform_reference[0] == doctest::Approx(1.0 / 3.0));
  CHECK(series.uniform_reference[1] == doctest::Approx(2.0 / 3.0));
  CHECK(series.naive_min_level == 0.5);

  CHECK_THROWS_AS(pplot::build_plot(std::vector<double>{0.5}), AnalysisError);
  CHECK_THROWS_AS(pplot::build_plot(std::vector<double>{0.5, 0.0}), DomainError);
  CHECK_THROWS_AS(pplot::build_plot(std::vector<double>{0.5, 1.5}), DomainError);
}

TEST_CASE("build_plot on the apathy table starts at Burke") {
  const auto tests = ingest::derive_tests(fixtures::apathy_table());
  const auto series = pplot::build_plot(tests);
  REQUIRE(series.points.size() == 11);
  CHECK(series.points.front().p < 1e-15); // Burke
  CHECK(series.points.back().p == doctest::Approx(0.937).epsilon(0.001));
}

TEST_CASE("build_plot matches an independent sort of seeded draws") {
  nullsim::SplitMix64 gen(314159);
  std::vector<double> draws;
  for (int i = 0; i < 15; ++i) draws.push_back(gen.next_unit());

  // independent ranking: repeated minimum extraction
  std::vector<double> expected;
  std::vector<double> pool = draws;
  while (!pool.empty()) {
    auto it = std::min_element(pool.begin(), pool.end());
    expected.push_back(*it);
    pool.erase(it);
  }

  const auto series = pplot::build_plot(draws);
  for (size_t i = 0; i < expected.size(); ++i) {
    CHECK(series.points[i].p == expected[i]);
    CHECK(series.points[i].rank == static_cast<int>(i) + 1);
  }
}

TEST_CASE("build_plot is shuffle-invariant") {
  std::vector<double> p = ranked_p(fixtures::apathy_table());
  const auto base = pplot::build_plot(p);
  std::mt19937 rng(5);
  for (int round = 0; round < 8; ++round) {
    std::shuffle(p.begin(), p.end(), rng);
    const auto again = pplot::build_plot(p);
    for (size_t i = 0; i < base.points.size(); ++i) {
      CHECK(again.points[i].p == base.points[i].p);
    }
  }
}

TEST_CASE("fit_linear recovers an exact line") {
  std::vector<double> y;
  for (int i = 1; i <= 10; ++i) y.push_back(i / 10.0);
  const auto fit = pplot::fit_linear(to_points(y));
  CHECK(fit.slope == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(0.0).scale(1).epsilon(1e-12));
  CHECK(fit.sse < 1e-28);
  CHECK_THROWS_AS(pplot::fit_linear(to_points({0.1, 0.2})), AnalysisError);
}

TEST_CASE("fits match the normal-equation oracle on both tables") {
  for (const auto& table : {fixtures::ets_table(), fixtures::apathy_table()}) {
    const auto pts = to_points(ranked_p(table));
    const auto x = ranks_of(pts);
    const auto y = values_of(pts);

    const auto lin = pplot::fit_linear(pts);
    const auto olin = oracle::linear_fit(x, y);
    CHECK(lin.intercept ==
          doctest::Approx((double)olin.intercept).epsilon(1e-9));
    CHECK(lin.slope == doctest::Approx((double)olin.slope).epsilon(1e-9));
    CHECK(lin.sse == doctest::Approx((double)olin.sse).epsilon(1e-9));

    const auto quad = pplot::fit_quadratic(pts);
    const auto oquad = oracle::quadratic_fit(x, y);
    CHECK(quad.c0 == doctest::Approx((double)oquad.c0).epsilon(1e-9));
    CHECK(quad.c1 == doctest::Approx((double)oquad.c1).epsilon(1e-9));
    CHECK(quad.c2 == doctest::Approx((double)oquad.c2).epsilon(1e-9));
    CHECK(quad.sse == doctest::Approx((double)oquad.sse).epsilon(1e-9));
  }
}

TEST_CASE("fits reproduce the frozen desk-scale values") {
  const auto ets = to_points(ranked_p(fixtures::ets_table()));
  const auto lin = pplot::fit_linear(ets);
  CHECK(lin.intercept ==
        doctest::Approx(fixtures::kEtsLinIntercept).epsilon(1e-9));
  CHECK(lin.slope == doctest::Approx(fixtures::kEtsLinSlope).epsilon(1e-9));
  CHECK(lin.sse == doctest::Approx(fixtures::kEtsLinSse).epsilon(1e-9));
  const auto quad = pplot::fit_quadratic(ets);
  CHECK(quad.c0 == doctest::Approx(fixtures::kEtsQuadC0).epsilon(1e-9));
  CHECK(quad.c1 == doctest::Approx(fixtures::kEtsQuadC1).epsilon(1e-9));
  CHECK(quad.c2 == doctest::Approx(fixtures::kEtsQuadC2).epsilon(1e-9));
  CHECK(quad.sse == doctest::Approx(fixtures::kEtsQuadSse).epsilon(1e-9));

  const auto ap = to_points(ranked_p(fixtures::apathy_table()));
  CHECK(pplot::fit_linear(ap).sse ==
        doctest::Approx(fixtures::kApathyLinSse).epsilon(1e-9));
  CHECK(pplot::fit_quadratic(ap).sse ==
        doctest::Approx(fixtures::kApathyQuadSse).epsilon(1e-9));
}

TEST_CASE("quadratic never fits worse than linear") {
  nullsim::SplitMix64 gen(11);
  for (int round = 0; round < 50; ++round) {
    std::vector<double> y;
    const int n = 4 + static_cast<int>(gen.next() % 30);
    for (int i = 0; i < n; ++i) y.push_back(gen.next_unit());
    std::sort(y.begin(), y.end());
    const auto pts = to_points(y);
    CHECK(pplot::fit_quadratic(pts).sse <=
          pplot::fit_linear(pts).sse * (1.0 + 1e-12));
  }
}

TEST_CASE("compare_nested on the apathy table") {
  const auto pts = to_points(ranked_p(fixtures::apathy_table()));
  const auto cmp = pplot::compare_nested(pplot::fit_linear(pts),
                                         pplot::fit_quadratic(pts), 11);
  CHECK(cmp.f_statistic ==
        doctest::Approx(fixtures::kApathyFStat).epsilon(1e-9));
  CHECK(cmp.p == doctest::Approx(fixtures::kApathyFP).epsilon(1e-9));
  CHECK(cmp.p <= 0.01);
  CHECK_FALSE(cmp.degenerate);
}

TEST_CASE("compare_nested: collinear points give F = 0, p = 1") {
  std::vector<double> y;
  for (int i = 1; i <= 8; ++i) y.push_back(i / 10.0);
  const auto pts = to_points(y);
  auto lin = pplot::fit_linear(pts);
  auto quad = pplot::fit_quadratic(pts);
  quad.sse = std::min(quad.sse, lin.sse); // the diagnose-side clamp
  const auto cmp = pplot::compare_nested(lin, quad, 8);
  CHECK(cmp.f_statistic == 0.0);
  CHECK(cmp.p == 1.0);
  CHECK_FALSE(cmp.degenerate);
}

TEST_CASE("compare_nested on the synthetic hockey stick (frozen oracle)") {
  const std::vector<double> y = {0.001, 0.002, 0.003, 0.30,
                                 0.45,  0.60,  0.75,  0.90};
  const auto pts = to_points(y);
  const auto cmp = pplot::compare_nested(pplot::fit_linear(pts),
                                         pplot::fit_quadratic(pts), 8);
  CHECK(cmp.f_statistic == doctest::Approx(fixtures::kHockeyF).epsilon(1e-9));
  CHECK(cmp.p == doctest::Approx(fixtures::kHockeyFP).epsilon(1e-9));
}

TEST_CASE("compare_nested: perfect quadratic flags the degenerate fit") {
  std::vector<double> y;
  for (int i = 1; i <= 6; ++i) y.push_back(0.01 + i * i / 50.0);
  auto lin = pplot::fit_linear(to_points(y));
  pplot::QuadraticFit quad = pplot::fit_quadratic(to_points(y));
  quad.sse = 0.0; // exact quadratic up to roundoff; force the branch
  const auto cmp = pplot::compare_nested(lin, quad, 6);
  CHECK(cmp.degenerate);
  CHECK(cmp.p == stats::kMinP);
  CHECK_THROWS_AS(pplot::compare_nested(lin, quad, 3), AnalysisError);
}

TEST_CASE("fit_segmented finds the synthetic blade/handle break") {
  const std::vector<double> y = {0.001, 0.003, 0.005, 0.35,
                                 0.50,  0.66,  0.81,  0.95};
  const auto fit = pplot::fit_segmented(to_points(y));
  CHECK(fit.breakpoint == 3);
  const auto ofit = oracle::segmented_fit(y);
  CHECK(ofit.breakpoint == 3);
  CHECK(fit.sse == doctest::Approx((double)ofit.sse).epsilon(1e-9));
  CHECK(fit.left_slope == doctest::Approx(0.002).epsilon(1e-9));
  CHECK(fit.right_slope == doctest::Approx(0.151).epsilon(1e-9));
}

TEST_CASE("fit_segmented ties resolve to the earliest breakpoint") {
  std::vector<double> y;
  for (int i = 1; i <= 9; ++i) y.push_back(i / 10.0);
  const auto fit = pplot::fit_segmented(to_points(y));
  CHECK(fit.breakpoint == 2);
  CHECK(fit.sse < 1e-20);
  CHECK_THROWS_AS(pplot::fit_segmented(to_points({0.1, 0.2, 0.3, 0.4, 0.5})),
                  AnalysisError);
}

TEST_CASE("fit_segmented agrees with brute force on random series") {
  nullsim::SplitMix64 gen(21);
  for (int round = 0; round < 40; ++round) {
    const int n = 6 + static_cast<int>(gen.next() % 20);
    std::vector<double> y;
    for (int i = 0; i < n; ++i) y.push_back(gen.next_unit());
    std::sort(y.begin(), y.end());
    const auto fit = pplot::fit_segmented(to_points(y));
    const auto ofit = oracle::segmented_fit(y);
    CHECK(fit.breakpoint == ofit.breakpoint);
    CHECK(fit.sse == doctest::Approx((double)ofit.sse).epsilon(1e-9));
    CHECK(fit.sse <= pplot::fit_linear(to_points(y)).sse * (1.0 + 1e-12));
  }
}

TEST_CASE("fit_segmented null slopes balance on average") {
  // under the null both segments track the same 45-degree trend; the
  // breakpoint search is symmetric in b <-> n-b, so the log slope ratio
  // is symmetric about 0
  const auto sim = nullsim::simulate({15, 2000, 3});
  std::vector<double> log_ratios;
  for (const auto& rep : sim.replications) {
    const auto f = pplot::fit_segmented(to_points(rep.ranked_p));
    if (f.left_slope > 0.0 && f.right_slope > 0.0) {
      log_ratios.push_back(std::log(f.left_slope / f.right_slope));
    }
  }
  REQUIRE(log_ratios.size() > 1900);
  std::sort(log_ratios.begin(), log_ratios.end());
  const double median = log_ratios[log_ratios.size() / 2];
  double mean = 0.0;
  for (double r : log_ratios) mean += r;
  mean /= static_cast<double>(log_ratios.size());
  CHECK(std::exp(median) > 0.8);
  CHECK(std::exp(median) < 1.25);
  CHECK(std::fabs(mean) < 0.1);
}

TEST_CASE("fit_segmented on the apathy table breaks after rank 8") {
  const auto fit =
      pplot::fit_segmented(to_points(ranked_p(fixtures::apathy_table())));
  CHECK(fit.breakpoint == fixtures::kApathySegBreakpoint);
  CHECK(fit.sse == doctest::Approx(fixtures::kApathySegSse).epsilon(1e-9));
}

TEST_CASE("ks_uniform statistics and p-values") {
  std::vector<double> lattice;
  for (int i = 1; i <= 15; ++i) lattice.push_back(i / 16.0);
  const auto lat = pplot::ks_uniform(to_points(lattice));
  CHECK(lat.statistic == doctest::Approx(1.0 / 16.0).epsilon(1e-12));
  CHECK(lat.p > 0.999);

  const auto point_mass =
      pplot::ks_uniform(to_points(std::vector<double>(10, 0.5)));
  CHECK(point_mass.statistic == 0.5);
  CHECK(point_mass.p ==
        doctest::Approx(0.00816167865914307).epsilon(1e-9));

  CHECK_THROWS_AS(pplot::ks_uniform(to_points({0.5})), AnalysisError);
}

TEST_CASE("ks_uniform matches the direct-computation oracle on both tables") {
  const auto ets = ranked_p(fixtures::ets_table());
  const auto ets_ks = pplot::ks_uniform(to_points(ets));
  CHECK(ets_ks.statistic ==
        doctest::Approx((double)oracle::ks_statistic(ets)).epsilon(1e-12));
  CHECK(ets_ks.statistic == doctest::Approx(fixtures::kEtsKsD).epsilon(1e-9));
  CHECK(ets_ks.p == doctest::Approx(fixtures::kEtsKsP).epsilon(1e-9));

  const auto ap = ranked_p(fixtures::apathy_table());
  const auto ap_ks = pplot::ks_uniform(to_points(ap));
  CHECK(ap_ks.statistic ==
        doctest::Approx((double)oracle::ks_statistic(ap)).epsilon(1e-12));
  CHECK(ap_ks.statistic ==
        doctest::Approx(fixtures::kApathyKsD).epsilon(1e-9));
  CHECK(ap_ks.p == doctest::Approx(fixtures::kApathyKsP).epsilon(1e-9));
}

TEST_CASE("detect_gaps flags the apathy gap between ranks 8 and 9") {
  const auto gaps =
      pplot::detect_gaps(to_points(ranked_p(fixtures::apathy_table())));
  REQUIRE(gaps.size() == 1);
  CHECK(gaps[0].lower_rank == 8);
  CHECK(gaps[0].size == doctest::Approx(0.4553582283).epsilon(1e-6));
}

TEST_CASE("detect_gaps is clean on the exact lattice for every n") {
  for (int n = 3; n <= 40; ++n) {
    std::vector<double> lattice;
    for (int i = 1; i <= n; ++i) {
      lattice.push_back(static_cast<double>(i) / (n + 1));
    }
    CHECK(pplot::detect_gaps(to_points(lattice)).empty());
  }
}

TEST_CASE("detect_gaps trivial three-point case") {
  const auto gaps = pplot::detect_gaps(to_points({0.01, 0.02, 0.90}));
  REQUIRE(gaps.size() == 1);
  CHECK(gaps[0].lower_rank == 2);
  CHECK_THROWS_AS(pplot::detect_gaps(to_points({0.1, 0.2})), AnalysisError);
}

TEST_CASE("classify implements the rule table") {
  using pplot::classify;
  // blade + handle + significant curvature
  CHECK(classify(0.005, 0.5, 0.001, 0.9) == Verdict::bilinear);
  CHECK(classify(0.01, 0.5, 0.01, 0.9) == Verdict::bilinear); // at bounds
  // shallow line: everything small, non-uniform
  CHECK(classify(0.5, 0.01, 0.0001, 0.009) == Verdict::consistent_effect);
  // nothing going on
  CHECK(classify(0.5, 0.5, 0.1, 0.9) == Verdict::random);
  // curvature without a blade
  CHECK(classify(0.005, 0.2, 0.10, 0.9) == Verdict::ambiguous);
  // non-uniform but not all small, no curvature
  CHECK(classify(0.5, 0.01, 0.001, 0.5) == Verdict::ambiguous);
  // bilinear wins over consistent_effect when both fire
  CHECK(classify(0.005, 0.01, 0.001, 0.9) == Verdict::bilinear);
  // configurable thresholds shift the verdict
  pplot::Thresholds strict;
  strict.fit_alpha = 1e-6;
  CHECK(classify(0.005, 0.5, 0.001, 0.9, strict) != Verdict::bilinear);
}

TEST_CASE("classify is total over a threshold-straddling grid") {
  const double probes[] = {0.001, 0.05, 0.051, 0.2, 0.21, 0.9};
  for (double qp : probes) {
    for (double kp : probes) {
      for (double mn : probes) {
        for (double mx : probes) {
          if (mx < mn) continue;
          const Verdict v = pplot::classify(qp, kp, mn, mx);
          CHECK((v == Verdict::random || v == Verdict::consistent_effect ||
                 v == Verdict::bilinear || v == Verdict::ambiguous));
        }
      }
    }
  }
}

TEST_CASE("diagnose: apathy table is bilinear") {
  const auto d = pplot::diagnose(ingest::derive_tests(fixtures::apathy_table()));
  CHECK(d.verdict == Verdict::bilinear);
  CHECK(d.quad_vs_linear.p <= 0.01);
  CHECK(d.quadratic_fit.sse < d.linear_fit.sse);
  REQUIRE(d.segmented_fit.has_value());
  CHECK(d.segmented_fit->breakpoint == 8);
  CHECK(d.segmented_fit->sse <= d.linear_fit.sse);
  REQUIRE(d.gaps.size() == 1);
  CHECK(d.gaps[0].lower_rank == 8);
}

TEST_CASE("diagnose: ets table is ambiguous under the rules") {
  // quad-vs-linear fires (the ranked series flattens) but there is no
  // blade: the smallest p is 0.106
  const auto d = pplot::diagnose(ingest::derive_tests(fixtures::ets_table()));
  CHECK(d.quad_vs_linear.p <= 0.05);
  CHECK(d.series.points.front().p > 0.05);
  CHECK(d.verdict == Verdict::ambiguous);
  CHECK(d.quad_vs_linear.f_statistic ==
        doctest::Approx(fixtures::kEtsFStat).epsilon(1e-9));
  CHECK(d.quad_vs_linear.p == doctest::Approx(fixtures::kEtsFP).epsilon(1e-9));
  CHECK(d.gaps.empty());
}

TEST_CASE("diagnose: a shallow all-small line is a consistent effect") {
  const auto d = pplot::diagnose(
      std::vector<double>{0.0001, 0.0002, 0.0003, 0.0004, 0.0005, 0.0006});
  CHECK(d.verdict == Verdict::consistent_effect);
}

TEST_CASE("diagnose rejects n < 4") {
  CHECK_THROWS_AS(pplot::diagnose(std::vector<double>{0.1, 0.2, 0.3}),
                  AnalysisError);
}
