#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "test_util.hpp"
#include "wacal/evaluate.hpp"

using namespace wacal;
using namespace wacal::testutil;

namespace {

CalibReport report_with_focal_offset(const CameraSpec& truth, double dfx,
                                     double dfy = 0.0) {
  CalibReport report;
  report.spec = truth;
  report.spec.params(0) += dfx;
  report.spec.params(1) += dfy;
  report.converged = true;
  report.rms = 0.95;
  return report;
}

}  // namespace

TEST_CASE("focal rule boundary: 99 passes, 100 fails") {
  const CameraSpec truth = make_spec(ModelKind::RadTan);
  const auto ok = classify_failure(report_with_focal_offset(truth, 99.0), truth);
  CHECK(!ok.failed);
  CHECK(ok.failure_reason == FailureReason::None);

  const auto bad =
      classify_failure(report_with_focal_offset(truth, 100.0), truth);
  CHECK(bad.failed);
  CHECK(bad.failure_reason == FailureReason::FocalRule);

  // fy alone also triggers it
  const auto bad_y =
      classify_failure(report_with_focal_offset(truth, 0.0, -120.0), truth);
  CHECK(bad_y.failed);
}

TEST_CASE("non-convergence propagates as a failure") {
  const CameraSpec truth = make_spec(ModelKind::EUCM);
  CalibReport report;
  report.spec = truth;
  report.converged = false;
  const auto score = classify_failure(report, truth);
  CHECK(score.failed);
  CHECK(score.failure_reason == FailureReason::NonConvergence);
}

TEST_CASE("failure rule is monotone in focal deviation") {
  const CameraSpec truth = make_spec(ModelKind::Pinhole);
  bool seen_failed = false;
  for (double d = 0.0; d <= 300.0; d += 7.3) {
    const auto s = classify_failure(report_with_focal_offset(truth, d), truth);
    if (seen_failed) CHECK(s.failed);
    seen_failed = seen_failed || s.failed;
  }
  CHECK(seen_failed);
}

TEST_CASE("comparable-focal space is used for scara and mei") {
  // Mei: gamma deviation of 150 px at xi=1 is only 75 px in focal space.
  const CameraSpec truth = make_spec(ModelKind::Mei);
  CalibReport report;
  report.spec = truth;
  report.spec.params(0) += 150.0;
  report.converged = true;
  CHECK(!classify_failure(report, truth).failed);
  report.spec.params(0) += 60.0;  // now 105 px in focal space
  CHECK(classify_failure(report, truth).failed);
}

TEST_CASE("kind mismatch rejected") {
  CalibReport report;
  report.spec = make_spec(ModelKind::EUCM);
  CHECK_THROWS_AS(classify_failure(report, make_spec(ModelKind::DS)),
                  std::invalid_argument);
}

TEST_CASE("score_run reports elementwise errors") {
  const CameraSpec truth = make_spec(ModelKind::EUCM);
  CalibReport report;
  report.spec = truth;
  report.converged = true;
  auto s = score_run(report, truth, "g");
  CHECK(s.param_errors.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.group == "g");
  CHECK(s.model == "eucm");

  report.spec.params(4) += 0.01;
  s = score_run(report, truth, "g");
  CHECK(s.param_errors(4) == doctest::Approx(0.01));
  CHECK(s.param_errors(0) == 0.0);
}

TEST_CASE("type-7 quantiles") {
  const std::vector<double> v{1, 2, 3, 4, 5};
  CHECK(quantile_type7(v, 0.5) == 3.0);
  CHECK(quantile_type7(v, 0.0) == 1.0);
  CHECK(quantile_type7(v, 1.0) == 5.0);
  CHECK(quantile_type7(v, 0.25) == 2.0);
  const std::vector<double> w{1, 2, 3, 4};
  CHECK(quantile_type7(w, 0.5) == 2.5);
  CHECK(quantile_type7(w, 0.25) == doctest::Approx(1.75));
  CHECK(quantile_type7({7}, 0.5) == 7.0);
}

TEST_CASE("aggregate: identical scores give zero-width boxes") {
  const CameraSpec truth = make_spec(ModelKind::RadTan);
  std::vector<RunScore> scores;
  for (int i = 0; i < 9; ++i)
    scores.push_back(
        score_run(report_with_focal_offset(truth, 1.5), truth, "case"));
  const auto summary = aggregate(scores);
  REQUIRE(summary.groups.count("case/radtan") == 1);
  const auto& g = summary.groups.at("case/radtan");
  CHECK(g.runs == 9);
  CHECK(g.failures == 0);
  REQUIRE(g.quantiles_available);
  const auto& q = g.quantiles.at("p0");
  CHECK(q[0] == q[4]);
  CHECK(q[2] == doctest::Approx(1.5));
}

TEST_CASE("aggregate: failures excluded from quantiles but counted") {
  const CameraSpec truth = make_spec(ModelKind::RadTan);
  std::vector<RunScore> scores;
  for (int i = 0; i < 7; ++i)
    scores.push_back(
        score_run(report_with_focal_offset(truth, 500.0), truth, "case"));
  scores.push_back(score_run(report_with_focal_offset(truth, 1.0), truth, "case"));
  scores.push_back(score_run(report_with_focal_offset(truth, 3.0), truth, "case"));
  const auto summary = aggregate(scores);
  const auto& g = summary.groups.at("case/radtan");
  CHECK(g.failures == 7);
  CHECK(g.runs == 9);
  REQUIRE(g.quantiles_available);
  CHECK(g.quantiles.at("p0")[2] == doctest::Approx(2.0));  // median of {1,3}
}

TEST_CASE("aggregate: all-failed group has no quantiles") {
  const CameraSpec truth = make_spec(ModelKind::RadTan);
  std::vector<RunScore> scores;
  for (int i = 0; i < 4; ++i)
    scores.push_back(
        score_run(report_with_focal_offset(truth, 500.0), truth, "case"));
  const auto summary = aggregate(scores);
  const auto& g = summary.groups.at("case/radtan");
  CHECK(!g.quantiles_available);
  CHECK(g.failures == 4);
  const auto tsv = failures_to_tsv(summary);
  CHECK(tsv.find("case/radtan\t4\t4") != std::string::npos);
}

TEST_CASE("aggregation is permutation invariant") {
  const CameraSpec truth = make_spec(ModelKind::EUCM);
  std::vector<RunScore> scores;
  std::mt19937 gen(3);
  std::normal_distribution<double> d(0.0, 2.0);
  for (int i = 0; i < 9; ++i)
    scores.push_back(
        score_run(report_with_focal_offset(truth, d(gen), d(gen)), truth, "g"));
  const std::string csv = summary_to_csv(aggregate(scores));
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(scores.begin(), scores.end(), gen);
    CHECK(summary_to_csv(aggregate(scores)) == csv);
  }
}

TEST_CASE("csv shape") {
  const CameraSpec truth = make_spec(ModelKind::Pinhole);
  std::vector<RunScore> scores{
      score_run(report_with_focal_offset(truth, 1.0), truth, "g")};
  const std::string csv = summary_to_csv(aggregate(scores));
  CHECK(csv.rfind("group,model,param,stat,value\n", 0) == 0);
  // 4 params + rms, 5 stats each, plus header
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 5 * 5);
}

TEST_CASE("failure reason strings") {
  CHECK(to_string(FailureReason::None) == "none");
  CHECK(to_string(FailureReason::NoSolution) == "no_solution");
  CHECK(to_string(FailureReason::FocalRule) == "focal_rule");
  CHECK(to_string(FailureReason::NonConvergence) == "non_convergence");
}
