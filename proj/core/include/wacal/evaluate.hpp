#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "wacal/calibrate.hpp"

namespace wacal {

enum class FailureReason { None, NoSolution, FocalRule, NonConvergence };

std::string to_string(FailureReason reason);

struct RunScore {
  std::string group;
  std::string model;
  Eigen::VectorXd param_errors;  // estimate - truth, native units
  double focal_error_max = 0.0;  // pixels, comparable-focal space
  double rms = 0.0;
  bool failed = false;
  FailureReason failure_reason = FailureReason::None;
};

struct GroupSummary {
  std::map<std::string, std::array<double, 5>> quantiles;  // min q1 med q3 max
  bool quantiles_available = false;
  int failures = 0;
  int runs = 0;
};

struct StudySummary {
  std::map<std::string, GroupSummary> groups;
};

/// A run fails when max(|dfx|, |dfy|) >= 100 px in comparable-focal space,
/// or the report carries no solution / non-convergence.
RunScore classify_failure(const CalibReport& report, const CameraSpec& truth);

/// Elementwise parameter errors in the declared layout order plus the
/// failure classification. Throws std::invalid_argument on kind mismatch.
RunScore score_run(const CalibReport& report, const CameraSpec& truth,
                   const std::string& group = "");

/// Type-7 (linear interpolation) quantile of a sorted sample.
double quantile_type7(const std::vector<double>& sorted, double q);

/// Groups scores by their group string; quantiles over non-failed runs only,
/// failure counts over all runs. Statistics per parameter (p0..pN-1) and rms.
StudySummary aggregate(const std::vector<RunScore>& scores);

/// CSV rows: group,model,param,stat,value.
std::string summary_to_csv(const StudySummary& summary);

/// TSV failure table: group, failures, runs.
std::string failures_to_tsv(const StudySummary& summary);

}  // namespace wacal
