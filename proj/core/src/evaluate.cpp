#include "wacal/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace wacal {

std::string to_string(FailureReason reason) {
  switch (reason) {
    case FailureReason::None: return "none";
    case FailureReason::NoSolution: return "no_solution";
    case FailureReason::FocalRule: return "focal_rule";
    case FailureReason::NonConvergence: return "non_convergence";
  }
  return "unknown";
}

RunScore classify_failure(const CalibReport& report, const CameraSpec& truth) {
  if (report.spec.kind != truth.kind)
    throw std::invalid_argument(
        "classify_failure: model kinds differ and no mapping was declared");
  RunScore score;
  score.model = to_string(truth.kind);
  score.rms = report.rms;
  const double dfx = std::abs(comparable_focal(report.spec, 0) -
                              comparable_focal(truth, 0));
  const double dfy = std::abs(comparable_focal(report.spec, 1) -
                              comparable_focal(truth, 1));
  score.focal_error_max = std::max(dfx, dfy);
  if (!report.converged) {
    score.failed = true;
    score.failure_reason = FailureReason::NonConvergence;
  } else if (score.focal_error_max >= 100.0) {
    score.failed = true;
    score.failure_reason = FailureReason::FocalRule;
  }
  return score;
}

RunScore score_run(const CalibReport& report, const CameraSpec& truth,
                   const std::string& group) {
  if (report.spec.params.size() != truth.params.size())
    throw std::invalid_argument("score_run: parameter layout mismatch");
  RunScore score = classify_failure(report, truth);
  score.group = group;
  score.param_errors = report.spec.params - truth.params;
  return score;
}

double quantile_type7(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::nan("");
  if (sorted.size() == 1) return sorted[0];
  const double h = (sorted.size() - 1) * q;
  const size_t lo = static_cast<size_t>(std::floor(h));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - lo) * (sorted[hi] - sorted[lo]);
}

namespace {

std::array<double, 5> five_number(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return {quantile_type7(v, 0.0), quantile_type7(v, 0.25),
          quantile_type7(v, 0.5), quantile_type7(v, 0.75),
          quantile_type7(v, 1.0)};
}

}  // namespace

StudySummary aggregate(const std::vector<RunScore>& scores) {
  StudySummary summary;
  std::map<std::string, std::map<std::string, std::vector<double>>> samples;
  for (const auto& s : scores) {
    const std::string key = s.group + "/" + s.model;
    auto& g = summary.groups[key];
    ++g.runs;
    if (s.failed) {
      ++g.failures;
      continue;  // failed tests are excluded from the distribution stats
    }
    auto& m = samples[key];
    for (Eigen::Index i = 0; i < s.param_errors.size(); ++i)
      m["p" + std::to_string(i)].push_back(s.param_errors(i));
    m["rms"].push_back(s.rms);
  }
  for (auto& [key, m] : samples) {
    auto& g = summary.groups[key];
    for (auto& [param, values] : m) g.quantiles[param] = five_number(values);
    g.quantiles_available = !m.empty();
  }
  return summary;
}

std::string summary_to_csv(const StudySummary& summary) {
  static const char* stat_names[5] = {"min", "q1", "median", "q3", "max"};
  std::ostringstream out;
  out.precision(17);
  out << "group,model,param,stat,value\n";
  for (const auto& [key, g] : summary.groups) {
    const auto slash = key.rfind('/');
    const std::string group = key.substr(0, slash);
    const std::string model = key.substr(slash + 1);
    for (const auto& [param, q] : g.quantiles)
      for (int i = 0; i < 5; ++i)
        out << group << ',' << model << ',' << param << ',' << stat_names[i]
            << ',' << q[i] << '\n';
  }
  return out.str();
}

std::string failures_to_tsv(const StudySummary& summary) {
  std::ostringstream out;
  out << "group\tfailures\truns\n";
  for (const auto& [key, g] : summary.groups)
    out << key << '\t' << g.failures << '\t' << g.runs << '\n';
  return out.str();
}

}  // namespace wacal
