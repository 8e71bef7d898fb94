#include "planbench/metrics.hpp"

#include <cmath>

#include "planbench/util.hpp"

namespace planbench {

TrialMetrics compute_trial_metrics(const EnvSpec& env,
                                   const TrialTrace& trace) {
  TrialMetrics metrics;
  metrics.goal_achieved = trace.goal_achieved;
  metrics.final_logic_ok = trace.logic_satisfied;
  metrics.task_completed = trace.goal_achieved && trace.logic_satisfied;

  const int max_violations = static_cast<int>(env.constraints.size());
  for (std::size_t i = 1; i < trace.iterations.size(); ++i) {
    const int prev = trace.iterations[i - 1].violations;
    const int next = trace.iterations[i].violations;
    if (prev > 0) {
      ++metrics.pos_opportunities;
      if (next < prev) ++metrics.pos_corrections;
    }
    if (prev < max_violations) {
      ++metrics.neg_opportunities;
      if (next > prev) ++metrics.neg_corrections;
    }
  }
  return metrics;
}

ScenarioStats aggregate(const std::vector<TrialMetrics>& trials) {
  if (trials.empty()) {
    throw Error(ErrorCode::empty_scenario, "no trials to aggregate");
  }
  ScenarioStats stats;
  stats.n_trials = static_cast<int>(trials.size());
  int goal = 0, completed = 0, logic = 0;
  for (const TrialMetrics& trial : trials) {
    if (trial.valid) {
      ++stats.n_valid;
      if (trial.goal_achieved) ++goal;
      if (trial.task_completed) ++completed;
    }
    if (trial.final_logic_ok) ++logic;
    stats.pos_corrections += trial.pos_corrections;
    stats.pos_opportunities += trial.pos_opportunities;
    stats.neg_corrections += trial.neg_corrections;
    stats.neg_opportunities += trial.neg_opportunities;
  }
  stats.gar = stats.n_valid > 0
                  ? static_cast<double>(goal) / stats.n_valid
                  : 0.0;
  stats.tcr = stats.n_valid > 0
                  ? static_cast<double>(completed) / stats.n_valid
                  : 0.0;
  stats.cfp = static_cast<double>(logic) / stats.n_trials;
  if (stats.pos_opportunities > 0) {
    stats.pcr = static_cast<double>(stats.pos_corrections) /
                stats.pos_opportunities;
  }
  if (stats.neg_opportunities > 0) {
    stats.ncr = static_cast<double>(stats.neg_corrections) /
                stats.neg_opportunities;
  }
  return stats;
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

ZTestResult two_prop_z(double p1, int n1, double p2, int n2) {
  if (n1 < 1 || n2 < 1) {
    throw Error(ErrorCode::bad_sample, "sample sizes must be >= 1");
  }
  if (p1 < 0.0 || p1 > 1.0 || p2 < 0.0 || p2 > 1.0) {
    throw Error(ErrorCode::bad_sample, "proportions must lie in [0, 1]");
  }
  ZTestResult result;
  result.direction = p1 > p2 ? 1 : (p1 < p2 ? -1 : 0);
  const double pooled = (p1 * n1 + p2 * n2) / (n1 + n2);
  if (pooled <= 0.0 || pooled >= 1.0) {
    // All successes or all failures pooled: no variance, no evidence.
    result.z = 0.0;
    result.p_value = 1.0;
    result.significant = false;
    return result;
  }
  const double se = std::sqrt(pooled * (1.0 - pooled) *
                              (1.0 / n1 + 1.0 / n2));
  result.z = (p1 - p2) / se;
  result.p_value = 2.0 * (1.0 - normal_cdf(std::abs(result.z)));
  result.significant = result.p_value < 0.05;
  return result;
}

}  // namespace planbench
