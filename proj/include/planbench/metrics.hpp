#pragma once

#include <optional>
#include <vector>

#include "planbench/env.hpp"
#include "planbench/loop.hpp"

namespace planbench {

struct TrialMetrics {
  bool goal_achieved = false;
  bool task_completed = false;   // goal achieved and constraints satisfied
  bool final_logic_ok = false;   // realized placement order satisfies logic
  int pos_corrections = 0;       // replans that lowered the violation count
  int pos_opportunities = 0;     // replans starting from violations > 0
  int neg_corrections = 0;       // replans that raised the violation count
  int neg_opportunities = 0;     // replans starting below max violations
  // Real executions are always valid (the executor is deterministic); the
  // flag exists so externally produced records (e.g. published results) can
  // carry their motion-planner validity filter through aggregation.
  bool valid = true;

  bool operator==(const TrialMetrics&) const = default;
};

TrialMetrics compute_trial_metrics(const EnvSpec& env,
                                   const TrialTrace& trace);

struct ScenarioStats {
  double gar = 0.0;  // goal achieved, over valid trials
  double tcr = 0.0;  // task completed, over valid trials
  double cfp = 0.0;  // final logic ok, over all trials
  std::optional<double> pcr;  // pooled; absent when no opportunities
  std::optional<double> ncr;
  int n_trials = 0;
  int n_valid = 0;
  // Pooled correction tallies, kept so significance tests can use the true
  // PCR/NCR sample sizes.
  int pos_corrections = 0;
  int pos_opportunities = 0;
  int neg_corrections = 0;
  int neg_opportunities = 0;
};

// Pools PCR/NCR numerators and denominators over the scenario; GAR/TCR use
// valid trials as the denominator and CFP all trials, mirroring how the
// published tables are computed.  Throws Error(empty_scenario) on no input.
ScenarioStats aggregate(const std::vector<TrialMetrics>& trials);

struct ZTestResult {
  double z = 0.0;
  double p_value = 1.0;
  bool significant = false;  // at alpha = 0.05, two-sided
  int direction = 0;         // sign of p1 - p2
};

// Two-proportion z-test with pooled variance.  Degenerate pooled proportion
// (0 or 1) yields z = 0, not significant.  Throws Error(bad_sample) on
// invalid counts or proportions.
ZTestResult two_prop_z(double p1, int n1, double p2, int n2);

// Standard normal CDF (via erfc; good to ~1e-15).
double normal_cdf(double x);

}  // namespace planbench
