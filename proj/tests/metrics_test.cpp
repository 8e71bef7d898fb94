#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "planbench/agents.hpp"
#include "planbench/env.hpp"
#include "planbench/loop.hpp"
#include "planbench/metrics.hpp"
#include "planbench/util.hpp"

namespace {

using namespace planbench;

EnvSpec load_bundled(const std::string& name) {
  return load_env_spec(std::string(PLANBENCH_ASSET_DIR) + "/envs/" + name +
                       ".json");
}

// Trace skeleton carrying only what the correction accounting reads: the
// per-iteration violation counts and the final outcome flags.
TrialTrace trace_with_violations(const std::vector<int>& violations,
                                 bool goal = true, bool logic = true) {
  TrialTrace trace;
  for (const int count : violations) {
    IterationRecord iteration;
    iteration.violations = count;
    trace.iterations.push_back(std::move(iteration));
  }
  trace.goal_achieved = goal;
  trace.logic_satisfied = logic;
  return trace;
}

TrialMetrics simple_trial(bool valid, bool goal, bool logic) {
  TrialMetrics metrics;
  metrics.valid = valid;
  metrics.goal_achieved = goal;
  metrics.final_logic_ok = logic;
  metrics.task_completed = goal && logic;
  return metrics;
}

}  // namespace

TEST_CASE("correction opportunities follow the violation deltas") {
  const EnvSpec env = load_bundled("cube_easy");  // 6 constraints
  REQUIRE(env.constraints.size() == 6);

  SUBCASE("monotone recovery counts each improving step") {
    const TrialMetrics m =
        compute_trial_metrics(env, trace_with_violations({2, 1, 0}));
    CHECK(m.pos_opportunities == 2);
    CHECK(m.pos_corrections == 2);
    CHECK(m.neg_opportunities == 2);  // both starts sit below the maximum
    CHECK(m.neg_corrections == 0);
  }
  SUBCASE("staying clean offers only negative opportunities") {
    const TrialMetrics m =
        compute_trial_metrics(env, trace_with_violations({0, 0}));
    CHECK(m.pos_opportunities == 0);
    CHECK(m.pos_corrections == 0);
    CHECK(m.neg_opportunities == 1);
    CHECK(m.neg_corrections == 0);
  }
  SUBCASE("a regression then a partial repair") {
    const TrialMetrics m =
        compute_trial_metrics(env, trace_with_violations({0, 3, 1}));
    CHECK(m.pos_opportunities == 1);
    CHECK(m.pos_corrections == 1);
    CHECK(m.neg_opportunities == 2);
    CHECK(m.neg_corrections == 1);
  }
  SUBCASE("at the violation ceiling nothing can get worse") {
    const TrialMetrics m =
        compute_trial_metrics(env, trace_with_violations({6, 5}));
    CHECK(m.pos_opportunities == 1);
    CHECK(m.pos_corrections == 1);
    CHECK(m.neg_opportunities == 0);
    CHECK(m.neg_corrections == 0);
  }
  SUBCASE("a single-plan trial has no replanning events at all") {
    const TrialMetrics m =
        compute_trial_metrics(env, trace_with_violations({4}));
    CHECK(m.pos_opportunities == 0);
    CHECK(m.neg_opportunities == 0);
  }
  SUBCASE("outcome flags are copied and combined") {
    const TrialMetrics m =
        compute_trial_metrics(env, trace_with_violations({0}, true, false));
    CHECK(m.goal_achieved);
    CHECK_FALSE(m.final_logic_ok);
    CHECK_FALSE(m.task_completed);
    CHECK(m.valid);
  }
}

TEST_CASE("aggregate uses valid trials for GAR/TCR and all trials for CFP") {
  std::vector<TrialMetrics> trials;
  // 48 valid trials, 28 achieving the goal (21 also logically clean), plus
  // 2 invalid ones; 39 of the full 50 end with a satisfying order.
  for (int i = 0; i < 48; ++i) {
    const bool goal = i < 28;
    const bool logic = i < 21 || (i >= 28 && i < 46);
    trials.push_back(simple_trial(true, goal, logic));
  }
  trials.push_back(simple_trial(false, true, false));
  trials.push_back(simple_trial(false, true, false));

  const ScenarioStats stats = aggregate(trials);
  CHECK(stats.n_trials == 50);
  CHECK(stats.n_valid == 48);
  CHECK(stats.gar == 28.0 / 48.0);
  CHECK(stats.tcr == 21.0 / 48.0);
  CHECK(stats.cfp == 39.0 / 50.0);
  CHECK_FALSE(stats.pcr.has_value());
  CHECK_FALSE(stats.ncr.has_value());
}

TEST_CASE("aggregate pools corrections over the whole scenario") {
  std::vector<TrialMetrics> trials(3);
  trials[0].pos_corrections = 2;
  trials[0].pos_opportunities = 3;
  trials[1].pos_corrections = 1;
  trials[1].pos_opportunities = 5;
  trials[2].neg_corrections = 1;
  trials[2].neg_opportunities = 4;

  const ScenarioStats stats = aggregate(trials);
  CHECK(stats.pos_corrections == 3);
  CHECK(stats.pos_opportunities == 8);
  CHECK(stats.neg_corrections == 1);
  CHECK(stats.neg_opportunities == 4);
  REQUIRE(stats.pcr.has_value());
  CHECK(*stats.pcr == 3.0 / 8.0);
  REQUIRE(stats.ncr.has_value());
  CHECK(*stats.ncr == 1.0 / 4.0);
}

TEST_CASE("aggregate edge cases") {
  CHECK_THROWS_AS(aggregate({}), Error);
  try {
    aggregate({});
  } catch (const Error& error) {
    CHECK(error.code() == ErrorCode::empty_scenario);
  }

  // All trials invalid: rates default to zero instead of dividing by zero.
  const ScenarioStats stats = aggregate({simple_trial(false, true, true)});
  CHECK(stats.n_valid == 0);
  CHECK(stats.gar == 0.0);
  CHECK(stats.tcr == 0.0);
  CHECK(stats.cfp == 1.0);
}

TEST_CASE("TCR never exceeds GAR for harness-computed metrics") {
  const EnvSpec env = load_bundled("ycb_easy");
  Rng rng(11);
  std::vector<TrialMetrics> trials;
  for (int i = 0; i < 400; ++i) {
    std::vector<int> violations;
    const std::uint64_t length = 1 + rng.below(5);
    for (std::uint64_t j = 0; j < length; ++j) {
      violations.push_back(static_cast<int>(rng.below(7)));
    }
    trials.push_back(compute_trial_metrics(
        env, trace_with_violations(violations, rng.below(2) == 0,
                                   rng.below(2) == 0)));
  }
  const ScenarioStats stats = aggregate(trials);
  CHECK(stats.tcr <= stats.gar);
}

TEST_CASE("the z-test matches the textbook computation on the published "
          "reference point") {
  // Reference: success rates 0.78 vs 0.14, both over 50 trials.
  const double p1 = 0.78, p2 = 0.14;
  const int n1 = 50, n2 = 50;
  const double pooled = (p1 * n1 + p2 * n2) / (n1 + n2);
  const double se =
      std::sqrt(pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2));
  const double reference = (p1 - p2) / se;

  const ZTestResult result = two_prop_z(p1, n1, p2, n2);
  CHECK(result.z == doctest::Approx(reference).epsilon(1e-12));
  CHECK(std::abs(result.z) ==
        doctest::Approx(6.4205788312410235).epsilon(1e-9));
  CHECK(result.p_value < 1e-9);
  CHECK(result.significant);
  CHECK(result.direction == 1);

  const ZTestResult swapped = two_prop_z(p2, n2, p1, n1);
  CHECK(std::abs(swapped.z) == doctest::Approx(std::abs(result.z)));
  CHECK(swapped.direction == -1);
  CHECK(swapped.significant);
}

TEST_CASE("z-test properties hold on 10000 fuzzed inputs") {
  Rng rng(20240901);
  int significant_seen = 0;
  int degenerate_seen = 0;
  for (int round = 0; round < 10000; ++round) {
    const int n1 = 1 + static_cast<int>(rng.below(200));
    const int n2 = 1 + static_cast<int>(rng.below(200));
    int k1, k2;
    if (rng.below(10) == 0) {
      // Force a degenerate pool: all successes or all failures.
      const bool all = rng.below(2) == 0;
      k1 = all ? n1 : 0;
      k2 = all ? n2 : 0;
    } else {
      k1 = static_cast<int>(rng.below(static_cast<std::uint64_t>(n1) + 1));
      k2 = static_cast<int>(rng.below(static_cast<std::uint64_t>(n2) + 1));
    }
    const double p1 = static_cast<double>(k1) / n1;
    const double p2 = static_cast<double>(k2) / n2;

    const ZTestResult ab = two_prop_z(p1, n1, p2, n2);
    const ZTestResult ba = two_prop_z(p2, n2, p1, n1);

    // Antisymmetry, bit for bit.
    CHECK(ab.z == -ba.z);
    CHECK(ab.p_value == ba.p_value);
    CHECK(ab.significant == ba.significant);
    CHECK(ab.direction == -ba.direction);

    CHECK(ab.p_value >= 0.0);
    CHECK(ab.p_value <= 1.0);
    CHECK(ab.significant == (ab.p_value < 0.05));

    if ((k1 == n1 && k2 == n2) || (k1 == 0 && k2 == 0)) {
      ++degenerate_seen;
      CHECK(ab.z == 0.0);
      CHECK(ab.p_value == 1.0);
      CHECK_FALSE(ab.significant);
    }
    if (k1 == k2 && n1 == n2) {
      CHECK(ab.z == 0.0);
      CHECK_FALSE(ab.significant);
    }
    if (ab.significant) ++significant_seen;
  }
  CHECK(degenerate_seen > 500);
  CHECK(significant_seen > 1000);
}

TEST_CASE("the z-test rejects malformed samples") {
  CHECK_THROWS_AS(two_prop_z(0.5, 0, 0.5, 10), Error);
  CHECK_THROWS_AS(two_prop_z(0.5, 10, 0.5, -1), Error);
  CHECK_THROWS_AS(two_prop_z(-0.1, 10, 0.5, 10), Error);
  CHECK_THROWS_AS(two_prop_z(0.5, 10, 1.1, 10), Error);
  try {
    two_prop_z(0.5, 0, 0.5, 10);
  } catch (const Error& error) {
    CHECK(error.code() == ErrorCode::bad_sample);
  }
}

TEST_CASE("normal_cdf is accurate and symmetric") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_cdf(1.959963985) == doctest::Approx(0.975).epsilon(1e-9));
  CHECK(normal_cdf(-1.959963985) == doctest::Approx(0.025).epsilon(1e-9));
  CHECK(normal_cdf(6.0) ==
        doctest::Approx(1.0 - 9.865876450377018e-10).epsilon(1e-12));
  for (double x = -8.0; x <= 8.0; x += 0.25) {
    CHECK(normal_cdf(x) + normal_cdf(-x) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("real noisy trials produce correction events") {
  const EnvSpec env = load_bundled("cube_easy");
  LoopConfig config;
  config.mode = LoopConfig::Mode::closed_loop;
  config.control_horizon = 2;

  int pos_opportunities = 0;
  int pos_corrections = 0;
  int neg_corrections = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    ErrorModel model;
    model.p_log = 1.0;  // every fresh plan carries one adjacent swap
    model.memoryful = false;
    model.seed = seed;
    NoisyAgent agent(model);
    const TrialTrace trace = run_trial(env, agent, config, seed);
    const TrialMetrics metrics = compute_trial_metrics(env, trace);
    pos_opportunities += metrics.pos_opportunities;
    pos_corrections += metrics.pos_corrections;
    neg_corrections += metrics.neg_corrections;
    CHECK(metrics.valid);
  }
  CHECK(pos_opportunities > 0);
  CHECK(pos_corrections > 0);
  CHECK(neg_corrections > 0);
}
