#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "planbench/agents.hpp"
#include "planbench/env.hpp"

namespace planbench {

enum class HorizonSetting { short_h, half_h, full_h };

// short -> 2; half -> ceil(k/2); full -> k.
int control_horizon_for(HorizonSetting setting, int k);

struct LoopConfig {
  enum class Mode { open_loop, closed_loop };
  enum class InitialPlanSource { fresh, shared_open_loop };

  Mode mode = Mode::open_loop;
  int control_horizon = 1;   // closed-loop only
  bool warm_start = true;    // closed-loop only
  // 0 means "use the standard rule": 1 for open-loop, floor(2k / N) for
  // closed-loop.
  int query_budget = 0;
  // shared_open_loop makes iteration 0 reuse a stored open-loop outcome for
  // this env and seed instead of a fresh agent call.
  InitialPlanSource initial_plan_source = InitialPlanSource::fresh;

  bool operator==(const LoopConfig&) const = default;
};

int query_budget_for(const LoopConfig& config, int k);

struct IterationRecord {
  int query_index = 0;  // cumulative queries consumed once this plan landed
  PlanReason reason = PlanReason::initial;
  PlanResponse response;
  AgentError error = AgentError::none;
  std::string error_message;
  int queries_consumed = 1;
  std::optional<WarmStart> warm_start;  // payload handed to the agent
  // count_violations over realized events extended with the events this
  // plan's places would produce; the PCR/NCR inputs.
  int violations = 0;
  std::vector<ActionStatus> executed;  // statuses of this plan's actions
};

enum class Termination {
  task_complete,
  budget_exhausted,
  plan_exhausted,
  agent_error,
};

const char* to_string(Termination termination);

struct TrialTrace {
  std::string env_name;
  std::uint64_t world_seed = 0;
  LoopConfig config;
  std::vector<IterationRecord> iterations;
  std::vector<PlacementEvent> events;  // realized placements, in order
  World final_world;
  Termination terminated_by = Termination::plan_exhausted;
  int queries_used = 0;
  bool goal_achieved = false;
  bool logic_satisfied = false;  // is_satisfied over realized events
};

// Events the plan's place actions would realize, appended to `base`.
// Destinations are computed geometrically; unknown objects yield events with
// destination none.
std::vector<PlacementEvent> extend_with_plan_events(
    const EnvSpec& env, const World& world,
    std::vector<PlacementEvent> base, const std::vector<Action>& plan);

// Runs one trial.  With initial_plan_source == shared_open_loop the caller
// must pass `shared_initial` (the stored open-loop outcome for this env and
// seed); it is installed as iteration 0 and still counts its recorded query
// cost against the budget.
TrialTrace run_trial(const EnvSpec& env, PlannerAgent& agent,
                     const LoopConfig& config, std::uint64_t world_seed,
                     const PlanOutcome* shared_initial = nullptr);

}  // namespace planbench
