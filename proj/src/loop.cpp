#include "planbench/loop.hpp"

#include <algorithm>

#include "planbench/util.hpp"

namespace planbench {

namespace {

bool task_complete(const EnvSpec& env, const World& world,
                   const std::vector<PlacementEvent>& events) {
  return goal_achieved(env, world) &&
         is_satisfied(env.constraints, events);
}

}  // namespace

int control_horizon_for(HorizonSetting setting, int k) {
  if (k < 1) {
    throw Error(ErrorCode::invalid_argument, "task length must be >= 1");
  }
  switch (setting) {
    case HorizonSetting::short_h: return 2;
    case HorizonSetting::half_h: return (k + 1) / 2;
    case HorizonSetting::full_h: return k;
  }
  throw Error(ErrorCode::invalid_argument, "bad horizon setting");
}

int query_budget_for(const LoopConfig& config, int k) {
  if (config.query_budget > 0) return config.query_budget;
  if (config.mode == LoopConfig::Mode::open_loop) return 1;
  if (config.control_horizon < 1) {
    throw Error(ErrorCode::invalid_argument, "control horizon must be >= 1");
  }
  return std::max(1, (2 * k) / config.control_horizon);
}

const char* to_string(Termination termination) {
  switch (termination) {
    case Termination::task_complete: return "task_complete";
    case Termination::budget_exhausted: return "budget_exhausted";
    case Termination::plan_exhausted: return "plan_exhausted";
    case Termination::agent_error: return "agent_error";
  }
  return "unknown";
}

std::vector<PlacementEvent> extend_with_plan_events(
    const EnvSpec& env, const World& world,
    std::vector<PlacementEvent> base, const std::vector<Action>& plan) {
  for (const Action& action : plan) {
    if (action.kind != Action::Kind::place) continue;
    PlacementEvent event;
    event.obj = action.obj;
    event.index = static_cast<int>(base.size());
    if (const ObjectSpec* spec = env.find_object(action.obj)) {
      const Pose2D pose = {action.x, action.y,
                           normalize_angle(action.theta)};
      if (const Region* dest = world.destination_of(spec->footprint, pose)) {
        event.dest_region = dest->name;
        event.dest_kind = dest->kind;
      }
    }
    base.push_back(std::move(event));
  }
  return base;
}

TrialTrace run_trial(const EnvSpec& env, PlannerAgent& agent,
                     const LoopConfig& config, std::uint64_t world_seed,
                     const PlanOutcome* shared_initial) {
  const bool use_shared = config.initial_plan_source ==
                          LoopConfig::InitialPlanSource::shared_open_loop;
  if (use_shared && shared_initial == nullptr) {
    throw Error(ErrorCode::invalid_argument,
                "shared_open_loop requires a stored initial outcome");
  }

  TrialTrace trace;
  trace.env_name = env.name;
  trace.world_seed = world_seed;
  trace.config = config;

  World world = sample_initial_state(env, world_seed);
  const int budget = query_budget_for(config, env.k());
  int queries = 0;
  std::vector<PlacementEvent> events;

  std::vector<Action> plan;
  std::size_t cursor = 0;
  int since_replan = 0;

  auto finish = [&](Termination why) {
    trace.terminated_by = why;
    trace.events = events;
    trace.final_world = world;
    trace.queries_used = queries;
    trace.goal_achieved = goal_achieved(env, world);
    trace.logic_satisfied = is_satisfied(env.constraints, events);
    return trace;
  };

  // Issues one planning query (or consumes the shared initial outcome) and
  // installs the resulting plan.  Returns false on agent error.
  auto plan_once = [&](PlanReason reason,
                       std::optional<WarmStart> warm) -> bool {
    PlanOutcome outcome;
    if (reason == PlanReason::initial && use_shared) {
      outcome = *shared_initial;
    } else {
      PlanRequest request;
      request.env = &env;
      request.world = &world;
      request.events = events;
      request.warm_start = warm;
      request.reason = reason;
      request.attempts_allowed = budget - queries;
      outcome = agent.plan(request);
    }
    const int consumed =
        std::clamp(outcome.queries_consumed, 1, budget - queries);
    queries += consumed;

    IterationRecord record;
    record.query_index = queries;
    record.reason = reason;
    record.response = outcome.response;
    record.error = outcome.error;
    record.error_message = outcome.message;
    record.queries_consumed = consumed;
    record.warm_start = std::move(warm);
    record.violations = static_cast<int>(count_violations(
        env.constraints,
        extend_with_plan_events(env, world, events, outcome.response.plan)));
    trace.iterations.push_back(std::move(record));

    if (!outcome.ok()) return false;
    plan = outcome.response.plan;
    cursor = 0;
    since_replan = 0;
    return true;
  };

  auto replan = [&](PlanReason reason) -> bool {
    std::optional<WarmStart> warm;
    if (config.warm_start) {
      warm = build_warm_start_context(plan, trace.iterations.back().executed,
                                      config.control_horizon);
    }
    return plan_once(reason, std::move(warm));
  };

  if (!plan_once(PlanReason::initial, std::nullopt)) {
    return finish(Termination::agent_error);
  }

  while (true) {
    if (task_complete(env, world, events)) {
      return finish(Termination::task_complete);
    }
    if (cursor >= plan.size()) {
      // Plan ran dry before completion.  Closed-loop replans while budget
      // remains; otherwise the trial is over.
      if (config.mode == LoopConfig::Mode::closed_loop && queries < budget) {
        if (!replan(PlanReason::horizon_elapsed)) {
          return finish(Termination::agent_error);
        }
        continue;
      }
      return finish(Termination::plan_exhausted);
    }

    const Action action = plan[cursor];
    ExecResult result;
    if (action.kind == Action::Kind::pick) {
      result = world.pick(action.obj);
    } else {
      result = world.place(action.obj,
                           {action.x, action.y, action.theta});
    }
    ActionStatus status;
    status.action = action;
    status.outcome = result.ok() ? ActionStatus::Outcome::success
                                 : ActionStatus::Outcome::failure;
    status.reason = result.fail;
    trace.iterations.back().executed.push_back(status);
    ++cursor;

    if (!result.ok()) {
      if (config.mode == LoopConfig::Mode::closed_loop && queries < budget) {
        if (!replan(PlanReason::action_failed)) {
          return finish(Termination::agent_error);
        }
        continue;
      }
      return finish(Termination::budget_exhausted);
    }

    if (action.kind == Action::Kind::place) {
      PlacementEvent event;
      event.obj = action.obj;
      event.dest_region = result.dest_region;
      event.dest_kind = result.dest_kind;
      event.index = static_cast<int>(events.size());
      events.push_back(std::move(event));
    }
    ++since_replan;

    if (task_complete(env, world, events)) {
      return finish(Termination::task_complete);
    }
    if (config.mode == LoopConfig::Mode::closed_loop &&
        since_replan >= config.control_horizon && queries < budget) {
      // Budget exhausted at the horizon is not fatal: the current plan keeps
      // executing, it just can no longer be revised.
      if (!replan(PlanReason::horizon_elapsed)) {
        return finish(Termination::agent_error);
      }
    }
  }
}

}  // namespace planbench
