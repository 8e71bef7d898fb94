#include "planbench/agents.hpp"

#include <algorithm>
#include <set>

namespace planbench {

namespace {

// Intermediate plan form: one step per object move.  `place_only` marks the
// held object, whose pick already happened.
struct PlanStep {
  std::string obj;
  Pose2D pose;
  bool place_only = false;
};

struct Workload {
  std::vector<std::string> plannable;  // need (re)placement; held object first
  std::vector<std::string> done;       // already in their goal region
  std::vector<std::string> stuck;      // in a wrong goal region; pick fails
};

Workload classify(const EnvSpec& env, const World& world) {
  Workload out;
  for (const ObjectSpec& spec : env.roster) {
    if (world.is_held(spec.name)) continue;  // inserted at the front below
    const Region* region = world.current_region_of(spec.name);
    if (region == nullptr) {
      out.plannable.push_back(spec.name);
    } else if (region->kind == env.goal.at(spec.name)) {
      out.done.push_back(spec.name);
    } else {
      out.stuck.push_back(spec.name);
    }
  }
  if (world.held.has_value()) {
    out.plannable.insert(out.plannable.begin(), *world.held);
  }
  return out;
}

// Hands out collision-free goal poses from the region slot grid.  A slot is
// burned when it clashes with any on-table object (conservative: objects
// about to move still block their current spot) or a previously reserved
// target.
class PoseReserver {
 public:
  PoseReserver(const EnvSpec& env, const World& world)
      : env_(env), world_(world) {}

  std::optional<Pose2D> reserve(const std::string& obj) {
    const ObjectSpec* spec = env_.find_object(obj);
    if (spec == nullptr) return std::nullopt;
    const RegionKind kind = env_.goal.at(obj);
    for (const Pose2D& slot : slots_for(kind)) {
      if (blocked(slot, spec->footprint, obj)) continue;
      reserved_.emplace_back(slot, spec->footprint);
      return slot;
    }
    return std::nullopt;
  }

  // Marks a pose as claimed without picking it (kept warm-start actions).
  void block(const std::string& obj, const Pose2D& pose) {
    if (const ObjectSpec* spec = env_.find_object(obj)) {
      reserved_.emplace_back(pose, spec->footprint);
    }
  }

 private:
  const std::vector<Pose2D>& slots_for(RegionKind kind) {
    auto it = slot_cache_.find(kind);
    if (it != slot_cache_.end()) return it->second;
    // Pitch the grid for the largest object headed to this kind, so the
    // same layout works for every placement order.
    double max_cr = 0.0;
    for (const ObjectSpec& spec : env_.roster) {
      if (env_.goal.at(spec.name) == kind) {
        max_cr = std::max(max_cr, spec.footprint.circumradius());
      }
    }
    std::vector<Pose2D> slots;
    for (const Region& region : env_.regions) {
      if (region.kind != kind) continue;
      const auto part = region_slots(region, max_cr);
      slots.insert(slots.end(), part.begin(), part.end());
    }
    return slot_cache_.emplace(kind, std::move(slots)).first->second;
  }

  bool blocked(const Pose2D& slot, const Footprint& footprint,
               const std::string& obj) const {
    for (const auto& [name, state] : world_.objects) {
      if (name == obj || !state.on_table) continue;
      if (shapes_overlap(slot, footprint, state.pose, state.footprint)) {
        return true;
      }
    }
    for (const auto& [pose, fp] : reserved_) {
      if (shapes_overlap(slot, footprint, pose, fp)) return true;
    }
    return false;
  }

  const EnvSpec& env_;
  const World& world_;
  std::map<RegionKind, std::vector<Pose2D>> slot_cache_;
  std::vector<std::pair<Pose2D, Footprint>> reserved_;
};

PlacementEvent goal_event(const EnvSpec& env, const std::string& obj,
                          int index) {
  PlacementEvent event;
  event.obj = obj;
  event.index = index;
  const auto it = env.goal.find(obj);
  if (it != env.goal.end()) {
    event.dest_kind = it->second;
    if (const Region* region = env.region_of_kind(it->second)) {
      event.dest_region = region->name;
    }
  }
  return event;
}

// Constraint-respecting order over `objects`, given realized events.  The
// held object, when present, is pinned to the front (nothing else can be
// picked while the gripper is full).  Falls back to the listing order when
// no zero-violation completion exists.
std::vector<std::string> choose_order(const EnvSpec& env,
                                      const std::vector<PlacementEvent>& events,
                                      const std::vector<std::string>& objects,
                                      const std::optional<std::string>& held,
                                      bool* found) {
  if (objects.empty()) {
    *found = true;  // nothing to order
    return {};
  }
  *found = false;
  if (held.has_value() && !objects.empty() && objects.front() == *held) {
    std::vector<PlacementEvent> prefix = events;
    prefix.push_back(
        goal_event(env, *held, static_cast<int>(prefix.size())));
    std::vector<std::string> rest(objects.begin() + 1, objects.end());
    if (auto order = find_satisfying_order(env, prefix, rest)) {
      *found = true;
      order->insert(order->begin(), *held);
      return *order;
    }
    return objects;
  }
  if (auto order = find_satisfying_order(env, events, objects)) {
    *found = true;
    return *order;
  }
  return objects;
}

struct OracleBuild {
  std::vector<PlanStep> steps;
  bool order_found = false;
};

OracleBuild build_oracle_steps(const PlanRequest& request) {
  const EnvSpec& env = *request.env;
  const World& world = *request.world;
  OracleBuild out;
  const Workload load = classify(env, world);
  const std::vector<std::string> order = choose_order(
      env, request.events, load.plannable, world.held, &out.order_found);
  PoseReserver reserver(env, world);
  for (const std::string& obj : order) {
    const auto pose = reserver.reserve(obj);
    if (!pose) continue;  // region momentarily full; leave uncovered
    PlanStep step;
    step.obj = obj;
    step.pose = *pose;
    step.place_only = world.is_held(obj);
    out.steps.push_back(std::move(step));
  }
  return out;
}

std::vector<Action> flatten(const std::vector<PlanStep>& steps) {
  std::vector<Action> plan;
  for (const PlanStep& step : steps) {
    if (!step.place_only) {
      Action pick;
      pick.kind = Action::Kind::pick;
      pick.obj = step.obj;
      plan.push_back(std::move(pick));
    }
    Action place;
    place.kind = Action::Kind::place;
    place.obj = step.obj;
    place.x = step.pose.x;
    place.y = step.pose.y;
    place.theta = step.pose.theta;
    plan.push_back(std::move(place));
  }
  return plan;
}

constexpr const char* kOracleReasoning =
    "Deterministic search: constraint-satisfying order over the remaining "
    "objects, collision-free poses from the region slot grid.";

}  // namespace

const char* to_string(PlanReason reason) {
  switch (reason) {
    case PlanReason::initial: return "initial";
    case PlanReason::horizon_elapsed: return "horizon_elapsed";
    case PlanReason::action_failed: return "action_failed";
  }
  return "unknown";
}

const char* to_string(ActionStatus::Outcome outcome) {
  switch (outcome) {
    case ActionStatus::Outcome::success: return "success";
    case ActionStatus::Outcome::failure: return "failure";
    case ActionStatus::Outcome::not_executed: return "not_executed";
  }
  return "unknown";
}

const char* to_string(AgentError error) {
  switch (error) {
    case AgentError::none: return "none";
    case AgentError::unsatisfiable: return "unsatisfiable";
    case AgentError::transport: return "transport";
    case AgentError::malformed_output: return "malformed_output";
    case AgentError::unparseable_action: return "unparseable_action";
  }
  return "unknown";
}

PlanOutcome OracleAgent::plan(const PlanRequest& request) {
  PlanOutcome outcome;
  const OracleBuild build = build_oracle_steps(request);
  if (!build.order_found && request.reason == PlanReason::initial &&
      request.events.empty()) {
    outcome.error = AgentError::unsatisfiable;
    outcome.message =
        "no placement order satisfies the constraint set of '" +
        request.env->name + "'";
    return outcome;
  }
  outcome.response.reasoning = kOracleReasoning;
  outcome.response.plan = flatten(build.steps);
  return outcome;
}

NoisyAgent::NoisyAgent(const ErrorModel& model)
    : model_(model), rng_(model.seed) {}

std::string NoisyAgent::name() const {
  return model_.memoryful ? "noisy" : "noisy-memoryless";
}

PlanOutcome NoisyAgent::plan(const PlanRequest& request) {
  const EnvSpec& env = *request.env;
  const World& world = *request.world;

  // Corruption of freshly planned steps.  Draw order is fixed: one logical
  // draw (plus the pair index when triggered), then per-place geometric
  // draws in plan order.
  auto corrupt_order = [&](std::vector<PlanStep>& steps) {
    if (steps.size() >= 2 && rng_.uniform01() < model_.p_log) {
      const std::size_t i =
          static_cast<std::size_t>(rng_.below(steps.size() - 1));
      std::swap(steps[i], steps[i + 1]);
    }
  };
  auto corrupt_poses = [&](std::vector<PlanStep>& steps) {
    for (PlanStep& step : steps) {
      if (rng_.uniform01() < model_.p_geo) {
        step.pose.x += rng_.uniform(-model_.d, model_.d);
        step.pose.y += rng_.uniform(-model_.d, model_.d);
      }
    }
  };

  PlanOutcome outcome;
  outcome.response.raw.clear();

  if (!model_.memoryful || !request.warm_start.has_value()) {
    const OracleBuild build = build_oracle_steps(request);
    if (!build.order_found && request.reason == PlanReason::initial &&
        request.events.empty()) {
      outcome.error = AgentError::unsatisfiable;
      outcome.message = "no satisfying placement order for '" + env.name + "'";
      return outcome;
    }
    std::vector<PlanStep> steps = build.steps;
    corrupt_order(steps);
    corrupt_poses(steps);
    outcome.response.reasoning = "Fresh plan with injected errors.";
    outcome.response.plan = flatten(steps);
    return outcome;
  }

  // Memoryful replan: keep the unexecuted suffix verbatim (persisting any
  // earlier corruption), repair the failed action, then cover whatever the
  // kept actions miss.  Only newly planned steps get fresh corruption.
  const WarmStart& warm = *request.warm_start;
  const Workload load = classify(env, world);
  auto plannable = [&](const std::string& obj) {
    return std::find(load.plannable.begin(), load.plannable.end(), obj) !=
           load.plannable.end();
  };

  const ActionStatus* failed = nullptr;
  std::vector<const Action*> suffix;
  for (const ActionStatus& status : warm.prev_plan) {
    if (status.outcome == ActionStatus::Outcome::failure) {
      failed = &status;
    } else if (status.outcome == ActionStatus::Outcome::not_executed) {
      suffix.push_back(&status.action);
    }
  }

  PoseReserver reserver(env, world);
  std::vector<PlanStep> kept;
  for (std::size_t i = 0; i < suffix.size();) {
    const Action& action = *suffix[i];
    if (action.kind == Action::Kind::pick &&
        i + 1 < suffix.size() &&
        suffix[i + 1]->kind == Action::Kind::place &&
        suffix[i + 1]->obj == action.obj) {
      if (plannable(action.obj) && !world.is_held(action.obj)) {
        PlanStep step;
        step.obj = action.obj;
        step.pose = {suffix[i + 1]->x, suffix[i + 1]->y, suffix[i + 1]->theta};
        kept.push_back(step);
        reserver.block(step.obj, step.pose);
      }
      i += 2;
    } else if (action.kind == Action::Kind::place &&
               world.is_held(action.obj)) {
      PlanStep step;
      step.obj = action.obj;
      step.pose = {action.x, action.y, action.theta};
      step.place_only = true;
      kept.push_back(step);
      reserver.block(step.obj, step.pose);
      ++i;
    } else {
      ++i;  // orphaned action; the coverage pass re-plans its object
    }
  }

  // A failed place leaves its object in the gripper; give it a fresh pose
  // and put it at the front of the new plan.
  std::vector<PlanStep> fresh_front;
  if (failed != nullptr && failed->action.kind == Action::Kind::place &&
      world.is_held(failed->action.obj)) {
    const bool already_covered = std::any_of(
        kept.begin(), kept.end(),
        [&](const PlanStep& s) { return s.obj == failed->action.obj; });
    if (!already_covered) {
      if (const auto pose = reserver.reserve(failed->action.obj)) {
        PlanStep step;
        step.obj = failed->action.obj;
        step.pose = *pose;
        step.place_only = true;
        fresh_front.push_back(step);
      }
    }
  }

  std::set<std::string> covered;
  for (const PlanStep& step : fresh_front) covered.insert(step.obj);
  for (const PlanStep& step : kept) covered.insert(step.obj);
  std::vector<std::string> uncovered;
  for (const std::string& obj : load.plannable) {
    if (!covered.contains(obj)) uncovered.push_back(obj);
  }

  std::vector<PlanStep> appended;
  if (!uncovered.empty()) {
    // Order the additions against the events the kept plan implies.
    std::vector<PlacementEvent> implied = request.events;
    auto imply = [&](const PlanStep& step) {
      PlacementEvent event;
      event.obj = step.obj;
      event.index = static_cast<int>(implied.size());
      if (const ObjectSpec* spec = env.find_object(step.obj)) {
        if (const Region* dest =
                world.destination_of(spec->footprint, step.pose)) {
          event.dest_region = dest->name;
          event.dest_kind = dest->kind;
        }
      }
      implied.push_back(std::move(event));
    };
    for (const PlanStep& step : fresh_front) imply(step);
    for (const PlanStep& step : kept) imply(step);
    std::vector<std::string> order;
    if (auto found = find_satisfying_order(env, implied, uncovered)) {
      order = *found;
    } else {
      order = uncovered;
    }
    for (const std::string& obj : order) {
      const auto pose = reserver.reserve(obj);
      if (!pose) continue;
      PlanStep step;
      step.obj = obj;
      step.pose = *pose;
      appended.push_back(step);
    }
  }

  corrupt_poses(fresh_front);
  corrupt_order(appended);
  corrupt_poses(appended);

  std::vector<PlanStep> steps = fresh_front;
  steps.insert(steps.end(), kept.begin(), kept.end());
  steps.insert(steps.end(), appended.begin(), appended.end());

  outcome.response.reasoning = "Kept the unexecuted suffix; repaired the "
                               "failure and covered missing objects.";
  outcome.response.plan = flatten(steps);
  return outcome;
}

WarmStart build_warm_start_context(const std::vector<Action>& prev_plan,
                                   const std::vector<ActionStatus>& executed,
                                   int n_steps_replan) {
  WarmStart warm;
  warm.n_steps_replan = n_steps_replan;
  warm.prev_plan.reserve(prev_plan.size());
  for (std::size_t i = 0; i < prev_plan.size(); ++i) {
    if (i < executed.size()) {
      warm.prev_plan.push_back(executed[i]);
    } else {
      ActionStatus status;
      status.action = prev_plan[i];
      status.outcome = ActionStatus::Outcome::not_executed;
      warm.prev_plan.push_back(std::move(status));
    }
  }
  return warm;
}

}  // namespace planbench
