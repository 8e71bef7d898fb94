#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "planbench/actions.hpp"
#include "planbench/env.hpp"
#include "planbench/world.hpp"

namespace planbench {

enum class PlanReason { initial, horizon_elapsed, action_failed };

const char* to_string(PlanReason reason);

// Per-action execution status, also used for the warm-start payload where
// trailing actions carry `not_executed`.
struct ActionStatus {
  enum class Outcome { success, failure, not_executed };

  Action action;
  Outcome outcome = Outcome::not_executed;
  FailReason reason = FailReason::none;  // set when outcome == failure

  bool operator==(const ActionStatus&) const = default;
};

const char* to_string(ActionStatus::Outcome outcome);

// Previous plan plus per-action statuses handed to a replanning agent.
struct WarmStart {
  std::vector<ActionStatus> prev_plan;
  int n_steps_replan = 0;  // control horizon, for prompt substitution

  bool operator==(const WarmStart&) const = default;
};

struct PlanRequest {
  const EnvSpec* env = nullptr;
  const World* world = nullptr;
  std::vector<PlacementEvent> events;  // realized so far
  std::optional<WarmStart> warm_start;
  PlanReason reason = PlanReason::initial;
  // Upper bound on the queries the agent may burn on this request (covers
  // parse-failure retries for remote agents).
  int attempts_allowed = 1;
};

struct PlanResponse {
  std::string reasoning;
  std::vector<Action> plan;
  std::string raw;  // verbatim model output; empty for scripted agents

  bool operator==(const PlanResponse&) const = default;
};

enum class AgentError {
  none,
  unsatisfiable,
  transport,
  malformed_output,
  unparseable_action,
};

const char* to_string(AgentError error);

struct PlanOutcome {
  PlanResponse response;
  AgentError error = AgentError::none;
  std::string message;
  int queries_consumed = 1;

  bool ok() const { return error == AgentError::none; }
};

class PlannerAgent {
 public:
  virtual ~PlannerAgent() = default;
  virtual PlanOutcome plan(const PlanRequest& request) = 0;
  virtual std::string name() const = 0;
};

// Ground-truth agent: backtracking search for a constraint-satisfying order
// over the not-yet-done objects, poses from the shared slot grid, plans that
// are executable by construction.  Deterministic and stateless.
class OracleAgent : public PlannerAgent {
 public:
  PlanOutcome plan(const PlanRequest& request) override;
  std::string name() const override { return "oracle"; }
};

// Error injection knobs for the scripted noisy agent.
struct ErrorModel {
  double p_geo = 0.0;     // chance of perturbing each place pose
  double d = 0.04;        // perturbation magnitude: offset in [-d, d]^2
  double p_log = 0.0;     // chance of swapping one adjacent pair per plan
  bool memoryful = true;  // keep the unexecuted suffix on replans
  std::uint64_t seed = 0;
};

// Oracle plus injected errors.  Memoryless mode replans from scratch and
// corrupts the fresh plan on every call; memoryful mode keeps the unexecuted
// suffix verbatim (so earlier corruption persists) and only newly planned
// actions receive fresh corruption.
class NoisyAgent : public PlannerAgent {
 public:
  explicit NoisyAgent(const ErrorModel& model);

  PlanOutcome plan(const PlanRequest& request) override;
  std::string name() const override;

 private:
  ErrorModel model_;
  Rng rng_;
};

// Tags the previous plan with execution statuses: `executed` covers the
// leading actions that ran (successes plus at most one trailing failure);
// the rest of the plan is marked not_executed.
WarmStart build_warm_start_context(const std::vector<Action>& prev_plan,
                                   const std::vector<ActionStatus>& executed,
                                   int n_steps_replan);

}  // namespace planbench
