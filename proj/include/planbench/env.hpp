#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "planbench/constraints.hpp"
#include "planbench/world.hpp"

namespace planbench {

struct ObjectSpec {
  std::string name;
  Footprint footprint;
  std::vector<std::string> attributes;  // free-form tags, e.g. fruit, sour

  bool has_attribute(std::string_view tag) const;

  bool operator==(const ObjectSpec&) const = default;
};

// A task environment: table layout, object roster, per-object goal regions,
// and the ordering constraints, plus the natural-language task description
// sent to remote planners.
struct EnvSpec {
  std::string name;
  Aabb workspace;
  Pose2D robot_base;  // recorded for scene descriptions; not simulated
  std::vector<Region> regions;
  std::vector<ObjectSpec> roster;  // listing order is the canonical order
  std::map<std::string, RegionKind> goal;  // required destination per object
  std::vector<Constraint> constraints;
  std::string task_prompt;

  int k() const { return static_cast<int>(roster.size()); }
  const ObjectSpec* find_object(std::string_view obj) const;
  const Region* region_of_kind(RegionKind kind) const;  // first match
};

// Loads and validates an environment description (JSON file; a "prompt_file"
// entry is resolved relative to the file).  Throws Error(bad_config) on any
// inconsistency: unknown identifiers, regions outside the workspace,
// insufficient goal-region capacity, or an unsatisfiable constraint set.
EnvSpec load_env_spec(const std::string& path);

// Same, from an in-memory JSON string (no prompt_file resolution).
EnvSpec env_spec_from_json_text(const std::string& text);

void validate_env_spec(const EnvSpec& env);

// True when every roster object sits fully inside a region of its goal kind
// and no two on-table objects overlap.
bool goal_achieved(const EnvSpec& env, const World& world);

// Like count_violations, but first validates that every event names a roster
// object; throws Error(unknown_object) otherwise.
int count_violations_checked(const EnvSpec& env,
                             std::span<const PlacementEvent> events);

// Builds the event sequence implied by placing the listed objects, in order,
// into their goal regions.
std::vector<PlacementEvent> events_for_order(
    const EnvSpec& env, const std::vector<std::string>& order);

// Number of full-roster placement orders (each object exactly once, into its
// goal region) that satisfy every constraint.  Exhaustive k! sweep; throws
// Error(too_large) for k > 10.  `visit`, when given, receives each
// satisfying order.
long long count_satisfying_orders(
    const EnvSpec& env,
    const std::function<void(const std::vector<std::string>&)>& visit = {});

// Finds an order of `objects` whose goal placements, appended to `prefix`,
// leave zero violations.  Backtracking over the given objects only; returns
// std::nullopt when no such order exists.  Listing order of `objects` breaks
// ties, so results are deterministic.
std::optional<std::vector<std::string>> find_satisfying_order(
    const EnvSpec& env, std::span<const PlacementEvent> prefix,
    const std::vector<std::string>& objects);

// Deterministic grid of placement poses inside the region.  Slots are pitched
// so that objects with circumradius up to `max_circumradius` neither touch
// neighbors nor stick out of the region.  Row-major, bottom row first.
std::vector<Pose2D> region_slots(const Region& region,
                                 double max_circumradius);

}  // namespace planbench
