#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "planbench/geometry.hpp"

namespace planbench {

struct EnvSpec;  // defined in env.hpp

enum class RegionKind { staging, basket, plate };

const char* to_string(RegionKind kind);
std::optional<RegionKind> region_kind_from_string(std::string_view name);

// A named area on the table.  Goal regions (basket, plate) receive objects;
// the staging region is where objects start.
struct Region {
  std::string name;
  RegionKind kind = RegionKind::staging;
  Footprint shape;
  Pose2D pose;

  bool operator==(const Region&) const = default;
};

struct ObjectState {
  Footprint footprint;
  Pose2D pose;
  bool on_table = true;  // false while held by the gripper

  bool operator==(const ObjectState&) const = default;
};

enum class FailReason {
  none,
  unknown_object,
  gripper_occupied,
  already_placed,
  not_held,
  out_of_workspace,
  collision,
};

const char* to_string(FailReason reason);

struct ExecResult {
  FailReason fail = FailReason::none;
  // Goal region the object ended up fully inside, if any (place only).
  std::string dest_region;
  std::optional<RegionKind> dest_kind;

  bool ok() const { return fail == FailReason::none; }
};

// Full simulator state.  Value semantics: copying a World and replaying the
// same commands yields identical states.
class World {
 public:
  Aabb workspace;
  std::vector<Region> regions;
  std::map<std::string, ObjectState> objects;  // keyed by object name
  std::optional<std::string> held;

  bool operator==(const World&) const = default;

  // Picks the object up.  Fails with unknown_object, gripper_occupied, or
  // already_placed (object already inside a goal region); the state is left
  // untouched on failure.
  ExecResult pick(const std::string& obj);

  // Places the held object at the pose (theta is normalized on entry).
  // Fails with not_held / unknown_object, out_of_workspace (pose outside the
  // open workspace interval or footprint crossing the workspace edge), or
  // collision against any on-table object.  On success reports which goal
  // region, if any, now fully contains the object.
  ExecResult place(const std::string& obj, const Pose2D& pose);

  // Goal region fully containing the footprint at this pose; staging does
  // not count, and containment in more than one goal region counts as none.
  const Region* destination_of(const Footprint& footprint,
                               const Pose2D& pose) const;

  // Goal region currently holding the object, if any.
  const Region* current_region_of(const std::string& obj) const;

  bool is_held(const std::string& obj) const {
    return held.has_value() && *held == obj;
  }

  // True when some pair of on-table objects overlaps.
  bool any_overlap() const;

  const Region* find_region(std::string_view name) const;
};

// Draws a start state for the environment: all objects on-table inside the
// staging region, mutually non-overlapping, with uniformly sampled poses.
// Rejection sampling; throws Error(bad_sample) if a draw cannot be found.
World sample_initial_state(const EnvSpec& env, std::uint64_t seed);

}  // namespace planbench
