#include "planbench/world.hpp"

#include <cmath>

#include "planbench/env.hpp"
#include "planbench/util.hpp"

namespace planbench {

namespace {

constexpr int kMaxSampleAttempts = 10000;

bool footprint_in_workspace(const Aabb& ws, const Footprint& fp,
                            const Pose2D& pose) {
  const Pose2D center = {(ws.min_x + ws.max_x) / 2.0,
                         (ws.min_y + ws.max_y) / 2.0, 0.0};
  const Footprint box = Footprint::rect((ws.max_x - ws.min_x) / 2.0,
                                        (ws.max_y - ws.min_y) / 2.0);
  return shape_contains(center, box, pose, fp);
}

}  // namespace

const char* to_string(RegionKind kind) {
  switch (kind) {
    case RegionKind::staging: return "staging";
    case RegionKind::basket: return "basket";
    case RegionKind::plate: return "plate";
  }
  return "unknown";
}

std::optional<RegionKind> region_kind_from_string(std::string_view name) {
  if (name == "staging") return RegionKind::staging;
  if (name == "basket") return RegionKind::basket;
  if (name == "plate") return RegionKind::plate;
  return std::nullopt;
}

const char* to_string(FailReason reason) {
  switch (reason) {
    case FailReason::none: return "none";
    case FailReason::unknown_object: return "unknown_object";
    case FailReason::gripper_occupied: return "gripper_occupied";
    case FailReason::already_placed: return "already_placed";
    case FailReason::not_held: return "not_held";
    case FailReason::out_of_workspace: return "out_of_workspace";
    case FailReason::collision: return "collision";
  }
  return "unknown";
}

ExecResult World::pick(const std::string& obj) {
  ExecResult result;
  auto it = objects.find(obj);
  if (it == objects.end()) {
    result.fail = FailReason::unknown_object;
    return result;
  }
  if (held.has_value()) {
    result.fail = FailReason::gripper_occupied;
    return result;
  }
  if (current_region_of(obj) != nullptr) {
    result.fail = FailReason::already_placed;
    return result;
  }
  it->second.on_table = false;
  held = obj;
  return result;
}

ExecResult World::place(const std::string& obj, const Pose2D& pose) {
  ExecResult result;
  auto it = objects.find(obj);
  if (it == objects.end()) {
    result.fail = FailReason::unknown_object;
    return result;
  }
  if (!is_held(obj)) {
    result.fail = FailReason::not_held;
    return result;
  }
  const Pose2D target = normalized(pose);
  // The workspace interval is open: a pose on the boundary is already out,
  // and the whole footprint must stay inside.
  const bool center_inside =
      target.x > workspace.min_x && target.x < workspace.max_x &&
      target.y > workspace.min_y && target.y < workspace.max_y;
  if (!center_inside ||
      !footprint_in_workspace(workspace, it->second.footprint, target)) {
    result.fail = FailReason::out_of_workspace;
    return result;
  }
  for (const auto& [name, state] : objects) {
    if (name == obj || !state.on_table) continue;
    if (shapes_overlap(target, it->second.footprint, state.pose,
                       state.footprint)) {
      result.fail = FailReason::collision;
      return result;
    }
  }
  it->second.pose = target;
  it->second.on_table = true;
  held.reset();
  if (const Region* dest = destination_of(it->second.footprint, target)) {
    result.dest_region = dest->name;
    result.dest_kind = dest->kind;
  }
  return result;
}

const Region* World::destination_of(const Footprint& footprint,
                                    const Pose2D& pose) const {
  const Region* found = nullptr;
  for (const Region& region : regions) {
    if (region.kind == RegionKind::staging) continue;
    if (shape_contains(region.pose, region.shape, pose, footprint)) {
      if (found != nullptr) return nullptr;  // ambiguous: treat as none
      found = &region;
    }
  }
  return found;
}

const Region* World::current_region_of(const std::string& obj) const {
  auto it = objects.find(obj);
  if (it == objects.end() || !it->second.on_table) return nullptr;
  return destination_of(it->second.footprint, it->second.pose);
}

bool World::any_overlap() const {
  for (auto a = objects.begin(); a != objects.end(); ++a) {
    if (!a->second.on_table) continue;
    for (auto b = std::next(a); b != objects.end(); ++b) {
      if (!b->second.on_table) continue;
      if (shapes_overlap(a->second.pose, a->second.footprint, b->second.pose,
                         b->second.footprint)) {
        return true;
      }
    }
  }
  return false;
}

const Region* World::find_region(std::string_view name) const {
  for (const Region& region : regions) {
    if (region.name == name) return &region;
  }
  return nullptr;
}

World sample_initial_state(const EnvSpec& env, std::uint64_t seed) {
  const Region* staging = env.region_of_kind(RegionKind::staging);
  if (staging == nullptr) {
    throw Error(ErrorCode::bad_config,
                "environment '" + env.name + "' has no staging region");
  }
  World world;
  world.workspace = env.workspace;
  world.regions = env.regions;

  Rng rng(seed);
  // Sample a pose inside the staging bounding box, accept when the footprint
  // is fully inside the region and clear of previously placed objects.
  const double cr_limit = staging->shape.circumradius();
  for (const ObjectSpec& spec : env.roster) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxSampleAttempts; ++attempt) {
      Pose2D pose;
      pose.x = staging->pose.x + rng.uniform(-cr_limit, cr_limit);
      pose.y = staging->pose.y + rng.uniform(-cr_limit, cr_limit);
      pose.theta = normalize_angle(rng.uniform(-3.14159265358979323846,
                                               3.14159265358979323846));
      if (!shape_contains(staging->pose, staging->shape, pose,
                          spec.footprint)) {
        continue;
      }
      bool clear = true;
      for (const auto& [name, state] : world.objects) {
        if (shapes_overlap(pose, spec.footprint, state.pose,
                           state.footprint)) {
          clear = false;
          break;
        }
      }
      if (!clear) continue;
      world.objects.emplace(spec.name,
                            ObjectState{spec.footprint, pose, true});
      placed = true;
      break;
    }
    if (!placed) {
      throw Error(ErrorCode::bad_sample,
                  "could not sample a collision-free start pose for '" +
                      spec.name + "' in environment '" + env.name + "'");
    }
  }
  return world;
}

}  // namespace planbench
