#include "planbench/env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>
#include "planbench/util.hpp"

namespace planbench {

namespace {

using nlohmann::json;

[[noreturn]] void bad_config(const std::string& message) {
  throw Error(ErrorCode::bad_config, message);
}

Footprint parse_footprint(const json& node) {
  const std::string type = node.at("type").get<std::string>();
  if (type == "rectangle" || type == "rect") {
    return Footprint::rect(node.at("half_x").get<double>(),
                           node.at("half_y").get<double>());
  }
  if (type == "circle") {
    return Footprint::circle(node.at("radius").get<double>());
  }
  bad_config("unknown footprint type '" + type + "'");
}

Pose2D parse_pose(const json& node) {
  Pose2D pose;
  pose.x = node.at("x").get<double>();
  pose.y = node.at("y").get<double>();
  pose.theta = normalize_angle(node.value("theta", 0.0));
  return pose;
}

RegionKind parse_region_kind(const std::string& name) {
  const auto kind = region_kind_from_string(name);
  if (!kind) bad_config("unknown region kind '" + name + "'");
  return *kind;
}

ObjRef parse_ref(const json& node, const std::optional<RegionKind>& fallback) {
  ObjRef ref;
  if (node.is_string()) {
    ref.obj = node.get<std::string>();
    ref.dest = fallback;
    return ref;
  }
  ref.obj = node.at("obj").get<std::string>();
  if (node.contains("dest")) {
    ref.dest = parse_region_kind(node.at("dest").get<std::string>());
  } else {
    ref.dest = fallback;
  }
  return ref;
}

ConstraintAtom parse_atom(const json& node) {
  ConstraintAtom atom;
  const std::string type = node.at("type").get<std::string>();
  std::optional<RegionKind> fallback;
  if (node.contains("dest")) {
    fallback = parse_region_kind(node.at("dest").get<std::string>());
  }
  using Kind = ConstraintAtom::Kind;
  if (type == "placed_after_all") {
    atom.kind = Kind::placed_after_all;
  } else if (type == "placed_before_all") {
    atom.kind = Kind::placed_before_all;
  } else if (type == "adjacent") {
    atom.kind = Kind::adjacent;
  } else if (type == "immediately_after") {
    atom.kind = Kind::immediately_after;
  } else if (type == "not_consecutive") {
    atom.kind = Kind::not_consecutive;
  } else if (type == "not_first") {
    atom.kind = Kind::not_first;
  } else if (type == "not_last") {
    atom.kind = Kind::not_last;
  } else if (type == "no_repeat") {
    atom.kind = Kind::no_repeat;
    return atom;
  } else {
    bad_config("unknown constraint type '" + type + "'");
  }
  atom.subject = parse_ref(node.at("obj"), fallback);
  if (atom.kind == Kind::placed_after_all ||
      atom.kind == Kind::placed_before_all) {
    for (const json& other : node.at("others")) {
      atom.refs.push_back(parse_ref(other, fallback));
    }
    if (atom.refs.empty()) bad_config(type + " needs at least one 'others'");
  } else if (atom.kind == Kind::adjacent ||
             atom.kind == Kind::immediately_after ||
             atom.kind == Kind::not_consecutive) {
    atom.refs.push_back(parse_ref(node.at("other"), fallback));
  }
  return atom;
}

Constraint parse_constraint(const json& node) {
  Constraint constraint;
  constraint.label = node.value("label", std::string{});
  if (node.contains("all_of")) {
    for (const json& part : node.at("all_of")) {
      constraint.atoms.push_back(parse_atom(part));
    }
  } else {
    constraint.atoms.push_back(parse_atom(node));
  }
  if (constraint.atoms.empty()) bad_config("constraint with no atoms");
  return constraint;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::io_error, "cannot read '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// "The unused ingredients should be put into the brown basket ... before
// making the fruit salad": every basket-bound object must be placed (into
// the basket) before each plate-bound object reaches the plate.  One
// countable constraint per excluded object.
std::vector<Constraint> expand_excluded_before_salad(const EnvSpec& env,
                                                     const std::string& label) {
  std::vector<ObjRef> salad;
  for (const ObjectSpec& spec : env.roster) {
    if (env.goal.at(spec.name) == RegionKind::plate) {
      salad.push_back(ObjRef{spec.name, RegionKind::plate});
    }
  }
  if (salad.empty()) bad_config("'" + label + "': no plate-bound objects");
  std::vector<Constraint> out;
  for (const ObjectSpec& spec : env.roster) {
    if (env.goal.at(spec.name) != RegionKind::basket) continue;
    Constraint constraint;
    constraint.label =
        label.empty() ? spec.name + " put away before the salad" : label + " (" + spec.name + ")";
    ConstraintAtom atom;
    atom.kind = ConstraintAtom::Kind::placed_before_all;
    atom.subject = ObjRef{spec.name, RegionKind::basket};
    atom.refs = salad;
    constraint.atoms.push_back(std::move(atom));
    out.push_back(std::move(constraint));
  }
  if (out.empty()) bad_config("'" + label + "': no basket-bound objects");
  return out;
}

EnvSpec env_spec_from_json(const json& root,
                           const std::filesystem::path& base_dir) {
  EnvSpec env;
  env.name = root.at("name").get<std::string>();
  const json& ws = root.at("workspace");
  env.workspace = {ws.at("min_x").get<double>(), ws.at("min_y").get<double>(),
                   ws.at("max_x").get<double>(), ws.at("max_y").get<double>()};
  if (root.contains("robot_base")) {
    env.robot_base = parse_pose(root.at("robot_base"));
  }
  for (const json& node : root.at("regions")) {
    Region region;
    region.name = node.at("name").get<std::string>();
    region.kind = parse_region_kind(node.at("kind").get<std::string>());
    region.shape = parse_footprint(node.at("shape"));
    region.pose = parse_pose(node.at("pose"));
    env.regions.push_back(std::move(region));
  }
  const std::string goal_rule = root.value("goal_rule", std::string{});
  if (!goal_rule.empty() && goal_rule != "fruit_salad") {
    bad_config("unknown goal_rule '" + goal_rule + "'");
  }
  for (const json& node : root.at("objects")) {
    ObjectSpec spec;
    spec.name = node.at("name").get<std::string>();
    spec.footprint = parse_footprint(node.at("shape"));
    if (node.contains("attributes")) {
      for (const json& tag : node.at("attributes")) {
        spec.attributes.push_back(tag.get<std::string>());
      }
    }
    if (node.contains("goal")) {
      env.goal[spec.name] =
          parse_region_kind(node.at("goal").get<std::string>());
    } else if (goal_rule == "fruit_salad") {
      // Salad ingredients (non-sour fruit) belong on the plate; everything
      // else — sour fruit included — is put away in the basket.
      const bool on_plate =
          spec.has_attribute("fruit") && !spec.has_attribute("sour");
      env.goal[spec.name] =
          on_plate ? RegionKind::plate : RegionKind::basket;
    } else {
      bad_config("object '" + spec.name + "' has no goal and no goal_rule");
    }
    env.roster.push_back(std::move(spec));
  }
  for (const json& node : root.at("constraints")) {
    if (node.is_object() && node.value("type", std::string{}) ==
                                "excluded_before_salad") {
      const auto expanded = expand_excluded_before_salad(
          env, node.value("label", std::string{}));
      env.constraints.insert(env.constraints.end(), expanded.begin(),
                             expanded.end());
      continue;
    }
    env.constraints.push_back(parse_constraint(node));
  }
  if (root.contains("prompt_file")) {
    env.task_prompt =
        read_text_file(base_dir / root.at("prompt_file").get<std::string>());
  } else {
    env.task_prompt = root.value("prompt", std::string{});
  }
  validate_env_spec(env);
  return env;
}

// ---------------------------------------------------------------------------
// Satisfying-order search.

struct OrderSearch {
  const EnvSpec& env;
  std::vector<ConstraintAtom> atoms;  // flattened: all must hold at the end
  std::vector<PlacementEvent> events;
  std::vector<std::string> candidates;
  std::vector<bool> used;
  std::vector<std::string> order;

  explicit OrderSearch(const EnvSpec& env_in,
                       std::span<const PlacementEvent> prefix,
                       const std::vector<std::string>& objects)
      : env(env_in),
        events(prefix.begin(), prefix.end()),
        candidates(objects),
        used(objects.size(), false) {
    for (const Constraint& constraint : env.constraints) {
      for (const ConstraintAtom& atom : constraint.atoms) {
        atoms.push_back(atom);
      }
    }
  }

  bool pending(const std::string& obj) const {
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (!used[i] && candidates[i] == obj) return true;
    }
    return false;
  }

  // Will a future event (placing obj into its goal region) match this ref?
  bool will_match(const ObjRef& ref) const {
    if (!pending(ref.obj)) return false;
    if (!ref.dest) return true;
    const auto it = env.goal.find(ref.obj);
    return it != env.goal.end() && it->second == *ref.dest;
  }

  bool reachable(const ObjRef& ref) const {
    return first_match(events, ref).has_value() || will_match(ref);
  }

  // Conservative dead-end detection for the current partial sequence.
  // Returning false is definite; returning true only means "maybe".
  bool viable() const {
    using Kind = ConstraintAtom::Kind;
    const int len = static_cast<int>(events.size());
    for (const ConstraintAtom& atom : atoms) {
      switch (atom.kind) {
        case Kind::placed_after_all: {
          if (!reachable(atom.subject)) return false;
          const auto subject = first_match(events, atom.subject);
          for (const ObjRef& ref : atom.refs) {
            if (!reachable(ref)) return false;
            const auto pos = first_match(events, ref);
            if (subject && (!pos || *pos > *subject)) return false;
          }
          break;
        }
        case Kind::placed_before_all: {
          if (!reachable(atom.subject)) return false;
          const auto subject = first_match(events, atom.subject);
          for (const ObjRef& ref : atom.refs) {
            if (!reachable(ref)) return false;
            const auto pos = first_match(events, ref);
            if (pos && (!subject || *subject > *pos)) return false;
          }
          break;
        }
        case Kind::adjacent: {
          const ObjRef& other = atom.refs[0];
          if (!reachable(atom.subject) || !reachable(other)) return false;
          const auto a = first_match(events, atom.subject);
          const auto b = first_match(events, other);
          if (a && b) {
            if (std::abs(*a - *b) != 1) return false;
          } else if (a && !b) {
            if (len > *a + 1) return false;  // slot next to a is gone
          } else if (b && !a) {
            if (len > *b + 1) return false;
          }
          break;
        }
        case Kind::immediately_after: {
          const ObjRef& anchor = atom.refs[0];
          if (!reachable(atom.subject) || !reachable(anchor)) return false;
          const auto subject = first_match(events, atom.subject);
          const auto pos = first_match(events, anchor);
          if (subject) {
            if (*subject == 0) return false;
            if (!pos || *pos != *subject - 1) return false;
          } else if (pos && len > *pos + 1) {
            return false;  // the step right after the anchor is taken
          }
          break;
        }
        case Kind::not_consecutive: {
          const ObjRef& other = atom.refs[0];
          if (!reachable(atom.subject) || !reachable(other)) return false;
          const auto a = first_match(events, atom.subject);
          const auto b = first_match(events, other);
          if (a && b && std::abs(*a - *b) == 1) return false;
          break;
        }
        case Kind::not_first: {
          if (!reachable(atom.subject)) return false;
          if (len > 0 && event_matches(events[0], atom.subject)) return false;
          break;
        }
        case Kind::not_last: {
          if (!reachable(atom.subject)) return false;
          break;  // decided by the full check once the order is complete
        }
        case Kind::no_repeat: {
          for (int i = 0; i < len; ++i) {
            for (int j = i + 1; j < len; ++j) {
              if (events[i].obj == events[j].obj) return false;
            }
          }
          break;
        }
      }
    }
    return true;
  }

  bool dfs() {
    if (order.size() == candidates.size()) {
      return is_satisfied(env.constraints, events);
    }
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (used[i]) continue;
      used[i] = true;
      order.push_back(candidates[i]);
      events.push_back(make_goal_event(env, candidates[i],
                                       static_cast<int>(events.size())));
      if (viable() && dfs()) return true;
      events.pop_back();
      order.pop_back();
      used[i] = false;
    }
    return false;
  }

  static PlacementEvent make_goal_event(const EnvSpec& env,
                                        const std::string& obj, int index) {
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
};

}  // namespace

bool ObjectSpec::has_attribute(std::string_view tag) const {
  return std::find(attributes.begin(), attributes.end(), tag) !=
         attributes.end();
}

const ObjectSpec* EnvSpec::find_object(std::string_view obj) const {
  for (const ObjectSpec& spec : roster) {
    if (spec.name == obj) return &spec;
  }
  return nullptr;
}

const Region* EnvSpec::region_of_kind(RegionKind kind) const {
  for (const Region& region : regions) {
    if (region.kind == kind) return &region;
  }
  return nullptr;
}

EnvSpec load_env_spec(const std::string& path) {
  json root;
  try {
    root = json::parse(read_text_file(path));
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::parse_error,
                "invalid JSON in '" + path + "': " + ex.what());
  }
  try {
    return env_spec_from_json(root, std::filesystem::path(path).parent_path());
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::bad_config,
                "bad environment file '" + path + "': " + ex.what());
  }
}

EnvSpec env_spec_from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::parse_error,
                std::string("invalid environment JSON: ") + ex.what());
  }
  try {
    return env_spec_from_json(root, std::filesystem::path("."));
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::bad_config,
                std::string("bad environment description: ") + ex.what());
  }
}

void validate_env_spec(const EnvSpec& env) {
  if (env.name.empty()) bad_config("environment name is empty");
  if (env.workspace.min_x >= env.workspace.max_x ||
      env.workspace.min_y >= env.workspace.max_y) {
    bad_config("workspace bounds are inverted or empty");
  }
  if (env.roster.empty()) bad_config("object roster is empty");
  if (env.region_of_kind(RegionKind::staging) == nullptr) {
    bad_config("no staging region");
  }
  const Pose2D ws_center = {(env.workspace.min_x + env.workspace.max_x) / 2.0,
                            (env.workspace.min_y + env.workspace.max_y) / 2.0,
                            0.0};
  const Footprint ws_box =
      Footprint::rect((env.workspace.max_x - env.workspace.min_x) / 2.0,
                      (env.workspace.max_y - env.workspace.min_y) / 2.0);
  for (const Region& region : env.regions) {
    if (!shape_contains(ws_center, ws_box, region.pose, region.shape)) {
      bad_config("region '" + region.name + "' sticks out of the workspace");
    }
  }
  for (std::size_t i = 0; i < env.roster.size(); ++i) {
    for (std::size_t j = i + 1; j < env.roster.size(); ++j) {
      if (env.roster[i].name == env.roster[j].name) {
        bad_config("duplicate object '" + env.roster[i].name + "'");
      }
    }
  }
  for (const ObjectSpec& spec : env.roster) {
    const bool ok = spec.footprint.shape == Footprint::Shape::circle
                        ? spec.footprint.radius > 0.0
                        : spec.footprint.half_x > 0.0 &&
                              spec.footprint.half_y > 0.0;
    if (!ok) bad_config("object '" + spec.name + "' has a degenerate shape");
    const auto it = env.goal.find(spec.name);
    if (it == env.goal.end()) {
      bad_config("object '" + spec.name + "' has no goal region");
    }
    if (it->second == RegionKind::staging) {
      bad_config("object '" + spec.name + "' has staging as its goal");
    }
    if (env.region_of_kind(it->second) == nullptr) {
      bad_config("object '" + spec.name + "' targets a region kind '" +
                 std::string(to_string(it->second)) +
                 "' this environment does not have");
    }
  }
  auto check_ref = [&](const ObjRef& ref) {
    if (env.find_object(ref.obj) == nullptr) {
      bad_config("constraint references unknown object '" + ref.obj + "'");
    }
    if (ref.dest && env.region_of_kind(*ref.dest) == nullptr) {
      bad_config("constraint references missing region kind '" +
                 std::string(to_string(*ref.dest)) + "'");
    }
  };
  for (const Constraint& constraint : env.constraints) {
    if (constraint.atoms.empty()) bad_config("constraint with no atoms");
    for (const ConstraintAtom& atom : constraint.atoms) {
      if (atom.kind != ConstraintAtom::Kind::no_repeat) {
        check_ref(atom.subject);
        for (const ObjRef& ref : atom.refs) check_ref(ref);
      }
    }
  }
  // Capacity: each goal-region kind must offer at least as many grid slots
  // as it has objects assigned, and staging must be able to hold the whole
  // roster at once.
  for (RegionKind kind :
       {RegionKind::basket, RegionKind::plate, RegionKind::staging}) {
    int assigned = 0;
    double max_cr = 0.0;
    for (const ObjectSpec& spec : env.roster) {
      if (kind != RegionKind::staging && env.goal.at(spec.name) != kind) {
        continue;
      }
      ++assigned;
      max_cr = std::max(max_cr, spec.footprint.circumradius());
    }
    if (assigned == 0) continue;
    int slots = 0;
    for (const Region& region : env.regions) {
      if (region.kind == kind) {
        slots += static_cast<int>(region_slots(region, max_cr).size());
      }
    }
    if (slots < assigned) {
      bad_config(std::string("region kind '") + to_string(kind) +
                 "' offers " + std::to_string(slots) + " slots for " +
                 std::to_string(assigned) + " objects");
    }
  }
  if (!find_satisfying_order(env, {}, [&] {
        std::vector<std::string> all;
        for (const ObjectSpec& spec : env.roster) all.push_back(spec.name);
        return all;
      }())) {
    bad_config("constraint set of '" + env.name + "' is unsatisfiable");
  }
}

bool goal_achieved(const EnvSpec& env, const World& world) {
  for (const ObjectSpec& spec : env.roster) {
    const auto it = world.objects.find(spec.name);
    if (it == world.objects.end() || !it->second.on_table) return false;
    const Region* region = world.current_region_of(spec.name);
    if (region == nullptr || region->kind != env.goal.at(spec.name)) {
      return false;
    }
  }
  return !world.any_overlap();
}

int count_violations_checked(const EnvSpec& env,
                             std::span<const PlacementEvent> events) {
  for (const PlacementEvent& event : events) {
    if (env.find_object(event.obj) == nullptr) {
      throw Error(ErrorCode::unknown_object,
                  "event references unknown object '" + event.obj + "'");
    }
  }
  return count_violations(env.constraints, events);
}

std::vector<PlacementEvent> events_for_order(
    const EnvSpec& env, const std::vector<std::string>& order) {
  std::vector<PlacementEvent> events;
  events.reserve(order.size());
  for (const std::string& obj : order) {
    events.push_back(OrderSearch::make_goal_event(
        env, obj, static_cast<int>(events.size())));
  }
  return events;
}

long long count_satisfying_orders(
    const EnvSpec& env,
    const std::function<void(const std::vector<std::string>&)>& visit) {
  const int k = env.k();
  if (k > 10) {
    throw Error(ErrorCode::too_large,
                "exhaustive order sweep limited to 10 objects, got " +
                    std::to_string(k));
  }
  // Pre-built events are permuted by index so the hot loop avoids JSON/env
  // lookups; only the sequence index needs refreshing.
  std::vector<PlacementEvent> prototype;
  for (const ObjectSpec& spec : env.roster) {
    prototype.push_back(
        OrderSearch::make_goal_event(env, spec.name, 0));
  }
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<PlacementEvent> events(prototype.size());
  std::vector<std::string> order(prototype.size());
  long long count = 0;
  do {
    for (int i = 0; i < k; ++i) {
      events[static_cast<std::size_t>(i)] =
          prototype[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
      events[static_cast<std::size_t>(i)].index = i;
    }
    if (is_satisfied(env.constraints, events)) {
      ++count;
      if (visit) {
        for (int i = 0; i < k; ++i) {
          order[static_cast<std::size_t>(i)] =
              events[static_cast<std::size_t>(i)].obj;
        }
        visit(order);
      }
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return count;
}

std::optional<std::vector<std::string>> find_satisfying_order(
    const EnvSpec& env, std::span<const PlacementEvent> prefix,
    const std::vector<std::string>& objects) {
  OrderSearch search(env, prefix, objects);
  if (!search.viable()) return std::nullopt;
  if (!search.dfs()) return std::nullopt;
  return search.order;
}

std::vector<Pose2D> region_slots(const Region& region,
                                 double max_circumradius) {
  constexpr double kPitchClearance = 0.015;  // gap between neighbor objects
  constexpr double kEdgeMargin = 0.002;      // gap to the region border
  const double pitch = 2.0 * max_circumradius + kPitchClearance;
  const double margin = max_circumradius + kEdgeMargin;
  std::vector<Pose2D> slots;

  const double cos_t = std::cos(region.pose.theta);
  const double sin_t = std::sin(region.pose.theta);
  auto emit = [&](double lx, double ly) {
    Pose2D pose;
    pose.x = region.pose.x + cos_t * lx - sin_t * ly;
    pose.y = region.pose.y + sin_t * lx + cos_t * ly;
    pose.theta = region.pose.theta;
    slots.push_back(pose);
  };

  if (region.shape.shape == Footprint::Shape::rectangle) {
    const double ux = region.shape.half_x - margin;
    const double uy = region.shape.half_y - margin;
    if (ux < 0.0 || uy < 0.0) return slots;
    const int nx = static_cast<int>(std::floor(2.0 * ux / pitch)) + 1;
    const int ny = static_cast<int>(std::floor(2.0 * uy / pitch)) + 1;
    const double x0 = -0.5 * pitch * (nx - 1);
    const double y0 = -0.5 * pitch * (ny - 1);
    for (int iy = 0; iy < ny; ++iy) {
      for (int ix = 0; ix < nx; ++ix) {
        emit(x0 + pitch * ix, y0 + pitch * iy);
      }
    }
    return slots;
  }

  const double ur = region.shape.radius - margin;
  if (ur < 0.0) return slots;
  const int n = static_cast<int>(std::floor(2.0 * ur / pitch)) + 1;
  const double c0 = -0.5 * pitch * (n - 1);
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const double lx = c0 + pitch * ix;
      const double ly = c0 + pitch * iy;
      if (std::sqrt(lx * lx + ly * ly) <= ur) emit(lx, ly);
    }
  }
  return slots;
}

}  // namespace planbench
