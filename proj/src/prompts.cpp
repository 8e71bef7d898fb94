#include "planbench/prompts.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "planbench/actions.hpp"
#include "planbench/util.hpp"

namespace planbench {

namespace embedded {
extern const char kOpenLoopTemplate[];
extern const char kClosedLoopTemplate[];
extern const char kClosedLoopNwsTemplate[];
}  // namespace embedded

namespace {

std::string fixed4(double value) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.4f", value);
  return buf;
}

std::string describe_footprint(const Footprint& fp) {
  if (fp.shape == Footprint::Shape::circle) {
    return "circle radius " + fixed4(fp.radius);
  }
  return "rectangle half-extents " + fixed4(fp.half_x) + " x " +
         fixed4(fp.half_y);
}

std::string read_file_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::io_error,
                "cannot read prompt template '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

const PromptTemplates& PromptTemplates::builtin() {
  static const PromptTemplates templates = {
      embedded::kOpenLoopTemplate,
      embedded::kClosedLoopTemplate,
      embedded::kClosedLoopNwsTemplate,
  };
  return templates;
}

PromptTemplates PromptTemplates::load_dir(const std::string& dir) {
  const std::filesystem::path base(dir);
  PromptTemplates templates;
  templates.open_loop = read_file_or_throw(base / "open_loop.txt");
  templates.closed_loop = read_file_or_throw(base / "closed_loop.txt");
  templates.closed_loop_nws = read_file_or_throw(base / "closed_loop_nws.txt");
  return templates;
}

std::string describe_scene(const EnvSpec& env, const World& world) {
  std::ostringstream out;
  out << "Workspace: x in (" << fixed4(world.workspace.min_x) << ", "
      << fixed4(world.workspace.max_x) << "), y in ("
      << fixed4(world.workspace.min_y) << ", "
      << fixed4(world.workspace.max_y) << ").\n";
  out << "Regions:\n";
  for (const Region& region : world.regions) {
    out << "- " << region.name << " (" << to_string(region.kind) << ", "
        << describe_footprint(region.shape) << ") centered at ("
        << fixed4(region.pose.x) << ", " << fixed4(region.pose.y) << ")\n";
  }
  out << "Objects:\n";
  for (const ObjectSpec& spec : env.roster) {
    const auto it = world.objects.find(spec.name);
    if (it == world.objects.end()) continue;
    out << "- " << spec.name << " (" << describe_footprint(spec.footprint)
        << "): ";
    if (!it->second.on_table) {
      out << "currently held by the gripper\n";
      continue;
    }
    out << "at (" << fixed4(it->second.pose.x) << ", "
        << fixed4(it->second.pose.y) << ", theta "
        << fixed4(it->second.pose.theta) << ")";
    if (const Region* region = world.current_region_of(spec.name)) {
      out << ", inside " << region->name;
    }
    out << "\n";
  }
  out << "Gripper: "
      << (world.held.has_value() ? "holding " + *world.held : "empty")
      << "\n";
  return out.str();
}

std::string format_prev_plan(const WarmStart& warm) {
  std::ostringstream out;
  for (std::size_t i = 0; i < warm.prev_plan.size(); ++i) {
    const ActionStatus& status = warm.prev_plan[i];
    out << (i + 1) << ". " << format_action(status.action) << " -- "
        << to_string(status.outcome);
    if (status.outcome == ActionStatus::Outcome::failure) {
      out << "(" << to_string(status.reason) << ")";
    }
    out << "\n";
  }
  return out.str();
}

std::string replace_all(std::string text, const std::string& token,
                        const std::string& value) {
  std::size_t pos = 0;
  while ((pos = text.find(token, pos)) != std::string::npos) {
    text.replace(pos, token.size(), value);
    pos += value.size();
  }
  return text;
}

std::string render_prompt(const PromptTemplates& templates,
                          const PlanRequest& request) {
  const bool replan = request.reason != PlanReason::initial;
  const bool warm = request.warm_start.has_value();
  const std::string* tmpl = &templates.open_loop;
  if (replan) {
    tmpl = warm ? &templates.closed_loop : &templates.closed_loop_nws;
  }
  // Camera images are out of scope; the textual scene listing stands in for
  // "the current state and observation of the environment".
  const std::string domain_desc =
      request.env->task_prompt + "\nThe current state of the environment is:\n" +
      describe_scene(*request.env, *request.world);
  std::string prompt = replace_all(*tmpl, "{domain_desc}", domain_desc);
  if (warm) {
    prompt = replace_all(prompt, "{n_steps_replan}",
                         std::to_string(request.warm_start->n_steps_replan));
    prompt = replace_all(prompt, "{prev_plan}",
                         format_prev_plan(*request.warm_start));
  }
  return prompt;
}

}  // namespace planbench
