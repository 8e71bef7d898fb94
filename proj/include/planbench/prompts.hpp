#pragma once

#include <string>

#include "planbench/agents.hpp"

namespace planbench {

// The three planner prompt templates, verbatim text with {domain_desc},
// {n_steps_replan} and {prev_plan} placeholders.
struct PromptTemplates {
  std::string open_loop;        // first plan of a trial
  std::string closed_loop;      // replans with warm-start context
  std::string closed_loop_nws;  // replans without warm-start context

  // Copies embedded at build time from the assets/prompts texts.
  static const PromptTemplates& builtin();

  // Loads open_loop.txt / closed_loop.txt / closed_loop_nws.txt from a
  // directory, for experimenting with alternative wording.
  static PromptTemplates load_dir(const std::string& dir);
};

// Deterministic textual stand-in for camera images: workspace, regions,
// object poses and footprints, gripper state.
std::string describe_scene(const EnvSpec& env, const World& world);

// Serialization for the {prev_plan} slot: one numbered action per line with
// its execution status tag.
std::string format_prev_plan(const WarmStart& warm);

// Literal substring replacement (placeholders are literal tokens, so no
// regex/format machinery is wanted here).
std::string replace_all(std::string text, const std::string& token,
                        const std::string& value);

// Picks the template for the request (initial -> open_loop; replan with
// warm start -> closed_loop; replan without -> closed_loop_nws) and fills
// the placeholders.  The scene description is appended to the task text
// inside the {domain_desc} slot.
std::string render_prompt(const PromptTemplates& templates,
                          const PlanRequest& request);

}  // namespace planbench
