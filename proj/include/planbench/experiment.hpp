#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "planbench/agents.hpp"
#include "planbench/env.hpp"
#include "planbench/loop.hpp"
#include "planbench/metrics.hpp"
#include "planbench/remote.hpp"

namespace planbench {

// One planner configuration from the canonical roster: OL, CL-F, CL-H,
// CL-S, and the CL no-warm-start twins CL-H-NWS / CL-S-NWS.
struct VariantSpec {
  std::string label;
  LoopConfig::Mode mode = LoopConfig::Mode::open_loop;
  HorizonSetting horizon = HorizonSetting::full_h;  // closed-loop only
  bool warm_start = true;

  // Concrete loop settings for a task of length k.  Closed-loop variants
  // reuse the stored open-loop plan as iteration 0.
  LoopConfig loop_config(int k) const;

  bool operator==(const VariantSpec&) const = default;
};

// Parses a canonical label; throws Error(bad_config) on anything else.
VariantSpec parse_variant(const std::string& label);

// All six variants in report order.
std::vector<VariantSpec> default_variants();

struct AgentConfig {
  enum class Kind { oracle, noisy, remote };

  Kind kind = Kind::oracle;
  std::string id;       // row label in reports; unique per experiment
  ErrorModel noise;     // kind == noisy (seed is derived per trial)
  RemoteConfig remote;  // kind == remote
};

struct ExperimentConfig {
  std::vector<std::string> env_paths;
  std::vector<AgentConfig> agents;
  std::vector<VariantSpec> variants;
  int n_trials = 50;
  std::uint64_t base_seed = 0;
  std::string out_dir = "results";
  int parallelism = 0;  // 0 means hardware concurrency
};

// Reads a JSON experiment config; relative paths inside the file resolve
// against the file's directory.
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig experiment_config_from_json_text(const std::string& text,
                                                  const std::string& base_dir);

// Per-trial seeds, identical across runs and platforms.  The world draw
// depends only on (env, index) so every variant and agent replays the same
// initial state; the agent stream also keys on agent and variant.
std::uint64_t world_seed_for(std::uint64_t base, const std::string& env,
                             int index);
std::uint64_t trial_seed_for(std::uint64_t base, const std::string& env,
                             const std::string& agent,
                             const std::string& variant, int index);

// Flattened trial result: identifiers + metrics + a trace summary.  One of
// these per JSONL line.
struct TrialRecord {
  std::string env;
  std::string agent;
  std::string variant;
  int trial_index = 0;
  std::uint64_t world_seed = 0;
  std::uint64_t trial_seed = 0;
  TrialMetrics metrics;
  std::string terminated_by;
  int queries_used = 0;
  int iterations = 0;
  int actions_executed = 0;
  std::string error;     // failure detail for agent/harness errors
  double wall_ms = 0.0;  // excluded from determinism comparisons
};

std::string to_json_line(const TrialRecord& record);
TrialRecord trial_record_from_json_line(const std::string& line);

// Runs the full (environment x agent x variant x seed) grid.  Open-loop
// plans are computed first per (env, agent, index) and shared with the
// closed-loop variants as their initial plans.  Records come back in
// deterministic env -> agent -> variant -> index order and are also written
// to <out_dir>/results.jsonl; `on_record`, when set, observes them in that
// order.  Per-trial failures are recorded, never fatal.
std::vector<TrialRecord> run_experiment(
    const ExperimentConfig& config,
    const std::function<void(const TrialRecord&)>& on_record = {});

}  // namespace planbench
