#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "planbench.h"

namespace {

int report_failure(const char* what) {
  std::fprintf(stderr, "error: %s: %s\n", what, pb_last_error());
  return 1;
}

std::vector<const char*> as_cstrs(const std::vector<std::string>& values) {
  std::vector<const char*> out;
  out.reserve(values.size());
  for (const std::string& value : values) out.push_back(value.c_str());
  return out;
}

void print_record(const char* record_json, void* user_data) {
  (void)user_data;
  std::printf("%s\n", record_json);
}

int cmd_run(const std::string& config, const std::string& out_dir,
            bool has_seed, std::uint64_t seed, int parallelism,
            const std::vector<std::string>& agents,
            const std::vector<std::string>& variants, bool echo_records) {
  const std::vector<const char*> agent_ptrs = as_cstrs(agents);
  const std::vector<const char*> variant_ptrs = as_cstrs(variants);

  pb_run_options options = {};
  options.out_dir = out_dir.empty() ? nullptr : out_dir.c_str();
  options.base_seed = has_seed ? &seed : nullptr;
  options.parallelism = parallelism;
  options.agents = agent_ptrs.empty() ? nullptr : agent_ptrs.data();
  options.n_agents = agent_ptrs.size();
  options.variants = variant_ptrs.empty() ? nullptr : variant_ptrs.data();
  options.n_variants = variant_ptrs.size();
  options.on_record = echo_records ? &print_record : nullptr;

  char results_dir[4096] = {0};
  if (pb_run_experiment(config.c_str(), &options, results_dir,
                        sizeof(results_dir)) != PB_OK) {
    return report_failure("run");
  }
  std::printf("results written to %s/results.jsonl\n", results_dir);
  return 0;
}

int cmd_report(const std::string& results_dir, const std::string& out_dir) {
  if (pb_generate_report(results_dir.c_str(),
                         out_dir.empty() ? nullptr : out_dir.c_str()) !=
      PB_OK) {
    return report_failure("report");
  }
  std::printf("report written to %s\n",
              out_dir.empty() ? results_dir.c_str() : out_dir.c_str());
  return 0;
}

int cmd_validate_env(const std::string& path) {
  pb_env* env = nullptr;
  if (pb_env_open(path.c_str(), &env) != PB_OK) {
    return report_failure("validate-env");
  }
  std::printf("%s: valid\n", pb_env_name(env));
  std::printf("  objects (%d):", pb_env_task_length(env));
  for (int i = 0; i < pb_env_task_length(env); ++i) {
    std::printf(" %s", pb_env_object_name(env, i));
  }
  std::printf("\n  constraints: %d\n", pb_env_constraint_count(env));
  pb_env_close(env);
  return 0;
}

int cmd_enumerate(const std::string& path) {
  pb_env* env = nullptr;
  if (pb_env_open(path.c_str(), &env) != PB_OK) {
    return report_failure("enumerate");
  }
  uint64_t count = 0;
  const pb_status status = pb_env_satisfying_orders(env, &count);
  if (status != PB_OK) {
    pb_env_close(env);
    return report_failure("enumerate");
  }
  std::printf("%s: %llu of %d! placement orders satisfy all constraints\n",
              pb_env_name(env), static_cast<unsigned long long>(count),
              pb_env_task_length(env));
  pb_env_close(env);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      std::string("planbench ") + pb_version() +
      " - closed-loop planner evaluation harness"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  std::uint64_t seed = 0;
  int parallelism = 0;
  std::vector<std::string> agents;
  std::vector<std::string> variants;
  bool echo_records = false;

  CLI::App* run = app.add_subcommand(
      "run", "Run the experiment grid described by a JSON config");
  run->add_option("--config", config, "Experiment config path")->required();
  run->add_option("--out", out_dir,
                  "Output directory (overrides the config)");
  CLI::Option* seed_opt =
      run->add_option("--seed", seed, "Base seed (overrides the config)");
  run->add_option("--parallelism", parallelism,
                  "Worker bound (overrides the config when > 0)");
  run->add_option("--agent", agents,
                  "Only run these agent ids (repeatable)");
  run->add_option("--variant", variants,
                  "Only run these planner variants (repeatable)");
  run->add_flag("--echo-records", echo_records,
                "Print each trial record as it is written");

  std::string results_dir;
  std::string report_out;
  CLI::App* report = app.add_subcommand(
      "report", "Aggregate results.jsonl into per-environment CSV tables");
  report->add_option("results_dir", results_dir, "Directory with results.jsonl")
      ->required();
  report->add_option("--out", report_out,
                     "Where to write the CSVs (default: results_dir)");

  std::string env_path;
  CLI::App* validate = app.add_subcommand(
      "validate-env", "Load and fully validate an environment description");
  validate->add_option("env", env_path, "Environment JSON path")->required();

  std::string enum_path;
  CLI::App* enumerate = app.add_subcommand(
      "enumerate", "Count constraint-satisfying placement orders");
  enumerate->add_option("env", enum_path, "Environment JSON path")->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    return cmd_run(config, out_dir, seed_opt->count() > 0, seed, parallelism,
                   agents, variants, echo_records);
  }
  if (report->parsed()) return cmd_report(results_dir, report_out);
  if (validate->parsed()) return cmd_validate_env(env_path);
  if (enumerate->parsed()) return cmd_enumerate(enum_path);
  return 0;
}
