#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "planbench/experiment.hpp"
#include "planbench/metrics.hpp"
#include "planbench/util.hpp"

namespace {

using namespace planbench;

std::string asset_path(const std::string& rel) {
  return std::string(PLANBENCH_ASSET_DIR) + "/" + rel;
}

ErrorCode config_error(const std::string& text) {
  try {
    experiment_config_from_json_text(text, "");
  } catch (const Error& error) {
    return error.code();
  }
  FAIL("expected the config to be rejected: ", text);
  return ErrorCode::internal;
}

std::filesystem::path fresh_dir(const std::string& leaf) {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "planbench_experiment_test" /
      leaf;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

// Canonical serialization with timing zeroed, for determinism comparisons.
std::string timeless_line(TrialRecord record) {
  record.wall_ms = 0.0;
  return to_json_line(record);
}

ExperimentConfig small_grid(const std::filesystem::path& out_dir,
                            int parallelism) {
  ExperimentConfig config;
  config.env_paths = {asset_path("envs/cube_easy.json")};

  AgentConfig oracle;
  oracle.kind = AgentConfig::Kind::oracle;
  oracle.id = "oracle";
  AgentConfig noisy;
  noisy.kind = AgentConfig::Kind::noisy;
  noisy.id = "noisy";
  noisy.noise.p_geo = 0.3;
  noisy.noise.d = 0.05;
  noisy.noise.p_log = 0.2;
  noisy.noise.memoryful = true;
  config.agents = {oracle, noisy};

  config.variants = {parse_variant("OL"), parse_variant("CL-F"),
                     parse_variant("CL-S-NWS")};
  config.n_trials = 3;
  config.base_seed = 42;
  config.out_dir = out_dir.string();
  config.parallelism = parallelism;
  return config;
}

}  // namespace

TEST_CASE("variant labels parse to the documented settings") {
  const VariantSpec ol = parse_variant("OL");
  CHECK(ol.mode == LoopConfig::Mode::open_loop);
  CHECK(ol.warm_start);

  const VariantSpec full = parse_variant("CL-F");
  CHECK(full.mode == LoopConfig::Mode::closed_loop);
  CHECK(full.horizon == HorizonSetting::full_h);
  CHECK(full.warm_start);

  const VariantSpec half = parse_variant("CL-H");
  CHECK(half.horizon == HorizonSetting::half_h);

  const VariantSpec short_nws = parse_variant("CL-S-NWS");
  CHECK(short_nws.mode == LoopConfig::Mode::closed_loop);
  CHECK(short_nws.horizon == HorizonSetting::short_h);
  CHECK_FALSE(short_nws.warm_start);
  CHECK(short_nws.label == "CL-S-NWS");

  for (const char* bad : {"CL-X", "ol", "", "OL-NWS", "CL", "CL-F-nws"}) {
    CAPTURE(bad);
    try {
      parse_variant(bad);
      FAIL("expected rejection of ", bad);
    } catch (const Error& error) {
      CHECK(error.code() == ErrorCode::bad_config);
    }
  }
}

TEST_CASE("default variants come in report order") {
  const std::vector<VariantSpec> variants = default_variants();
  REQUIRE(variants.size() == 6);
  const std::vector<std::string> expected = {"CL-F",     "CL-H", "CL-H-NWS",
                                             "CL-S",     "CL-S-NWS", "OL"};
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(variants[i].label == expected[i]);
    CHECK(variants[i] == parse_variant(expected[i]));
  }
}

TEST_CASE("variants materialize into concrete loop settings") {
  const LoopConfig ol = parse_variant("OL").loop_config(7);
  CHECK(ol.mode == LoopConfig::Mode::open_loop);
  CHECK(ol.initial_plan_source == LoopConfig::InitialPlanSource::fresh);

  const LoopConfig full = parse_variant("CL-F").loop_config(7);
  CHECK(full.mode == LoopConfig::Mode::closed_loop);
  CHECK(full.control_horizon == 7);
  CHECK(full.warm_start);
  CHECK(full.initial_plan_source ==
        LoopConfig::InitialPlanSource::shared_open_loop);
  CHECK(full.query_budget == 0);  // standard budget rule applies

  CHECK(parse_variant("CL-H").loop_config(7).control_horizon == 4);
  const LoopConfig short_nws = parse_variant("CL-S-NWS").loop_config(8);
  CHECK(short_nws.control_horizon == 2);
  CHECK_FALSE(short_nws.warm_start);
}

TEST_CASE("experiment configs parse with defaults and resolved paths") {
  SUBCASE("fully specified") {
    const std::string text = R"({
      "envs": ["envs/cube_easy.json", "/abs/other.json"],
      "agents": [
        {"type": "oracle"},
        {"type": "noisy", "id": "noisy-a", "p_geo": 0.25, "d": 0.1,
         "p_log": 0.05, "memoryful": false},
        {"type": "remote", "id": "gpt", "endpoint": "http://h:1/v1",
         "model": "m", "api_key_env": "KEY", "temperature": 0.5,
         "timeout_sec": 10, "max_retries": 4, "min_interval_ms": 50}
      ],
      "variants": ["OL", "CL-H-NWS"],
      "n_trials": 7,
      "base_seed": 99,
      "out_dir": "out",
      "parallelism": 3
    })";
    const ExperimentConfig config =
        experiment_config_from_json_text(text, "/cfg");
    REQUIRE(config.env_paths.size() == 2);
    CHECK(config.env_paths[0] == "/cfg/envs/cube_easy.json");
    CHECK(config.env_paths[1] == "/abs/other.json");  // absolute: untouched

    REQUIRE(config.agents.size() == 3);
    CHECK(config.agents[0].kind == AgentConfig::Kind::oracle);
    CHECK(config.agents[0].id == "oracle");  // id defaults to the type
    CHECK(config.agents[1].id == "noisy-a");
    CHECK(config.agents[1].noise.p_geo == 0.25);
    CHECK(config.agents[1].noise.d == 0.1);
    CHECK(config.agents[1].noise.p_log == 0.05);
    CHECK_FALSE(config.agents[1].noise.memoryful);
    CHECK(config.agents[2].remote.endpoint == "http://h:1/v1");
    CHECK(config.agents[2].remote.model == "m");
    CHECK(config.agents[2].remote.api_key_env == "KEY");
    CHECK(config.agents[2].remote.temperature == 0.5);
    CHECK(config.agents[2].remote.timeout_sec == 10);
    CHECK(config.agents[2].remote.max_retries == 4);
    CHECK(config.agents[2].remote.min_interval_ms == 50);

    REQUIRE(config.variants.size() == 2);
    CHECK(config.variants[0].label == "OL");
    CHECK(config.variants[1].label == "CL-H-NWS");
    CHECK(config.n_trials == 7);
    CHECK(config.base_seed == 99);
    CHECK(config.out_dir == "/cfg/out");
    CHECK(config.parallelism == 3);
  }
  SUBCASE("minimal: defaults fill in") {
    const ExperimentConfig config = experiment_config_from_json_text(
        R"({"envs": ["e.json"], "agents": [{"type": "oracle"}]})", "");
    CHECK(config.env_paths == std::vector<std::string>{"e.json"});
    CHECK(config.variants == default_variants());
    CHECK(config.n_trials == 50);
    CHECK(config.base_seed == 0);
    CHECK(config.out_dir == "results");
    CHECK(config.parallelism == 0);
    // The remote section keeps its key-by-environment-variable default.
    CHECK(config.agents[0].remote.api_key_env == "PLANBENCH_API_KEY");
  }
  SUBCASE("from a file, relative to the file") {
    const std::filesystem::path dir = fresh_dir("cfg");
    {
      std::ofstream out(dir / "exp.json", std::ios::binary);
      out << R"({"envs": ["envs/x.json"], "agents": [{"type": "oracle"}]})";
    }
    const ExperimentConfig config =
        load_experiment_config((dir / "exp.json").string());
    CHECK(config.env_paths[0] == (dir / "envs/x.json").string());

    try {
      load_experiment_config((dir / "missing.json").string());
      FAIL("expected io_error");
    } catch (const Error& error) {
      CHECK(error.code() == ErrorCode::io_error);
    }
  }
}

TEST_CASE("misconfigured experiments are rejected with bad_config") {
  CHECK(config_error("{nope") == ErrorCode::parse_error);
  CHECK(config_error("[]") == ErrorCode::bad_config);
  CHECK(config_error("{}") == ErrorCode::bad_config);
  CHECK(config_error(R"({"envs": []})") == ErrorCode::bad_config);
  CHECK(config_error(R"({"envs": [42]})") == ErrorCode::bad_config);
  CHECK(config_error(R"({"envs": ["e"]})") == ErrorCode::bad_config);
  CHECK(config_error(R"({"envs": ["e"], "agents": []})") ==
        ErrorCode::bad_config);
  CHECK(config_error(R"({"envs": ["e"], "agents": [{}]})") ==
        ErrorCode::bad_config);
  CHECK(config_error(R"({"envs": ["e"], "agents": [{"type": "magic"}]})") ==
        ErrorCode::bad_config);
  CHECK(config_error(R"({"envs": ["e"], "agents": [{"type": "remote"}]})") ==
        ErrorCode::bad_config);
  CHECK(config_error(
            R"({"envs": ["e"], "agents": [{"type": "noisy", "p_geo": 1.5}]})") ==
        ErrorCode::bad_config);
  CHECK(config_error(
            R"({"envs": ["e"], "agents": [{"type": "noisy", "d": -0.1}]})") ==
        ErrorCode::bad_config);
  CHECK(config_error(
            R"({"envs": ["e"],
                "agents": [{"type": "oracle"}, {"type": "oracle"}]})") ==
        ErrorCode::bad_config);  // both default to id "oracle"
  CHECK(config_error(R"({"envs": ["e"], "agents": [{"type": "oracle"}],
                         "variants": []})") == ErrorCode::bad_config);
  CHECK(config_error(R"({"envs": ["e"], "agents": [{"type": "oracle"}],
                         "variants": ["CL-X"]})") == ErrorCode::bad_config);
  CHECK(config_error(R"({"envs": ["e"], "agents": [{"type": "oracle"}],
                         "n_trials": 0})") == ErrorCode::bad_config);
  CHECK(config_error(R"({"envs": ["e"], "agents": [{"type": "oracle"}],
                         "parallelism": -1})") == ErrorCode::bad_config);
}

TEST_CASE("per-trial seeds derive from the documented strings") {
  CHECK(world_seed_for(7, "cube_easy", 3) == derive_seed(7, "w|cube_easy|3"));
  CHECK(trial_seed_for(7, "cube_easy", "noisy", "CL-S", 3) ==
        derive_seed(7, "a|cube_easy|noisy|CL-S|3"));

  // The world draw ignores agent and variant; the agent stream does not.
  CHECK(world_seed_for(7, "cube_easy", 3) != world_seed_for(7, "cube_easy", 4));
  CHECK(world_seed_for(7, "cube_easy", 3) != world_seed_for(8, "cube_easy", 3));
  CHECK(trial_seed_for(7, "e", "a", "OL", 0) !=
        trial_seed_for(7, "e", "b", "OL", 0));
  CHECK(trial_seed_for(7, "e", "a", "OL", 0) !=
        trial_seed_for(7, "e", "a", "CL-F", 0));
  CHECK(trial_seed_for(7, "e", "a", "OL", 0) !=
        trial_seed_for(7, "e", "a", "OL", 1));
}

TEST_CASE("trial records survive a JSONL round trip") {
  TrialRecord record;
  record.env = "cube_easy";
  record.agent = "noisy-a";
  record.variant = "CL-S-NWS";
  record.trial_index = 17;
  record.world_seed = 0xDEADBEEFCAFEF00Dull;
  record.trial_seed = 0xFFFFFFFFFFFFFFFFull;
  record.metrics.goal_achieved = true;
  record.metrics.task_completed = false;
  record.metrics.final_logic_ok = false;
  record.metrics.pos_corrections = 2;
  record.metrics.pos_opportunities = 5;
  record.metrics.neg_corrections = 1;
  record.metrics.neg_opportunities = 6;
  record.metrics.valid = false;
  record.terminated_by = "budget_exhausted";
  record.queries_used = 7;
  record.iterations = 4;
  record.actions_executed = 13;
  record.error = "quote \" backslash \\ newline \n done";
  record.wall_ms = 12.625;

  const std::string line = to_json_line(record);
  CHECK(line.find('\n') == std::string::npos);  // one record per line
  const TrialRecord back = trial_record_from_json_line(line);
  CHECK(back.env == record.env);
  CHECK(back.agent == record.agent);
  CHECK(back.variant == record.variant);
  CHECK(back.trial_index == record.trial_index);
  CHECK(back.world_seed == record.world_seed);
  CHECK(back.trial_seed == record.trial_seed);
  CHECK(back.metrics == record.metrics);
  CHECK(back.terminated_by == record.terminated_by);
  CHECK(back.queries_used == record.queries_used);
  CHECK(back.iterations == record.iterations);
  CHECK(back.actions_executed == record.actions_executed);
  CHECK(back.error == record.error);
  CHECK(back.wall_ms == record.wall_ms);
  CHECK(to_json_line(back) == line);

  for (const char* bad :
       {"not json", "[1, 2]", "42", R"({"agent": "a"})",
        R"({"env": "e", "agent": "a", "variant": "OL"})",
        R"({"env": "e", "agent": "a", "variant": "OL",
            "metrics": {"goal_achieved": true}})"}) {
    CAPTURE(bad);
    try {
      trial_record_from_json_line(bad);
      FAIL("expected rejection of ", bad);
    } catch (const Error& error) {
      CHECK(error.code() == ErrorCode::parse_error);
    }
  }
}

TEST_CASE("a small grid runs in deterministic order and lands on disk") {
  const std::filesystem::path run1 = fresh_dir("run1");
  std::vector<std::string> seen;
  const std::vector<TrialRecord> records =
      run_experiment(small_grid(run1, 1), [&seen](const TrialRecord& record) {
        seen.push_back(record.agent + "/" + record.variant + "/" +
                       std::to_string(record.trial_index));
      });

  // env -> agent -> variant -> index enumeration order.
  REQUIRE(records.size() == 2 * 3 * 3);
  std::vector<std::string> expected;
  for (const char* agent : {"oracle", "noisy"}) {
    for (const char* variant : {"OL", "CL-F", "CL-S-NWS"}) {
      for (int index = 0; index < 3; ++index) {
        expected.push_back(std::string(agent) + "/" + variant + "/" +
                           std::to_string(index));
      }
    }
  }
  CHECK(seen == expected);
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(records[i].env == "cube_easy");
    CHECK(records[i].agent + "/" + records[i].variant + "/" +
              std::to_string(records[i].trial_index) ==
          expected[i]);
    CHECK(records[i].world_seed ==
          world_seed_for(42, "cube_easy", records[i].trial_index));
    CHECK(records[i].trial_seed ==
          trial_seed_for(42, "cube_easy", records[i].agent,
                         records[i].variant, records[i].trial_index));
    CHECK(records[i].wall_ms >= 0.0);
  }

  // The oracle always completes; its query usage follows the budget rule.
  for (const TrialRecord& record : records) {
    if (record.agent != "oracle") continue;
    CHECK(record.terminated_by == "task_complete");
    CHECK(record.metrics.task_completed);
    CHECK(record.metrics.valid);
    if (record.variant == "OL") {
      CHECK(record.queries_used == 1);
      CHECK(record.iterations == 1);
      CHECK(record.actions_executed == 14);
    } else if (record.variant == "CL-F") {
      CHECK(record.queries_used == 2);
    } else {
      CHECK(record.queries_used == 7);  // CL-S budget floor(14/2)
    }
  }
  for (const TrialRecord& record : records) {
    CHECK(record.terminated_by != "harness_error");
    CHECK(record.error.empty());
  }

  // results.jsonl carries the records verbatim, in the same order.
  const std::vector<std::string> lines = read_lines(run1 / "results.jsonl");
  REQUIRE(lines.size() == records.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    CHECK(lines[i] == to_json_line(records[i]));
  }

  // A rerun (even with a different worker count) reproduces every record
  // except the wall-clock timing.
  const std::filesystem::path run2 = fresh_dir("run2");
  const std::vector<TrialRecord> rerun = run_experiment(small_grid(run2, 2));
  REQUIRE(rerun.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(timeless_line(rerun[i]) == timeless_line(records[i]));
  }
}

TEST_CASE("closed-loop records reuse the stored open-loop outcome") {
  const std::filesystem::path dir = fresh_dir("shared");
  const ExperimentConfig config = small_grid(dir, 1);
  const std::vector<TrialRecord> records = run_experiment(config);

  // Recreate the noisy CL-F trial at index 1 by hand: the open-loop trial
  // runs first with its own seed, and its iteration-0 outcome becomes the
  // closed-loop trial's initial plan.
  const EnvSpec env = load_env_spec(config.env_paths[0]);
  const std::uint64_t world_seed = world_seed_for(42, env.name, 1);

  ErrorModel noise = config.agents[1].noise;
  noise.seed = trial_seed_for(42, env.name, "noisy", "OL", 1);
  NoisyAgent ol_agent(noise);
  const TrialTrace ol_trace = run_trial(
      env, ol_agent, parse_variant("OL").loop_config(env.k()), world_seed);
  REQUIRE_FALSE(ol_trace.iterations.empty());
  PlanOutcome shared;
  shared.response = ol_trace.iterations.front().response;
  shared.error = ol_trace.iterations.front().error;
  shared.message = ol_trace.iterations.front().error_message;
  shared.queries_consumed = ol_trace.iterations.front().queries_consumed;

  noise.seed = trial_seed_for(42, env.name, "noisy", "CL-F", 1);
  NoisyAgent cl_agent(noise);
  const TrialTrace cl_trace =
      run_trial(env, cl_agent, parse_variant("CL-F").loop_config(env.k()),
                world_seed, &shared);

  const TrialRecord* record = nullptr;
  for (const TrialRecord& candidate : records) {
    if (candidate.agent == "noisy" && candidate.variant == "CL-F" &&
        candidate.trial_index == 1) {
      record = &candidate;
    }
  }
  REQUIRE(record != nullptr);
  CHECK(record->metrics == compute_trial_metrics(env, cl_trace));
  CHECK(record->terminated_by == to_string(cl_trace.terminated_by));
  CHECK(record->queries_used == cl_trace.queries_used);
  CHECK(record->iterations == static_cast<int>(cl_trace.iterations.size()));
  int executed = 0;
  for (const IterationRecord& it : cl_trace.iterations) {
    executed += static_cast<int>(it.executed.size());
  }
  CHECK(record->actions_executed == executed);
  // Shared plan, distinct agent stream: iteration 0 matches the open-loop
  // response byte for byte.
  REQUIRE_FALSE(cl_trace.iterations.empty());
  CHECK(cl_trace.iterations.front().response ==
        ol_trace.iterations.front().response);
}

TEST_CASE("a grid without an open-loop variant still gets initial plans") {
  const std::filesystem::path dir = fresh_dir("no_ol");
  ExperimentConfig config = small_grid(dir, 1);
  config.agents = {config.agents[0]};  // oracle only
  config.variants = {parse_variant("CL-H")};
  config.n_trials = 2;
  const std::vector<TrialRecord> records = run_experiment(config);
  REQUIRE(records.size() == 2);
  for (const TrialRecord& record : records) {
    CHECK(record.variant == "CL-H");
    CHECK(record.terminated_by == "task_complete");
  }
}

TEST_CASE("an unreachable endpoint poisons its trials, never the batch") {
  const std::filesystem::path dir = fresh_dir("remote");
  ExperimentConfig config;
  config.env_paths = {asset_path("envs/cube_easy.json")};
  AgentConfig remote;
  remote.kind = AgentConfig::Kind::remote;
  remote.id = "remote";
  remote.remote.endpoint = "http://127.0.0.1:1/v1/chat/completions";
  remote.remote.model = "stub";
  remote.remote.api_key_env = "";
  remote.remote.timeout_sec = 1;
  remote.remote.max_retries = 0;
  config.agents = {remote};
  config.variants = {parse_variant("OL"), parse_variant("CL-S")};
  config.n_trials = 2;
  config.out_dir = dir.string();
  config.parallelism = 1;

  const std::vector<TrialRecord> records = run_experiment(config);
  REQUIRE(records.size() == 4);
  for (const TrialRecord& record : records) {
    CHECK(record.terminated_by == "agent_error");
    CHECK_FALSE(record.error.empty());
    CHECK(record.queries_used >= 1);
    CHECK(record.metrics.valid);  // ran and failed, still a valid trial
    CHECK_FALSE(record.metrics.goal_achieved);
    CHECK_FALSE(record.metrics.task_completed);
  }
}

TEST_CASE("an empty grid is rejected up front") {
  try {
    run_experiment(ExperimentConfig{});
    FAIL("expected bad_config");
  } catch (const Error& error) {
    CHECK(error.code() == ErrorCode::bad_config);
  }
}
