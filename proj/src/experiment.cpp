#include "planbench/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>
#include <utility>

#include <json.hpp>

#include "planbench/util.hpp"

namespace planbench {

namespace {

using nlohmann::json;

ErrorModel noise_from_json(const json& doc) {
  ErrorModel model;
  model.p_geo = doc.value("p_geo", 0.0);
  model.d = doc.value("d", 0.04);
  model.p_log = doc.value("p_log", 0.0);
  model.memoryful = doc.value("memoryful", true);
  if (model.p_geo < 0.0 || model.p_geo > 1.0 || model.p_log < 0.0 ||
      model.p_log > 1.0 || model.d < 0.0) {
    throw Error(ErrorCode::bad_config, "noise probabilities must be in [0, 1]");
  }
  return model;
}

RemoteConfig remote_from_json(const json& doc) {
  RemoteConfig remote;
  if (!doc.contains("endpoint") || !doc["endpoint"].is_string()) {
    throw Error(ErrorCode::bad_config, "remote agent needs an endpoint");
  }
  remote.endpoint = doc["endpoint"].get<std::string>();
  remote.model = doc.value("model", std::string());
  remote.api_key_env = doc.value("api_key_env", remote.api_key_env);
  remote.temperature = doc.value("temperature", remote.temperature);
  remote.timeout_sec = doc.value("timeout_sec", remote.timeout_sec);
  remote.max_retries = doc.value("max_retries", remote.max_retries);
  remote.min_interval_ms = doc.value("min_interval_ms", remote.min_interval_ms);
  return remote;
}

std::unique_ptr<PlannerAgent> make_agent(const AgentConfig& config,
                                         std::uint64_t trial_seed) {
  switch (config.kind) {
    case AgentConfig::Kind::oracle:
      return std::make_unique<OracleAgent>();
    case AgentConfig::Kind::noisy: {
      ErrorModel model = config.noise;
      model.seed = trial_seed;
      return std::make_unique<NoisyAgent>(model);
    }
    case AgentConfig::Kind::remote:
      return std::make_unique<RemoteAgent>(config.remote);
  }
  throw Error(ErrorCode::internal, "unhandled agent kind");
}

// Recovers the iteration-0 plan outcome from an open-loop trace so the
// closed-loop variants can reuse it verbatim.
PlanOutcome shared_outcome_from(const TrialTrace& trace) {
  PlanOutcome outcome;
  if (trace.iterations.empty()) {
    outcome.error = AgentError::transport;
    outcome.message = "open-loop trial recorded no iterations";
    return outcome;
  }
  const IterationRecord& first = trace.iterations.front();
  outcome.response = first.response;
  outcome.error = first.error;
  outcome.message = first.error_message;
  outcome.queries_consumed = first.queries_consumed;
  return outcome;
}

int count_executed(const TrialTrace& trace) {
  int n = 0;
  for (const IterationRecord& it : trace.iterations) {
    n += static_cast<int>(it.executed.size());
  }
  return n;
}

TrialRecord record_from_trace(const EnvSpec& env, const TrialTrace& trace) {
  TrialRecord record;
  record.metrics = compute_trial_metrics(env, trace);
  record.terminated_by = to_string(trace.terminated_by);
  record.queries_used = trace.queries_used;
  record.iterations = static_cast<int>(trace.iterations.size());
  record.actions_executed = count_executed(trace);
  if (trace.terminated_by == Termination::agent_error &&
      !trace.iterations.empty()) {
    record.error = trace.iterations.back().error_message;
  }
  return record;
}

}  // namespace

LoopConfig VariantSpec::loop_config(int k) const {
  LoopConfig config;
  config.mode = mode;
  if (mode == LoopConfig::Mode::closed_loop) {
    config.control_horizon = control_horizon_for(horizon, k);
    config.warm_start = warm_start;
    config.initial_plan_source = LoopConfig::InitialPlanSource::shared_open_loop;
  }
  return config;
}

VariantSpec parse_variant(const std::string& label) {
  VariantSpec spec;
  spec.label = label;
  if (label == "OL") {
    spec.mode = LoopConfig::Mode::open_loop;
    return spec;
  }
  std::string body = label;
  if (body.size() > 4 && body.substr(body.size() - 4) == "-NWS") {
    spec.warm_start = false;
    body = body.substr(0, body.size() - 4);
  }
  spec.mode = LoopConfig::Mode::closed_loop;
  if (body == "CL-F") {
    spec.horizon = HorizonSetting::full_h;
  } else if (body == "CL-H") {
    spec.horizon = HorizonSetting::half_h;
  } else if (body == "CL-S") {
    spec.horizon = HorizonSetting::short_h;
  } else {
    throw Error(ErrorCode::bad_config,
                "unknown planner variant '" + label +
                    "' (expected OL, CL-F, CL-H, CL-S, or a -NWS twin)");
  }
  return spec;
}

std::vector<VariantSpec> default_variants() {
  std::vector<VariantSpec> variants;
  for (const char* label :
       {"CL-F", "CL-H", "CL-H-NWS", "CL-S", "CL-S-NWS", "OL"}) {
    variants.push_back(parse_variant(label));
  }
  return variants;
}

std::uint64_t world_seed_for(std::uint64_t base, const std::string& env,
                             int index) {
  return derive_seed(base, "w|" + env + "|" + std::to_string(index));
}

std::uint64_t trial_seed_for(std::uint64_t base, const std::string& env,
                             const std::string& agent,
                             const std::string& variant, int index) {
  return derive_seed(base, "a|" + env + "|" + agent + "|" + variant + "|" +
                               std::to_string(index));
}

ExperimentConfig experiment_config_from_json_text(const std::string& text,
                                                  const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& err) {
    throw Error(ErrorCode::parse_error,
                std::string("experiment config: ") + err.what());
  }
  if (!doc.is_object()) {
    throw Error(ErrorCode::bad_config, "experiment config must be an object");
  }

  const auto resolve = [&base_dir](const std::string& path) {
    const std::filesystem::path p(path);
    if (p.is_absolute() || base_dir.empty()) return path;
    return (std::filesystem::path(base_dir) / p).string();
  };

  ExperimentConfig config;
  if (!doc.contains("envs") || !doc["envs"].is_array() ||
      doc["envs"].empty()) {
    throw Error(ErrorCode::bad_config,
                "experiment config needs a non-empty \"envs\" array");
  }
  for (const json& entry : doc["envs"]) {
    if (!entry.is_string()) {
      throw Error(ErrorCode::bad_config, "\"envs\" entries must be paths");
    }
    config.env_paths.push_back(resolve(entry.get<std::string>()));
  }

  if (!doc.contains("agents") || !doc["agents"].is_array() ||
      doc["agents"].empty()) {
    throw Error(ErrorCode::bad_config,
                "experiment config needs a non-empty \"agents\" array");
  }
  for (const json& entry : doc["agents"]) {
    if (!entry.is_object() || !entry.contains("type")) {
      throw Error(ErrorCode::bad_config,
                  "each agent needs at least a \"type\"");
    }
    AgentConfig agent;
    const std::string type = entry["type"].get<std::string>();
    if (type == "oracle") {
      agent.kind = AgentConfig::Kind::oracle;
    } else if (type == "noisy") {
      agent.kind = AgentConfig::Kind::noisy;
      agent.noise = noise_from_json(entry);
    } else if (type == "remote") {
      agent.kind = AgentConfig::Kind::remote;
      agent.remote = remote_from_json(entry);
    } else {
      throw Error(ErrorCode::bad_config, "unknown agent type '" + type + "'");
    }
    agent.id = entry.value("id", type);
    for (const AgentConfig& other : config.agents) {
      if (other.id == agent.id) {
        throw Error(ErrorCode::bad_config,
                    "duplicate agent id '" + agent.id + "'");
      }
    }
    config.agents.push_back(std::move(agent));
  }

  if (doc.contains("variants")) {
    if (!doc["variants"].is_array() || doc["variants"].empty()) {
      throw Error(ErrorCode::bad_config,
                  "\"variants\" must be a non-empty array of labels");
    }
    for (const json& entry : doc["variants"]) {
      config.variants.push_back(parse_variant(entry.get<std::string>()));
    }
  } else {
    config.variants = default_variants();
  }

  config.n_trials = doc.value("n_trials", config.n_trials);
  if (config.n_trials < 1) {
    throw Error(ErrorCode::bad_config, "n_trials must be >= 1");
  }
  config.base_seed = doc.value("base_seed", config.base_seed);
  config.out_dir = resolve(doc.value("out_dir", config.out_dir));
  config.parallelism = doc.value("parallelism", config.parallelism);
  if (config.parallelism < 0) {
    throw Error(ErrorCode::bad_config, "parallelism must be >= 0");
  }
  return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::io_error,
                "cannot read experiment config '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return experiment_config_from_json_text(
      buf.str(), std::filesystem::path(path).parent_path().string());
}

std::string to_json_line(const TrialRecord& record) {
  const json metrics = {
      {"goal_achieved", record.metrics.goal_achieved},
      {"task_completed", record.metrics.task_completed},
      {"final_logic_ok", record.metrics.final_logic_ok},
      {"pos_corrections", record.metrics.pos_corrections},
      {"pos_opportunities", record.metrics.pos_opportunities},
      {"neg_corrections", record.metrics.neg_corrections},
      {"neg_opportunities", record.metrics.neg_opportunities},
      {"valid", record.metrics.valid},
  };
  const json doc = {
      {"env", record.env},
      {"agent", record.agent},
      {"variant", record.variant},
      {"trial_index", record.trial_index},
      {"world_seed", record.world_seed},
      {"trial_seed", record.trial_seed},
      {"metrics", metrics},
      {"terminated_by", record.terminated_by},
      {"queries_used", record.queries_used},
      {"iterations", record.iterations},
      {"actions_executed", record.actions_executed},
      {"error", record.error},
      {"wall_ms", record.wall_ms},
  };
  return doc.dump();
}

TrialRecord trial_record_from_json_line(const std::string& line) {
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::exception& err) {
    throw Error(ErrorCode::parse_error,
                std::string("trial record: ") + err.what());
  }
  if (!doc.is_object()) {
    throw Error(ErrorCode::parse_error, "trial record must be an object");
  }
  TrialRecord record;
  try {
    record.env = doc.at("env").get<std::string>();
    record.agent = doc.at("agent").get<std::string>();
    record.variant = doc.at("variant").get<std::string>();
    record.trial_index = doc.value("trial_index", 0);
    record.world_seed = doc.value("world_seed", std::uint64_t{0});
    record.trial_seed = doc.value("trial_seed", std::uint64_t{0});
    const json& metrics = doc.at("metrics");
    record.metrics.goal_achieved = metrics.at("goal_achieved").get<bool>();
    record.metrics.task_completed = metrics.at("task_completed").get<bool>();
    record.metrics.final_logic_ok = metrics.at("final_logic_ok").get<bool>();
    record.metrics.pos_corrections =
        metrics.at("pos_corrections").get<int>();
    record.metrics.pos_opportunities =
        metrics.at("pos_opportunities").get<int>();
    record.metrics.neg_corrections =
        metrics.at("neg_corrections").get<int>();
    record.metrics.neg_opportunities =
        metrics.at("neg_opportunities").get<int>();
    record.metrics.valid = metrics.value("valid", true);
    record.terminated_by = doc.value("terminated_by", std::string());
    record.queries_used = doc.value("queries_used", 0);
    record.iterations = doc.value("iterations", 0);
    record.actions_executed = doc.value("actions_executed", 0);
    record.error = doc.value("error", std::string());
    record.wall_ms = doc.value("wall_ms", 0.0);
  } catch (const json::exception& err) {
    throw Error(ErrorCode::parse_error,
                std::string("trial record: ") + err.what());
  }
  return record;
}

std::vector<TrialRecord> run_experiment(
    const ExperimentConfig& config,
    const std::function<void(const TrialRecord&)>& on_record) {
  if (config.env_paths.empty() || config.agents.empty() ||
      config.variants.empty() || config.n_trials < 1) {
    throw Error(ErrorCode::bad_config,
                "experiment needs envs, agents, variants, and n_trials >= 1");
  }

  std::vector<EnvSpec> envs;
  envs.reserve(config.env_paths.size());
  for (const std::string& path : config.env_paths) {
    envs.push_back(load_env_spec(path));
  }

  // One work unit per (env, agent, index): the open-loop trial runs first
  // and its initial plan is handed to every closed-loop variant.
  struct Unit {
    int env = 0;
    int agent = 0;
    int index = 0;
  };
  std::vector<Unit> units;
  for (int e = 0; e < static_cast<int>(envs.size()); ++e) {
    for (int a = 0; a < static_cast<int>(config.agents.size()); ++a) {
      for (int i = 0; i < config.n_trials; ++i) {
        units.push_back({e, a, i});
      }
    }
  }

  // Records land in preassigned slots so the output order is independent of
  // thread scheduling: env -> agent -> variant -> index.
  const std::size_t n_variants = config.variants.size();
  const auto slot_of = [&](const Unit& unit, std::size_t variant) {
    return (static_cast<std::size_t>(unit.env) * config.agents.size() +
            unit.agent) *
               n_variants * config.n_trials +
           variant * config.n_trials + unit.index;
  };
  std::vector<TrialRecord> records(envs.size() * config.agents.size() *
                                   n_variants * config.n_trials);

  const auto run_unit = [&](const Unit& unit) {
    const EnvSpec& env = envs[unit.env];
    const AgentConfig& agent_config = config.agents[unit.agent];
    const std::uint64_t world_seed =
        world_seed_for(config.base_seed, env.name, unit.index);

    const auto run_one = [&](const VariantSpec& variant,
                             const PlanOutcome* shared) {
      TrialRecord record;
      record.env = env.name;
      record.agent = agent_config.id;
      record.variant = variant.label;
      record.trial_index = unit.index;
      record.world_seed = world_seed;
      record.trial_seed = trial_seed_for(config.base_seed, env.name,
                                         agent_config.id, variant.label,
                                         unit.index);
      const auto started = std::chrono::steady_clock::now();
      TrialTrace trace;
      bool crashed = false;
      try {
        const std::unique_ptr<PlannerAgent> agent =
            make_agent(agent_config, record.trial_seed);
        trace = run_trial(env, *agent, variant.loop_config(env.k()),
                          world_seed, shared);
      } catch (const std::exception& err) {
        // A harness-side failure poisons this trial only, never the batch.
        crashed = true;
        record.terminated_by = "harness_error";
        record.error = err.what();
      }
      if (!crashed) {
        const TrialRecord summary = record_from_trace(env, trace);
        record.metrics = summary.metrics;
        record.terminated_by = summary.terminated_by;
        record.queries_used = summary.queries_used;
        record.iterations = summary.iterations;
        record.actions_executed = summary.actions_executed;
        record.error = summary.error;
      }
      record.wall_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - started)
                           .count();
      return std::make_pair(record, trace);
    };

    // The open-loop trial always runs: it is either a reported variant or
    // merely the source of the shared initial plan (or both).
    const VariantSpec open_loop = parse_variant("OL");
    auto [ol_record, ol_trace] = run_one(open_loop, nullptr);
    const PlanOutcome shared = shared_outcome_from(ol_trace);

    for (std::size_t v = 0; v < n_variants; ++v) {
      const VariantSpec& variant = config.variants[v];
      if (variant.mode == LoopConfig::Mode::open_loop) {
        records[slot_of(unit, v)] = ol_record;
        continue;
      }
      records[slot_of(unit, v)] = run_one(variant, &shared).first;
    }
  };

  int workers = config.parallelism;
  if (workers <= 0) {
    workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers <= 0) workers = 1;
  }
  workers = std::min<int>(workers, static_cast<int>(units.size()));

  if (workers <= 1) {
    for (const Unit& unit : units) run_unit(unit);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= units.size()) return;
          run_unit(units[i]);
        }
      });
    }
    for (std::thread& worker : pool) worker.join();
  }

  std::filesystem::create_directories(config.out_dir);
  const std::filesystem::path results_path =
      std::filesystem::path(config.out_dir) / "results.jsonl";
  std::ofstream out(results_path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::io_error,
                "cannot write '" + results_path.string() + "'");
  }
  for (const TrialRecord& record : records) {
    out << to_json_line(record) << "\n";
    if (on_record) on_record(record);
  }
  return records;
}

}  // namespace planbench
