#include "planbench.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "planbench/env.hpp"
#include "planbench/experiment.hpp"
#include "planbench/report.hpp"
#include "planbench/util.hpp"

struct pb_env {
  planbench::EnvSpec spec;
};

namespace {

constexpr const char kVersion[] = "1.0.0";

thread_local std::string g_last_error;

pb_status status_from(planbench::ErrorCode code) {
  using planbench::ErrorCode;
  switch (code) {
    case ErrorCode::ok: return PB_OK;
    case ErrorCode::invalid_argument: return PB_ERR_INVALID_ARGUMENT;
    case ErrorCode::parse_error: return PB_ERR_PARSE;
    case ErrorCode::io_error: return PB_ERR_IO;
    case ErrorCode::bad_config: return PB_ERR_BAD_CONFIG;
    case ErrorCode::unsatisfiable: return PB_ERR_UNSATISFIABLE;
    case ErrorCode::unknown_object: return PB_ERR_UNKNOWN_OBJECT;
    case ErrorCode::bad_sample: return PB_ERR_BAD_SAMPLE;
    case ErrorCode::too_large: return PB_ERR_TOO_LARGE;
    case ErrorCode::empty_scenario: return PB_ERR_EMPTY_SCENARIO;
    case ErrorCode::transport: return PB_ERR_TRANSPORT;
    case ErrorCode::internal: return PB_ERR_INTERNAL;
  }
  return PB_ERR_INTERNAL;
}

// Runs the body with exceptions converted to status codes and the thread's
// last-error slot maintained.
template <typename Fn>
pb_status guarded(Fn&& body) {
  g_last_error.clear();
  try {
    return body();
  } catch (const planbench::Error& err) {
    g_last_error = err.what();
    return status_from(err.code());
  } catch (const std::exception& err) {
    g_last_error = err.what();
    return PB_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return PB_ERR_INTERNAL;
  }
}

pb_status fail(pb_status status, const char* message) {
  g_last_error = message;
  return status;
}

void copy_out(const std::string& value, char* buf, size_t len) {
  if (buf == nullptr || len == 0) return;
  const size_t n = std::min(value.size(), len - 1);
  std::memcpy(buf, value.data(), n);
  buf[n] = '\0';
}

}  // namespace

extern "C" {

const char* pb_version(void) { return kVersion; }

const char* pb_last_error(void) { return g_last_error.c_str(); }

pb_status pb_env_open(const char* path, pb_env** out_env) {
  if (path == nullptr || out_env == nullptr) {
    return fail(PB_ERR_INVALID_ARGUMENT, "path and out_env must be non-NULL");
  }
  *out_env = nullptr;
  return guarded([&]() {
    auto env = std::make_unique<pb_env>();
    env->spec = planbench::load_env_spec(path);
    *out_env = env.release();
    return PB_OK;
  });
}

void pb_env_close(pb_env* env) { delete env; }

const char* pb_env_name(const pb_env* env) {
  return env != nullptr ? env->spec.name.c_str() : nullptr;
}

int pb_env_task_length(const pb_env* env) {
  return env != nullptr ? env->spec.k() : 0;
}

int pb_env_constraint_count(const pb_env* env) {
  return env != nullptr ? static_cast<int>(env->spec.constraints.size()) : 0;
}

const char* pb_env_object_name(const pb_env* env, int index) {
  if (env == nullptr || index < 0 || index >= env->spec.k()) return nullptr;
  return env->spec.roster[static_cast<std::size_t>(index)].name.c_str();
}

pb_status pb_env_satisfying_orders(const pb_env* env, uint64_t* out_count) {
  if (env == nullptr || out_count == nullptr) {
    return fail(PB_ERR_INVALID_ARGUMENT, "env and out_count must be non-NULL");
  }
  return guarded([&]() {
    *out_count =
        static_cast<uint64_t>(planbench::count_satisfying_orders(env->spec));
    return PB_OK;
  });
}

pb_status pb_run_experiment(const char* config_path,
                            const pb_run_options* options,
                            char* out_results_dir,
                            size_t out_results_dir_len) {
  if (config_path == nullptr) {
    return fail(PB_ERR_INVALID_ARGUMENT, "config_path must be non-NULL");
  }
  return guarded([&]() {
    planbench::ExperimentConfig config =
        planbench::load_experiment_config(config_path);

    if (options != nullptr) {
      if (options->out_dir != nullptr) config.out_dir = options->out_dir;
      if (options->base_seed != nullptr) config.base_seed = *options->base_seed;
      if (options->parallelism > 0) config.parallelism = options->parallelism;
      if (options->agents != nullptr && options->n_agents > 0) {
        std::vector<planbench::AgentConfig> selected;
        for (size_t i = 0; i < options->n_agents; ++i) {
          const std::string wanted = options->agents[i];
          const auto it = std::find_if(
              config.agents.begin(), config.agents.end(),
              [&](const planbench::AgentConfig& a) { return a.id == wanted; });
          if (it == config.agents.end()) {
            throw planbench::Error(
                planbench::ErrorCode::bad_config,
                "agent '" + wanted + "' is not in the config");
          }
          selected.push_back(*it);
        }
        config.agents = std::move(selected);
      }
      if (options->variants != nullptr && options->n_variants > 0) {
        config.variants.clear();
        for (size_t i = 0; i < options->n_variants; ++i) {
          config.variants.push_back(
              planbench::parse_variant(options->variants[i]));
        }
      }
    }

    const auto on_record =
        options != nullptr && options->on_record != nullptr
            ? std::function<void(const planbench::TrialRecord&)>(
                  [options](const planbench::TrialRecord& record) {
                    options->on_record(planbench::to_json_line(record).c_str(),
                                       options->user_data);
                  })
            : std::function<void(const planbench::TrialRecord&)>();

    planbench::run_experiment(config, on_record);
    copy_out(config.out_dir, out_results_dir, out_results_dir_len);
    return PB_OK;
  });
}

pb_status pb_generate_report(const char* results_dir, const char* out_dir) {
  if (results_dir == nullptr) {
    return fail(PB_ERR_INVALID_ARGUMENT, "results_dir must be non-NULL");
  }
  return guarded([&]() {
    planbench::generate_report(results_dir,
                               out_dir != nullptr ? out_dir : "");
    return PB_OK;
  });
}

}  // extern "C"
