#include "planbench/remote.hpp"

#include <cctype>
#include <chrono>
#include <cstdlib>
#include <map>
#include <memory>
#include <mutex>
#include <thread>
#include <utility>

#include <httplib.h>
#include <json.hpp>

#include "planbench/actions.hpp"
#include "planbench/util.hpp"

namespace planbench {

namespace {

using nlohmann::json;

// Requests to one host are serialized and spaced out process-wide so that
// parallel trial workers cannot hammer a rate-limited API.
struct HostThrottle {
  std::mutex mu;
  std::chrono::steady_clock::time_point last{};
  bool used = false;
};

HostThrottle& throttle_for(const std::string& host) {
  static std::mutex registry_mu;
  static std::map<std::string, std::unique_ptr<HostThrottle>> registry;
  std::lock_guard<std::mutex> lock(registry_mu);
  std::unique_ptr<HostThrottle>& slot = registry[host];
  if (!slot) slot = std::make_unique<HostThrottle>();
  return *slot;
}

std::string_view trim(std::string_view text) {
  while (!text.empty() &&
         std::isspace(static_cast<unsigned char>(text.front()))) {
    text.remove_prefix(1);
  }
  while (!text.empty() &&
         std::isspace(static_cast<unsigned char>(text.back()))) {
    text.remove_suffix(1);
  }
  return text;
}

struct AttemptResult {
  bool ok = false;
  std::string content;  // message content on success
  std::string message;  // failure detail otherwise
};

}  // namespace

EndpointParts split_endpoint(const std::string& endpoint) {
  const std::size_t scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::bad_config,
                "endpoint '" + endpoint + "' has no scheme:// prefix");
  }
  const std::size_t path_start = endpoint.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    return {endpoint, "/"};
  }
  return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

std::string strip_code_fences(std::string_view text) {
  std::string_view t = trim(text);
  if (t.substr(0, 3) != "```") return std::string(t);
  const std::size_t first_newline = t.find('\n');
  if (first_newline == std::string_view::npos) return "";
  t = trim(t.substr(first_newline + 1));
  if (t.size() >= 3 && t.substr(t.size() - 3) == "```") {
    t = trim(t.substr(0, t.size() - 3));
  }
  return std::string(t);
}

ParsedOutput parse_model_output(const std::string& content) {
  ParsedOutput out;
  out.response.raw = content;

  const std::string stripped = strip_code_fences(content);
  json doc = json::parse(stripped, nullptr, false);
  if (doc.is_discarded()) {
    // Models sometimes wrap the object in prose; retry on the outermost
    // brace-delimited span before giving up.
    const std::size_t open = stripped.find('{');
    const std::size_t close = stripped.rfind('}');
    if (open != std::string::npos && close != std::string::npos &&
        close > open) {
      doc = json::parse(stripped.substr(open, close - open + 1), nullptr,
                        false);
    }
  }
  if (doc.is_discarded() || !doc.is_object()) {
    out.error = AgentError::malformed_output;
    out.message = "model output is not a JSON object";
    return out;
  }
  const auto plan_it = doc.find("Full Plan");
  if (plan_it == doc.end() || !plan_it->is_array()) {
    out.error = AgentError::malformed_output;
    out.message = "model output has no \"Full Plan\" array";
    return out;
  }
  if (const auto it = doc.find("Reasoning");
      it != doc.end() && it->is_string()) {
    out.response.reasoning = it->get<std::string>();
  }
  for (const json& entry : *plan_it) {
    if (!entry.is_string()) {
      out.error = AgentError::malformed_output;
      out.message = "\"Full Plan\" contains a non-string entry";
      return out;
    }
    const std::string text = entry.get<std::string>();
    try {
      out.response.plan.push_back(parse_action(text));
    } catch (const ActionParseError& err) {
      out.error = AgentError::unparseable_action;
      out.message = "cannot parse action '" + text + "': " + err.what();
      return out;
    }
  }
  return out;
}

RemoteAgent::RemoteAgent(RemoteConfig config)
    : RemoteAgent(std::move(config), PromptTemplates::builtin()) {}

RemoteAgent::RemoteAgent(RemoteConfig config, PromptTemplates templates)
    : config_(std::move(config)), templates_(std::move(templates)) {}

std::string RemoteAgent::name() const {
  return config_.model.empty() ? std::string("remote") : config_.model;
}

PlanOutcome RemoteAgent::plan(const PlanRequest& request) {
  PlanOutcome outcome;
  outcome.queries_consumed = 0;

  EndpointParts parts;
  try {
    parts = split_endpoint(config_.endpoint);
  } catch (const Error& err) {
    outcome.error = AgentError::transport;
    outcome.message = err.what();
    outcome.queries_consumed = 1;
    return outcome;
  }

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (parts.host.rfind("https://", 0) == 0) {
    outcome.error = AgentError::transport;
    outcome.message =
        "endpoint '" + config_.endpoint +
        "' needs TLS but this build has no OpenSSL support";
    outcome.queries_consumed = 1;
    return outcome;
  }
#endif

  httplib::Headers headers = {{"Content-Type", "application/json"}};
  if (!config_.api_key_env.empty()) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      outcome.error = AgentError::transport;
      outcome.message = "environment variable '" + config_.api_key_env +
                        "' is not set (expected the API key there)";
      outcome.queries_consumed = 1;
      return outcome;
    }
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  const json body = {
      {"model", config_.model},
      {"messages",
       json::array({json{{"role", "user"},
                         {"content", render_prompt(templates_, request)}}})},
      {"temperature", config_.temperature},
  };
  const std::string payload = body.dump();

  const auto attempt_once = [&]() -> AttemptResult {
    HostThrottle& throttle = throttle_for(parts.host);
    std::unique_lock<std::mutex> lock(throttle.mu);
    if (throttle.used && config_.min_interval_ms > 0) {
      std::this_thread::sleep_until(
          throttle.last + std::chrono::milliseconds(config_.min_interval_ms));
    }

    httplib::Client client(parts.host);
    client.set_connection_timeout(config_.timeout_sec);
    client.set_read_timeout(config_.timeout_sec);
    client.set_write_timeout(config_.timeout_sec);
    httplib::Result result =
        client.Post(parts.path, headers, payload, "application/json");

    throttle.last = std::chrono::steady_clock::now();
    throttle.used = true;
    lock.unlock();

    if (!result) {
      return {false, "", "request to '" + config_.endpoint +
                             "' failed: " + httplib::to_string(result.error())};
    }
    if (result->status != 200) {
      return {false, "",
              "endpoint returned HTTP " + std::to_string(result->status)};
    }
    const json reply = json::parse(result->body, nullptr, false);
    if (reply.is_discarded()) {
      return {false, "", "endpoint reply is not JSON"};
    }
    const json* content = nullptr;
    if (const auto choices = reply.find("choices");
        choices != reply.end() && choices->is_array() && !choices->empty()) {
      const json& first = choices->front();
      if (first.contains("message") && first["message"].contains("content") &&
          first["message"]["content"].is_string()) {
        content = &first["message"]["content"];
      }
    }
    if (content == nullptr) {
      return {false, "",
              "endpoint reply has no choices[0].message.content string"};
    }
    return {true, content->get<std::string>(), ""};
  };

  const int attempts_allowed =
      std::max(1, std::min(config_.max_retries + 1, request.attempts_allowed));
  AgentError last_error = AgentError::transport;
  std::string last_message;
  for (int attempt = 0; attempt < attempts_allowed; ++attempt) {
    ++outcome.queries_consumed;
    const AttemptResult sent = attempt_once();
    if (!sent.ok) {
      last_error = AgentError::transport;
      last_message = sent.message;
      continue;
    }
    ParsedOutput parsed = parse_model_output(sent.content);
    if (parsed.ok()) {
      outcome.response = std::move(parsed.response);
      outcome.error = AgentError::none;
      outcome.message.clear();
      return outcome;
    }
    last_error = parsed.error;
    last_message = parsed.message;
  }
  outcome.error = last_error;
  outcome.message = last_message;
  return outcome;
}

}  // namespace planbench
