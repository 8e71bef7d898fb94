#pragma once

#include <string>
#include <string_view>

#include "planbench/agents.hpp"
#include "planbench/prompts.hpp"

namespace planbench {

// OpenAI-style chat-completion endpoint.  The API key is read from the
// process environment (never stored in configs or code); set api_key_env to
// "" for endpoints that need no Authorization header.
struct RemoteConfig {
  std::string endpoint;  // e.g. "https://api.openai.com/v1/chat/completions"
  std::string model;
  std::string api_key_env = "PLANBENCH_API_KEY";
  double temperature = 0.0;
  int timeout_sec = 60;
  // Extra attempts after a failed query (transport or unparseable output).
  // Each attempt consumes one query from the trial budget.
  int max_retries = 2;
  // Minimum spacing between requests to the same host, shared process-wide.
  int min_interval_ms = 0;
};

// "scheme://host[:port][/path]" split into the client target and the
// request path ("/" when the URL has none).
struct EndpointParts {
  std::string host;  // scheme-qualified, e.g. "http://localhost:8080"
  std::string path;
};

EndpointParts split_endpoint(const std::string& endpoint);

// Removes a surrounding Markdown code fence (``` or ```json) if present;
// otherwise returns the trimmed text unchanged.
std::string strip_code_fences(std::string_view text);

struct ParsedOutput {
  PlanResponse response;
  AgentError error = AgentError::none;
  std::string message;

  bool ok() const { return error == AgentError::none; }
};

// Interprets raw model text as the requested JSON object with "Reasoning"
// and "Full Plan" keys, parsing each plan entry as an action.
ParsedOutput parse_model_output(const std::string& content);

// Planner backed by a remote chat-completion model.  Builds the prompt for
// the request, POSTs it, and parses the reply; failed attempts are retried
// up to the smaller of max_retries and the request's attempt allowance, and
// every attempt counts as one consumed query.
class RemoteAgent : public PlannerAgent {
 public:
  explicit RemoteAgent(RemoteConfig config);
  RemoteAgent(RemoteConfig config, PromptTemplates templates);

  PlanOutcome plan(const PlanRequest& request) override;
  std::string name() const override;

 private:
  RemoteConfig config_;
  PromptTemplates templates_;
};

}  // namespace planbench
