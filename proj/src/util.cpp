#include "planbench/util.hpp"

namespace planbench {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ok: return "ok";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::bad_config: return "bad_config";
    case ErrorCode::unsatisfiable: return "unsatisfiable";
    case ErrorCode::unknown_object: return "unknown_object";
    case ErrorCode::bad_sample: return "bad_sample";
    case ErrorCode::too_large: return "too_large";
    case ErrorCode::empty_scenario: return "empty_scenario";
    case ErrorCode::transport: return "transport";
    case ErrorCode::internal: return "internal";
  }
  return "unknown";
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view scope) {
  std::string key = std::to_string(base);
  key.push_back('|');
  key.append(scope);
  return fnv1a64(key);
}

}  // namespace planbench
