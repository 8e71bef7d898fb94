#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace planbench {

// Error codes surfaced through both the C++ and the C interfaces.
enum class ErrorCode {
  ok = 0,
  invalid_argument,
  parse_error,
  io_error,
  bad_config,
  unsatisfiable,
  unknown_object,
  bad_sample,
  too_large,
  empty_scenario,
  transport,
  internal,
};

const char* to_string(ErrorCode code);

// Domain error carrying a stable code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// FNV-1a 64-bit hash.  All derived seeds go through this so that runs are
// reproducible across platforms and standard-library versions.
std::uint64_t fnv1a64(std::string_view text);

// Derives a child seed from a parent seed plus a textual scope, e.g.
// derive_seed(base, "w|cube_easy|17").
std::uint64_t derive_seed(std::uint64_t base, std::string_view scope);

// Deterministic uniform generator.  mt19937_64 with explicit double
// conversion; std::uniform_real_distribution is not guaranteed to produce
// identical streams across library implementations, so it is avoided.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1).
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection sampling keeps the draw unbiased.
    const std::uint64_t limit = n * (UINT64_MAX / n);
    std::uint64_t v = engine_();
    while (v >= limit) v = engine_();
    return v % n;
  }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace planbench
