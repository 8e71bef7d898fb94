#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "planbench/util.hpp"

namespace planbench {

// One primitive command in the plan grammar:
//   pick(['obj'], {})
//   place(['obj'], {'x': 0.1, 'y': -0.2, 'theta': 1.5})
struct Action {
  enum class Kind { pick, place };

  Kind kind = Kind::pick;
  std::string obj;
  double x = 0.0;      // place only
  double y = 0.0;      // place only
  double theta = 0.0;  // place only

  bool operator==(const Action&) const = default;
};

// Raised on malformed action text; `offset` is the byte position of the
// first offending character.
class ActionParseError : public Error {
 public:
  ActionParseError(std::size_t offset, const std::string& message)
      : Error(ErrorCode::parse_error, message), offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Canonical text form.  Numbers use the shortest representation that parses
// back to the identical double, so format/parse round-trips are exact.
std::string format_action(const Action& action);

// Parses one action; the whole string must be consumed (trailing whitespace
// allowed).  Throws ActionParseError otherwise.
Action parse_action(std::string_view text);

std::vector<std::string> format_plan(const std::vector<Action>& plan);

}  // namespace planbench
