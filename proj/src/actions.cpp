#include "planbench/actions.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <system_error>

namespace planbench {

namespace {

// Shortest decimal text that round-trips to exactly this double.
std::string format_double(double value) {
  std::array<char, 32> buf;
  const auto result =
      std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), result.ptr);
}

class Scanner {
 public:
  explicit Scanner(std::string_view text) : text_(text) {}

  std::size_t pos() const { return pos_; }

  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ActionParseError(pos_, message + " at byte " + std::to_string(pos_));
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void expect(char ch) {
    skip_ws();
    if (peek() != ch) {
      fail(std::string("expected '") + ch + "'");
    }
    ++pos_;
  }

  bool try_consume(char ch) {
    skip_ws();
    if (peek() == ch) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::string_view identifier() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size()) {
      const char ch = text_[pos_];
      if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_') {
        ++pos_;
      } else {
        break;
      }
    }
    if (pos_ == start) fail("expected an identifier");
    return text_.substr(start, pos_ - start);
  }

  // Single- or double-quoted string, no escape sequences.
  std::string quoted() {
    skip_ws();
    const char quote = peek();
    if (quote != '\'' && quote != '"') fail("expected a quoted string");
    ++pos_;
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != quote) ++pos_;
    if (pos_ >= text_.size()) fail("unterminated quoted string");
    std::string out(text_.substr(start, pos_ - start));
    ++pos_;  // closing quote
    return out;
  }

  double number() {
    skip_ws();
    const std::size_t start = pos_;
    if (peek() == '+' || peek() == '-') ++pos_;
    std::size_t digits = 0;
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      ++pos_;
      ++digits;
    }
    if (peek() == '.') {
      ++pos_;
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        ++pos_;
        ++digits;
      }
    }
    if (digits == 0) {
      pos_ = start;
      fail("expected a number");
    }
    if (peek() == 'e' || peek() == 'E') {
      ++pos_;
      if (peek() == '+' || peek() == '-') ++pos_;
      std::size_t exp_digits = 0;
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        ++pos_;
        ++exp_digits;
      }
      if (exp_digits == 0) fail("expected exponent digits");
    }
    double value = 0.0;
    // std::from_chars rejects an explicit plus sign; skip it.
    const std::size_t numeric = text_[start] == '+' ? start + 1 : start;
    const auto result = std::from_chars(text_.data() + numeric,
                                        text_.data() + pos_, value);
    if (result.ec != std::errc{}) {
      pos_ = start;
      fail("unreadable number");
    }
    return value;
  }

  void expect_end() {
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters after action");
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string format_action(const Action& action) {
  std::string out;
  if (action.kind == Action::Kind::pick) {
    out = "pick(['" + action.obj + "'], {})";
  } else {
    out = "place(['" + action.obj + "'], {'x': " + format_double(action.x) +
          ", 'y': " + format_double(action.y) +
          ", 'theta': " + format_double(action.theta) + "})";
  }
  return out;
}

Action parse_action(std::string_view text) {
  Scanner scan(text);
  Action action;
  const std::string_view name = scan.identifier();
  if (name == "pick") {
    action.kind = Action::Kind::pick;
  } else if (name == "place") {
    action.kind = Action::Kind::place;
  } else {
    throw ActionParseError(0, "unknown action '" + std::string(name) + "'");
  }
  scan.expect('(');
  scan.expect('[');
  action.obj = scan.quoted();
  scan.expect(']');
  scan.expect(',');
  scan.expect('{');
  if (action.kind == Action::Kind::pick) {
    scan.expect('}');
  } else {
    bool have_x = false, have_y = false, have_theta = false;
    while (true) {
      const std::string key = scan.quoted();
      scan.expect(':');
      const double value = scan.number();
      if (key == "x" && !have_x) {
        action.x = value;
        have_x = true;
      } else if (key == "y" && !have_y) {
        action.y = value;
        have_y = true;
      } else if (key == "theta" && !have_theta) {
        action.theta = value;
        have_theta = true;
      } else {
        scan.fail("unexpected or repeated key '" + key + "'");
      }
      if (!scan.try_consume(',')) break;
    }
    scan.expect('}');
    if (!have_x || !have_y || !have_theta) {
      scan.fail("place needs 'x', 'y' and 'theta'");
    }
  }
  scan.expect(')');
  scan.expect_end();
  return action;
}

std::vector<std::string> format_plan(const std::vector<Action>& plan) {
  std::vector<std::string> out;
  out.reserve(plan.size());
  for (const Action& action : plan) out.push_back(format_action(action));
  return out;
}

}  // namespace planbench
