#include "planbench/constraints.hpp"

#include <algorithm>
#include <cstdlib>

namespace planbench {

namespace {

std::optional<int> last_match(std::span<const PlacementEvent> events,
                              const ObjRef& ref) {
  for (int i = static_cast<int>(events.size()) - 1; i >= 0; --i) {
    if (event_matches(events[static_cast<std::size_t>(i)], ref)) return i;
  }
  return std::nullopt;
}

}  // namespace

const char* to_string(ConstraintAtom::Kind kind) {
  switch (kind) {
    case ConstraintAtom::Kind::placed_after_all: return "placed_after_all";
    case ConstraintAtom::Kind::placed_before_all: return "placed_before_all";
    case ConstraintAtom::Kind::adjacent: return "adjacent";
    case ConstraintAtom::Kind::immediately_after: return "immediately_after";
    case ConstraintAtom::Kind::not_consecutive: return "not_consecutive";
    case ConstraintAtom::Kind::not_first: return "not_first";
    case ConstraintAtom::Kind::not_last: return "not_last";
    case ConstraintAtom::Kind::no_repeat: return "no_repeat";
  }
  return "unknown";
}

bool event_matches(const PlacementEvent& event, const ObjRef& ref) {
  if (event.obj != ref.obj) return false;
  if (ref.dest.has_value()) {
    return event.dest_kind.has_value() && *event.dest_kind == *ref.dest;
  }
  return true;
}

std::optional<int> first_match(std::span<const PlacementEvent> events,
                               const ObjRef& ref) {
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (event_matches(events[i], ref)) return static_cast<int>(i);
  }
  return std::nullopt;
}

bool atom_satisfied(const ConstraintAtom& atom,
                    std::span<const PlacementEvent> events) {
  using Kind = ConstraintAtom::Kind;
  switch (atom.kind) {
    case Kind::placed_after_all: {
      const auto subject = first_match(events, atom.subject);
      if (!subject) return false;
      return std::all_of(atom.refs.begin(), atom.refs.end(),
                         [&](const ObjRef& ref) {
                           const auto pos = first_match(events, ref);
                           return pos && *pos < *subject;
                         });
    }
    case Kind::placed_before_all: {
      const auto subject = first_match(events, atom.subject);
      if (!subject) return false;
      return std::all_of(atom.refs.begin(), atom.refs.end(),
                         [&](const ObjRef& ref) {
                           const auto pos = first_match(events, ref);
                           return pos && *subject < *pos;
                         });
    }
    case Kind::adjacent: {
      const auto a = first_match(events, atom.subject);
      const auto b = first_match(events, atom.refs.at(0));
      return a && b && std::abs(*a - *b) == 1;
    }
    case Kind::immediately_after: {
      const auto subject = first_match(events, atom.subject);
      const auto anchor = first_match(events, atom.refs.at(0));
      return subject && anchor && *subject == *anchor + 1;
    }
    case Kind::not_consecutive: {
      const auto a = first_match(events, atom.subject);
      const auto b = first_match(events, atom.refs.at(0));
      return a && b && std::abs(*a - *b) != 1;
    }
    case Kind::not_first: {
      const auto subject = first_match(events, atom.subject);
      return subject && *subject != 0;
    }
    case Kind::not_last: {
      const auto subject = last_match(events, atom.subject);
      return subject && *subject != static_cast<int>(events.size()) - 1;
    }
    case Kind::no_repeat: {
      for (std::size_t i = 0; i < events.size(); ++i) {
        for (std::size_t j = i + 1; j < events.size(); ++j) {
          if (events[i].obj == events[j].obj) return false;
        }
      }
      return true;
    }
  }
  return false;
}

int count_violations(const std::vector<Constraint>& constraints,
                     std::span<const PlacementEvent> events) {
  int violated = 0;
  for (const Constraint& constraint : constraints) {
    const bool ok = std::all_of(
        constraint.atoms.begin(), constraint.atoms.end(),
        [&](const ConstraintAtom& atom) { return atom_satisfied(atom, events); });
    if (!ok) ++violated;
  }
  return violated;
}

bool is_satisfied(const std::vector<Constraint>& constraints,
                  std::span<const PlacementEvent> events) {
  return count_violations(constraints, events) == 0;
}

}  // namespace planbench
