#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "planbench/world.hpp"

namespace planbench {

// One successful place, in execution order.  `dest_kind` is the goal region
// the object landed fully inside, if any; index is the position within the
// realized sequence (0-based).
struct PlacementEvent {
  std::string obj;
  std::string dest_region;
  std::optional<RegionKind> dest_kind;
  int index = 0;

  bool operator==(const PlacementEvent&) const = default;
};

// Object reference inside a constraint.  When `dest` is set, only placements
// into that region kind count as "the object was placed"; otherwise any
// placement counts.
struct ObjRef {
  std::string obj;
  std::optional<RegionKind> dest;

  bool operator==(const ObjRef&) const = default;
};

// Primitive ordering predicate over the realized placement sequence.
// Every family is evaluated pessimistically against the final sequence: if a
// referenced placement never happened, the predicate is unsatisfied.
struct ConstraintAtom {
  enum class Kind {
    placed_after_all,    // subject placed after every ref
    placed_before_all,   // subject placed before every ref
    adjacent,            // subject and refs[0] placed consecutively
    immediately_after,   // subject placed in the step right after refs[0]
    not_consecutive,     // subject and refs[0] not placed consecutively
    not_first,           // subject's placement is not the first step
    not_last,            // the final step is not the subject's placement
    no_repeat,           // no object is placed more than once
  };

  Kind kind = Kind::no_repeat;
  ObjRef subject;             // unused for no_repeat
  std::vector<ObjRef> refs;   // targets for the ordering families

  bool operator==(const ConstraintAtom&) const = default;
};

const char* to_string(ConstraintAtom::Kind kind);

// One countable constraint.  Usually a single atom; clauses that bundle
// several requirements into one instruction hold several atoms and are
// violated (one unit) when any atom is.
struct Constraint {
  std::string label;  // short description used in reports and diagnostics
  std::vector<ConstraintAtom> atoms;

  bool operator==(const Constraint&) const = default;
};

// True when the event matches the reference (object name and, if the
// reference is destination-qualified, the region kind).
bool event_matches(const PlacementEvent& event, const ObjRef& ref);

// Position of the first matching event, if any.
std::optional<int> first_match(std::span<const PlacementEvent> events,
                               const ObjRef& ref);

bool atom_satisfied(const ConstraintAtom& atom,
                    std::span<const PlacementEvent> events);

// Number of violated constraints (each counts at most one unit).
int count_violations(const std::vector<Constraint>& constraints,
                     std::span<const PlacementEvent> events);

bool is_satisfied(const std::vector<Constraint>& constraints,
                  std::span<const PlacementEvent> events);

}  // namespace planbench
