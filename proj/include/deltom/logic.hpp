#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace deltom {

using AgentId = std::string;
using WorldId = std::uint32_t;

// Atomic proposition in canonical text form, e.g. "at(celery,green_bucket)"
// or "in(Amelia,TV_room)". The canonical form is unique per fact and parses
// back into its components.
struct Proposition {
  std::string key;

  auto operator<=>(const Proposition&) const = default;
};

Proposition at_prop(std::string_view object, std::string_view location);
Proposition in_prop(std::string_view agent, std::string_view room);

// Splits a functor-style key like "at(x,y)" into (functor, args).
// Returns nullopt if the key is not of that shape.
std::optional<std::pair<std::string, std::vector<std::string>>> split_prop(
    const Proposition& p);

// Epistemic formula: atom | !phi | (phi & psi) | B[agent](phi).
// Immutable; copies share nodes.
class Formula {
 public:
  enum class Kind { Atom, Not, And, Believes };

  static Formula atom(Proposition p);
  static Formula negation(Formula f);
  static Formula conjunction(Formula lhs, Formula rhs);
  static Formula believes(AgentId agent, Formula f);

  Kind kind() const;
  const Proposition& prop() const;   // Atom
  const Formula& child() const;      // Not / Believes
  const Formula& lhs() const;        // And
  const Formula& rhs() const;        // And
  const AgentId& agent() const;      // Believes

  // Maximum nesting depth of belief operators.
  int belief_order() const;

  // Canonical rendering: at(obj,loc), !phi, (phi & psi), B[agent](phi).
  std::string text() const;

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

// Parses the canonical rendering back into a formula. Throws DataError on
// malformed input. parse_formula(f.text()) reproduces f.
Formula parse_formula(std::string_view text);

// Order-k query builder: believes(a1, believes(a2, ... at(object, location))).
// The empty chain yields the bare atom. Throws DuplicateAgent if the chain
// repeats an agent.
Formula chain_formula(const std::vector<AgentId>& chain, std::string_view object,
                      std::string_view location);

// Kripke model (W, R, V). No frame condition is imposed on the relations:
// false beliefs need the actual world to be inaccessible to the mistaken
// agent, so R may be non-reflexive and non-serial. Atoms absent from the
// valuation are false in every world.
struct EpistemicModel {
  std::vector<WorldId> worlds;  // sorted, unique
  std::map<AgentId, std::set<std::pair<WorldId, WorldId>>> relations;
  std::map<Proposition, std::set<WorldId>> valuation;

  bool holds(const Proposition& p, WorldId w) const;
  std::vector<WorldId> successors(WorldId w, const AgentId& a) const;

  // Checks the structural invariants (ids known, sorted world list).
  // Throws DataError on violation.
  void validate() const;
};

struct PointedEpistemicModel {
  EpistemicModel model;
  WorldId actual = 0;
};

// Satisfaction at an arbitrary world of the model.
bool eval_at(const EpistemicModel& model, WorldId w, const Formula& phi);

// M, w |= phi. Pure; throws UnknownAgent if phi uses an agent missing from
// the relation map.
bool eval(const PointedEpistemicModel& state, const Formula& phi);

}  // namespace deltom
