#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>

#include "deltom/logic.hpp"

namespace deltom {

using EventId = std::uint32_t;

// Effect of an event on atomic facts: a conjunction of signed literals.
// Arbitrary postcondition formulas are not supported; every story action is
// an assignment, and literal posts keep the updated valuation decidable.
struct PostCondition {
  std::set<Proposition> set_true;
  std::set<Proposition> set_false;

  bool entails(const Proposition& p) const { return set_true.count(p) > 0; }
  bool entails_not(const Proposition& p) const { return set_false.count(p) > 0; }
};

// Event model (E, Q, pre, post). A nullopt precondition is trivially true.
struct EventModel {
  std::vector<EventId> events;  // sorted, unique
  std::map<AgentId, std::set<std::pair<EventId, EventId>>> indist;
  std::map<EventId, std::optional<Formula>> pre;
  std::map<EventId, PostCondition> post;

  void validate() const;  // pre/post defined per event, no p & !p in post
};

struct PointedEventModel {
  EventModel model;
  EventId actual = 0;
};

struct UpdateResult {
  PointedEpistemicModel state;
  // New world id -> (old world id, event id). Bijective onto the new worlds.
  std::map<WorldId, std::pair<WorldId, EventId>> world_origin;
};

// Product update:
//   W' = {(w,e) | M,w |= pre(e)}
//   (w,e) R'_a (v,f) iff w R_a v and e Q_a f
//   (w,e) |= p iff post(e) |= p, or (M,w |= p and post(e) does not set p false)
// New worlds are renumbered densely in lexicographic (w, e) order. Throws
// PreconditionFailed if the actual event's precondition fails at the actual
// world.
UpdateResult product_update(const PointedEpistemicModel& state,
                            const PointedEventModel& action);

// Keeps the actual world plus every world reachable from it in at most
// `depth` relation steps (any agents), then renames worlds to dense ids.
// Satisfaction of formulas with belief order <= depth is unchanged.
PointedEpistemicModel prune_reachable(const PointedEpistemicModel& state, int depth);

// Quotient by the coarsest bisimulation respecting valuations and every
// agent relation. Preserves satisfaction of all modal formulas.
PointedEpistemicModel bisim_minimize(const PointedEpistemicModel& state);

// Line-oriented dump: worlds with their valuations, then one line per
// relation pair per agent, everything in sorted order.
std::string debug_dump(const PointedEpistemicModel& state);

}  // namespace deltom
