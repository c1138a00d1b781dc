#include "deltom/event.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <sstream>

#include "deltom/errors.hpp"

namespace deltom {

void EventModel::validate() const {
  if (events.empty()) throw DataError("event model has no events");
  if (!std::is_sorted(events.begin(), events.end()) ||
      std::adjacent_find(events.begin(), events.end()) != events.end()) {
    throw DataError("event list must be sorted and unique");
  }
  for (EventId e : events) {
    if (pre.find(e) == pre.end()) throw DataError("event missing precondition");
    auto it = post.find(e);
    if (it == post.end()) throw DataError("event missing postcondition");
    for (const Proposition& p : it->second.set_true) {
      if (it->second.set_false.count(p) > 0) {
        throw DataError("postcondition sets " + p.key + " both true and false");
      }
    }
  }
}

namespace {

bool pre_holds(const EpistemicModel& m, WorldId w, const std::optional<Formula>& pre) {
  return !pre.has_value() || eval_at(m, w, *pre);
}

}  // namespace

UpdateResult product_update(const PointedEpistemicModel& state,
                            const PointedEventModel& action) {
  const EpistemicModel& m = state.model;
  const EventModel& ev = action.model;

  const auto& actual_pre = ev.pre.at(action.actual);
  if (!pre_holds(m, state.actual, actual_pre)) {
    std::string text = actual_pre ? actual_pre->text() : "T";
    throw PreconditionFailed("precondition " + text + " fails at the actual world");
  }

  // Survivors in lexicographic (world, event) order; ids become dense.
  std::map<std::pair<WorldId, EventId>, WorldId> id_of;
  UpdateResult out;
  for (WorldId w : m.worlds) {
    for (EventId e : ev.events) {
      if (pre_holds(m, w, ev.pre.at(e))) {
        WorldId id = static_cast<WorldId>(id_of.size());
        id_of[{w, e}] = id;
        out.world_origin[id] = {w, e};
        out.state.model.worlds.push_back(id);
      }
    }
  }

  EpistemicModel& nm = out.state.model;

  for (const auto& [agent, rel] : m.relations) {
    auto& nrel = nm.relations[agent];
    auto q = ev.indist.find(agent);
    if (q == ev.indist.end()) continue;
    for (const auto& [w, v] : rel) {
      for (const auto& [e, f] : q->second) {
        auto a = id_of.find({w, e});
        if (a == id_of.end()) continue;
        auto b = id_of.find({v, f});
        if (b == id_of.end()) continue;
        nrel.insert({a->second, b->second});
      }
    }
  }

  // Proposition universe: everything valued before plus everything any
  // event assigns.
  std::set<Proposition> universe;
  for (const auto& [p, where] : m.valuation) universe.insert(p);
  for (const auto& [e, pc] : ev.post) {
    universe.insert(pc.set_true.begin(), pc.set_true.end());
    universe.insert(pc.set_false.begin(), pc.set_false.end());
  }
  for (const Proposition& p : universe) {
    std::set<WorldId> where;
    for (const auto& [pair, id] : id_of) {
      const PostCondition& pc = ev.post.at(pair.second);
      if (pc.entails(p) || (m.holds(p, pair.first) && !pc.entails_not(p))) {
        where.insert(id);
      }
    }
    if (!where.empty()) nm.valuation[p] = std::move(where);
  }

  out.state.actual = id_of.at({state.actual, action.actual});
  return out;
}

PointedEpistemicModel prune_reachable(const PointedEpistemicModel& state, int depth) {
  const EpistemicModel& m = state.model;

  // Union adjacency over all agents.
  std::map<WorldId, std::vector<WorldId>> adj;
  for (const auto& [agent, rel] : m.relations) {
    for (const auto& [w, v] : rel) adj[w].push_back(v);
  }

  std::map<WorldId, int> dist;
  dist[state.actual] = 0;
  std::deque<WorldId> frontier{state.actual};
  while (!frontier.empty()) {
    WorldId w = frontier.front();
    frontier.pop_front();
    int d = dist[w];
    if (d >= depth) continue;
    auto it = adj.find(w);
    if (it == adj.end()) continue;
    for (WorldId v : it->second) {
      if (dist.emplace(v, d + 1).second) frontier.push_back(v);
    }
  }

  // Dense renaming in ascending old-id order.
  std::map<WorldId, WorldId> rename;
  PointedEpistemicModel out;
  for (WorldId w : m.worlds) {
    if (dist.count(w) > 0) {
      WorldId id = static_cast<WorldId>(rename.size());
      rename[w] = id;
      out.model.worlds.push_back(id);
    }
  }
  for (const auto& [agent, rel] : m.relations) {
    auto& nrel = out.model.relations[agent];
    for (const auto& [w, v] : rel) {
      auto a = rename.find(w);
      auto b = rename.find(v);
      if (a != rename.end() && b != rename.end()) nrel.insert({a->second, b->second});
    }
  }
  for (const auto& [p, where] : m.valuation) {
    std::set<WorldId> nw;
    for (WorldId w : where) {
      auto it = rename.find(w);
      if (it != rename.end()) nw.insert(it->second);
    }
    if (!nw.empty()) out.model.valuation[p] = std::move(nw);
  }
  out.actual = rename.at(state.actual);
  return out;
}

namespace {

// Partition refinement signature: block of each successor set per agent.
using Block = int;

struct Refiner {
  const EpistemicModel& m;
  std::map<WorldId, Block> block;

  explicit Refiner(const EpistemicModel& model) : m(model) {
    // Initial partition: identical valuations.
    std::map<std::vector<const Proposition*>, Block> groups;
    for (WorldId w : m.worlds) {
      std::vector<const Proposition*> sig;
      for (const auto& [p, where] : m.valuation) {
        if (where.count(w) > 0) sig.push_back(&p);
      }
      auto [it, fresh] = groups.emplace(std::move(sig), static_cast<Block>(groups.size()));
      block[w] = it->second;
    }
  }

  bool refine_once() {
    std::map<std::pair<Block, std::vector<std::pair<const AgentId*, std::set<Block>>>>, Block>
        groups;
    std::map<WorldId, Block> next;
    for (WorldId w : m.worlds) {
      std::vector<std::pair<const AgentId*, std::set<Block>>> sig;
      for (const auto& [agent, rel] : m.relations) {
        std::set<Block> succ;
        for (auto p = rel.lower_bound({w, 0}); p != rel.end() && p->first == w; ++p) {
          succ.insert(block.at(p->second));
        }
        sig.emplace_back(&agent, std::move(succ));
      }
      auto key = std::make_pair(block.at(w), std::move(sig));
      auto [it, fresh] = groups.emplace(std::move(key), static_cast<Block>(groups.size()));
      next[w] = it->second;
    }
    bool changed = false;
    for (WorldId w : m.worlds) {
      if (next[w] != block[w]) changed = true;
    }
    block = std::move(next);
    return changed;
  }
};

}  // namespace

PointedEpistemicModel bisim_minimize(const PointedEpistemicModel& state) {
  const EpistemicModel& m = state.model;
  if (m.worlds.empty()) return state;

  Refiner r(m);
  while (r.refine_once()) {
  }

  // Quotient. Blocks renumbered by their smallest member so output ids are
  // deterministic.
  std::map<Block, WorldId> first_member;
  for (WorldId w : m.worlds) {
    Block b = r.block.at(w);
    auto it = first_member.find(b);
    if (it == first_member.end() || w < it->second) first_member[b] = w;
  }
  std::vector<std::pair<WorldId, Block>> order;
  for (const auto& [b, w] : first_member) order.push_back({w, b});
  std::sort(order.begin(), order.end());
  std::map<Block, WorldId> id_of;
  for (const auto& [w, b] : order) id_of[b] = static_cast<WorldId>(id_of.size());

  PointedEpistemicModel out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.model.worlds.push_back(static_cast<WorldId>(i));
  }
  for (const auto& [agent, rel] : m.relations) {
    auto& nrel = out.model.relations[agent];
    for (const auto& [w, v] : rel) {
      nrel.insert({id_of.at(r.block.at(w)), id_of.at(r.block.at(v))});
    }
  }
  for (const auto& [p, where] : m.valuation) {
    std::set<WorldId> nw;
    for (WorldId w : where) nw.insert(id_of.at(r.block.at(w)));
    if (!nw.empty()) out.model.valuation[p] = std::move(nw);
  }
  out.actual = id_of.at(r.block.at(state.actual));
  return out;
}

std::string debug_dump(const PointedEpistemicModel& state) {
  std::ostringstream os;
  for (WorldId w : state.model.worlds) {
    os << "world " << w;
    if (w == state.actual) os << " *";
    os << ":";
    for (const auto& [p, where] : state.model.valuation) {
      if (where.count(w) > 0) os << " " << p.key;
    }
    os << "\n";
  }
  for (const auto& [agent, rel] : state.model.relations) {
    for (const auto& [w, v] : rel) {
      os << agent << ": " << w << " -> " << v << "\n";
    }
  }
  return os.str();
}

}  // namespace deltom
