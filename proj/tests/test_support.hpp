#pragma once

// Shared helpers for the test suites: small random model/formula generators
// and an independent satisfaction oracle (global labeling over world sets,
// a different route than the recursive evaluator under test).

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "deltom/logic.hpp"
#include "deltom/rng.hpp"
#include "deltom/story.hpp"

namespace deltom::test {

inline std::vector<AgentId> default_agents() { return {"a", "b"}; }

inline std::vector<Proposition> default_props() {
  return {Proposition{"p()"}, Proposition{"q()"}, Proposition{"r()"}};
}

inline PointedEpistemicModel random_model(Rng& rng, int max_worlds = 5,
                                          double edge_prob = 0.35,
                                          double fact_prob = 0.5) {
  PointedEpistemicModel state;
  const int n = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(max_worlds)));
  for (int w = 0; w < n; ++w) state.model.worlds.push_back(static_cast<WorldId>(w));
  for (const AgentId& a : default_agents()) {
    auto& rel = state.model.relations[a];
    for (int w = 0; w < n; ++w) {
      for (int v = 0; v < n; ++v) {
        if (rng.bernoulli(edge_prob)) rel.insert({static_cast<WorldId>(w), static_cast<WorldId>(v)});
      }
    }
  }
  for (const Proposition& p : default_props()) {
    std::set<WorldId> where;
    for (int w = 0; w < n; ++w) {
      if (rng.bernoulli(fact_prob)) where.insert(static_cast<WorldId>(w));
    }
    if (!where.empty()) state.model.valuation[p] = std::move(where);
  }
  state.actual = static_cast<WorldId>(rng.index(static_cast<std::size_t>(n)));
  return state;
}

inline Formula random_formula(Rng& rng, int depth) {
  const auto props = default_props();
  const auto agents = default_agents();
  if (depth <= 0 || rng.bernoulli(0.3)) {
    return Formula::atom(props[rng.index(props.size())]);
  }
  switch (rng.index(3)) {
    case 0:
      return Formula::negation(random_formula(rng, depth - 1));
    case 1:
      return Formula::conjunction(random_formula(rng, depth - 1),
                                  random_formula(rng, depth - 1));
    default:
      return Formula::believes(agents[rng.index(agents.size())],
                               random_formula(rng, depth - 1));
  }
}

// Independent oracle: computes the extension of each subformula as a world
// set (model-checking by labeling), then tests membership of the designated
// world.
inline std::set<WorldId> label_worlds(const EpistemicModel& m, const Formula& f) {
  std::set<WorldId> all(m.worlds.begin(), m.worlds.end());
  switch (f.kind()) {
    case Formula::Kind::Atom: {
      auto it = m.valuation.find(f.prop());
      return it == m.valuation.end() ? std::set<WorldId>{} : it->second;
    }
    case Formula::Kind::Not: {
      std::set<WorldId> sub = label_worlds(m, f.child());
      std::set<WorldId> out;
      std::set_difference(all.begin(), all.end(), sub.begin(), sub.end(),
                          std::inserter(out, out.begin()));
      return out;
    }
    case Formula::Kind::And: {
      std::set<WorldId> l = label_worlds(m, f.lhs());
      std::set<WorldId> r = label_worlds(m, f.rhs());
      std::set<WorldId> out;
      std::set_intersection(l.begin(), l.end(), r.begin(), r.end(),
                            std::inserter(out, out.begin()));
      return out;
    }
    case Formula::Kind::Believes: {
      std::set<WorldId> sub = label_worlds(m, f.child());
      std::set<WorldId> out;
      const auto& rel = m.relations.at(f.agent());
      for (WorldId w : all) {
        bool ok = true;
        for (auto p = rel.lower_bound({w, 0}); p != rel.end() && p->first == w; ++p) {
          if (sub.count(p->second) == 0) {
            ok = false;
            break;
          }
        }
        if (ok) out.insert(w);
      }
      return out;
    }
  }
  return {};
}

inline bool oracle_eval(const PointedEpistemicModel& state, const Formula& f) {
  return label_worlds(state.model, f).count(state.actual) > 0;
}

// Builds presence log and exit order for a hand-written story by replaying
// enter/exit lines, mirroring what the generator records.
struct ReplayedStory {
  std::vector<StoryAction> story;
  PresenceLog presence_log;
  std::map<AgentId, int> exit_order;
};

inline ReplayedStory replay_story(std::vector<StoryAction> actions) {
  ReplayedStory out;
  std::map<AgentId, std::string> presence;
  int index = 1;
  for (StoryAction& a : actions) {
    a.index = index++;
    if (a.kind == ActionKind::EnterAll) {
      for (const AgentId& ag : a.group) presence[ag] = a.room;
    } else if (a.kind == ActionKind::Exit) {
      presence.erase(a.actor);
      out.exit_order[a.actor] = a.index;
    }
    out.story.push_back(a);
    out.presence_log.push_back(presence);
  }
  return out;
}

// The worked-example story: 16 lines, five agents, celery.
inline ReplayedStory appendix_story() {
  const std::vector<AgentId> all = {"Amelia", "Chloe", "Liam", "Owen", "Benjamin"};
  auto enter = [&](const std::string& room) {
    StoryAction a;
    a.kind = ActionKind::EnterAll;
    a.group = all;
    a.room = room;
    return a;
  };
  auto object_at = [&](const std::string& loc) {
    StoryAction a;
    a.kind = ActionKind::ObjectAt;
    a.object = "celery";
    a.location = loc;
    a.room = "TV_room";
    return a;
  };
  auto noop = [&](const std::string& who) {
    StoryAction a;
    a.kind = ActionKind::Noop;
    a.actor = who;
    a.room = "TV_room";
    return a;
  };
  auto distract = [&](const std::string& who) {
    StoryAction a;
    a.kind = ActionKind::Distractor;
    a.actor = who;
    a.detail = "watch";
    return a;
  };
  auto exit = [&](const std::string& who) {
    StoryAction a;
    a.kind = ActionKind::Exit;
    a.actor = who;
    a.room = "TV_room";
    return a;
  };
  auto move = [&](const std::string& who, const std::string& loc) {
    StoryAction a;
    a.kind = ActionKind::Move;
    a.actor = who;
    a.object = "celery";
    a.location = loc;
    a.room = "TV_room";
    return a;
  };
  auto claim = [&](const std::string& who, const std::string& loc) {
    StoryAction a;
    a.kind = ActionKind::PublicClaim;
    a.actor = who;
    a.object = "celery";
    a.location = loc;
    a.room = "waiting_room";
    return a;
  };
  auto tell = [&](const std::string& who, const std::string& to, const std::string& loc) {
    StoryAction a;
    a.kind = ActionKind::PrivateTell;
    a.actor = who;
    a.listener = to;
    a.object = "celery";
    a.location = loc;
    a.room = "waiting_room";
    return a;
  };

  return replay_story({
      enter("TV_room"),                       // 1
      object_at("red_envelope"),              // 2
      noop("Amelia"),                         // 3
      distract("Chloe"),                      // 4
      exit("Amelia"),                         // 5
      move("Chloe", "green_bucket"),          // 6
      exit("Chloe"),                          // 7
      move("Liam", "red_bathtub"),            // 8
      exit("Liam"),                           // 9
      noop("Owen"),                           // 10
      exit("Owen"),                           // 11
      noop("Benjamin"),                       // 12
      exit("Benjamin"),                       // 13
      enter("waiting_room"),                  // 14
      claim("Liam", "white_bathtub"),         // 15
      tell("Benjamin", "Liam", "blue_drawer") // 16
  });
}

inline Question make_question(int order, std::vector<AgentId> chain, std::string object) {
  Question q;
  q.order = order;
  q.chain = std::move(chain);
  q.object = std::move(object);
  return q;
}

}  // namespace deltom::test
