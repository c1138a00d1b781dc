#include "deltom/story.hpp"

#include <algorithm>
#include <limits>

#include "deltom/errors.hpp"
#include "deltom/rng.hpp"
#include "deltom/vocab.hpp"

namespace deltom {

const char* to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::EnterAll: return "enter_all";
    case ActionKind::ObjectAt: return "object_at";
    case ActionKind::Noop: return "noop";
    case ActionKind::Distractor: return "distractor";
    case ActionKind::Exit: return "exit";
    case ActionKind::Move: return "move";
    case ActionKind::PublicClaim: return "public_claim";
    case ActionKind::PrivateTell: return "private_tell";
  }
  return "?";
}

ActionKind action_kind_from_string(const std::string& s) {
  if (s == "enter_all") return ActionKind::EnterAll;
  if (s == "object_at") return ActionKind::ObjectAt;
  if (s == "noop") return ActionKind::Noop;
  if (s == "distractor") return ActionKind::Distractor;
  if (s == "exit") return ActionKind::Exit;
  if (s == "move") return ActionKind::Move;
  if (s == "public_claim") return ActionKind::PublicClaim;
  if (s == "private_tell") return ActionKind::PrivateTell;
  throw DataError("unknown action kind '" + s + "'");
}

namespace {

std::string join_names(const std::vector<AgentId>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) out += (i + 1 == names.size()) ? " and " : ", ";
    out += names[i];
  }
  return out;
}

}  // namespace

std::string StoryAction::text() const {
  switch (kind) {
    case ActionKind::EnterAll:
      return join_names(group) + " entered the " + room + ".";
    case ActionKind::ObjectAt:
      return "The " + object + " is in the " + location + ".";
    case ActionKind::Noop:
      return actor + " made no movements and stayed in the " + room + " for 1 minute.";
    case ActionKind::Distractor:
      if (detail == "likes") return actor + " likes the " + location + ".";
      return actor + " lost his watch.";
    case ActionKind::Exit:
      return actor + " exited the " + room + ".";
    case ActionKind::Move:
      return actor + " moved the " + object + " to the " + location + ".";
    case ActionKind::PublicClaim:
      return actor + " publicly claimed that " + object + " is in the " + location + " now.";
    case ActionKind::PrivateTell:
      return actor + " privately told " + listener + " that the " + object + " is in the " +
             location + " now.";
  }
  return {};
}

std::string StoryAction::numbered_text() const {
  return std::to_string(index) + " " + text();
}

std::string Question::text() const {
  if (order == 0) return "Where is the " + object + " really?";
  std::string out = "Where does " + chain.front() + " think ";
  for (std::size_t i = 1; i < chain.size(); ++i) out += chain[i] + " thinks ";
  out += "the " + object + " is?";
  return out;
}

void StoryConfig::validate() const {
  if (num_agents < 2) throw ConfigError("num_agents must be at least 2");
  if (num_agents > static_cast<int>(vocab::agent_names().size())) {
    throw ConfigError("num_agents exceeds the name pool");
  }
  const int container_count =
      containers.empty() ? num_containers : static_cast<int>(containers.size());
  if (container_count < 2) throw ConfigError("need at least 2 containers");
  if (containers.empty() && num_containers > static_cast<int>(vocab::container_names().size())) {
    throw ConfigError("num_containers exceeds the container pool");
  }
  if (max_order < 0 || max_order > 4) throw ConfigError("max_order must be in 0..4");
  if (max_order >= num_agents) throw ConfigError("max_order must be below num_agents");
  if (num_moves < 0 || num_noops < 0 || num_distractors < 0) {
    throw ConfigError("action counts must be non-negative");
  }
  if (!rooms[0].empty() && rooms[0] == rooms[1]) {
    throw ConfigError("action and reunion rooms must differ");
  }
}

std::vector<std::string> StoryBundle::story_lines() const {
  std::vector<std::string> lines;
  lines.reserve(story.size());
  for (const StoryAction& a : story) lines.push_back(a.numbered_text());
  return lines;
}

const Question& StoryBundle::question_for_order(int order) const {
  for (std::size_t i = 0; i < questions.size(); ++i) {
    if (questions[i].order == order) return questions[i];
  }
  throw DataError("no question of order " + std::to_string(order));
}

const GoldTrace& StoryBundle::gold_for_order(int order) const {
  for (std::size_t i = 0; i < questions.size(); ++i) {
    if (questions[i].order == order) return gold[i];
  }
  throw DataError("no question of order " + std::to_string(order));
}

namespace {

constexpr int kNeverExited = std::numeric_limits<int>::max();

int exit_step(const std::map<AgentId, int>& exit_order, const AgentId& a) {
  auto it = exit_order.find(a);
  return it == exit_order.end() ? kNeverExited : it->second;
}

bool exited_before(const std::map<AgentId, int>& exit_order, const AgentId& listener,
                   const AgentId& speaker) {
  return exit_step(exit_order, listener) < exit_step(exit_order, speaker);
}

bool all_in_room(const std::map<AgentId, std::string>& presence,
                 const std::vector<AgentId>& chain, const std::string& room) {
  for (const AgentId& a : chain) {
    auto it = presence.find(a);
    if (it == presence.end() || it->second != room) return false;
  }
  return true;
}

std::vector<std::string> sample_distinct(Rng& rng, const std::vector<std::string>& pool,
                                         std::size_t n) {
  std::vector<std::size_t> idx(pool.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = i + rng.index(idx.size() - i);
    std::swap(idx[i], idx[j]);
    out.push_back(pool[idx[i]]);
  }
  return out;
}

}  // namespace

GoldTrace gold_trace(const std::vector<StoryAction>& story, const Question& question,
                     const std::map<AgentId, int>& exit_order,
                     const PresenceLog& presence_log) {
  const int order = question.order;
  const std::vector<AgentId>& chain = question.chain;
  if (static_cast<int>(chain.size()) != order) {
    throw DataError("question chain length does not match its order");
  }

  GoldTrace out;
  out.states.reserve(story.size());
  BeliefValue state;

  for (std::size_t i = 0; i < story.size(); ++i) {
    const StoryAction& a = story[i];
    const auto& presence = presence_log.at(i);
    switch (a.kind) {
      case ActionKind::ObjectAt:
        if (order == 0 || all_in_room(presence, chain, a.room)) state = a.location;
        break;
      case ActionKind::Move:
        if (order == 0 || all_in_room(presence, chain, a.room)) state = a.location;
        break;
      case ActionKind::PublicClaim: {
        const AgentId& speaker = a.actor;
        if (order == 1 && chain[0] != speaker &&
            exited_before(exit_order, chain[0], speaker)) {
          state = a.location;
        } else if (order == 2) {
          // (speaker, x): the speaker expects to be believed.
          // (x, speaker): the speaker publicly committed to the claim.
          if (chain[0] == speaker || chain[1] == speaker) state = a.location;
        }
        break;
      }
      case ActionKind::PrivateTell: {
        const AgentId& speaker = a.actor;
        const AgentId& hearer = a.listener;
        if (order == 1 && chain[0] == hearer &&
            exited_before(exit_order, hearer, speaker)) {
          state = a.location;
        } else if (order == 2) {
          if (chain[0] == hearer && chain[1] == speaker &&
              exited_before(exit_order, hearer, speaker)) {
            state = a.location;
          } else if (chain[0] == speaker && chain[1] == hearer) {
            state = a.location;
          }
        }
        break;
      }
      case ActionKind::EnterAll:
      case ActionKind::Noop:
      case ActionKind::Distractor:
      case ActionKind::Exit:
        break;
    }
    out.states.push_back(state);
  }

  out.final_answer = state.has_value() ? *state : "Null";
  return out;
}

StoryBundle generate_story(const StoryConfig& config) {
  config.validate();
  Rng rng(derive_seed(config.seed, {fnv1a64("deltom.story")}));

  StoryBundle b;
  b.story_id = config.seed;
  b.config = config;
  b.agents = sample_distinct(rng, vocab::agent_names(), config.num_agents);
  b.containers = config.containers.empty()
                     ? sample_distinct(rng, vocab::container_names(), config.num_containers)
                     : config.containers;
  if (config.rooms[0].empty()) {
    auto rooms = sample_distinct(rng, vocab::room_names(), 2);
    b.action_room = rooms[0];
    b.reunion_room = rooms[1];
  } else {
    b.action_room = config.rooms[0];
    b.reunion_room = config.rooms[1];
  }
  b.object = vocab::object_names()[rng.index(vocab::object_names().size())];
  b.config.containers = b.containers;
  b.config.rooms = {b.action_room, b.reunion_room};

  std::map<AgentId, std::string> presence;
  std::vector<AgentId> present;  // in roster order
  std::string location;

  auto push = [&](StoryAction a) {
    a.index = static_cast<int>(b.story.size()) + 1;
    b.story.push_back(std::move(a));
    b.presence_log.push_back(presence);
  };

  {
    StoryAction a;
    a.kind = ActionKind::EnterAll;
    a.group = b.agents;
    a.room = b.action_room;
    presence.clear();
    for (const AgentId& ag : b.agents) presence[ag] = b.action_room;
    present = b.agents;
    push(std::move(a));
  }
  {
    StoryAction a;
    a.kind = ActionKind::ObjectAt;
    a.object = b.object;
    a.room = b.action_room;
    location = b.containers[rng.index(b.containers.size())];
    a.location = location;
    push(std::move(a));
  }

  int moves = config.num_moves;
  int noops = config.num_noops;
  int distractors = config.num_distractors;
  int exits = config.num_agents;

  auto take_present = [&]() {
    std::size_t i = rng.index(present.size());
    return present[i];
  };
  auto remove_present = [&](const AgentId& ag) {
    present.erase(std::find(present.begin(), present.end(), ag));
    presence.erase(ag);
  };
  auto other_container = [&](const std::string& not_this) {
    std::size_t i = rng.index(b.containers.size() - 1);
    const std::string& c = b.containers[i];
    return c == not_this ? b.containers.back() : c;
  };

  while (moves + noops + distractors + exits > 0) {
    // An exit that would empty the room is deferred while other actions
    // still need an actor.
    const bool exit_allowed =
        exits > 0 && (present.size() > 1 || moves + noops + distractors == 0);
    const int pool = moves + noops + distractors + (exit_allowed ? exits : 0);
    std::uint64_t pick = rng.below(static_cast<std::uint64_t>(pool));

    StoryAction a;
    if (pick < static_cast<std::uint64_t>(moves)) {
      a.kind = ActionKind::Move;
      a.actor = take_present();
      a.object = b.object;
      a.room = b.action_room;
      a.location = other_container(location);
      location = a.location;
      --moves;
    } else if (pick < static_cast<std::uint64_t>(moves + noops)) {
      a.kind = ActionKind::Noop;
      a.actor = take_present();
      a.room = b.action_room;
      --noops;
    } else if (pick < static_cast<std::uint64_t>(moves + noops + distractors)) {
      a.kind = ActionKind::Distractor;
      a.actor = take_present();
      a.detail = rng.below(2) == 0 ? "watch" : "likes";
      if (a.detail == "likes") a.location = b.containers[rng.index(b.containers.size())];
      --distractors;
    } else {
      a.kind = ActionKind::Exit;
      a.actor = take_present();
      a.room = b.action_room;
      b.exit_order[a.actor] = static_cast<int>(b.story.size()) + 1;
      remove_present(a.actor);
      --exits;
    }
    push(std::move(a));
  }

  {
    StoryAction a;
    a.kind = ActionKind::EnterAll;
    a.group = b.agents;
    a.room = b.reunion_room;
    for (const AgentId& ag : b.agents) presence[ag] = b.reunion_room;
    present = b.agents;
    push(std::move(a));
  }

  auto speaker_belief = [&](const AgentId& speaker) {
    Question q;
    q.order = 1;
    q.chain = {speaker};
    q.object = b.object;
    GoldTrace t = gold_trace(b.story, q, b.exit_order, b.presence_log);
    return t.states.empty() ? BeliefValue{} : t.states.back();
  };
  auto claim_value = [&](const AgentId& speaker) {
    BeliefValue belief = speaker_belief(speaker);
    if (!config.enable_deception && belief.has_value()) return *belief;
    std::vector<std::string> candidates;
    for (const std::string& c : b.containers) {
      if (!belief.has_value() || c != *belief) candidates.push_back(c);
    }
    return candidates[rng.index(candidates.size())];
  };

  if (config.enable_public_claims) {
    StoryAction a;
    a.kind = ActionKind::PublicClaim;
    a.actor = b.agents[rng.index(b.agents.size())];
    a.object = b.object;
    a.room = b.reunion_room;
    a.location = claim_value(a.actor);
    push(std::move(a));
  }
  if (config.enable_private_tells) {
    StoryAction a;
    a.kind = ActionKind::PrivateTell;
    a.actor = b.agents[rng.index(b.agents.size())];
    do {
      a.listener = b.agents[rng.index(b.agents.size())];
    } while (a.listener == a.actor);
    a.object = b.object;
    a.room = b.reunion_room;
    a.location = claim_value(a.actor);
    push(std::move(a));
  }

  for (int order = 0; order <= config.max_order; ++order) {
    Question q;
    q.order = order;
    q.object = b.object;
    auto chain = sample_distinct(rng, b.agents, order);
    q.chain.assign(chain.begin(), chain.end());
    b.questions.push_back(q);
    b.gold.push_back(gold_trace(b.story, q, b.exit_order, b.presence_log));
  }

  return b;
}

PointedEventModel compile_physical_action(const StoryAction& action,
                                          const std::vector<AgentId>& agents,
                                          const std::map<AgentId, std::string>& presence,
                                          const std::string& object_location) {
  PointedEventModel pem;
  EventModel& em = pem.model;

  auto public_single = [&](PostCondition pc) {
    em.events = {0};
    em.pre[0] = std::nullopt;
    em.post[0] = std::move(pc);
    for (const AgentId& a : agents) em.indist[a] = {{0, 0}};
  };

  switch (action.kind) {
    case ActionKind::Noop:
    case ActionKind::Distractor:
      public_single({});
      break;
    case ActionKind::EnterAll: {
      PostCondition pc;
      for (const AgentId& a : action.group) {
        pc.set_true.insert(in_prop(a, action.room));
        auto it = presence.find(a);
        if (it != presence.end() && it->second != action.room) {
          pc.set_false.insert(in_prop(a, it->second));
        }
      }
      public_single(std::move(pc));
      break;
    }
    case ActionKind::Exit: {
      PostCondition pc;
      pc.set_false.insert(in_prop(action.actor, action.room));
      public_single(std::move(pc));
      break;
    }
    case ActionKind::ObjectAt: {
      PostCondition pc;
      pc.set_true.insert(at_prop(action.object, action.location));
      if (!object_location.empty() && object_location != action.location) {
        pc.set_false.insert(at_prop(action.object, object_location));
      }
      public_single(std::move(pc));
      break;
    }
    case ActionKind::Move: {
      // Event 0: the move happens. Event 1: nothing happens. Absent agents
      // cannot tell the two apart and keep believing nothing happened.
      em.events = {0, 1};
      em.pre[0] = Formula::atom(at_prop(action.object, object_location));
      PostCondition pc;
      pc.set_true.insert(at_prop(action.object, action.location));
      pc.set_false.insert(at_prop(action.object, object_location));
      em.post[0] = std::move(pc);
      em.pre[1] = std::nullopt;
      em.post[1] = {};
      for (const AgentId& a : agents) {
        auto it = presence.find(a);
        const bool observes = it != presence.end() && it->second == action.room;
        em.indist[a] = observes
                           ? std::set<std::pair<EventId, EventId>>{{0, 0}, {1, 1}}
                           : std::set<std::pair<EventId, EventId>>{{0, 1}, {1, 1}};
      }
      break;
    }
    case ActionKind::PublicClaim:
    case ActionKind::PrivateTell:
      throw UnsupportedAction("communication lines have no physical event model");
  }

  pem.actual = 0;
  return pem;
}

std::string kernel_check(const StoryBundle& bundle, const Question& question) {
  for (const StoryAction& a : bundle.story) {
    if (a.kind == ActionKind::PublicClaim || a.kind == ActionKind::PrivateTell) {
      throw UnsupportedAction("kernel_check requires a communication-free story");
    }
  }

  PointedEpistemicModel state;
  state.model.worlds = {0};
  for (const AgentId& a : bundle.agents) state.model.relations[a] = {{0, 0}};
  state.actual = 0;

  const int depth = std::max(question.order, 0);
  std::string location;
  std::map<AgentId, std::string> before;  // presence before the current line

  for (std::size_t i = 0; i < bundle.story.size(); ++i) {
    const StoryAction& a = bundle.story[i];
    PointedEventModel pem = compile_physical_action(a, bundle.agents, before, location);
    UpdateResult res = product_update(state, pem);
    state = bisim_minimize(prune_reachable(res.state, depth));
    if (a.kind == ActionKind::ObjectAt || a.kind == ActionKind::Move) {
      location = a.location;
    }
    before = bundle.presence_log.at(i);
  }

  std::vector<std::string> satisfied;
  for (const std::string& c : bundle.containers) {
    if (eval(state, chain_formula(question.chain, question.object, c))) {
      satisfied.push_back(c);
    }
  }
  if (satisfied.size() != 1) {
    throw AmbiguousBelief("chain formula satisfied by " +
                          std::to_string(satisfied.size()) + " locations");
  }
  return satisfied.front();
}

}  // namespace deltom
