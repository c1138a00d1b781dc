#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "deltom/event.hpp"
#include "deltom/logic.hpp"

namespace deltom {

// Tracked value of a belief chain; nullopt renders as [Null] and means the
// chain has not yet learned any location.
using BeliefValue = std::optional<std::string>;

enum class ActionKind {
  EnterAll,
  ObjectAt,
  Noop,
  Distractor,
  Exit,
  Move,
  PublicClaim,
  PrivateTell,
};

const char* to_string(ActionKind kind);
ActionKind action_kind_from_string(const std::string& s);

// One numbered story line. The rendered text is a pure function of the
// fields.
struct StoryAction {
  int index = 0;  // 1-based line number
  ActionKind kind = ActionKind::Noop;
  AgentId actor;                 // mover / speaker / exiter / noop subject
  AgentId listener;              // PrivateTell target
  std::string object;            // story object (ObjectAt/Move/claims)
  std::string location;          // container payload
  std::string room;              // room entered / exited / acted in
  std::vector<AgentId> group;    // EnterAll roster
  std::string detail;            // distractor flavour: "watch" | "likes"

  std::string text() const;            // line body, e.g. "Chloe moved the ..."
  std::string numbered_text() const;   // "6 Chloe moved the ..."
};

struct Question {
  int order = 0;
  std::vector<AgentId> chain;  // length == order
  std::string object;

  std::string text() const;  // "Where does Owen think ... the celery is?"
};

struct GoldTrace {
  std::vector<BeliefValue> states;  // one per story line
  std::string final_answer;
};

struct StoryConfig {
  int num_agents = 5;
  int num_containers = 5;               // used when containers is empty
  std::vector<std::string> containers;  // explicit answer candidates
  std::array<std::string, 2> rooms;     // action room, reunion room ("" = pick)
  int num_moves = 2;
  int num_noops = 3;
  int num_distractors = 1;
  bool enable_public_claims = true;
  bool enable_private_tells = true;
  bool enable_deception = true;
  int max_order = 4;
  std::uint64_t seed = 0;
  std::string note;  // substituted into the {note} slot of prompts

  void validate() const;  // throws ConfigError
};

// Where everyone is while a given line executes; absent agents have no
// entry. Index 0 is the state after line 1.
using PresenceLog = std::vector<std::map<AgentId, std::string>>;

struct StoryBundle {
  std::uint64_t story_id = 0;
  StoryConfig config;  // effective configuration, pools filled in
  std::vector<AgentId> agents;
  std::string object;
  std::vector<std::string> containers;
  std::string action_room;
  std::string reunion_room;
  std::vector<StoryAction> story;
  std::vector<Question> questions;  // one per order 0..max_order
  std::vector<GoldTrace> gold;      // parallel to questions
  PresenceLog presence_log;         // presence in effect at each line
  std::map<AgentId, int> exit_order;  // line index of each action-room exit

  std::vector<std::string> story_lines() const;  // numbered text lines
  const Question& question_for_order(int order) const;
  const GoldTrace& gold_for_order(int order) const;
};

// Deterministic one-chapter story synthesis: line 1 enters everyone into the
// action room, line 2 places the object, then noops/distractors/exits/moves
// interleave (each actor present, every agent exits exactly once), everyone
// re-enters the reunion room, and optional public/private claims close the
// story. Gold traces are computed for one question per order 0..max_order.
StoryBundle generate_story(const StoryConfig& config);

// Chain-belief fold over the story. Rules, per line kind:
//   ObjectAt   - chains of agents all present in the room learn the location;
//                order 0 always tracks it. Chains start at Null.
//   Move       - updated iff every chain agent is present in the move's room;
//                order 0 always updates.
//   Exit       - no direct change; the exited agent stops observing moves.
//   Noop/Distractor/EnterAll - no change.
//   PublicClaim by s of L - order-1 chain (x): L iff x exited before s;
//                order-2 chains (s,x) and (x,s): L. Higher orders and the
//                speaker's own belief never change.
//   PrivateTell s -> x of L - chain (x): L iff x exited before s; chain
//                (x,s): same gate; chain (s,x): always L. Higher orders and
//                uninvolved chains never change.
// An agent who never exited counts as exiting at +infinity.
GoldTrace gold_trace(const std::vector<StoryAction>& story, const Question& question,
                     const std::map<AgentId, int>& exit_order,
                     const PresenceLog& presence_log);

// Compiles a physical story line to a pointed event model over the given
// agents. Moves become the two-event private assignment (acting event vs
// nothing-happened event, indistinguishable to absent agents); everything
// else is a single publicly observed event. Communication lines are not
// compilable and throw UnsupportedAction.
PointedEventModel compile_physical_action(const StoryAction& action,
                                          const std::vector<AgentId>& agents,
                                          const std::map<AgentId, std::string>& presence,
                                          const std::string& object_location);

// Independent evaluation path: folds compile_physical_action + product
// update (+ pruning and minimization) over the story from a single-world
// model, then returns the unique location the chain formula certifies.
// Throws UnsupportedAction on communication lines and AmbiguousBelief if no
// unique location satisfies the query (a compiler bug, not a data error).
std::string kernel_check(const StoryBundle& bundle, const Question& question);

}  // namespace deltom
