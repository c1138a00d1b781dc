#include "deltom/trace.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "deltom/errors.hpp"

namespace deltom {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string rtrim(std::string s) {
  while (!s.empty() && (std::isspace(static_cast<unsigned char>(s.back())) != 0)) s.pop_back();
  return s;
}

std::string trim(std::string s) {
  s = rtrim(std::move(s));
  std::size_t i = 0;
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i])) != 0) ++i;
  return s.substr(i);
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) lines.push_back(std::move(cur));
  return lines;
}

// "## Step 7 ##" -> 7, or -1 when the line is not a step header.
int parse_step_header(const std::string& line) {
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])) != 0) ++i;
  };
  skip_ws();
  if (line.compare(i, 2, "##") != 0) return -1;
  i += 2;
  skip_ws();
  if (line.compare(i, 4, "Step") != 0) return -1;
  i += 4;
  skip_ws();
  std::size_t start = i;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i])) != 0) ++i;
  if (i == start) return -1;
  int number = std::stoi(line.substr(start, i - start));
  skip_ws();
  if (line.compare(i, 2, "##") != 0) return -1;
  return number;
}

// Last [token] in the line, if any.
std::optional<std::string> last_bracket_token(const std::string& line) {
  auto close = line.rfind(']');
  if (close == std::string::npos) return std::nullopt;
  auto open = line.rfind('[', close);
  if (open == std::string::npos) return std::nullopt;
  return line.substr(open + 1, close - open - 1);
}

bool starts_with_final_answer(const std::string& line) {
  return trim(line).rfind("Final Answer:", 0) == 0;
}

// Fills chain and object from the prose before the bracket. Tolerant: on
// anything unexpected the chain/object stay empty and only the location is
// kept.
void parse_statement_prose(const std::string& line, ChainStatement& st) {
  auto open = line.rfind('[');
  std::string prose = trim(line.substr(0, open));
  const std::string kThinks = " thinks ";
  std::vector<std::string> segments;
  std::size_t pos = 0;
  while (true) {
    auto hit = prose.find(kThinks, pos);
    if (hit == std::string::npos) break;
    segments.push_back(prose.substr(pos, hit - pos));
    pos = hit + kThinks.size();
  }
  std::string tail = prose.substr(pos);  // "the celery is in"
  const std::string kIsIn = "is in";
  auto cut = tail.rfind(kIsIn);
  if (cut == std::string::npos) return;
  std::string subject = trim(tail.substr(0, cut));
  if (subject.rfind("the ", 0) == 0 || subject.rfind("The ", 0) == 0) {
    subject = subject.substr(4);
  }
  if (subject.empty()) return;
  for (std::string& s : segments) {
    // "A think" from "Where does A think" style prose never appears here;
    // segments are bare names, but a leading article is stripped anyway.
    s = trim(std::move(s));
    if (s.empty()) return;
  }
  st.chain.assign(segments.begin(), segments.end());
  st.object = subject;
}

}  // namespace

BeliefValue normalize_location(std::string token) {
  token = trim(std::move(token));
  std::string lower = token;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "null") return std::nullopt;
  std::replace(lower.begin(), lower.end(), ' ', '_');
  return lower;
}

Trace parse_trace(const std::string& text) {
  std::vector<std::string> lines = split_lines(text);

  std::size_t final_line = lines.size();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (starts_with_final_answer(lines[i])) final_line = i;
  }
  if (final_line == lines.size()) throw MalformedTrace("no final answer line");
  auto final_token = last_bracket_token(lines[final_line]);
  if (!final_token) throw MalformedTrace("final answer line has no bracketed token");
  BeliefValue final_loc = normalize_location(*final_token);

  Trace trace;
  trace.final_answer = final_loc.has_value() ? *final_loc : "Null";

  struct Block {
    int number;
    std::vector<std::string> lines;
  };
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i == final_line) continue;
    int number = parse_step_header(lines[i]);
    if (number >= 0) {
      blocks.push_back({number, {}});
    } else if (!blocks.empty()) {
      blocks.back().lines.push_back(rtrim(lines[i]));
    }
  }
  if (blocks.empty()) throw MalformedTrace("no step blocks");

  for (Block& block : blocks) {
    while (!block.lines.empty() && block.lines.back().empty()) block.lines.pop_back();
    std::size_t first = 0;
    while (first < block.lines.size() && block.lines[first].empty()) ++first;

    TraceStep step;
    step.index = block.number;

    std::size_t statement_line = block.lines.size();
    for (std::size_t i = first; i < block.lines.size(); ++i) {
      if (last_bracket_token(block.lines[i]).has_value()) statement_line = i;
    }

    if (first >= block.lines.size()) {
      step.malformed = true;  // empty block
    } else if (statement_line == block.lines.size()) {
      // No bracketed location anywhere: sentinel step, scored 0 downstream.
      step.malformed = true;
      step.action_echo = block.lines[first];
      std::string rationale;
      for (std::size_t i = first + 1; i < block.lines.size(); ++i) {
        if (!rationale.empty()) rationale += "\n";
        rationale += block.lines[i];
      }
      step.rationale = rtrim(std::move(rationale));
    } else {
      const std::string& stmt = block.lines[statement_line];
      step.statement.location = normalize_location(*last_bracket_token(stmt));
      parse_statement_prose(stmt, step.statement);
      if (statement_line > first) {
        step.action_echo = block.lines[first];
        std::string rationale;
        for (std::size_t i = first + 1; i < statement_line; ++i) {
          if (!rationale.empty()) rationale += "\n";
          rationale += block.lines[i];
        }
        step.rationale = rtrim(std::move(rationale));
      }
    }
    trace.steps.push_back(std::move(step));
  }

  return trace;
}

std::string render_statement(const ChainStatement& statement) {
  std::string loc = statement.location.has_value() ? *statement.location : "Null";
  if (statement.chain.empty()) {
    return "The " + statement.object + " is in [" + loc + "]";
  }
  std::string out = statement.chain.front() + " thinks ";
  for (std::size_t i = 1; i < statement.chain.size(); ++i) {
    out += statement.chain[i] + " thinks ";
  }
  out += "the " + statement.object + " is in [" + loc + "]";
  return out;
}

std::string serialize_trace(const Trace& trace) {
  std::ostringstream os;
  for (const TraceStep& step : trace.steps) {
    os << "## Step " << step.index << " ##\n";
    if (!step.action_echo.empty()) os << step.action_echo << "\n";
    if (!step.rationale.empty()) os << step.rationale << "\n";
    if (!step.malformed) os << render_statement(step.statement) << "\n";
    os << "\n";
  }
  os << "Final Answer: [" << trace.final_answer << "]\n";
  return os.str();
}

Trace trace_from_gold(const StoryBundle& bundle, const Question& question,
                      const GoldTrace& gold) {
  Trace trace;
  trace.steps.reserve(bundle.story.size());

  for (std::size_t i = 0; i < bundle.story.size(); ++i) {
    const StoryAction& a = bundle.story[i];
    TraceStep step;
    step.index = static_cast<int>(i) + 1;
    step.action_echo = a.text();
    step.statement.chain = question.chain;
    step.statement.object = question.object;
    step.statement.location = gold.states.at(i);

    const bool changed = i == 0 ? gold.states[i].has_value()
                                : gold.states[i] != gold.states[i - 1];
    switch (a.kind) {
      case ActionKind::EnterAll:
        step.rationale = i == 0 ? "Everyone is present, but the " + question.object +
                                      "'s location is still unknown."
                                : "No effect on beliefs.";
        break;
      case ActionKind::ObjectAt:
        step.rationale = changed ? "Everyone observes this." : "Not everyone is present.";
        break;
      case ActionKind::Noop:
      case ActionKind::Distractor:
        step.rationale = "Irrelevant.";
        break;
      case ActionKind::Exit:
        step.rationale = a.actor + "'s belief frozen.";
        break;
      case ActionKind::Move:
        step.rationale = changed ? "Everyone tracked here sees this move."
                                 : "Not everyone tracked here is present, so the belief "
                                   "stays unchanged.";
        break;
      case ActionKind::PublicClaim:
        step.rationale = changed ? "The public claim is believed here."
                                 : "Public speech only affects first- and second-order "
                                   "beliefs.";
        break;
      case ActionKind::PrivateTell:
        step.rationale = changed ? "The private message is believed here."
                                 : "Private communication only affects beliefs between "
                                   "the speaker and the listener.";
        break;
    }
    trace.steps.push_back(std::move(step));
  }

  trace.final_answer = gold.final_answer;
  return trace;
}

namespace {

const std::map<std::string, const char*>& template_store() {
  static const std::map<std::string, const char*> store = {
      {"hi_tom_v1", kHiTomOneShotTemplate},
  };
  return store;
}

void replace_all(std::string& text, const std::string& slot, const std::string& value) {
  std::size_t pos = 0;
  while ((pos = text.find(slot, pos)) != std::string::npos) {
    text.replace(pos, slot.size(), value);
    pos += value.size();
  }
}

}  // namespace

std::string render_prompt(const StoryBundle& bundle, const Question& question,
                          const std::string& template_id) {
  auto it = template_store().find(template_id);
  if (it == template_store().end()) throw UnknownTemplate("unknown template '" + template_id + "'");
  std::string text = it->second;

  std::string story;
  for (const std::string& line : bundle.story_lines()) {
    if (!story.empty()) story += "\n";
    story += line;
  }
  replace_all(text, "{note}", bundle.config.note);
  replace_all(text, "{story}", story);
  replace_all(text, "{question}", question.text());
  return text;
}

std::vector<LabeledStep> label_steps(const Trace& trace, const GoldTrace& gold) {
  std::vector<LabeledStep> out;
  out.reserve(trace.steps.size());
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const TraceStep& step = trace.steps[i];
    int label = 0;
    if (i < gold.states.size() && !step.malformed &&
        step.statement.location == gold.states[i]) {
      label = 1;
    }
    out.push_back({step, label});
  }
  return out;
}

namespace {

std::string belief_text(const BeliefValue& v) { return v.has_value() ? *v : "Null"; }

}  // namespace

void assemble_dataset(const std::vector<StoryBundle>& bundles,
                      const std::vector<CandidateTrace>& candidates,
                      std::ostream& out) {
  std::map<std::uint64_t, const StoryBundle*> by_id;
  for (const StoryBundle& b : bundles) by_id[b.story_id] = &b;

  for (const CandidateTrace& cand : candidates) {
    auto it = by_id.find(cand.story_id);
    if (it == by_id.end()) {
      throw OrphanTrace("candidate references unknown story " + std::to_string(cand.story_id));
    }
    const StoryBundle& b = *it->second;
    const Question* question = nullptr;
    const GoldTrace* gold = nullptr;
    for (std::size_t i = 0; i < b.questions.size(); ++i) {
      if (b.questions[i].order == cand.order) {
        question = &b.questions[i];
        gold = &b.gold[i];
      }
    }
    if (question == nullptr) {
      throw OrphanTrace("story " + std::to_string(cand.story_id) + " has no order-" +
                        std::to_string(cand.order) + " question");
    }

    auto labeled = label_steps(cand.trace, *gold);
    ordered_json rec;
    rec["story_id"] = cand.story_id;
    rec["story_lines"] = b.story_lines();
    rec["question"] = question->text();
    rec["order"] = cand.order;
    {
      std::vector<std::string> states;
      for (const BeliefValue& s : gold->states) states.push_back(belief_text(s));
      rec["gold_states"] = states;
    }
    {
      std::vector<std::string> steps;
      std::vector<int> labels;
      for (const LabeledStep& ls : labeled) {
        steps.push_back(ls.step.malformed ? "" : render_statement(ls.step.statement));
        labels.push_back(ls.label);
      }
      rec["candidate_steps"] = steps;
      rec["step_labels"] = labels;
    }
    rec["final_answer"] = cand.trace.final_answer;
    rec["gold_answer"] = gold->final_answer;
    out << rec.dump() << "\n";
  }
}

std::string bundle_to_jsonl(const StoryBundle& b) {
  ordered_json j;
  j["story_id"] = b.story_id;
  j["seed"] = b.config.seed;
  j["vocab_version"] = "v1";
  j["agents"] = b.agents;
  j["object"] = b.object;
  j["containers"] = b.containers;
  j["rooms"] = {{"action", b.action_room}, {"reunion", b.reunion_room}};

  ordered_json story = ordered_json::array();
  for (const StoryAction& a : b.story) {
    ordered_json ja;
    ja["index"] = a.index;
    ja["kind"] = to_string(a.kind);
    if (!a.actor.empty()) ja["actor"] = a.actor;
    if (!a.listener.empty()) ja["listener"] = a.listener;
    if (!a.object.empty()) ja["object"] = a.object;
    if (!a.location.empty()) ja["location"] = a.location;
    if (!a.room.empty()) ja["room"] = a.room;
    if (!a.group.empty()) ja["group"] = a.group;
    if (!a.detail.empty()) ja["detail"] = a.detail;
    ja["text"] = a.text();
    story.push_back(std::move(ja));
  }
  j["story"] = std::move(story);

  ordered_json questions = ordered_json::array();
  ordered_json gold = ordered_json::array();
  for (std::size_t i = 0; i < b.questions.size(); ++i) {
    const Question& q = b.questions[i];
    ordered_json jq;
    jq["order"] = q.order;
    jq["chain"] = q.chain;
    jq["object"] = q.object;
    jq["text"] = q.text();
    questions.push_back(std::move(jq));

    ordered_json jg;
    jg["order"] = q.order;
    std::vector<std::string> states;
    for (const BeliefValue& s : b.gold[i].states) states.push_back(belief_text(s));
    jg["states"] = states;
    jg["final_answer"] = b.gold[i].final_answer;
    gold.push_back(std::move(jg));
  }
  j["questions"] = std::move(questions);
  j["gold"] = std::move(gold);

  j["exit_order"] = b.exit_order;
  ordered_json presence = ordered_json::array();
  for (const auto& step : b.presence_log) presence.push_back(step);
  j["presence"] = std::move(presence);

  ordered_json cfg;
  cfg["num_agents"] = b.config.num_agents;
  cfg["num_containers"] = b.config.num_containers;
  cfg["num_moves"] = b.config.num_moves;
  cfg["num_noops"] = b.config.num_noops;
  cfg["num_distractors"] = b.config.num_distractors;
  cfg["public_claims"] = b.config.enable_public_claims;
  cfg["private_tells"] = b.config.enable_private_tells;
  cfg["deception"] = b.config.enable_deception;
  cfg["max_order"] = b.config.max_order;
  cfg["note"] = b.config.note;
  j["config"] = std::move(cfg);

  return j.dump();
}

StoryBundle bundle_from_jsonl(const std::string& line) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad story record: ") + e.what());
  }

  StoryBundle b;
  try {
    b.story_id = j.at("story_id").get<std::uint64_t>();
    b.config.seed = j.at("seed").get<std::uint64_t>();
    b.agents = j.at("agents").get<std::vector<std::string>>();
    b.object = j.at("object").get<std::string>();
    b.containers = j.at("containers").get<std::vector<std::string>>();
    b.action_room = j.at("rooms").at("action").get<std::string>();
    b.reunion_room = j.at("rooms").at("reunion").get<std::string>();

    for (const auto& ja : j.at("story")) {
      StoryAction a;
      a.index = ja.at("index").get<int>();
      a.kind = action_kind_from_string(ja.at("kind").get<std::string>());
      if (ja.contains("actor")) a.actor = ja.at("actor").get<std::string>();
      if (ja.contains("listener")) a.listener = ja.at("listener").get<std::string>();
      if (ja.contains("object")) a.object = ja.at("object").get<std::string>();
      if (ja.contains("location")) a.location = ja.at("location").get<std::string>();
      if (ja.contains("room")) a.room = ja.at("room").get<std::string>();
      if (ja.contains("group")) a.group = ja.at("group").get<std::vector<std::string>>();
      if (ja.contains("detail")) a.detail = ja.at("detail").get<std::string>();
      b.story.push_back(std::move(a));
    }

    for (const auto& jq : j.at("questions")) {
      Question q;
      q.order = jq.at("order").get<int>();
      q.chain = jq.at("chain").get<std::vector<std::string>>();
      q.object = jq.at("object").get<std::string>();
      b.questions.push_back(std::move(q));
    }
    for (const auto& jg : j.at("gold")) {
      GoldTrace g;
      for (const auto& s : jg.at("states")) {
        std::string v = s.get<std::string>();
        g.states.push_back(v == "Null" ? BeliefValue{} : BeliefValue{v});
      }
      g.final_answer = jg.at("final_answer").get<std::string>();
      b.gold.push_back(std::move(g));
    }

    b.exit_order = j.at("exit_order").get<std::map<std::string, int>>();
    for (const auto& step : j.at("presence")) {
      b.presence_log.push_back(step.get<std::map<std::string, std::string>>());
    }

    const auto& cfg = j.at("config");
    b.config.num_agents = cfg.at("num_agents").get<int>();
    b.config.num_containers = cfg.at("num_containers").get<int>();
    b.config.num_moves = cfg.at("num_moves").get<int>();
    b.config.num_noops = cfg.at("num_noops").get<int>();
    b.config.num_distractors = cfg.at("num_distractors").get<int>();
    b.config.enable_public_claims = cfg.at("public_claims").get<bool>();
    b.config.enable_private_tells = cfg.at("private_tells").get<bool>();
    b.config.enable_deception = cfg.at("deception").get<bool>();
    b.config.max_order = cfg.at("max_order").get<int>();
    b.config.note = cfg.at("note").get<std::string>();
    b.config.containers = b.containers;
    b.config.rooms = {b.action_room, b.reunion_room};
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad story record: ") + e.what());
  }
  return b;
}

}  // namespace deltom
