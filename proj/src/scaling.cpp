#include "deltom/scaling.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>

#include <httplib.h>
#include <json.hpp>

#include "deltom/errors.hpp"
#include "deltom/rng.hpp"

namespace deltom {

AggregationRule aggregation_rule_from_string(const std::string& s) {
  if (s == "last") return AggregationRule::Last;
  if (s == "min") return AggregationRule::Min;
  if (s == "avg") return AggregationRule::Avg;
  if (s == "prod") return AggregationRule::Prod;
  throw ConfigError("unknown aggregation rule '" + s + "'");
}

const char* to_string(AggregationRule rule) {
  switch (rule) {
    case AggregationRule::Last: return "last";
    case AggregationRule::Min: return "min";
    case AggregationRule::Avg: return "avg";
    case AggregationRule::Prod: return "prod";
  }
  return "?";
}

RankingStrategy ranking_from_string(const std::string& s) {
  if (s == "vanilla") return RankingStrategy::Vanilla;
  if (s == "weighted") return RankingStrategy::Weighted;
  throw ConfigError("unknown ranking '" + s + "'");
}

const char* to_string(RankingStrategy ranking) {
  return ranking == RankingStrategy::Vanilla ? "vanilla" : "weighted";
}

const char* to_string(Selection::Method method) {
  switch (method) {
    case Selection::Method::VanillaBoN: return "vanilla_bon";
    case Selection::Method::WeightedBoN: return "weighted_bon";
    case Selection::Method::Majority: return "majority";
    case Selection::Method::Beam: return "beam";
  }
  return "?";
}

double aggregate(const std::vector<StepScore>& scores, AggregationRule rule) {
  if (scores.empty()) throw EmptyTrace("cannot aggregate an empty score list");
  switch (rule) {
    case AggregationRule::Last:
      return scores.back();
    case AggregationRule::Min:
      return *std::min_element(scores.begin(), scores.end());
    case AggregationRule::Avg:
      return std::accumulate(scores.begin(), scores.end(), 0.0) /
             static_cast<double>(scores.size());
    case AggregationRule::Prod:
      return std::accumulate(scores.begin(), scores.end(), 1.0,
                             [](double a, double b) { return a * b; });
  }
  return 0.0;
}

TraceStep ScriptedGenerator::make_step(const BonTask& task, int step_index,
                                       Rng& rng) const {
  const auto& states = task.gold.states;
  const BeliefValue& gold = states.at(static_cast<std::size_t>(step_index));

  TraceStep step;
  step.index = step_index + 1;
  if (static_cast<std::size_t>(step_index) < task.story_lines.size()) {
    const std::string& line = task.story_lines[static_cast<std::size_t>(step_index)];
    auto space = line.find(' ');
    step.action_echo = space == std::string::npos ? line : line.substr(space + 1);
  }
  step.statement.chain = task.question.chain;
  step.statement.object = task.question.object;

  if (rng.bernoulli(q_)) {
    step.statement.location = gold;
    return step;
  }
  // Wrong step: uniform over the other candidate locations.
  const auto& pool = task.containers;
  if (gold.has_value() && pool.size() > 1) {
    std::size_t i = rng.index(pool.size() - 1);
    step.statement.location = pool[i] == *gold ? pool.back() : pool[i];
  } else {
    step.statement.location = pool.at(rng.index(pool.size()));
  }
  return step;
}

std::vector<Trace> ScriptedGenerator::complete_traces(const BonTask& task, int n) {
  const std::uint64_t qhash = fnv1a64(task.question.text());
  std::vector<Trace> traces;
  traces.reserve(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) {
    Trace trace;
    trace.steps.reserve(task.gold.states.size());
    for (std::size_t i = 0; i < task.gold.states.size(); ++i) {
      Rng rng(derive_seed(seed_, {task.story_id, qhash, static_cast<std::uint64_t>(t),
                                  static_cast<std::uint64_t>(i)}));
      trace.steps.push_back(make_step(task, static_cast<int>(i), rng));
    }
    const BeliefValue& last = trace.steps.back().statement.location;
    trace.final_answer = last.has_value() ? *last : "Null";
    traces.push_back(std::move(trace));
  }
  return traces;
}

std::vector<TraceStep> ScriptedGenerator::next_steps(const BonTask& task,
                                                     const Trace& prefix, int how_many) {
  const std::size_t depth = prefix.steps.size();
  if (depth >= task.gold.states.size()) return {};
  const std::uint64_t qhash = fnv1a64(task.question.text());
  std::uint64_t prefix_hash = 0x9e3779b97f4a7c15ull;
  for (const TraceStep& s : prefix.steps) {
    prefix_hash = mix64(prefix_hash ^ fnv1a64(s.statement.location.value_or("Null")));
  }
  std::vector<TraceStep> steps;
  steps.reserve(static_cast<std::size_t>(how_many));
  for (int c = 0; c < how_many; ++c) {
    Rng rng(derive_seed(seed_, {task.story_id, qhash, prefix_hash,
                                static_cast<std::uint64_t>(depth),
                                static_cast<std::uint64_t>(c)}));
    steps.push_back(make_step(task, static_cast<int>(depth), rng));
  }
  return steps;
}

std::vector<std::string> RemoteGenerator::request_completions(const std::string& prompt,
                                                              int n) {
  nlohmann::json body;
  body["model"] = config_.model;
  body["messages"] = nlohmann::json::array({
      nlohmann::json{{"role", "user"}, {"content", prompt}},
  });
  body["temperature"] = config_.temperature;
  body["n"] = n;

  httplib::Client client(config_.endpoint);
  client.set_connection_timeout(static_cast<int>(config_.timeout_seconds), 0);
  client.set_read_timeout(static_cast<int>(config_.timeout_seconds), 0);
  httplib::Headers headers;
  if (const char* key = std::getenv("DELTOM_API_KEY")) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  auto res = client.Post("/v1/chat/completions", headers, body.dump(), "application/json");
  if (!res || res->status != 200) {
    throw RemoteUnavailable("chat endpoint at " + config_.endpoint +
                            (res ? " returned status " + std::to_string(res->status)
                                 : " is unreachable"));
  }
  std::vector<std::string> texts;
  try {
    auto j = nlohmann::json::parse(res->body);
    for (const auto& choice : j.at("choices")) {
      texts.push_back(choice.at("message").at("content").get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw RemoteUnavailable(std::string("chat endpoint returned bad JSON: ") + e.what());
  }
  return texts;
}

std::vector<Trace> RemoteGenerator::complete_traces(const BonTask& task, int n) {
  if (task.bundle == nullptr) {
    throw GeneratorFailure("remote generation needs the story bundle for prompting");
  }
  const std::string prompt =
      render_prompt(*task.bundle, task.question, config_.template_id);
  std::vector<Trace> traces;
  for (const std::string& text : request_completions(prompt, n)) {
    try {
      traces.push_back(parse_trace(text));
    } catch (const MalformedTrace& e) {
      std::cerr << "warning: dropping unparseable completion: " << e.what() << "\n";
    }
  }
  if (static_cast<int>(traces.size()) < n) {
    std::cerr << "warning: " << traces.size() << "/" << n
              << " usable completions for story " << task.story_id << "\n";
  }
  return traces;
}

std::vector<TraceStep> RemoteGenerator::next_steps(const BonTask& task, const Trace& prefix,
                                                   int how_many) {
  if (task.bundle == nullptr) {
    throw GeneratorFailure("remote generation needs the story bundle for prompting");
  }
  const std::size_t depth = prefix.steps.size();
  if (depth >= task.gold.states.size()) return {};

  std::string prompt = render_prompt(*task.bundle, task.question, config_.template_id);
  prompt += "\n";
  for (const TraceStep& s : prefix.steps) {
    prompt += "## Step " + std::to_string(s.index) + " ##\n";
    if (!s.action_echo.empty()) prompt += s.action_echo + "\n";
    if (!s.rationale.empty()) prompt += s.rationale + "\n";
    if (!s.malformed) prompt += render_statement(s.statement) + "\n";
    prompt += "\n";
  }
  prompt += "Continue with \"## Step " + std::to_string(depth + 1) +
            " ##\" only, then stop.\n";

  std::vector<TraceStep> steps;
  for (const std::string& text : request_completions(prompt, how_many)) {
    // Borrow the trace parser: a lone step block plus a synthetic final
    // answer line parses into exactly one step.
    try {
      Trace t = parse_trace(text + "\nFinal Answer: [none]\n");
      if (!t.steps.empty()) {
        TraceStep s = t.steps.front();
        s.index = static_cast<int>(depth) + 1;
        steps.push_back(std::move(s));
      }
    } catch (const MalformedTrace&) {
      std::cerr << "warning: dropping unparseable step proposal\n";
    }
  }
  return steps;
}

namespace {

Selection rank_traces(const BonTask& task, const std::vector<Trace>& traces,
                      const std::vector<double>& aggregates, RankingStrategy ranking) {
  (void)task;
  Selection sel;
  sel.trace_scores = aggregates;
  for (const Trace& t : traces) sel.trace_answers.push_back(t.final_answer);

  for (std::size_t i = 0; i < traces.size(); ++i) {
    sel.group_scores[traces[i].final_answer] += aggregates[i];
  }

  if (ranking == RankingStrategy::Vanilla) {
    sel.method = Selection::Method::VanillaBoN;
    std::size_t best = 0;
    for (std::size_t i = 1; i < traces.size(); ++i) {
      if (aggregates[i] > aggregates[best]) best = i;  // ties keep lowest index
    }
    sel.chosen_trace_index = static_cast<int>(best);
    sel.chosen = traces[best].final_answer;
    sel.chosen_trace = traces[best];
    return sel;
  }

  sel.method = Selection::Method::WeightedBoN;
  // std::map iterates answers in lexicographic order, so the first strict
  // maximum is the tie-break winner.
  std::string best_answer;
  double best_sum = -1.0;
  for (const auto& [answer, sum] : sel.group_scores) {
    if (sum > best_sum) {
      best_sum = sum;
      best_answer = answer;
    }
  }
  sel.chosen = best_answer;
  // Representative trace: highest aggregate within the group, lowest index
  // on ties.
  for (std::size_t i = 0; i < traces.size(); ++i) {
    if (traces[i].final_answer != best_answer) continue;
    if (sel.chosen_trace_index < 0 ||
        aggregates[i] > aggregates[static_cast<std::size_t>(sel.chosen_trace_index)]) {
      sel.chosen_trace_index = static_cast<int>(i);
    }
  }
  if (sel.chosen_trace_index >= 0) {
    sel.chosen_trace = traces[static_cast<std::size_t>(sel.chosen_trace_index)];
  }
  return sel;
}

}  // namespace

Selection run_bon(const BonTask& task, CandidateGenerator& gen, const Verifier& verifier,
                  int n, AggregationRule rule, RankingStrategy ranking) {
  if (n < 1) throw ConfigError("N must be at least 1");
  std::vector<Trace> traces = gen.complete_traces(task, n);
  if (static_cast<int>(traces.size()) < n) {
    throw GeneratorFailure("generator produced " + std::to_string(traces.size()) +
                           " of " + std::to_string(n) + " traces");
  }

  std::vector<double> aggregates;
  aggregates.reserve(traces.size());
  for (std::size_t i = 0; i < traces.size(); ++i) {
    ScoreContext ctx;
    ctx.story_id = task.story_id;
    ctx.question = &task.question;
    ctx.gold = &task.gold;
    ctx.trace_index = static_cast<int>(i);
    ctx.story_lines = &task.story_lines;
    aggregates.push_back(aggregate(verifier.score_trace(ctx, traces[i]), rule));
  }

  return rank_traces(task, traces, aggregates, ranking);
}

Selection majority(const std::vector<Trace>& traces) {
  if (traces.empty()) throw EmptyTrace("majority voting needs at least one trace");
  Selection sel;
  sel.method = Selection::Method::Majority;
  for (const Trace& t : traces) {
    sel.trace_answers.push_back(t.final_answer);
    sel.group_scores[t.final_answer] += 1.0;
  }
  std::string best_answer;
  double best_count = -1.0;
  for (const auto& [answer, count] : sel.group_scores) {
    if (count > best_count) {  // map order makes ties lexicographic
      best_count = count;
      best_answer = answer;
    }
  }
  sel.chosen = best_answer;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    if (traces[i].final_answer == best_answer) {
      sel.chosen_trace_index = static_cast<int>(i);
      sel.chosen_trace = traces[i];
      break;
    }
  }
  return sel;
}

Selection run_beam(const BonTask& task, CandidateGenerator& gen, const Verifier& verifier,
                   const BeamConfig& config) {
  if (config.k < 1 || config.b < 1) throw ConfigError("beam width parameters must be >= 1");
  const int max_depth = config.max_depth > 0
                            ? config.max_depth
                            : static_cast<int>(task.gold.states.size());
  if (max_depth < 1) throw ConfigError("beam search needs a positive depth");

  struct Path {
    Trace trace;
    double recent_score = 0.0;
  };

  auto score_newest = [&](const Trace& trace, int path_index) {
    ScoreContext ctx;
    ctx.story_id = task.story_id;
    ctx.question = &task.question;
    ctx.gold = &task.gold;
    ctx.trace_index = path_index;
    ctx.story_lines = &task.story_lines;
    return verifier.score_step(ctx, trace, static_cast<int>(trace.steps.size()) - 1);
  };

  // Ranking by the newest step's score only; stable sort keeps earlier paths
  // ahead on ties.
  auto retain_top_k = [&](std::vector<Path>& paths) {
    std::stable_sort(paths.begin(), paths.end(),
                     [](const Path& a, const Path& b) { return a.recent_score > b.recent_score; });
    if (static_cast<int>(paths.size()) > config.k) paths.resize(static_cast<std::size_t>(config.k));
  };

  std::vector<Path> beams;
  {
    std::vector<TraceStep> first = gen.next_steps(task, Trace{}, config.k);
    if (first.empty()) throw GeneratorFailure("no first-step candidates");
    int index = 0;
    for (TraceStep& step : first) {
      Path p;
      p.trace.steps.push_back(std::move(step));
      p.recent_score = score_newest(p.trace, index++);
      beams.push_back(std::move(p));
    }
    retain_top_k(beams);
  }

  for (int depth = 1; depth < max_depth; ++depth) {
    std::vector<Path> expanded;
    int index = 0;
    for (const Path& beam : beams) {
      std::vector<TraceStep> steps = gen.next_steps(task, beam.trace, config.b);
      for (TraceStep& step : steps) {
        Path p;
        p.trace = beam.trace;
        p.trace.steps.push_back(std::move(step));
        p.recent_score = score_newest(p.trace, index++);
        expanded.push_back(std::move(p));
      }
    }
    if (expanded.empty()) {
      throw DepthExhausted("no expansions at depth " + std::to_string(depth));
    }
    retain_top_k(expanded);
    beams = std::move(expanded);
  }

  Selection sel;
  sel.method = Selection::Method::Beam;
  for (const Path& p : beams) {
    const BeliefValue& last = p.trace.steps.back().statement.location;
    std::string answer = last.has_value() ? *last : "Null";
    sel.trace_answers.push_back(answer);
    sel.trace_scores.push_back(p.recent_score);
    sel.group_scores[answer] += p.recent_score;
  }
  const Path& best = beams.front();
  sel.chosen_trace_index = 0;
  sel.chosen_trace = best.trace;
  sel.chosen_trace.final_answer = sel.trace_answers.front();
  sel.chosen = sel.trace_answers.front();
  return sel;
}

}  // namespace deltom
