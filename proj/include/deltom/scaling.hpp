#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "deltom/rng.hpp"
#include "deltom/verifier.hpp"

namespace deltom {

enum class AggregationRule { Last, Min, Avg, Prod };

AggregationRule aggregation_rule_from_string(const std::string& s);
const char* to_string(AggregationRule rule);

// Last -> final element, Min -> minimum, Avg -> arithmetic mean,
// Prod -> product. Throws EmptyTrace on an empty score list.
double aggregate(const std::vector<StepScore>& scores, AggregationRule rule);

enum class RankingStrategy { Vanilla, Weighted };

RankingStrategy ranking_from_string(const std::string& s);
const char* to_string(RankingStrategy ranking);

// One scaling query: the question plus everything generators and verifiers
// may condition on. Synthetic benchmark tasks fill only gold + containers.
struct BonTask {
  std::uint64_t story_id = 0;
  Question question;
  GoldTrace gold;
  std::vector<std::string> containers;
  std::vector<std::string> story_lines;  // empty for synthetic tasks
  const StoryBundle* bundle = nullptr;   // set when prompts are needed
};

class CandidateGenerator {
 public:
  virtual ~CandidateGenerator() = default;

  // BoN mode: n complete traces.
  virtual std::vector<Trace> complete_traces(const BonTask& task, int n) = 0;

  // Beam mode: up to how_many candidate next steps for the given prefix.
  virtual std::vector<TraceStep> next_steps(const BonTask& task, const Trace& prefix,
                                            int how_many) = 0;
};

// Emits each step correct with probability q, independently; a wrong step
// picks uniformly among the other candidate locations. Deterministic in
// (seed, story, question, trace index, step index).
class ScriptedGenerator : public CandidateGenerator {
 public:
  ScriptedGenerator(double q, std::uint64_t seed) : q_(q), seed_(seed) {}

  std::vector<Trace> complete_traces(const BonTask& task, int n) override;
  std::vector<TraceStep> next_steps(const BonTask& task, const Trace& prefix,
                                    int how_many) override;

  double q() const { return q_; }

 private:
  TraceStep make_step(const BonTask& task, int step_index, Rng& rng) const;

  double q_;
  std::uint64_t seed_;
};

struct RemoteGeneratorConfig {
  std::string endpoint;
  std::string model = "gpt-4o-mini";
  double temperature = 1.0;
  double timeout_seconds = 120.0;
  std::string template_id = "hi_tom_v1";
};

// Chat-completion client: one POST with n requested completions; each choice
// is parsed as a belief trace. Unparseable or missing choices degrade to
// fewer candidates with a warning on stderr.
class RemoteGenerator : public CandidateGenerator {
 public:
  explicit RemoteGenerator(RemoteGeneratorConfig config) : config_(std::move(config)) {}

  std::vector<Trace> complete_traces(const BonTask& task, int n) override;
  std::vector<TraceStep> next_steps(const BonTask& task, const Trace& prefix,
                                    int how_many) override;

 private:
  std::vector<std::string> request_completions(const std::string& prompt, int n);

  RemoteGeneratorConfig config_;
};

struct Selection {
  enum class Method { VanillaBoN, WeightedBoN, Majority, Beam };

  Method method = Method::VanillaBoN;
  std::string chosen;                        // selected answer
  int chosen_trace_index = -1;
  std::vector<double> trace_scores;          // aggregate per trace
  std::vector<std::string> trace_answers;    // final answer per trace
  std::map<std::string, double> group_scores;  // answer -> summed score
  Trace chosen_trace;
};

const char* to_string(Selection::Method method);

// Samples N complete traces, scores each step, aggregates per rule, then
// ranks. Vanilla keeps the highest-aggregate trace (ties: lowest index);
// Weighted groups traces by final answer and keeps the answer with the
// largest score sum (ties: lexicographically smallest answer). Throws
// GeneratorFailure when fewer than N traces come back.
Selection run_bon(const BonTask& task, CandidateGenerator& gen, const Verifier& verifier,
                  int n, AggregationRule rule, RankingStrategy ranking);

// Most frequent final answer; ties go to the lexicographically smallest.
Selection majority(const std::vector<Trace>& traces);

struct BeamConfig {
  int k = 4;          // beams kept
  int b = 4;          // expansions per beam
  int max_depth = 0;  // 0 = one step per story line
};

// Stepwise search: k initial candidates, k*b expansions per round, paths
// ranked by the score of their newest step (ties: earlier path), truncated
// to k until max_depth. The answer is the final statement of the best
// surviving path.
Selection run_beam(const BonTask& task, CandidateGenerator& gen, const Verifier& verifier,
                   const BeamConfig& config);

}  // namespace deltom
