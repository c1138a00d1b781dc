#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "deltom/story.hpp"

namespace deltom {

// "Owen thinks Liam thinks Chloe thinks the celery is in [green_bucket]".
// The chain is empty for order-0 statements ("The celery is in [x]").
struct ChainStatement {
  std::vector<AgentId> chain;
  std::string object;
  BeliefValue location;
};

struct TraceStep {
  int index = 0;            // number printed in the "## Step k ##" header
  std::string action_echo;  // repeated story line
  std::string rationale;    // free text between echo and statement
  ChainStatement statement;
  bool malformed = false;   // no bracketed location in the block
};

struct Trace {
  std::vector<TraceStep> steps;
  std::string final_answer;
};

struct LabeledStep {
  TraceStep step;
  int label = 0;  // 1 iff the statement matches the gold state at its index
};

// A candidate trace keyed to its (story, question).
struct CandidateTrace {
  std::uint64_t story_id = 0;
  int order = 0;
  Trace trace;
};

// Lowercases a bracket token, maps spaces to underscores, and canonicalizes
// any casing of "null" to the Null state.
BeliefValue normalize_location(std::string token);

// Splits on "## Step k ##" headers; in each block the last bracketed token
// is the statement location, and the final "Final Answer: [X]" line yields
// the final answer. Blocks without a bracketed token become sentinel steps
// (malformed = true) that score 0 downstream instead of aborting the parse.
// Throws MalformedTrace when there are no steps or no final answer.
Trace parse_trace(const std::string& text);

std::string render_statement(const ChainStatement& statement);

// Figure-style block rendering; parse_trace(serialize_trace(t)) == t for
// traces produced by this library.
std::string serialize_trace(const Trace& trace);

// Renders the gold belief trace of a question in the candidate-trace format.
Trace trace_from_gold(const StoryBundle& bundle, const Question& question,
                      const GoldTrace& gold);

extern const char* const kHiTomOneShotTemplate;

// Byte-exact substitution of {note}, {story} and {question} into the stored
// template. Throws UnknownTemplate for an unknown id.
std::string render_prompt(const StoryBundle& bundle, const Question& question,
                          const std::string& template_id = "hi_tom_v1");

// Step i is labeled 1 iff its statement location equals gold state i (Null
// matches Null). Steps beyond the gold length are labeled 0.
std::vector<LabeledStep> label_steps(const Trace& trace, const GoldTrace& gold);

// One JSONL dataset record per candidate, in input order. Throws OrphanTrace
// for candidates keyed to an unknown (story, question).
void assemble_dataset(const std::vector<StoryBundle>& bundles,
                      const std::vector<CandidateTrace>& candidates,
                      std::ostream& out);

// stories.jsonl codec.
std::string bundle_to_jsonl(const StoryBundle& bundle);
StoryBundle bundle_from_jsonl(const std::string& line);

}  // namespace deltom
