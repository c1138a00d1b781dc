#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "deltom/trace.hpp"

namespace deltom {

// Step scores live in [0, 1].
using StepScore = double;

// Per-order step accuracies reported for the two trained verifiers; used to
// parameterize the noisy stand-in.
constexpr std::array<double, 5> kPbm8bAccuracy = {0.992, 0.946, 0.890, 0.870, 0.799};
constexpr std::array<double, 5> kPbm3bAccuracy = {0.991, 0.919, 0.849, 0.838, 0.738};

struct VerifierSpec {
  enum class Kind { Exact, Noisy, Remote };

  Kind kind = Kind::Exact;
  std::array<double, 5> accuracy = {1.0, 1.0, 1.0, 1.0, 1.0};  // Noisy
  std::uint64_t seed = 0;                                      // Noisy
  std::string endpoint;                                        // Remote base URL
  double timeout_seconds = 30.0;

  void validate() const;  // throws ConfigError

  // "exact" | "noisy:8b" | "noisy:3b" | "noisy:a0,a1,a2,a3,a4[:seed]"
  // | "remote:http://host:port". Throws ConfigError.
  static VerifierSpec parse(const std::string& text);
  std::string describe() const;
};

// Everything a verifier may condition on besides the step itself.
struct ScoreContext {
  std::uint64_t story_id = 0;
  const Question* question = nullptr;
  const GoldTrace* gold = nullptr;
  int trace_index = 0;
  const std::vector<std::string>* story_lines = nullptr;  // remote scoring only
};

class Verifier {
 public:
  virtual ~Verifier() = default;

  // Scores trace.steps[step_index]. Steps beyond the gold length and
  // malformed sentinel steps score 0.
  virtual StepScore score_step(const ScoreContext& ctx, const Trace& trace,
                               int step_index) const = 0;

  std::vector<StepScore> score_trace(const ScoreContext& ctx, const Trace& trace) const;
};

// 1.0 iff the step statement equals the gold state at its index.
class ExactVerifier : public Verifier {
 public:
  StepScore score_step(const ScoreContext& ctx, const Trace& trace,
                       int step_index) const override;
};

// Exact label flipped with probability 1 - accuracy[order]. The flip draw is
// a pure function of (seed, story id, question hash, trace index, step
// index), so runs are reproducible and accuracy changes are coupled through
// common random numbers: raising an accuracy entry never introduces a new
// flip.
class NoisyVerifier : public Verifier {
 public:
  NoisyVerifier(std::array<double, 5> accuracy, std::uint64_t seed)
      : accuracy_(accuracy), seed_(seed) {}

  StepScore score_step(const ScoreContext& ctx, const Trace& trace,
                       int step_index) const override;

 private:
  std::array<double, 5> accuracy_;
  std::uint64_t seed_;
};

// POSTs {question, story_lines, step_text, prefix} to <endpoint>/score and
// expects {"score": x}; the score is clamped to [0, 1]. The bearer token is
// read from DELTOM_API_KEY. Failures throw RemoteUnavailable.
class RemoteVerifier : public Verifier {
 public:
  explicit RemoteVerifier(VerifierSpec spec) : spec_(std::move(spec)) {}

  StepScore score_step(const ScoreContext& ctx, const Trace& trace,
                       int step_index) const override;

 private:
  VerifierSpec spec_;
};

std::unique_ptr<Verifier> make_verifier(const VerifierSpec& spec);

}  // namespace deltom
