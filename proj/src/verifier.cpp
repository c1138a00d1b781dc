#include "deltom/verifier.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "deltom/errors.hpp"
#include "deltom/rng.hpp"

namespace deltom {

void VerifierSpec::validate() const {
  for (double a : accuracy) {
    if (a < 0.0 || a > 1.0) throw ConfigError("verifier accuracy must be in [0,1]");
  }
  if (kind == Kind::Remote && endpoint.empty()) {
    throw ConfigError("remote verifier needs an endpoint");
  }
}

VerifierSpec VerifierSpec::parse(const std::string& text) {
  VerifierSpec spec;
  if (text == "exact") {
    spec.kind = Kind::Exact;
    return spec;
  }
  if (text.rfind("noisy:", 0) == 0) {
    spec.kind = Kind::Noisy;
    std::string body = text.substr(6);
    auto seed_sep = body.find(':');
    if (seed_sep != std::string::npos) {
      spec.seed = std::strtoull(body.substr(seed_sep + 1).c_str(), nullptr, 10);
      body = body.substr(0, seed_sep);
    }
    if (body == "8b") {
      spec.accuracy = kPbm8bAccuracy;
    } else if (body == "3b") {
      spec.accuracy = kPbm3bAccuracy;
    } else {
      std::istringstream is(body);
      std::string item;
      std::size_t i = 0;
      while (std::getline(is, item, ',')) {
        if (i >= spec.accuracy.size()) throw ConfigError("too many accuracy entries");
        try {
          spec.accuracy[i++] = std::stod(item);
        } catch (const std::exception&) {
          throw ConfigError("bad accuracy entry '" + item + "'");
        }
      }
      if (i != spec.accuracy.size()) {
        throw ConfigError("noisy verifier needs 5 accuracies (orders 0..4)");
      }
    }
    spec.validate();
    return spec;
  }
  if (text.rfind("remote:", 0) == 0) {
    spec.kind = Kind::Remote;
    spec.endpoint = text.substr(7);
    spec.validate();
    return spec;
  }
  throw ConfigError("unknown verifier spec '" + text + "'");
}

std::string VerifierSpec::describe() const {
  switch (kind) {
    case Kind::Exact:
      return "exact";
    case Kind::Noisy: {
      std::ostringstream os;
      os << "noisy:";
      for (std::size_t i = 0; i < accuracy.size(); ++i) {
        if (i > 0) os << ",";
        os << accuracy[i];
      }
      os << ":" << seed;
      return os.str();
    }
    case Kind::Remote:
      return "remote:" + endpoint;
  }
  return "?";
}

std::vector<StepScore> Verifier::score_trace(const ScoreContext& ctx,
                                             const Trace& trace) const {
  std::vector<StepScore> scores;
  scores.reserve(trace.steps.size());
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    scores.push_back(score_step(ctx, trace, static_cast<int>(i)));
  }
  return scores;
}

namespace {

// Ground-truth step label; false for sentinel steps and for steps past the
// gold trace.
bool exact_label(const ScoreContext& ctx, const Trace& trace, int step_index) {
  const TraceStep& step = trace.steps.at(static_cast<std::size_t>(step_index));
  if (step.malformed) return false;
  if (ctx.gold == nullptr) return false;
  const auto& states = ctx.gold->states;
  if (step_index < 0 || static_cast<std::size_t>(step_index) >= states.size()) return false;
  return step.statement.location == states[static_cast<std::size_t>(step_index)];
}

}  // namespace

StepScore ExactVerifier::score_step(const ScoreContext& ctx, const Trace& trace,
                                    int step_index) const {
  return exact_label(ctx, trace, step_index) ? 1.0 : 0.0;
}

StepScore NoisyVerifier::score_step(const ScoreContext& ctx, const Trace& trace,
                                    int step_index) const {
  const TraceStep& step = trace.steps.at(static_cast<std::size_t>(step_index));
  if (step.malformed) return 0.0;
  if (ctx.gold == nullptr ||
      static_cast<std::size_t>(step_index) >= ctx.gold->states.size()) {
    return 0.0;
  }
  const bool label = exact_label(ctx, trace, step_index);
  const int order = ctx.question != nullptr ? ctx.question->order : 0;
  const double acc = accuracy_.at(static_cast<std::size_t>(std::clamp(order, 0, 4)));
  const std::uint64_t qhash =
      ctx.question != nullptr ? fnv1a64(ctx.question->text()) : 0;
  Rng rng(derive_seed(seed_, {ctx.story_id, qhash,
                              static_cast<std::uint64_t>(ctx.trace_index),
                              static_cast<std::uint64_t>(step_index)}));
  // Common random numbers: a step flips iff its draw lands above the
  // accuracy, so larger accuracies flip strictly fewer steps.
  const bool flip = rng.unit() >= acc;
  return (label != flip) ? 1.0 : 0.0;
}

StepScore RemoteVerifier::score_step(const ScoreContext& ctx, const Trace& trace,
                                     int step_index) const {
  const TraceStep& step = trace.steps.at(static_cast<std::size_t>(step_index));
  if (step.malformed) return 0.0;

  nlohmann::json body;
  body["question"] = ctx.question != nullptr ? ctx.question->text() : "";
  body["story_lines"] =
      ctx.story_lines != nullptr ? *ctx.story_lines : std::vector<std::string>{};
  body["step_text"] = render_statement(step.statement);
  {
    Trace prefix;
    prefix.steps.assign(trace.steps.begin(), trace.steps.begin() + step_index);
    prefix.final_answer = "";
    std::string text;
    for (const TraceStep& s : prefix.steps) {
      text += "## Step " + std::to_string(s.index) + " ##\n";
      if (!s.action_echo.empty()) text += s.action_echo + "\n";
      if (!s.rationale.empty()) text += s.rationale + "\n";
      if (!s.malformed) text += render_statement(s.statement) + "\n";
      text += "\n";
    }
    body["prefix"] = text;
  }

  httplib::Client client(spec_.endpoint);
  client.set_connection_timeout(static_cast<int>(spec_.timeout_seconds), 0);
  client.set_read_timeout(static_cast<int>(spec_.timeout_seconds), 0);
  httplib::Headers headers;
  if (const char* key = std::getenv("DELTOM_API_KEY")) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  auto res = client.Post("/score", headers, body.dump(), "application/json");
  if (!res || res->status != 200) {
    throw RemoteUnavailable("remote scorer at " + spec_.endpoint +
                            (res ? " returned status " + std::to_string(res->status)
                                 : " is unreachable"));
  }
  try {
    auto j = nlohmann::json::parse(res->body);
    return std::clamp(j.at("score").get<double>(), 0.0, 1.0);
  } catch (const nlohmann::json::exception& e) {
    throw RemoteUnavailable(std::string("remote scorer returned bad JSON: ") + e.what());
  }
}

std::unique_ptr<Verifier> make_verifier(const VerifierSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case VerifierSpec::Kind::Exact:
      return std::make_unique<ExactVerifier>();
    case VerifierSpec::Kind::Noisy:
      return std::make_unique<NoisyVerifier>(spec.accuracy, spec.seed);
    case VerifierSpec::Kind::Remote:
      return std::make_unique<RemoteVerifier>(spec);
  }
  throw ConfigError("unknown verifier kind");
}

}  // namespace deltom
