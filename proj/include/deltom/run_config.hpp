#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "deltom/scaling.hpp"
#include "deltom/story.hpp"
#include "deltom/verifier.hpp"

namespace deltom {

struct GeneratorSpec {
  enum class Kind { Scripted, Remote };

  Kind kind = Kind::Scripted;
  double q = 0.9;           // scripted per-step correctness
  std::uint64_t seed = 0;   // scripted
  RemoteGeneratorConfig remote;

  void validate() const;

  // "scripted:q=0.9[,seed=7]" | "remote:http://host[,model=...,temperature=...]"
  static GeneratorSpec parse(const std::string& text);
  std::string describe() const;

  std::unique_ptr<CandidateGenerator> build() const;
};

struct MethodSpec {
  enum class Kind { Bon, Beam };

  Kind kind = Kind::Bon;
  int n = 16;  // BoN samples
  AggregationRule rule = AggregationRule::Min;
  RankingStrategy ranking = RankingStrategy::Weighted;
  BeamConfig beam;

  void validate() const;
};

// Effective configuration of a run. A JSON config file provides defaults,
// CLI flags override, and the merged result is echoed into the run manifest
// so a run can be replayed bit-exactly.
struct RunConfig {
  StoryConfig story;
  VerifierSpec verifier;
  GeneratorSpec generator;
  MethodSpec method;
  std::string out_dir;
  std::uint64_t seed = 0;
  int count = 100;  // stories for gen

  void validate() const;

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig from_file(const std::string& path);
  nlohmann::ordered_json to_json() const;
};

}  // namespace deltom
