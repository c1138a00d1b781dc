#include "deltom/run_config.hpp"

#include <fstream>
#include <sstream>

#include "deltom/errors.hpp"

namespace deltom {

namespace {

// "k1=v1,k2=v2" -> pairs, preserving order.
std::vector<std::pair<std::string, std::string>> parse_kv(const std::string& body) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream is(body);
  std::string item;
  while (std::getline(is, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected key=value, got '" + item + "'");
    }
    out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw ConfigError("bad " + what + " value '" + s + "'");
  }
}

std::uint64_t to_u64(const std::string& s, const std::string& what) {
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    throw ConfigError("bad " + what + " value '" + s + "'");
  }
}

}  // namespace

void GeneratorSpec::validate() const {
  if (q < 0.0 || q > 1.0) throw ConfigError("generator q must be in [0,1]");
  if (kind == Kind::Remote && remote.endpoint.empty()) {
    throw ConfigError("remote generator needs an endpoint");
  }
}

GeneratorSpec GeneratorSpec::parse(const std::string& text) {
  GeneratorSpec spec;
  if (text.rfind("scripted", 0) == 0) {
    spec.kind = Kind::Scripted;
    if (text.size() > 8 && text[8] == ':') {
      for (const auto& [key, value] : parse_kv(text.substr(9))) {
        if (key == "q") {
          spec.q = to_double(value, "q");
        } else if (key == "seed") {
          spec.seed = to_u64(value, "seed");
        } else {
          throw ConfigError("unknown scripted generator option '" + key + "'");
        }
      }
    }
    spec.validate();
    return spec;
  }
  if (text.rfind("remote:", 0) == 0) {
    spec.kind = Kind::Remote;
    std::string body = text.substr(7);
    auto comma = body.find(',');
    spec.remote.endpoint = body.substr(0, comma);
    if (comma != std::string::npos) {
      for (const auto& [key, value] : parse_kv(body.substr(comma + 1))) {
        if (key == "model") {
          spec.remote.model = value;
        } else if (key == "temperature") {
          spec.remote.temperature = to_double(value, "temperature");
        } else if (key == "timeout") {
          spec.remote.timeout_seconds = to_double(value, "timeout");
        } else if (key == "template") {
          spec.remote.template_id = value;
        } else {
          throw ConfigError("unknown remote generator option '" + key + "'");
        }
      }
    }
    spec.validate();
    return spec;
  }
  throw ConfigError("unknown generator spec '" + text + "'");
}

std::string GeneratorSpec::describe() const {
  if (kind == Kind::Scripted) {
    std::ostringstream os;
    os << "scripted:q=" << q << ",seed=" << seed;
    return os.str();
  }
  return "remote:" + remote.endpoint + ",model=" + remote.model;
}

std::unique_ptr<CandidateGenerator> GeneratorSpec::build() const {
  validate();
  if (kind == Kind::Scripted) return std::make_unique<ScriptedGenerator>(q, seed);
  return std::make_unique<RemoteGenerator>(remote);
}

void MethodSpec::validate() const {
  if (kind == Kind::Bon && n < 1) throw ConfigError("N must be at least 1");
  if (kind == Kind::Beam && (beam.k < 1 || beam.b < 1)) {
    throw ConfigError("beam k and b must be at least 1");
  }
}

void RunConfig::validate() const {
  story.validate();
  verifier.validate();
  generator.validate();
  method.validate();
  if (count < 1) throw ConfigError("count must be at least 1");
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig cfg;
  try {
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("count")) cfg.count = j.at("count").get<int>();
    if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();

    if (j.contains("story")) {
      const auto& s = j.at("story");
      if (s.contains("num_agents")) cfg.story.num_agents = s.at("num_agents").get<int>();
      if (s.contains("num_containers")) {
        cfg.story.num_containers = s.at("num_containers").get<int>();
      }
      if (s.contains("containers")) {
        cfg.story.containers = s.at("containers").get<std::vector<std::string>>();
      }
      if (s.contains("rooms")) {
        auto rooms = s.at("rooms").get<std::vector<std::string>>();
        if (rooms.size() != 2) throw ConfigError("story.rooms must list two rooms");
        cfg.story.rooms = {rooms[0], rooms[1]};
      }
      if (s.contains("num_moves")) cfg.story.num_moves = s.at("num_moves").get<int>();
      if (s.contains("num_noops")) cfg.story.num_noops = s.at("num_noops").get<int>();
      if (s.contains("num_distractors")) {
        cfg.story.num_distractors = s.at("num_distractors").get<int>();
      }
      if (s.contains("public_claims")) {
        cfg.story.enable_public_claims = s.at("public_claims").get<bool>();
      }
      if (s.contains("private_tells")) {
        cfg.story.enable_private_tells = s.at("private_tells").get<bool>();
      }
      if (s.contains("deception")) cfg.story.enable_deception = s.at("deception").get<bool>();
      if (s.contains("max_order")) cfg.story.max_order = s.at("max_order").get<int>();
      if (s.contains("note")) cfg.story.note = s.at("note").get<std::string>();
    }
    if (j.contains("verifier")) {
      cfg.verifier = VerifierSpec::parse(j.at("verifier").get<std::string>());
    }
    if (j.contains("generator")) {
      cfg.generator = GeneratorSpec::parse(j.at("generator").get<std::string>());
    }
    if (j.contains("method")) {
      const auto& m = j.at("method");
      if (m.contains("kind")) {
        std::string kind = m.at("kind").get<std::string>();
        if (kind == "bon") {
          cfg.method.kind = MethodSpec::Kind::Bon;
        } else if (kind == "beam") {
          cfg.method.kind = MethodSpec::Kind::Beam;
        } else {
          throw ConfigError("unknown method kind '" + kind + "'");
        }
      }
      if (m.contains("n")) cfg.method.n = m.at("n").get<int>();
      if (m.contains("rule")) {
        cfg.method.rule = aggregation_rule_from_string(m.at("rule").get<std::string>());
      }
      if (m.contains("ranking")) {
        cfg.method.ranking = ranking_from_string(m.at("ranking").get<std::string>());
      }
      if (m.contains("k")) cfg.method.beam.k = m.at("k").get<int>();
      if (m.contains("b")) cfg.method.beam.b = m.at("b").get<int>();
      if (m.contains("max_depth")) cfg.method.beam.max_depth = m.at("max_depth").get<int>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  }
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config JSON: ") + e.what());
  }
  return from_json(j);
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["count"] = count;
  j["out"] = out_dir;
  {
    nlohmann::ordered_json s;
    s["num_agents"] = story.num_agents;
    s["num_containers"] = story.num_containers;
    if (!story.containers.empty()) s["containers"] = story.containers;
    if (!story.rooms[0].empty()) s["rooms"] = {story.rooms[0], story.rooms[1]};
    s["num_moves"] = story.num_moves;
    s["num_noops"] = story.num_noops;
    s["num_distractors"] = story.num_distractors;
    s["public_claims"] = story.enable_public_claims;
    s["private_tells"] = story.enable_private_tells;
    s["deception"] = story.enable_deception;
    s["max_order"] = story.max_order;
    s["note"] = story.note;
    j["story"] = std::move(s);
  }
  j["verifier"] = verifier.describe();
  j["generator"] = generator.describe();
  {
    nlohmann::ordered_json m;
    m["kind"] = method.kind == MethodSpec::Kind::Bon ? "bon" : "beam";
    m["n"] = method.n;
    m["rule"] = to_string(method.rule);
    m["ranking"] = to_string(method.ranking);
    m["k"] = method.beam.k;
    m["b"] = method.beam.b;
    m["max_depth"] = method.beam.max_depth;
    j["method"] = std::move(m);
  }
  return j;
}

}  // namespace deltom
