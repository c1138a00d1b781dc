#include "deltom/logic.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

#include "deltom/errors.hpp"

namespace deltom {

Proposition at_prop(std::string_view object, std::string_view location) {
  std::string key;
  key.reserve(object.size() + location.size() + 5);
  key.append("at(").append(object).append(",").append(location).append(")");
  return Proposition{std::move(key)};
}

Proposition in_prop(std::string_view agent, std::string_view room) {
  std::string key;
  key.reserve(agent.size() + room.size() + 5);
  key.append("in(").append(agent).append(",").append(room).append(")");
  return Proposition{std::move(key)};
}

std::optional<std::pair<std::string, std::vector<std::string>>> split_prop(
    const Proposition& p) {
  const std::string& k = p.key;
  auto open = k.find('(');
  if (open == std::string::npos || k.empty() || k.back() != ')') return std::nullopt;
  std::string functor = k.substr(0, open);
  std::vector<std::string> args;
  std::string cur;
  for (std::size_t i = open + 1; i + 1 < k.size(); ++i) {
    if (k[i] == ',') {
      args.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(k[i]);
    }
  }
  args.push_back(cur);
  return std::make_pair(std::move(functor), std::move(args));
}

struct Formula::Node {
  Kind kind;
  Proposition prop;  // Atom
  AgentId agent;     // Believes
  std::optional<Formula> a, b;
};

Formula Formula::atom(Proposition p) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Atom;
  n->prop = std::move(p);
  return Formula(std::move(n));
}

Formula Formula::negation(Formula f) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Not;
  n->a = std::move(f);
  return Formula(std::move(n));
}

Formula Formula::conjunction(Formula lhs, Formula rhs) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::And;
  n->a = std::move(lhs);
  n->b = std::move(rhs);
  return Formula(std::move(n));
}

Formula Formula::believes(AgentId agent, Formula f) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Believes;
  n->agent = std::move(agent);
  n->a = std::move(f);
  return Formula(std::move(n));
}

Formula::Kind Formula::kind() const { return node_->kind; }
const Proposition& Formula::prop() const { return node_->prop; }
const Formula& Formula::child() const { return *node_->a; }
const Formula& Formula::lhs() const { return *node_->a; }
const Formula& Formula::rhs() const { return *node_->b; }
const AgentId& Formula::agent() const { return node_->agent; }

int Formula::belief_order() const {
  switch (kind()) {
    case Kind::Atom:
      return 0;
    case Kind::Not:
      return child().belief_order();
    case Kind::And:
      return std::max(lhs().belief_order(), rhs().belief_order());
    case Kind::Believes:
      return 1 + child().belief_order();
  }
  return 0;
}

std::string Formula::text() const {
  switch (kind()) {
    case Kind::Atom:
      return prop().key;
    case Kind::Not:
      return "!" + child().text();
    case Kind::And:
      return "(" + lhs().text() + " & " + rhs().text() + ")";
    case Kind::Believes:
      return "B[" + agent() + "](" + child().text() + ")";
  }
  return {};
}

namespace {

class FormulaParser {
 public:
  explicit FormulaParser(std::string_view text) : text_(text) {}

  Formula parse() {
    Formula f = parse_formula();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters");
    return f;
  }

 private:
  Formula parse_formula() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of formula");
    char c = text_[pos_];
    if (c == '!') {
      ++pos_;
      return Formula::negation(parse_formula());
    }
    if (c == '(') {
      ++pos_;
      Formula lhs = parse_formula();
      skip_ws();
      expect('&');
      Formula rhs = parse_formula();
      skip_ws();
      expect(')');
      return Formula::conjunction(std::move(lhs), std::move(rhs));
    }
    if (c == 'B' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '[') {
      pos_ += 2;
      auto close = text_.find(']', pos_);
      if (close == std::string_view::npos) fail("unterminated agent name");
      AgentId agent(text_.substr(pos_, close - pos_));
      pos_ = close + 1;
      skip_ws();
      expect('(');
      Formula f = parse_formula();
      skip_ws();
      expect(')');
      return Formula::believes(std::move(agent), std::move(f));
    }
    return parse_atom();
  }

  Formula parse_atom() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                   text_[pos_] == '_')) {
      ++pos_;
    }
    if (pos_ == start) fail("expected atom");
    std::string key(text_.substr(start, pos_ - start));
    if (pos_ < text_.size() && text_[pos_] == '(') {
      auto close = text_.find(')', pos_);
      if (close == std::string_view::npos) fail("unterminated proposition");
      key.append(text_.substr(pos_, close - pos_ + 1));
      pos_ = close + 1;
    }
    return Formula::atom(Proposition{std::move(key)});
  }

  void expect(char c) {
    if (pos_ >= text_.size() || text_[pos_] != c) {
      fail(std::string("expected '") + c + "'");
    }
    ++pos_;
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  [[noreturn]] void fail(const std::string& why) {
    throw DataError("formula parse error at offset " + std::to_string(pos_) + ": " + why);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Formula parse_formula(std::string_view text) { return FormulaParser(text).parse(); }

Formula chain_formula(const std::vector<AgentId>& chain, std::string_view object,
                      std::string_view location) {
  for (std::size_t i = 0; i < chain.size(); ++i) {
    for (std::size_t j = i + 1; j < chain.size(); ++j) {
      if (chain[i] == chain[j]) {
        throw DuplicateAgent("chain repeats agent '" + chain[i] + "'");
      }
    }
  }
  Formula f = Formula::atom(at_prop(object, location));
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    f = Formula::believes(*it, std::move(f));
  }
  return f;
}

bool EpistemicModel::holds(const Proposition& p, WorldId w) const {
  auto it = valuation.find(p);
  return it != valuation.end() && it->second.count(w) > 0;
}

std::vector<WorldId> EpistemicModel::successors(WorldId w, const AgentId& a) const {
  auto it = relations.find(a);
  if (it == relations.end()) {
    throw UnknownAgent("agent '" + a + "' absent from relation map");
  }
  std::vector<WorldId> out;
  for (auto p = it->second.lower_bound({w, 0});
       p != it->second.end() && p->first == w; ++p) {
    out.push_back(p->second);
  }
  return out;
}

void EpistemicModel::validate() const {
  if (!std::is_sorted(worlds.begin(), worlds.end()) ||
      std::adjacent_find(worlds.begin(), worlds.end()) != worlds.end()) {
    throw DataError("world list must be sorted and unique");
  }
  auto known = [&](WorldId w) {
    return std::binary_search(worlds.begin(), worlds.end(), w);
  };
  for (const auto& [agent, pairs] : relations) {
    for (const auto& [from, to] : pairs) {
      if (!known(from) || !known(to)) {
        throw DataError("relation for '" + agent + "' references unknown world");
      }
    }
  }
  for (const auto& [prop, where] : valuation) {
    for (WorldId w : where) {
      if (!known(w)) throw DataError("valuation of " + prop.key + " references unknown world");
    }
  }
}

bool eval_at(const EpistemicModel& model, WorldId w, const Formula& phi) {
  switch (phi.kind()) {
    case Formula::Kind::Atom:
      return model.holds(phi.prop(), w);
    case Formula::Kind::Not:
      return !eval_at(model, w, phi.child());
    case Formula::Kind::And:
      return eval_at(model, w, phi.lhs()) && eval_at(model, w, phi.rhs());
    case Formula::Kind::Believes: {
      for (WorldId v : model.successors(w, phi.agent())) {
        if (!eval_at(model, v, phi.child())) return false;
      }
      return true;  // vacuous when the agent has no successors here
    }
  }
  return false;
}

bool eval(const PointedEpistemicModel& state, const Formula& phi) {
  return eval_at(state.model, state.actual, phi);
}

}  // namespace deltom
