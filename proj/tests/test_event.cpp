#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "deltom/errors.hpp"
#include "deltom/event.hpp"
#include "test_support.hpp"

using namespace deltom;

namespace {

PointedEventModel identity_action(const std::vector<AgentId>& agents) {
  PointedEventModel pem;
  pem.model.events = {0};
  pem.model.pre[0] = std::nullopt;
  pem.model.post[0] = {};
  for (const AgentId& a : agents) pem.model.indist[a] = {{0, 0}};
  pem.actual = 0;
  return pem;
}

bool eval_agree(const PointedEpistemicModel& a, const PointedEpistemicModel& b,
                Rng& rng, int rounds = 100, int depth = 4) {
  for (int i = 0; i < rounds; ++i) {
    Formula f = test::random_formula(rng, depth);
    if (eval(a, f) != eval(b, f)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("identity action leaves the model intact") {
  Rng rng(11);
  for (int round = 0; round < 50; ++round) {
    auto s = test::random_model(rng);
    auto res = product_update(s, identity_action(test::default_agents()));
    CHECK(res.state.model.worlds.size() == s.model.worlds.size());
    CHECK(eval_agree(s, res.state, rng));
    // world_origin is a bijection onto the new world set
    CHECK(res.world_origin.size() == res.state.model.worlds.size());
  }
}

TEST_CASE("public announcement filters worlds") {
  // Hand application of the update clauses: two worlds, p true only at the
  // actual one; announcing p keeps exactly that world and makes B[a] p true.
  PointedEpistemicModel s;
  s.model.worlds = {0, 1};
  s.model.relations["a"] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  s.model.relations["b"] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  s.model.valuation[Proposition{"p()"}] = {0};
  s.actual = 0;

  Formula p = Formula::atom(Proposition{"p()"});
  CHECK_FALSE(eval(s, Formula::believes("a", p)));

  PointedEventModel announce;
  announce.model.events = {0};
  announce.model.pre[0] = p;
  announce.model.post[0] = {};
  announce.model.indist["a"] = {{0, 0}};
  announce.model.indist["b"] = {{0, 0}};
  announce.actual = 0;

  auto res = product_update(s, announce);
  CHECK(res.state.model.worlds.size() == 1);
  CHECK(eval(res.state, p));
  CHECK(eval(res.state, Formula::believes("a", p)));
  CHECK(res.world_origin.at(res.state.actual) == std::pair<WorldId, EventId>{0, 0});
}

TEST_CASE("precondition failure at the actual world throws") {
  PointedEpistemicModel s;
  s.model.worlds = {0};
  s.model.relations["a"] = {{0, 0}};

  PointedEventModel announce;
  announce.model.events = {0};
  announce.model.pre[0] = Formula::atom(Proposition{"p()"});
  announce.model.post[0] = {};
  announce.model.indist["a"] = {{0, 0}};
  announce.actual = 0;

  CHECK_THROWS_AS(product_update(s, announce), PreconditionFailed);
}

TEST_CASE("private move: exit then relocate") {
  // States 4-6 of the worked kitchen scene. State 4: Mary and Alice both
  // watch the chocolate on the table.
  PointedEpistemicModel s;
  s.model.worlds = {0};
  s.model.relations["Mary"] = {{0, 0}};
  s.model.relations["Alice"] = {{0, 0}};
  s.model.valuation[at_prop("chocolate", "table")] = {0};
  s.actual = 0;

  // Action 5: Mary exits; a public no-op for the object facts.
  {
    PointedEventModel exit;
    exit.model.events = {0};
    exit.model.pre[0] = std::nullopt;
    exit.model.post[0].set_true.insert(at_prop("chocolate", "table"));
    exit.model.indist["Mary"] = {{0, 0}};
    exit.model.indist["Alice"] = {{0, 0}};
    exit.actual = 0;
    s = product_update(s, exit).state;
  }
  CHECK(eval(s, Formula::atom(at_prop("chocolate", "table"))));

  // Action 6: Alice moves the chocolate to the cupboard; Mary cannot tell
  // this from nothing having happened.
  {
    PointedEventModel move;
    move.model.events = {0, 1};
    move.model.pre[0] = std::nullopt;
    move.model.post[0].set_true.insert(at_prop("chocolate", "cupboard"));
    move.model.post[0].set_false.insert(at_prop("chocolate", "table"));
    move.model.pre[1] = std::nullopt;
    move.model.post[1] = {};
    move.model.indist["Alice"] = {{0, 0}, {1, 1}};
    move.model.indist["Mary"] = {{0, 1}, {1, 1}};
    move.actual = 0;
    s = product_update(s, move).state;
  }

  Formula table = Formula::atom(at_prop("chocolate", "table"));
  Formula cupboard = Formula::atom(at_prop("chocolate", "cupboard"));
  CHECK(eval(s, cupboard));
  CHECK(eval(s, Formula::believes("Alice", cupboard)));
  CHECK(eval(s, Formula::believes("Mary", table)));
  CHECK(eval(s, Formula::believes("Mary", Formula::believes("Alice", table))));
  CHECK_FALSE(eval(s, Formula::believes("Mary", cupboard)));
}

TEST_CASE("new world count is bounded by |W| x |E|") {
  Rng rng(23);
  for (int round = 0; round < 50; ++round) {
    auto s = test::random_model(rng);

    PointedEventModel pem;
    pem.model.events = {0, 1};
    pem.model.pre[0] = rng.bernoulli(0.5)
                           ? std::optional<Formula>(test::random_formula(rng, 1))
                           : std::nullopt;
    pem.model.pre[1] = std::nullopt;
    pem.model.post[0] = {};
    pem.model.post[1] = {};
    for (const AgentId& a : test::default_agents()) {
      pem.model.indist[a] = {{0, 0}, {1, 1}};
    }
    pem.actual = 1;

    auto res = product_update(s, pem);
    const std::size_t bound = s.model.worlds.size() * pem.model.events.size();
    CHECK(res.state.model.worlds.size() <= bound);

    bool all_pre_hold = true;
    for (WorldId w : s.model.worlds) {
      if (pem.model.pre[0].has_value() && !eval_at(s.model, w, *pem.model.pre[0])) {
        all_pre_hold = false;
      }
    }
    CHECK((res.state.model.worlds.size() == bound) == all_pre_hold);
  }
}

TEST_CASE("updated valuation follows the three-case rule exactly") {
  Rng rng(37);
  for (int round = 0; round < 50; ++round) {
    auto s = test::random_model(rng);

    PointedEventModel pem;
    pem.model.events = {0, 1};
    for (EventId e : pem.model.events) {
      pem.model.pre[e] = std::nullopt;
      PostCondition pc;
      for (const Proposition& p : test::default_props()) {
        std::uint64_t c = rng.index(3);
        if (c == 0) pc.set_true.insert(p);
        if (c == 1) pc.set_false.insert(p);
      }
      pem.model.post[e] = pc;
    }
    for (const AgentId& a : test::default_agents()) {
      pem.model.indist[a] = {{0, 0}, {1, 1}};
    }
    pem.actual = 0;

    auto res = product_update(s, pem);
    for (const auto& [id, origin] : res.world_origin) {
      const auto& [w, e] = origin;
      const PostCondition& pc = pem.model.post[e];
      for (const Proposition& p : test::default_props()) {
        const bool expected =
            pc.entails(p) || (s.model.holds(p, w) && !pc.entails_not(p));
        CHECK(res.state.model.holds(p, id) == expected);
      }
    }
  }
}

TEST_CASE("pruning keeps everything that is already reachable") {
  PointedEpistemicModel s;
  s.model.worlds = {0, 1, 2};
  s.model.relations["a"] = {{0, 1}, {1, 2}};
  s.model.valuation[Proposition{"p()"}] = {2};
  s.actual = 0;

  auto pruned = prune_reachable(s, 2);
  CHECK(pruned.model.worlds.size() == 3);

  // An isolated world disappears; the actual world always stays.
  s.model.worlds = {0, 1, 2, 3};
  auto pruned2 = prune_reachable(s, 2);
  CHECK(pruned2.model.worlds.size() == 3);
  auto zero_depth = prune_reachable(s, 0);
  CHECK(zero_depth.model.worlds.size() == 1);
}

TEST_CASE("pruning preserves satisfaction within the depth budget") {
  Rng rng(41);
  for (int round = 0; round < 100; ++round) {
    auto s = test::random_model(rng, 6);
    auto pruned = prune_reachable(s, 4);
    for (int k = 0; k < 100; ++k) {
      Formula f = test::random_formula(rng, 4);
      CHECK(eval(s, f) == eval(pruned, f));
    }
  }
}

TEST_CASE("bisimulation quotient merges duplicate worlds") {
  PointedEpistemicModel s;
  s.model.worlds = {0, 1, 2};
  // Worlds 1 and 2 are clones: same valuation, same successor block.
  s.model.relations["a"] = {{0, 1}, {0, 2}, {1, 1}, {2, 2}};
  s.model.relations["b"] = {};
  s.model.valuation[Proposition{"p()"}] = {1, 2};
  s.actual = 0;

  auto min = bisim_minimize(s);
  CHECK(min.model.worlds.size() == 2);
  Rng rng(5);
  for (int k = 0; k < 50; ++k) {
    Formula f = test::random_formula(rng, 3);
    CHECK(eval(s, f) == eval(min, f));
  }

  PointedEpistemicModel single;
  single.model.worlds = {0};
  single.model.relations["a"] = {{0, 0}};
  single.actual = 0;
  CHECK(bisim_minimize(single).model.worlds.size() == 1);
}

TEST_CASE("minimization preserves satisfaction") {
  Rng rng(43);
  for (int round = 0; round < 100; ++round) {
    auto s = test::random_model(rng, 6);
    auto min = bisim_minimize(s);
    CHECK(min.model.worlds.size() <= s.model.worlds.size());
    for (int k = 0; k < 100; ++k) {
      Formula f = test::random_formula(rng, 4);
      CHECK(eval(s, f) == eval(min, f));
    }
  }
}

TEST_CASE("identity update then minimize is bisimilar to the minimized input") {
  Rng rng(47);
  for (int round = 0; round < 50; ++round) {
    auto s = test::random_model(rng);
    auto quo = bisim_minimize(s);
    auto upd = bisim_minimize(product_update(s, identity_action(test::default_agents())).state);
    CHECK(quo.model.worlds.size() == upd.model.worlds.size());
    CHECK(eval_agree(quo, upd, rng));
  }
}

TEST_CASE("update and pruning commute on satisfaction") {
  Rng rng(53);
  for (int round = 0; round < 50; ++round) {
    auto s = test::random_model(rng, 5);

    PointedEventModel pem;
    pem.model.events = {0, 1};
    pem.model.pre[0] = std::nullopt;
    pem.model.pre[1] = std::nullopt;
    PostCondition pc;
    pc.set_true.insert(Proposition{"p()"});
    pem.model.post[0] = pc;
    pem.model.post[1] = {};
    for (const AgentId& a : test::default_agents()) {
      pem.model.indist[a] =
          rng.bernoulli(0.5)
              ? std::set<std::pair<EventId, EventId>>{{0, 0}, {1, 1}}
              : std::set<std::pair<EventId, EventId>>{{0, 1}, {1, 1}};
    }
    pem.actual = 0;

    const int depth = 3;
    auto a = prune_reachable(product_update(s, pem).state, depth);
    auto b = product_update(prune_reachable(s, depth), pem).state;
    for (int k = 0; k < 60; ++k) {
      Formula f = test::random_formula(rng, depth);
      CHECK(eval(a, f) == eval(b, f));
    }
  }
}

TEST_CASE("debug dump is stable and line oriented") {
  PointedEpistemicModel s;
  s.model.worlds = {0, 1};
  s.model.relations["a"] = {{0, 1}, {1, 1}};
  s.model.valuation[Proposition{"p()"}] = {0};
  s.actual = 0;

  CHECK(debug_dump(s) ==
        "world 0 *: p()\n"
        "world 1:\n"
        "a: 0 -> 1\n"
        "a: 1 -> 1\n");
}

TEST_CASE("event model validation") {
  EventModel em;
  em.events = {0};
  em.pre[0] = std::nullopt;
  PostCondition pc;
  pc.set_true.insert(Proposition{"p()"});
  pc.set_false.insert(Proposition{"p()"});
  em.post[0] = pc;
  CHECK_THROWS_AS(em.validate(), DataError);
}
