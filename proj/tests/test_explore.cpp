#include <doctest.h>

#include "oracles.hpp"
#include "ucst/explore.hpp"
#include "ucst/reductions.hpp"
#include "ucst/validation.hpp"

using namespace ucst;

namespace {

Ucst single_state(const Alphabet& m) {
  Ucst s;
  s.alphabet = m;
  s.add_sender_state("p");
  s.add_receiver_state("q");
  return s;
}

}  // namespace

TEST_CASE("schematic instance is reachable with a seven-step witness") {
  auto inst = oracle::load("schematic.ucst").instance;
  Verdict v = bounded_reach(inst, Bound{2, 1000});
  REQUIRE(v.reachable());
  CHECK(v.witness->size() == 7);
  CHECK(validate_run(inst.system, *v.witness, Mode::Lossy));
  CHECK(v.witness->start == inst.initial_empty());
  CHECK(v.witness->end() == inst.final_empty());
  int losses = 0;
  for (auto& st : v.witness->steps) losses += st.label.is_loss();
  CHECK(losses == 1);

  // Reliable mode cannot lose the a in front of b.
  CHECK_FALSE(bounded_reach(inst, Bound{2, 1000}, Mode::Reliable).reachable());
}

TEST_CASE("trivial and unreachable instances") {
  auto triv = oracle::load("trivial.ucst").instance;
  Verdict v = bounded_reach(triv, Bound{});
  REQUIRE(v.reachable());
  CHECK(v.witness->size() == 0);

  auto un = oracle::load("unreachable.ucst").instance;
  CHECK(bounded_reach(un, Bound{4}).kind == Verdict::Kind::Unreachable);
}

TEST_CASE("buffered loop instance") {
  auto f = oracle::load("buffered.ucst");
  Verdict v = bounded_reach(f.instance, Bound{4, 5000});
  REQUIRE(v.reachable());

  // A non-trivial target: Receiver in q3 needs the l!c r!b l!b pattern.
  ReachInstance inst = f.instance;
  inst.q_fi = *inst.system.find_receiver_state("q3");
  v = bounded_reach(inst, Bound{4, 5000});
  REQUIRE(v.reachable());
  CHECK(validate_run(inst.system, *v.witness, Mode::Lossy));
  CHECK(v.witness->end().q == inst.q_fi);
  // The Receiver must read l?b then r?b: at least the three Sender writes occur.
  CHECK(v.witness->size() >= 5);
}

TEST_CASE("bound pruning yields NOT-WITHIN-BOUND") {
  const Alphabet m({"a"});
  Ucst s = single_state(m);
  s.add_sender_state("p2");
  s.add_rule(Agent::Sender, make_write("w", 0, Channel::R, 0, 0));
  s.add_rule(Agent::Sender, make_test("z", 0, Channel::L, test_zero(m), 1));
  // The final constraint needs three letters on r.
  auto inst = ReachInstance::empty_empty(s, 0, 0, 1, 0);
  inst.Up = parse_regex("a a a", m);
  CHECK(bounded_reach(inst, Bound{2}).kind == Verdict::Kind::NotWithinBound);
  CHECK(bounded_reach(inst, Bound{3}).reachable());
}

TEST_CASE("initial constraints are enumerated") {
  const Alphabet m({"a", "b"});
  Ucst s = single_state(m);
  s.add_receiver_state("q1");
  s.add_rule(Agent::Receiver, make_read("rb", 0, Channel::R, 1, 1));
  auto inst = ReachInstance::empty_empty(s, 0, 0, 0, 1);
  inst.U = parse_regex("a* b", m);
  Verdict v = bounded_reach(inst, Bound{3});
  REQUIRE(v.reachable());
  CHECK(v.witness->start.u == Word{1});  // shortest first
  inst.U = parse_regex("a a a a b", m);
  CHECK(bounded_reach(inst, Bound{3}).kind == Verdict::Kind::NotWithinBound);
}

TEST_CASE("coreach") {
  const Alphabet m({"a"});
  Ucst s = single_state(m);
  auto co = bounded_coreach(s, [](const Configuration& c) { return c.u.empty() && c.v.empty(); }, Bound{2});
  // Only losses: every configuration with empty r.
  CHECK(co.size() == 3);
  for (auto& c : co) CHECK(c.u.empty());

  auto inst = oracle::load("schematic.ucst").instance;
  auto fin = inst.final_empty();
  co = bounded_coreach(inst.system, [&](const Configuration& c) { return c == fin; }, Bound{2});
  CHECK(co.count(inst.initial_empty()));
  CHECK(bounded_coreach(inst.system, [](const Configuration&) { return false; }, Bound{2}).empty());
}

TEST_CASE("coreach agrees pointwise with forward reachability") {
  Rng rng(3);
  RandomSystemOptions o;
  o.sender_tests = {{TestClass::Zero, Channel::L}, {TestClass::Zero, Channel::R}};
  o.acyclic_sender = true;
  std::size_t checked = 0;
  for (int i = 0; i < 20; ++i) {
    auto inst = random_instance(rng, o, false, false);
    const Configuration fin = inst.final_empty();
    const Bound b{3};
    auto co = bounded_coreach(inst.system, [&](const Configuration& c) { return c == fin; }, b);
    for (StateId p = 0; p < static_cast<StateId>(inst.system.sender_states.size()); ++p)
      for (StateId q = 0; q < static_cast<StateId>(inst.system.receiver_states.size()); ++q)
        for (auto& u : oracle::all_words(2, 1))
          for (auto& v : oracle::all_words(2, 2)) {
            ReachInstance from = inst;
            from.p_in = p, from.q_in = q;
            from.U = Nfa::word(inst.system.alphabet, u);
            from.V = Nfa::word(inst.system.alphabet, v);
            const bool fwd = bounded_reach(from, b).reachable();
            REQUIRE(fwd == (co.count({p, q, u, v}) > 0));
            ++checked;
          }
  }
  CHECK(checked > 500);
}

TEST_CASE("forward reachable sets") {
  const Alphabet m({"a"});
  Ucst s = single_state(m);
  s.add_rule(Agent::Sender, make_write("w", 0, Channel::L, 0, 0));
  auto post = bounded_post(s, {{0, 0, {}, {}}}, Bound{2});
  CHECK(post.configs.size() == 3);
  CHECK(post.pruned);
  auto wl = bounded_post(s, {{0, 0, {}, {}}}, Bound{2}, Mode::WriteLossy);
  CHECK(wl.configs == post.configs);
}

TEST_CASE("recurrent reachability search") {
  const Alphabet m({"a"});
  Ucst s = single_state(m);
  s.add_rule(Agent::Sender, make_write("loop", 0, Channel::R, 0, 0));
  // r is reliable: without a reader the contents grow and no bounded cycle exists.
  auto unread = bounded_recurrent(s, 0, 0, 0, 0, Bound{2});
  CHECK_FALSE(unread.lasso);
  CHECK_FALSE(unread.exhaustive);
  s.add_rule(Agent::Receiver, make_read("take", 0, Channel::R, 0, 0));
  auto res = bounded_recurrent(s, 0, 0, 0, 0, Bound{2});
  REQUIRE(res.lasso);
  CHECK(res.lasso->cycle.size() >= 1);
  Run whole = res.lasso->stem;
  for (auto& st : res.lasso->cycle.steps) whole.steps.push_back(st);
  CHECK(validate_run(s, whole, Mode::Lossy));
  CHECK(res.lasso->cycle.start == res.lasso->cycle.end());
  CHECK(res.lasso->cycle.start.p == 0);

  Ucst acyc = single_state(m);
  acyc.add_sender_state("p1");
  acyc.add_rule(Agent::Sender, make_write("w", 0, Channel::L, 0, 1));
  auto none = bounded_recurrent(acyc, 0, 0, 1, 0, Bound{2});
  CHECK_FALSE(none.lasso);
  CHECK(none.exhaustive);
}

TEST_CASE("decidable recurrent reachability for test-free systems") {
  auto buffered = oracle::load("buffered.ucst").instance;
  const Ucst& s = buffered.system;
  auto oracle_fn = make_bounded_oracle(Bound{4, 5000});
  const StateId p1 = *s.find_sender_state("p1"), p3 = *s.find_sender_state("p3");
  const StateId q1 = *s.find_receiver_state("q1"), q2 = *s.find_receiver_state("q2");
  CHECK(ucs_recurrent_decide(s, p1, q1, p3, q2, oracle_fn));

  const Alphabet m({"a"});
  Ucst acyc = single_state(m);
  acyc.add_sender_state("p1");
  acyc.add_rule(Agent::Sender, make_write("w", 0, Channel::L, 0, 1));
  acyc.add_receiver_state("q1");
  acyc.add_rule(Agent::Receiver, make_read("r1", 0, Channel::L, 0, 1));
  acyc.add_rule(Agent::Receiver, make_read("r2", 1, Channel::L, 0, 0));
  CHECK_FALSE(ucs_recurrent_decide(acyc, 0, 0, 1, 0, oracle_fn));

  Ucst nop_cycle = single_state(m);
  nop_cycle.add_receiver_state("q1");
  nop_cycle.add_rule(Agent::Receiver, make_nop("n1", 0, 1));
  nop_cycle.add_rule(Agent::Receiver, make_nop("n2", 1, 0));
  CHECK(ucs_recurrent_decide(nop_cycle, 0, 0, 0, 1, oracle_fn));

  auto schematic = oracle::load("schematic.ucst").instance;
  CHECK_THROWS_AS(ucs_recurrent_decide(schematic.system, 0, 0, 0, 0, oracle_fn), InputError);
}

TEST_CASE("witnesses validate and larger bounds keep positive verdicts") {
  Rng rng(21);
  RandomSystemOptions o;
  o.sender_tests = {{TestClass::Zero, Channel::L}, {TestClass::NonEmpty, Channel::R}};
  o.receiver_tests = {{TestClass::Zero, Channel::R}};
  int positives = 0;
  for (int i = 0; i < 100; ++i) {
    auto inst = random_instance(rng, o, true, true);
    Verdict small = bounded_reach(inst, Bound{2});
    Verdict large = bounded_reach(inst, Bound{3});
    if (small.reachable()) {
      ++positives;
      REQUIRE(large.reachable());
      REQUIRE(check_witness(inst, *small.witness));
      REQUIRE(large.witness->size() <= small.witness->size());
    }
    if (small.kind == Verdict::Kind::Unreachable) REQUIRE(large.kind == Verdict::Kind::Unreachable);
  }
  CHECK(positives > 10);
}

TEST_CASE("bounded oracle") {
  auto un = oracle::load("unreachable.ucst").instance;
  auto schematic = oracle::load("schematic.ucst").instance;
  CHECK(make_bounded_oracle(Bound{2})(schematic) == OracleAnswer::Yes);
  CHECK(make_bounded_oracle(Bound{2})(un) == OracleAnswer::No);
  const Alphabet m({"a"});
  Ucst s = single_state(m);
  s.add_rule(Agent::Sender, make_write("w", 0, Channel::L, 0, 0));
  s.add_receiver_state("q1");
  auto inst = ReachInstance::empty_empty(s, 0, 0, 0, 1);
  CHECK(make_bounded_oracle(Bound{2}, Mode::Lossy, true)(inst) == OracleAnswer::Inconclusive);
  CHECK(make_bounded_oracle(Bound{2})(inst) == OracleAnswer::No);
}
