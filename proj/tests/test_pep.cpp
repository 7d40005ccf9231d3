#include <doctest.h>

#include "oracles.hpp"
#include "ucst/explore.hpp"
#include "ucst/pep.hpp"
#include "ucst/reductions.hpp"
#include "ucst/validation.hpp"

using namespace ucst;

namespace {

struct SchematicPep {
  ReachInstance inst = oracle::load("schematic.ucst").instance;
  PreSolutionContext ctx = PreSolutionContext::build(inst);
  PepInstance pep = ucst_to_pep(inst);

  Word word(std::initializer_list<const char*> names) const {
    Word w;
    for (auto* n : names) w.push_back(ctx.sigma.at(n));
    return w;
  }
  Word sol() const { return word({"d1", "e1", "d2", "e2", "d3", "d4"}); }
  Word pi() const { return word({"d1", "d2", "d3", "e1", "d4", "e2"}); }
};

/// Definition of a solution, checked literally.
bool brute_is_solution(const PepInstance& p, const Word& s) {
  if (!p.R.accepts(s)) return false;
  if (!oracle::subword(p.u(s), p.v(s))) return false;
  for (std::size_t k = 0; k <= s.size(); ++k) {
    Word suf(s.begin() + static_cast<long>(k), s.end());
    if (p.Rp.accepts(suf) && !oracle::subword(p.u(suf), p.v(suf))) return false;
  }
  return true;
}

PepInstance random_pep(Rng& rng) {
  static const char* pool[] = {"ANY*", "a ANY*", "ANY* b", "(a|b)+", "a b* c", "ANY ANY", "EPS", "NONE", "a*",
                               "(a c)* b"};
  const std::size_t k = 1 + pick(rng, 3);
  std::vector<std::string> sn = {"a", "b", "c"};
  sn.resize(k);
  PepInstance p;
  p.sigma = Alphabet(sn);
  p.gamma = Alphabet({"x", "y"});
  for (std::size_t i = 0; i < k; ++i) {
    Word u(pick(rng, 3)), v(pick(rng, 3));
    for (auto& x : u) x = static_cast<Symbol>(pick(rng, 2));
    for (auto& x : v) x = static_cast<Symbol>(pick(rng, 2));
    p.u_map.push_back(u);
    p.v_map.push_back(v);
  }
  auto regex = [&]() {
    for (;;) {
      try {
        return parse_regex(pool[pick(rng, sizeof(pool) / sizeof(pool[0]))], p.sigma);
      } catch (const InputError&) {
        // letter not in this sigma; draw again
      }
    }
  };
  p.R = regex();
  p.Rp = regex();
  p.check();
  return p;
}

}  // namespace

TEST_CASE("solutions of the schematic instance") {
  SchematicPep f;
  CHECK(f.pep.R.accepts(f.sol()));
  CHECK(f.pep.u(f.sol()) == f.inst.system.alphabet.parse_word("b"));
  CHECK(f.pep.v(f.sol()) == f.inst.system.alphabet.parse_word("ab"));
  CHECK(f.pep.Rp.accepts(f.word({"d4"})));
  CHECK_FALSE(f.pep.Rp.accepts(f.word({"d3", "d4"})));
  CHECK(is_solution(f.pep, f.sol()));
  CHECK_FALSE(is_solution(f.pep, f.pi()));
  CHECK_FALSE(f.pep.R.accepts(f.pi()));
  CHECK(f.ctx.paths.accepts(f.pi()));  // in the shuffle of the two path languages

  auto found = bounded_solve(f.pep, 6);
  REQUIRE(found);
  CHECK(found->size() == 6);
  CHECK(is_solution(f.pep, *found));
  CHECK_FALSE(bounded_solve(f.pep, 5));
}

TEST_CASE("trivial PEP instances") {
  PepInstance p;
  p.sigma = Alphabet({"a"});
  p.gamma = Alphabet({"x"});
  p.u_map = {{0}};
  p.v_map = {{}};
  p.R = Nfa::epsilon(p.sigma);
  p.Rp = Nfa::empty(p.sigma);
  CHECK(is_solution(p, {}));
  p.R = parse_regex("a+", p.sigma);
  CHECK_FALSE(bounded_solve(p, 10));

  PepInstance bad = p;
  bad.u_map.clear();
  CHECK_THROWS_AS(bad.check(), InputError);
}

TEST_CASE("is_solution and bounded_solve against brute force") {
  Rng rng(17);
  int solvable = 0;
  for (int i = 0; i < 200; ++i) {
    PepInstance p = random_pep(rng);
    std::optional<Word> first;
    for (auto& w : oracle::all_words(p.sigma.size(), 4)) {
      const bool expect = brute_is_solution(p, w);
      REQUIRE(is_solution(p, w) == expect);
      if (expect && !first) first = w;  // all_words is length-lexicographic
    }
    auto got = bounded_solve(p, 4);
    REQUIRE(got.has_value() == first.has_value());
    if (got) {
      REQUIRE(*got == *first);
      ++solvable;
    }
  }
  CHECK(solvable > 20);
}

TEST_CASE("pre-solutions of the schematic instance") {
  SchematicPep f;
  CHECK(is_pre_solution(f.ctx, f.pi()));
  CHECK(is_pre_solution(f.ctx, f.sol()));
  auto swapped = f.word({"d1", "e1", "e2", "d2", "d3", "d4"});
  auto chk = is_pre_solution(f.ctx, swapped);
  CHECK_FALSE(chk);
  CHECK(chk.failed == PreCondition::C3);
  auto not_path = f.word({"d2", "d1", "d3", "e1", "d4", "e2"});
  CHECK(is_pre_solution(f.ctx, not_path).failed == PreCondition::C1);
  // Condition c4 is global: reading b before writing it is still embeddable.
  CHECK(is_pre_solution(f.ctx, f.word({"d1", "d2", "e1", "d3", "d4", "e2"})));
  // After the Z test on l, the suffix reads b but writes nothing.
  auto late = f.word({"d1", "d2", "d3", "d4", "e1", "e2"});
  CHECK(is_pre_solution(f.ctx, late).failed == PreCondition::C5);
}

TEST_CASE("advancing switches produce solutions") {
  SchematicPep f;
  Word a = advance_stabilize(f.ctx, f.pi());
  CHECK(is_solution(f.pep, a));
  CHECK(advance_stabilize(f.ctx, a) == a);
  CHECK_THROWS_AS(advance_stabilize(f.ctx, f.word({"d2", "d1"})), InputError);

  // Sender-only word: nothing to switch.
  Ucst s;
  s.alphabet = Alphabet({"a"});
  s.add_sender_state("p0");
  s.add_sender_state("p1");
  s.add_receiver_state("q");
  s.add_rule(Agent::Sender, make_write("w", 0, Channel::L, 0, 1));
  auto ctx = PreSolutionContext::build(ReachInstance::empty_empty(s, 0, 0, 1, 0));
  Word only{ctx.sigma.at("w")};
  CHECK(advance_stabilize(ctx, only) == only);
}

TEST_CASE("postponing switches and replay") {
  SchematicPep f;
  Word p = postpone_stabilize(f.ctx, f.sol());
  CHECK(is_pre_solution(f.ctx, p));
  Run run = run_from_postpone_stable(f.ctx, p);
  CHECK(validate_run(f.inst.system, run, Mode::Lossy));
  CHECK(run.start == f.inst.initial_empty());
  CHECK(run.end() == f.inst.final_empty());
  CHECK(is_head_lossy(run));

  // Lossless order: no losses are inserted.
  Ucst s;
  s.alphabet = Alphabet({"a"});
  s.add_sender_state("p0");
  s.add_sender_state("p1");
  s.add_receiver_state("q0");
  s.add_receiver_state("q1");
  s.add_rule(Agent::Sender, make_write("w", 0, Channel::L, 0, 1));
  s.add_rule(Agent::Receiver, make_read("r", 0, Channel::L, 0, 1));
  auto ctx = PreSolutionContext::build(ReachInstance::empty_empty(s, 0, 0, 1, 1));
  Word wr{ctx.sigma.at("w"), ctx.sigma.at("r")};
  Run lossless = run_from_postpone_stable(ctx, postpone_stabilize(ctx, wr));
  CHECK(lossless.size() == 2);
  for (auto& st : lossless.steps) CHECK_FALSE(st.label.is_loss());
}

TEST_CASE("runs project to pre-solutions") {
  SchematicPep f;
  Verdict v = bounded_reach(f.inst, Bound{2});
  REQUIRE(v.reachable());
  CHECK(run_to_presolution(f.ctx, *v.witness) == f.pi());

  Rng rng(29);
  RandomSystemOptions o;
  o.sender_tests = {{TestClass::Zero, Channel::L}};
  int witnesses = 0;
  for (int i = 0; i < 100; ++i) {
    auto inst = random_instance(rng, o, false, false);
    Verdict w = bounded_reach(inst, Bound{3});
    if (!w.reachable()) continue;
    ++witnesses;
    auto ctx = PreSolutionContext::build(inst);
    Word s = run_to_presolution(ctx, *w.witness);
    REQUIRE(is_pre_solution(ctx, s));
    Word a = advance_stabilize(ctx, s);
    REQUIRE(is_solution(ucst_to_pep(inst), a));
    Run back = run_from_postpone_stable(ctx, postpone_stabilize(ctx, s));
    REQUIRE(check_witness(inst, back));
  }
  CHECK(witnesses > 20);
}

TEST_CASE("solutions are pre-solutions") {
  Rng rng(31);
  RandomSystemOptions o;
  o.sender_tests = {{TestClass::Zero, Channel::L}};
  std::size_t solutions = 0;
  for (int i = 0; i < 60; ++i) {
    auto inst = random_instance(rng, o, false, false);
    auto ctx = PreSolutionContext::build(inst);
    auto pep = ucst_to_pep(inst);
    for (auto& w : enumerate_words(pep.R, 6)) {
      if (!is_solution(pep, w)) continue;
      ++solutions;
      REQUIRE(is_pre_solution(ctx, w));
    }
  }
  CHECK(solutions > 20);
}
