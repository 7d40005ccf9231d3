#include <doctest.h>

#include "oracles.hpp"
#include "ucst/system.hpp"
#include "ucst/validation.hpp"

using namespace ucst;

namespace {

const RuleRef d1{Agent::Sender, 0}, d2{Agent::Sender, 1}, d3{Agent::Sender, 2}, d4{Agent::Sender, 3};
const RuleRef e1{Agent::Receiver, 0}, e2{Agent::Receiver, 1};

struct Schematic {
  ReachInstance inst = oracle::load("schematic.ucst").instance;
  const Ucst& s = inst.system;
  Word w(const char* t) const { return s.alphabet.parse_word(t); }
  StateId p(const char* n) const { return *s.find_sender_state(n); }
  StateId q(const char* n) const { return *s.find_receiver_state(n); }
};

/// Replays labels from c, taking for each label the first matching successor.
Run replay(const Ucst& s, Configuration c, const std::vector<StepLabel>& labels,
           const std::vector<Configuration>& loss_results = {}) {
  Run run{c, {}};
  std::size_t loss = 0;
  for (auto& l : labels) {
    if (l.is_loss()) {
      run.steps.push_back({l, loss_results.at(loss++)});
    } else {
      auto next = fire(s, l.rule, run.end());
      REQUIRE(next);
      run.steps.push_back({l, *next});
    }
  }
  return run;
}

Run schematic_pi(const Schematic& f) {
  Configuration c3{f.p("p3"), f.q("q_in"), f.w("c"), f.w("b")};
  return replay(f.s, f.inst.initial_empty(),
                {StepLabel::of(d1), StepLabel::of(d2), StepLabel::of(d3), StepLabel::loss(),
                 StepLabel::of(e1), StepLabel::of(d4), StepLabel::of(e2)},
                {c3});
}

}  // namespace

TEST_CASE("system well-formedness") {
  Schematic f;
  CHECK_NOTHROW(f.s.check());
  Ucst bad = f.s;
  bad.sender_rules[0].target = 99;
  CHECK_THROWS_AS(bad.check(), InputError);
  bad = f.s;
  bad.receiver_rules.push_back(make_write("w", 0, Channel::L, 0, 1));
  CHECK_THROWS_AS(bad.check(), InputError);
  bad = f.s;
  bad.sender_rules.push_back(make_read("rd", 0, Channel::L, 0, 1));
  CHECK_THROWS_AS(bad.check(), InputError);
  bad = f.s;
  bad.sender_rules[1].name = bad.sender_rules[0].name;
  CHECK_THROWS_AS(bad.check(), InputError);
  bad = f.s;
  CHECK_THROWS_AS(bad.add_receiver_state("p1"), InputError);
}

TEST_CASE("successor semantics on the schematic instance") {
  Schematic f;
  Configuration c2{f.p("p2"), f.q("q_in"), f.w("c"), f.w("a")};
  auto c3 = fire(f.s, d3, c2);
  REQUIRE(c3);
  CHECK(*c3 == Configuration{f.p("p3"), f.q("q_in"), f.w("c"), f.w("ab")});
  CHECK_FALSE(fire(f.s, e1, *c3));  // head of l is a, not b
  CHECK_FALSE(fire(f.s, d4, *c3));  // l is not empty

  auto lossy = successors(f.s, *c3, Mode::Lossy);
  std::vector<Configuration> losses;
  for (auto& st : lossy)
    if (st.label.is_loss()) losses.push_back(st.result);
  CHECK(losses == std::vector<Configuration>{{f.p("p3"), f.q("q_in"), f.w("c"), f.w("b")},
                                             {f.p("p3"), f.q("q_in"), f.w("c"), f.w("a")}});
  CHECK(successors(f.s, *c3, Mode::Reliable).size() + 2 == lossy.size());
}

TEST_CASE("loss steps are exactly the one-letter subwords") {
  Ucst s;
  s.alphabet = Alphabet({"a", "b"});
  s.add_sender_state("p");
  s.add_receiver_state("q");
  for (auto& v : oracle::all_words(2, 4)) {
    std::set<Word> got, expect;
    for (auto& st : successors(s, {0, 0, {}, v}, Mode::Lossy)) {
      REQUIRE(st.label.is_loss());
      got.insert(st.result.v);
    }
    for (auto& x : oracle::all_words(2, 4))
      if (oracle::subword_one(x, v)) expect.insert(x);
    REQUIRE(got == expect);
  }
}

TEST_CASE("tests on l") {
  Ucst s;
  s.alphabet = Alphabet({"a"});
  s.add_sender_state("p");
  s.add_sender_state("p2");
  s.add_receiver_state("q");
  auto z = s.add_rule(Agent::Sender, make_test("z", 0, Channel::L, test_zero(s.alphabet), 1));
  CHECK(fire(s, z, {0, 0, {0}, {}}));
  CHECK_FALSE(fire(s, z, {0, 0, {}, {0}}));
}

TEST_CASE("write-lossy mode") {
  Ucst s;
  s.alphabet = Alphabet({"a"});
  s.add_sender_state("p");
  s.add_sender_state("p2");
  s.add_receiver_state("q");
  s.add_rule(Agent::Sender, make_write("wl", 0, Channel::L, 0, 1));
  s.add_rule(Agent::Sender, make_write("wr", 0, Channel::R, 0, 1));
  auto steps = successors(s, {0, 0, {}, {0}}, Mode::WriteLossy);
  // Both reliable writes plus the dropped l-write; no spontaneous losses.
  REQUIRE(steps.size() == 3);
  int dropped = 0;
  for (auto& st : steps) {
    CHECK_FALSE(st.label.is_loss());
    if (st.label.dropped) {
      ++dropped;
      CHECK(st.result == Configuration{1, 0, {}, {0}});
    }
  }
  CHECK(dropped == 1);
}

TEST_CASE("reliable steps appear in every mode") {
  Rng rng(11);
  RandomSystemOptions o;
  o.sender_tests = {{TestClass::Zero, Channel::L}, {TestClass::NonEmpty, Channel::R}};
  o.receiver_tests = {{TestClass::Zero, Channel::R}};
  for (int i = 0; i < 50; ++i) {
    Ucst s = random_system(rng, o);
    Run r = random_run(rng, s, 6);
    for (std::size_t k = 0; k <= r.size(); ++k) {
      auto rel = successors(s, r.at(k), Mode::Reliable);
      auto lossy = successors(s, r.at(k), Mode::Lossy);
      auto wl = successors(s, r.at(k), Mode::WriteLossy);
      for (auto& st : rel) {
        auto has = [&](const std::vector<Step>& v) {
          for (auto& x : v)
            if (x.label == st.label && x.result == st.result) return true;
          return false;
        };
        REQUIRE(has(lossy));
        REQUIRE(has(wl));
      }
    }
  }
}

TEST_CASE("classification") {
  const Alphabet m({"a", "b"});
  Symbol head = kEpsilon;
  CHECK(classify_language(parse_regex("EPS", m)) == TestClass::Zero);
  CHECK(classify_language(parse_regex("ANY+", m)) == TestClass::NonEmpty);
  CHECK(classify_language(parse_regex("(ANY ANY)*", m)) == TestClass::Even);
  CHECK(classify_language(parse_regex("ANY (ANY ANY)*", m)) == TestClass::Odd);
  CHECK(classify_language(parse_regex("b ANY*", m), &head) == TestClass::Head);
  CHECK(head == 1);
  CHECK(classify_language(parse_regex("a b", m)) == TestClass::Other);

  Schematic f;
  auto rep = classify_tests(f.s);
  CHECK(rep.fragment == std::set<std::string>{"Z1^l"});
  CHECK_FALSE(rep.has_receiver_tests());

  Ucst s = f.s;
  s.add_rule(Agent::Sender, make_test("ev", 0, Channel::R, test_even(s.alphabet), 1));
  s.add_rule(Agent::Receiver, make_test("hd", 0, Channel::L, test_head(s.alphabet, 0), 1));
  rep = classify_tests(s);
  CHECK(rep.fragment.count("P1^r"));
  CHECK(rep.fragment.count("other"));
  CHECK(rep.has_receiver_tests());
}

TEST_CASE("run validation") {
  Schematic f;
  Run pi = schematic_pi(f);
  CHECK(validate_run(f.s, pi, Mode::Lossy));
  CHECK(pi.end() == f.inst.final_empty());
  CHECK_FALSE(validate_run(f.s, pi, Mode::Reliable));

  Run no_loss = pi;
  no_loss.steps.erase(no_loss.steps.begin() + 3);
  auto chk = validate_run(f.s, no_loss, Mode::Lossy);
  CHECK_FALSE(chk);
  CHECK(chk.failing_index == 3);  // e1 cannot read b

  CHECK(validate_run(f.s, Run{f.inst.initial_empty(), {}}, Mode::Lossy));
}

TEST_CASE("head-lossy runs") {
  Schematic f;
  CHECK(is_head_lossy(schematic_pi(f)));

  Ucst s;
  s.alphabet = Alphabet({"a", "b"});
  s.add_sender_state("p");
  s.add_receiver_state("q");
  s.add_sender_state("p2");
  auto wr = s.add_rule(Agent::Sender, make_write("w", 0, Channel::R, 0, 1));
  Run mid{{0, 0, {}, {0, 1}}, {}};
  mid.steps.push_back({StepLabel::loss(), {0, 0, {}, {0}}});
  mid.steps.push_back({StepLabel::of(wr), {1, 0, {0}, {0}}});
  REQUIRE(validate_run(s, mid, Mode::Lossy));
  CHECK_FALSE(is_head_lossy(mid));

  Run trailing{{0, 0, {}, {0, 1}}, {}};
  trailing.steps.push_back({StepLabel::of(wr), {1, 0, {0}, {0, 1}}});
  trailing.steps.push_back({StepLabel::loss(), {1, 0, {0}, {0}}});
  CHECK(is_head_lossy(trailing));

  Run fixed = to_head_lossy(s, mid);
  CHECK(validate_run(s, fixed, Mode::Lossy));
  CHECK(is_head_lossy(fixed));
  CHECK(fixed.start == mid.start);
  CHECK(fixed.end() == mid.end());
  CHECK(to_head_lossy(s, trailing).steps.size() == trailing.steps.size());
}

TEST_CASE("commutation cases") {
  Ucst s;
  s.alphabet = Alphabet({"a", "b"});
  for (auto n : {"p0", "p1", "p2"}) s.add_sender_state(n);
  for (auto n : {"q0", "q1"}) s.add_receiver_state(n);
  auto wr = s.add_rule(Agent::Sender, make_write("w", 0, Channel::R, 0, 1));
  auto z = s.add_rule(Agent::Sender, make_test("z", 1, Channel::R, test_zero(s.alphabet), 2));
  auto rd = s.add_rule(Agent::Receiver, make_read("rd", 0, Channel::L, 1, 1));

  SUBCASE("no contact") {
    Run run{{0, 0, {}, {1}}, {}};
    run.steps.push_back({StepLabel::of(wr), {1, 0, {0}, {1}}});
    run.steps.push_back({StepLabel::of(rd), {1, 1, {0}, {}}});
    CHECK(commute_case(s, run, 0) == CommuteCase::NoContact);
    auto res = commute(s, run, 0);
    REQUIRE(res.run);
    CHECK(validate_run(s, *res.run, Mode::Lossy));
    CHECK(res.run->end() == run.end());
    CHECK(res.run->steps[0].label == StepLabel::of(rd));
  }
  SUBCASE("postponable loss") {
    Run run{{0, 0, {}, {1, 0}}, {}};
    run.steps.push_back({StepLabel::loss(), {0, 0, {}, {1}}});
    run.steps.push_back({StepLabel::of(rd), {0, 1, {}, {}}});
    CHECK(commute_case(s, run, 0) == CommuteCase::PostponableLoss);
    auto res = commute(s, run, 0);
    REQUIRE(res.run);
    CHECK(validate_run(s, *res.run, Mode::Lossy));
    CHECK(res.run->end() == run.end());
  }
  SUBCASE("receiver step then sender Z1 test is excluded") {
    Ucst t = s;
    auto rr = t.add_rule(Agent::Receiver, make_read("rr", 0, Channel::R, 0, 1));
    Run run{{1, 0, {0}, {}}, {}};
    run.steps.push_back({StepLabel::of(rr), {1, 1, {}, {}}});
    run.steps.push_back({StepLabel::of(z), {2, 1, {}, {}}});
    REQUIRE(validate_run(t, run, Mode::Lossy));
    CHECK(commute_case(t, run, 0) == CommuteCase::None);
    CHECK(commute(t, run, 0).applied == CommuteCase::None);
  }
}

TEST_CASE("random runs become head-lossy with the same endpoints") {
  Rng rng(5);
  RandomSystemOptions o;
  o.sender_tests = {{TestClass::Zero, Channel::L}, {TestClass::Zero, Channel::R}};
  o.receiver_tests = {{TestClass::NonEmpty, Channel::L}};
  for (int i = 0; i < 100; ++i) {
    Ucst s = random_system(rng, o);
    Run r = random_run(rng, s, 10, 3);
    REQUIRE(validate_run(s, r, Mode::Lossy));
    Run h = to_head_lossy(s, r);
    REQUIRE(validate_run(s, h, Mode::Lossy));
    REQUIRE(is_head_lossy(h));
    REQUIRE(h.start == r.start);
    REQUIRE(h.end() == r.end());
    REQUIRE(h.size() == r.size());
  }
}

TEST_CASE("configuration formatting") {
  Schematic f;
  CHECK(format_configuration(f.s, {f.p("p3"), f.q("q_in"), f.w("c"), f.w("ab")}) == "(p3, q_in, c, ab)");
  CHECK(format_label(f.s, StepLabel::loss()) == "los");
  CHECK(format_label(f.s, StepLabel::of(d1)) == "d1");
}
