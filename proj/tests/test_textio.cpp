#include <doctest.h>

#include "oracles.hpp"
#include "ucst/explore.hpp"
#include "ucst/reductions.hpp"
#include "ucst/textio.hpp"
#include "ucst/validation.hpp"

using namespace ucst;

namespace {

std::string error_of(const char* text) {
  try {
    parse_ucst(text);
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("fixture files parse") {
  auto f = oracle::load("schematic.ucst");
  const Ucst& s = f.instance.system;
  CHECK(s.alphabet.size() == 3);
  CHECK(s.sender_states.size() == 5);
  CHECK(s.receiver_states.size() == 3);
  CHECK(s.sender_rules.size() == 4);
  CHECK(s.receiver_rules.size() == 2);
  CHECK(s.sender_rules[3].is_test());
  CHECK(s.sender_rules[3].test_class() == TestClass::Zero);
  CHECK(f.mode == Mode::Lossy);
  CHECK_FALSE(f.generated);
  CHECK(f.instance.is_empty_initial());
  CHECK(f.instance.is_empty_final());

  auto g = oracle::load("buffered.ucst");
  CHECK(g.instance.Up.accepts(g.instance.system.alphabet.parse_word("abc")));
}

TEST_CASE("format and parse round trip") {
  for (auto* name : {"schematic.ucst", "buffered.ucst", "trivial.ucst", "unreachable.ucst"}) {
    auto f = oracle::load(name);
    for (Mode m : {Mode::Lossy, Mode::Reliable, Mode::WriteLossy}) {
      auto back = parse_ucst(format_ucst(f.instance, m, false, "round trip\nsecond line"));
      CHECK(structurally_equal(back.instance, f.instance));
      CHECK(back.mode == m);
    }
  }
}

TEST_CASE("random instances round trip") {
  Rng rng(5);
  RandomSystemOptions o;
  o.sender_tests = {{TestClass::Zero, Channel::L}, {TestClass::NonEmpty, Channel::R}};
  o.receiver_tests = {{TestClass::Zero, Channel::R}, {TestClass::NonEmpty, Channel::L}};
  for (int i = 0; i < 100; ++i) {
    auto inst = random_instance(rng, o, true, true);
    auto back = parse_ucst(format_ucst(inst)).instance;
    REQUIRE(structurally_equal(back, inst));
    REQUIRE(bounded_reach(back, Bound{2}).kind == bounded_reach(inst, Bound{2}).kind);
  }
}

TEST_CASE("reduced instances round trip with reserved symbols") {
  auto inst = oracle::load("buffered.ucst").instance;
  auto tr = run_pipeline(inst, PipelineTarget::EEZ1);
  const ReachInstance& out = tr.final_instance();
  CHECK(out.system.alphabet.contains("#"));
  const std::string text = format_ucst(out, Mode::Lossy, true, tr.report());
  auto back = parse_ucst(text);
  CHECK(back.generated);
  CHECK(structurally_equal(back.instance, out));
}

TEST_CASE("reserved symbols need the generated flag") {
  const char* text = "alphabet: a z\nsender: p\nreceiver: q\ninstance: p q p q\n";
  CHECK(error_of(text).find("'z'") != std::string::npos);
  CHECK_NOTHROW(parse_ucst(std::string(text) + "generated: yes\n"));
  CHECK_FALSE(error_of("alphabet: n\nsender: p\nreceiver: q\ninstance: p q p q\n").empty());
}

TEST_CASE("parse errors carry line numbers") {
  CHECK(error_of("alphabet: a\nsender p\n").find("line 2") != std::string::npos);
  CHECK(error_of("alphabet: a\nsender: p\nreceiver: q\nrule s x: p -> nowhere : l!a\ninstance: p q p q\n")
            .find("line 4") != std::string::npos);
  CHECK(error_of("alphabet: a\nsender: p\nreceiver: q\nrule s x: p -> p : l!b\ninstance: p q p q\n")
            .find("line 4") != std::string::npos);
  CHECK(error_of("alphabet: a\nsender: p\nreceiver: q\ninstance: p q p q\nU: (a\n").find("line 5") !=
        std::string::npos);
  CHECK(error_of("sender: p\n").find("alphabet") != std::string::npos);
  CHECK(error_of("alphabet: a\nsender: p\nreceiver: q\n").find("instance") != std::string::npos);
  CHECK_FALSE(error_of("alphabet: a\nsender: p\nreceiver: q\nmode: sometimes\ninstance: p q p q\n").empty());
}

TEST_CASE("PEP text format") {
  auto schematic = oracle::load("schematic.ucst").instance;
  PepInstance p = ucst_to_pep(schematic);
  PepInstance back = parse_pep(format_pep(p, "from the schematic instance"));
  CHECK(structurally_equal(back, p));
  CHECK(back.sigma.size() == 6);

  PepInstance q = parse_pep(
      "sigma: a b\n"
      "gamma: x y\n"
      "u: a -> x\n"
      "u: b -> EPS\n"
      "v: a -> x y\n"
      "v: b -> y\n"
      "R: a b*\n"
      "Rp: NONE\n");
  CHECK(q.u_map[0] == Word{0});
  CHECK(q.u_map[1].empty());
  CHECK(q.v_map[0] == Word{0, 1});
  CHECK(is_solution(q, {0}));
  CHECK(parse_pep("sigma: a\ngamma: x\nR: a\n").u_map[0].empty());  // unmapped letters map to EPS
  CHECK_THROWS_AS(parse_pep("sigma: a\ngamma: x\nu: c -> x\nR: a\n"), InputError);
  CHECK_THROWS_AS(parse_pep("sigma: a\ngamma: x\nu: a -> x\nv: a -> x\n"), InputError);
}

TEST_CASE("files") {
  const std::string path = "textio_test_tmp.ucst";
  auto f = oracle::load("schematic.ucst");
  write_file(path, format_ucst(f.instance));
  CHECK(structurally_equal(parse_ucst(read_file(path)).instance, f.instance));
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_file("/nonexistent/dir/x.ucst"), InputError);
}
