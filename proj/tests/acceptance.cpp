// Acceptance run: one PASS/FAIL line per criterion, exit code 1 if any fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "ucst/explore.hpp"
#include "ucst/generators.hpp"
#include "ucst/pep.hpp"
#include "ucst/reductions.hpp"
#include "ucst/validation.hpp"

using namespace ucst;

namespace {

// Pinned thresholds.
constexpr double kSchematicSeconds = 1.0;
constexpr double kRoundTripSeconds = 60.0;
constexpr std::size_t kRoundTripSamples = 200;
constexpr std::size_t kRoundTripBound = 4;
constexpr std::size_t kStageSamples = 100;
constexpr std::size_t kStageBound = 2;
constexpr std::size_t kPreStarSamples = 60;
constexpr std::size_t kDecideSamples = 60;
constexpr std::size_t kCommutePairs = 10000;
constexpr std::size_t kWriteLossySystems = 50;
constexpr std::size_t kWriteLossyBound = 4;
constexpr std::size_t kThueBound = 4;
constexpr std::size_t kThueStates = 100000;
constexpr std::size_t kRegdataLen = 5;
constexpr std::uint64_t kSeed = 2024;

struct Result {
  bool ok = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, const char* title, const std::function<Result()>& body) {
  Result r;
  try {
    r = body();
  } catch (const std::exception& e) {
    r = {false, std::string("exception: ") + e.what()};
  }
  std::printf("%s criterion %d (%s): %s\n", r.ok ? "PASS" : "FAIL", id, title, r.detail.c_str());
  std::fflush(stdout);
  failures += !r.ok;
}

Result from_reports(std::initializer_list<CheckReport> reports, const std::string& extra = "") {
  Result r;
  std::ostringstream os;
  for (auto& c : reports) {
    r.ok &= c.ok();
    os << c.line() << "; ";
    for (auto& f : c.failures) os << "[" << f << "] ";
  }
  r.detail = os.str() + extra;
  return r;
}

std::string data_file(const char* name) { return std::string(UCST_TEST_DATA) + "/" + name; }

Result criterion1() {
  const auto t0 = Clock::now();
  auto inst = parse_ucst(read_file(data_file("schematic.ucst"))).instance;
  Verdict v = bounded_reach(inst, Bound{2, 1000});
  const double dt = seconds_since(t0);
  const bool reach = v.reachable() && check_witness(inst, *v.witness);

  PepInstance pep = ucst_to_pep(inst);
  auto word = [&](std::initializer_list<const char*> names) {
    Word w;
    for (auto* n : names) w.push_back(pep.sigma.at(n));
    return w;
  };
  const bool sol = is_solution(pep, word({"d1", "e1", "d2", "e2", "d3", "d4"}));
  const bool pi = is_solution(pep, word({"d1", "d2", "d3", "e1", "d4", "e2"}));
  auto found = bounded_solve(pep, 6);
  const bool solved = found && is_solution(pep, *found);

  Result r;
  r.ok = reach && dt < kSchematicSeconds && sol && !pi && solved;
  std::ostringstream os;
  os << "reachable=" << reach << " witness=" << (v.witness ? v.witness->size() : 0) << " steps in " << dt
     << "s; solution(d1 e1 d2 e2 d3 d4)=" << sol << " solution(d1 d2 d3 e1 d4 e2)=" << pi
     << " bounded_solve(6)=" << solved;
  r.detail = os.str();
  return r;
}

Result criterion2() {
  const auto t0 = Clock::now();
  CheckReport c = check_pep_round_trip(kRoundTripSamples, kSeed, kRoundTripBound);
  const double dt = seconds_since(t0);
  Result r = from_reports({c}, "runtime " + std::to_string(dt) + "s");
  r.ok = r.ok && c.cases >= kRoundTripSamples && dt < kRoundTripSeconds;
  return r;
}

Result criterion3() {
  Result r;
  std::ostringstream os;
  for (auto k : {StageKind::ElimReceiverTests, StageKind::ElimInitial, StageKind::ElimN1, StageKind::ElimFinal}) {
    CheckReport c = check_stage_agreement(k, kStageSamples, kSeed, kStageBound);
    r.ok &= c.ok() && c.cases >= kStageSamples;
    os << c.line() << "; ";
    for (auto& f : c.failures) os << "[" << f << "] ";
  }
  r.detail = os.str();
  return r;
}

Result criterion4() {
  CheckReport pre = check_pre_star(kPreStarSamples, kSeed);
  CheckReport dec = check_decide(kDecideSamples, kSeed);
  Result r = from_reports({pre, dec});
  r.ok = r.ok && pre.inconclusive == 0 && dec.inconclusive == 0 && dec.cases >= 50;
  return r;
}

Result criterion5() {
  CheckReport c = check_commutation(kCommutePairs, kSeed);
  Result r = from_reports({c});
  r.ok = r.ok && c.cases >= kCommutePairs;
  return r;
}

Result criterion6() {
  CheckReport c = check_write_lossy(kWriteLossySystems, kWriteLossyBound);
  Result r = from_reports({c});
  r.ok = r.ok && c.cases >= kWriteLossySystems;
  return r;
}

Result criterion7() {
  const Alphabet ab({"a", "b"});
  auto t = SemiThueSystem::parse(ab, "ab->ba, ba->ab");
  auto loop = thue_find_loop(t, 2, 10);
  ThueRecurrent g = gen_thue_recurrent(t);
  const Bound b{kThueBound, 0, kThueStates};
  auto yes = bounded_recurrent(g.system, g.p_in, g.q_in, g.p_loop, g.q_loop, b);
  bool lasso_ok = false;
  if (yes.lasso) {
    Run whole = yes.lasso->stem;
    for (auto& st : yes.lasso->cycle.steps) whole.steps.push_back(st);
    lasso_ok = validate_run(g.system, whole, Mode::Lossy) && yes.lasso->cycle.start.p == g.p_loop &&
               yes.lasso->cycle.start.q == g.q_loop && yes.lasso->cycle.start == yes.lasso->cycle.end();
  }
  auto one = SemiThueSystem::parse(ab, "ab->ba");
  ThueRecurrent h = gen_thue_recurrent(one);
  auto no = bounded_recurrent(h.system, h.p_in, h.q_in, h.p_loop, h.q_loop, b);

  Result r;
  r.ok = loop.has_value() && lasso_ok && !no.lasso;
  std::ostringstream os;
  os << "loop(ab->ba, ba->ab)=" << (loop ? ab.format(*loop) : "none") << " lasso=" << lasso_ok;
  if (yes.lasso) os << " (stem " << yes.lasso->stem.size() << ", cycle " << yes.lasso->cycle.size() << ")";
  os << "; ab->ba lasso=" << no.lasso.has_value() << " explored " << no.explored
     << (no.exhaustive ? " (exhaustive)" : " (channel bound pruned)");
  r.detail = os.str();
  return r;
}

Result criterion8() {
  static const char* corpus[] = {"EPS", "NONE", "a", "a b", "a*", "ANY+", "(ANY ANY)*", "a ANY*", "(a|b) b*",
                                 "(a b)* a", "b* a b*", "a+ b+", "(a|EPS) (b|EPS)"};
  std::size_t checks = 0, mismatches = 0;
  for (const Alphabet& m : {Alphabet({"a", "b"}), Alphabet({"a", "b", "c"})}) {
    const auto words = oracle::all_words(m.size(), kRegdataLen);
    for (auto* re : corpus) {
      Nfa a = parse_regex(re, m);
      Nfa c = complement(a), up = upward_closure(a), down = downward_closure(a);
      auto members = oracle::language(a, kRegdataLen);
      // Longest needed superword: (a b)* a covering a word of kRegdataLen letters.
      auto long_members = oracle::language(a, 2 * kRegdataLen + 1);
      for (auto& x : words) {
        bool above = false, below = false;
        for (auto& y : members)
          if ((above = oracle::subword(y, x))) break;
        for (auto& y : long_members)
          if ((below = oracle::subword(x, y))) break;
        mismatches += c.accepts(x) == a.accepts(x);
        mismatches += up.accepts(x) != above;
        mismatches += down.accepts(x) != below;
        checks += 3;
      }
    }
    // Shuffle of single words: distinct interleavings.
    for (auto& x : oracle::all_words(m.size(), 3))
      for (auto& y : oracle::all_words(m.size(), 3)) {
        if (x.size() + y.size() > kRegdataLen) continue;
        Nfa s = shuffle(Nfa::word(m, x), Nfa::word(m, y));
        auto inter = oracle::interleavings(x, y);
        std::set<Word> expect(inter.begin(), inter.end());
        mismatches += oracle::language(s, kRegdataLen) != expect;
        ++checks;
      }
  }
  Result r;
  r.ok = mismatches == 0;
  r.detail = std::to_string(checks) + " checks, " + std::to_string(mismatches) + " mismatches";
  return r;
}

}  // namespace

int main() {
  report(1, "schematic instance anchor", criterion1);
  report(2, "PEP round trip", criterion2);
  report(3, "stage equivalence", criterion3);
  report(4, "Pre* and Turing reduction", criterion4);
  report(5, "commutation and head-lossy runs", criterion5);
  report(6, "lossy vs write-lossy", criterion6);
  report(7, "semi-Thue recurrence", criterion7);
  report(8, "regular-language operations", criterion8);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
