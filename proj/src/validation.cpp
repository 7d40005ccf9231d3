#include "ucst/validation.hpp"

#include <sstream>

#include "ucst/pep.hpp"

namespace ucst {

std::size_t pick(Rng& rng, std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(rng() % n); }

namespace {

Alphabet letters(std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back(std::string(1, static_cast<char>('a' + i)));
  return Alphabet(names);
}

Nfa test_lang(const Alphabet& m, TestClass c) {
  switch (c) {
    case TestClass::Zero: return test_zero(m);
    case TestClass::NonEmpty: return test_nonempty(m);
    case TestClass::Even: return test_even(m);
    case TestClass::Odd: return test_odd(m);
    default: throw InternalError("random_system: unsupported test class");
  }
}

std::pair<StateId, StateId> edge(Rng& rng, std::size_t n, bool acyclic) {
  if (!acyclic || n < 2) return {static_cast<StateId>(pick(rng, n)), static_cast<StateId>(pick(rng, n))};
  auto i = pick(rng, n - 1);
  auto j = i + 1 + pick(rng, n - 1 - i);
  return {static_cast<StateId>(i), static_cast<StateId>(j)};
}

std::size_t state_count(Rng& rng, std::size_t max, bool acyclic) {
  if (acyclic && max >= 2) return 2 + pick(rng, max - 1);
  return 1 + pick(rng, max);
}

const char* kRegexPool[] = {"EPS", "EPS", "a", "b", "a b", "a*", "ANY*", "b a*", "(a|b)"};

std::string describe_instance(const ReachInstance& inst) {
  std::ostringstream os;
  auto& s = inst.system;
  os << s.sender_states.size() << "x" << s.receiver_states.size() << " states, " << s.num_rules()
     << " rules, " << classify_tests(s).describe();
  return os.str();
}

}  // namespace

Ucst random_system(Rng& rng, const RandomSystemOptions& opts) {
  Ucst s;
  s.alphabet = letters(opts.alphabet);
  const std::size_t m = opts.alphabet;
  const std::size_t n1 = state_count(rng, opts.max_sender_states, opts.acyclic_sender);
  const std::size_t n2 = state_count(rng, opts.max_receiver_states, opts.acyclic_receiver);
  for (std::size_t i = 0; i < n1; ++i) s.add_sender_state("p" + std::to_string(i));
  for (std::size_t i = 0; i < n2; ++i) s.add_receiver_state("q" + std::to_string(i));

  auto add = [&](Agent agent, std::size_t n, bool acyclic, std::size_t max_rules,
                 const std::vector<std::pair<TestClass, Channel>>& tests) {
    const std::size_t k = 1 + pick(rng, max_rules);
    const char prefix = agent == Agent::Sender ? 's' : 'r';
    for (std::size_t i = 0; i < k; ++i) {
      auto [from, to] = edge(rng, n, acyclic);
      std::string name = prefix + std::to_string(i);
      const std::size_t choice = pick(rng, 3 + tests.size());
      const auto x = static_cast<Symbol>(pick(rng, m));
      if (choice == 0) {
        s.add_rule(agent, make_nop(name, from, to));
      } else if (choice <= 2) {
        const Channel c = choice == 1 ? Channel::R : Channel::L;
        s.add_rule(agent, agent == Agent::Sender ? make_write(name, from, c, x, to)
                                                 : make_read(name, from, c, x, to));
      } else {
        auto [cls, c] = tests[choice - 3];
        s.add_rule(agent, make_test(name, from, c, test_lang(s.alphabet, cls), to));
      }
    }
  };
  add(Agent::Sender, n1, opts.acyclic_sender, opts.max_sender_rules, opts.sender_tests);
  add(Agent::Receiver, n2, opts.acyclic_receiver, opts.max_receiver_rules, opts.receiver_tests);
  s.check();
  return s;
}

ReachInstance random_instance(Rng& rng, const RandomSystemOptions& opts, bool general_initial,
                              bool general_final) {
  Ucst s = random_system(rng, opts);
  const auto n1 = s.sender_states.size(), n2 = s.receiver_states.size();
  auto p_in = static_cast<StateId>(pick(rng, n1)), p_fi = static_cast<StateId>(pick(rng, n1));
  auto q_in = static_cast<StateId>(pick(rng, n2)), q_fi = static_cast<StateId>(pick(rng, n2));
  if (opts.acyclic_sender) p_in = 0, p_fi = static_cast<StateId>(n1 - 1 - pick(rng, 2) % n1);
  ReachInstance inst = ReachInstance::empty_empty(std::move(s), p_in, q_in, p_fi, q_fi);
  auto regex = [&]() {
    const std::size_t n = sizeof(kRegexPool) / sizeof(kRegexPool[0]);
    return parse_regex(kRegexPool[pick(rng, n)], inst.system.alphabet);
  };
  if (general_initial) inst.U = regex(), inst.V = regex();
  if (general_final) inst.Up = regex(), inst.Vp = regex();
  inst.check();
  return inst;
}

Run random_run(Rng& rng, const Ucst& s, std::size_t max_len, std::size_t max_initial_len) {
  auto word = [&]() {
    Word w(pick(rng, max_initial_len + 1));
    for (auto& x : w) x = static_cast<Symbol>(pick(rng, s.alphabet.size()));
    return w;
  };
  Run run;
  run.start = {static_cast<StateId>(pick(rng, s.sender_states.size())),
               static_cast<StateId>(pick(rng, s.receiver_states.size())), word(), word()};
  for (std::size_t i = 0; i < max_len; ++i) {
    auto next = successors(s, run.end(), Mode::Lossy);
    if (next.empty()) break;
    run.steps.push_back(next[pick(rng, next.size())]);
  }
  return run;
}

void CheckReport::fail(const std::string& why) {
  ++failed;
  if (failures.size() < 5) failures.push_back(why);
}

std::string CheckReport::line() const {
  std::ostringstream os;
  os << (ok() ? "PASS " : "FAIL ") << name << ": " << cases << " cases, " << passed << " passed, "
     << failed << " failed, " << inconclusive << " inconclusive";
  if (!note.empty()) os << " (" << note << ")";
  return os.str();
}

// ---------------------------------------------------------------- stages

CheckReport check_stage_agreement(StageKind k, std::size_t samples, std::uint64_t seed,
                                  std::size_t bound) {
  CheckReport rep;
  rep.name = std::string("stage ") + to_string(k);
  Rng rng(seed ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(k) + 1)));
  const std::vector<std::pair<TestClass, Channel>> zn = {
      {TestClass::Zero, Channel::R}, {TestClass::Zero, Channel::L},
      {TestClass::NonEmpty, Channel::R}, {TestClass::NonEmpty, Channel::L}};
  const std::vector<std::pair<TestClass, Channel>> z = {{TestClass::Zero, Channel::R},
                                                        {TestClass::Zero, Channel::L}};
  RandomSystemOptions opts;
  bool gi = false, gf = true;
  switch (k) {
    case StageKind::ElimReceiverTests:
      opts.sender_tests = zn, opts.receiver_tests = zn, gi = true;
      break;
    case StageKind::ElimInitial: opts.sender_tests = zn, gi = true; break;
    case StageKind::ElimN1: opts.sender_tests = zn; break;
    case StageKind::ElimFinal: opts.sender_tests = z; break;
  }
  const Bound src_bound{bound, 0, 100000};
  std::size_t witnesses = 0, lost = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    ReachInstance inst = random_instance(rng, opts, gi, gf);
    ++rep.cases;
    try {
      Reduction red = k == StageKind::ElimReceiverTests ? elim_receiver_tests(inst)
                      : k == StageKind::ElimInitial     ? elim_initial(inst)
                      : k == StageKind::ElimN1          ? elim_n1(inst)
                                                        : elim_final(inst);
      red.target.check();
      Bound tgt_bound = red.inflation.apply(src_bound);
      tgt_bound.max_states = 200000;
      Verdict vs = bounded_reach(inst, src_bound);
      Verdict vt = bounded_reach(red.target, tgt_bound);
      using K = Verdict::Kind;
      if ((vs.kind == K::Reachable && vt.kind == K::Unreachable) ||
          (vs.kind == K::Unreachable && vt.kind == K::Reachable)) {
        rep.fail("sample " + std::to_string(i) + ": source " + to_string(vs.kind) + ", target " +
                 to_string(vt.kind) + " [" + describe_instance(inst) + "]");
        continue;
      }
      if (vt.reachable()) {
        Run back = red.pull_back(*vt.witness);
        if (auto chk = check_witness(inst, back); !chk) {
          rep.fail("sample " + std::to_string(i) + ": pulled-back witness invalid: " + chk.reason);
          continue;
        }
        ++witnesses;
      }
      if (vs.kind != vt.kind || vs.kind == K::NotWithinBound) {
        if (vs.reachable() && !vt.reachable()) ++lost;
        ++rep.inconclusive;
      } else {
        ++rep.passed;
      }
    } catch (const std::exception& e) {
      rep.fail("sample " + std::to_string(i) + ": " + e.what());
    }
  }
  rep.note = std::to_string(witnesses) + " witnesses transported, " + std::to_string(lost) +
             " source witnesses not matched within the target budget";
  return rep;
}

// ------------------------------------------------------------------ PEP

CheckReport check_pep_round_trip(std::size_t samples, std::uint64_t seed, std::size_t bound,
                                 bool mutant) {
  CheckReport rep;
  rep.name = mutant ? "pep round trip (mutant)" : "pep round trip";
  Rng rng(seed ^ 0x5bd1e995ULL);
  RandomSystemOptions opts;
  opts.sender_tests = {{TestClass::Zero, Channel::L}};
  PepBuildOptions build;
  build.intersect_er = !mutant;
  std::size_t forward = 0, backward = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    ReachInstance inst = random_instance(rng, opts, false, false);
    ++rep.cases;
    const std::string tag = "sample " + std::to_string(i) + ": ";
    try {
      const auto ctx = PreSolutionContext::build(inst);
      const PepInstance pep = ucst_to_pep(inst, build);
      Verdict v = bounded_reach(inst, Bound{bound, 0, 100000});
      if (v.reachable()) {
        Word w = run_to_presolution(ctx, *v.witness);
        if (auto c = is_pre_solution(ctx, w); !c) {
          rep.fail(tag + "witness word fails " + to_string(c.failed));
          continue;
        }
        Word a = advance_stabilize(ctx, w);
        if (!is_solution(pep, a)) {
          rep.fail(tag + "advance-stable word is not a solution");
          continue;
        }
        ++forward;
      }
      if (auto sol = bounded_solve(pep, bound + 2)) {
        Word p = postpone_stabilize(ctx, *sol);
        Run run = run_from_postpone_stable(ctx, p);
        if (auto chk = check_witness(inst, run); !chk) {
          rep.fail(tag + "replayed solution is not a witness: " + chk.reason);
          continue;
        }
        if (v.kind == Verdict::Kind::Unreachable) {
          rep.fail(tag + "solution for a certified unreachable instance");
          continue;
        }
        ++backward;
      }
      ++rep.passed;
    } catch (const std::exception& e) {
      rep.fail(tag + e.what());
    }
  }
  rep.note = std::to_string(forward) + " witnesses -> solutions, " + std::to_string(backward) +
             " solutions -> witnesses";
  return rep;
}

// ---------------------------------------------------------- commutation

CheckReport check_commutation(std::size_t pairs, std::uint64_t seed) {
  CheckReport rep;
  rep.name = "commutation";
  Rng rng(seed ^ 0x27d4eb2fULL);
  RandomSystemOptions opts;
  opts.sender_tests = {{TestClass::Zero, Channel::R}, {TestClass::Zero, Channel::L},
                       {TestClass::NonEmpty, Channel::R}, {TestClass::NonEmpty, Channel::L}};
  opts.receiver_tests = opts.sender_tests;
  opts.max_sender_rules = opts.max_receiver_rules = 6;
  std::size_t applied = 0, runs = 0;
  while (rep.cases < pairs) {
    Ucst s = random_system(rng, opts);
    for (int r = 0; r < 8 && rep.cases < pairs; ++r) {
      Run run = random_run(rng, s, 12);
      if (run.size() < 2) continue;
      ++runs;
      for (std::size_t i = 0; i + 1 < run.size(); ++i) {
        ++rep.cases;
        try {
          if (commute_case(s, run, i) == CommuteCase::None) {
            ++rep.passed;
            continue;
          }
          CommuteResult res = commute(s, run, i);
          if (!res.run || !validate_run(s, *res.run, Mode::Lossy) || res.run->start != run.start ||
              res.run->end() != run.end() || res.run->steps[i].label != run.steps[i + 1].label ||
              res.run->steps[i + 1].label != run.steps[i].label) {
            rep.fail("commute " + std::string(to_string(res.applied)) + " at " + std::to_string(i) +
                     " gave a bad run:\n" + format_run(s, run));
            continue;
          }
          ++applied;
          ++rep.passed;
        } catch (const std::exception& e) {
          rep.fail(std::string("commute: ") + e.what() + "\n" + format_run(s, run));
        }
      }
      try {
        Run h = to_head_lossy(s, run);
        if (!validate_run(s, h, Mode::Lossy) || !is_head_lossy(h) || h.start != run.start ||
            h.end() != run.end())
          rep.fail("to_head_lossy gave a bad run:\n" + format_run(s, run));
      } catch (const std::exception& e) {
        rep.fail(std::string("to_head_lossy: ") + e.what());
      }
    }
  }
  rep.note = std::to_string(applied) + " swaps, " + std::to_string(runs) + " runs made head-lossy";
  return rep;
}

// ---------------------------------------------------------- write-lossy

CheckReport check_write_lossy(std::size_t min_systems, std::size_t bound) {
  CheckReport rep;
  rep.name = "lossy vs write-lossy";
  const Alphabet m = letters(2);
  const Symbol a = 0, b = 1;
  // Sender p0 -> p1 -> p2 (at most two writes), Receiver q0 <-> q1.
  auto sender_action = [&](std::size_t k, std::string name, StateId f, StateId t) {
    switch (k) {
      case 0: return make_nop(name, f, t);
      case 1: return make_write(name, f, Channel::R, a, t);
      case 2: return make_write(name, f, Channel::R, b, t);
      case 3: return make_write(name, f, Channel::L, a, t);
      case 4: return make_write(name, f, Channel::L, b, t);
      case 5: return make_test(name, f, Channel::R, test_zero(m), t);
      default: return make_test(name, f, Channel::L, test_zero(m), t);
    }
  };
  auto receiver_action = [&](std::size_t k, std::string name, StateId f, StateId t) {
    switch (k) {
      case 0: return make_read(name, f, Channel::L, a, t);
      case 1: return make_read(name, f, Channel::L, b, t);
      case 2: return make_read(name, f, Channel::R, a, t);
      case 3: return make_read(name, f, Channel::R, b, t);
      case 4: return make_test(name, f, Channel::L, test_zero(m), t);
      default: return make_test(name, f, Channel::R, test_zero(m), t);
    }
  };
  const std::vector<Word> starts_u = {{}, {a}, {b, a}};
  std::size_t systems = 0;
  for (std::size_t s1 = 0; s1 < 7; ++s1)
    for (std::size_t s2 = 0; s2 < 7; ++s2)
      for (std::size_t r1 = 0; r1 < 6; ++r1) {
        const std::size_t r2 = (s1 + s2 + r1) % 6;
        Ucst s;
        s.alphabet = m;
        for (auto n : {"p0", "p1", "p2"}) s.add_sender_state(n);
        for (auto n : {"q0", "q1"}) s.add_receiver_state(n);
        s.add_rule(Agent::Sender, sender_action(s1, "s0", 0, 1));
        s.add_rule(Agent::Sender, sender_action(s2, "s1", 1, 2));
        s.add_rule(Agent::Receiver, receiver_action(r1, "r0", 0, 1));
        s.add_rule(Agent::Receiver, receiver_action(r2, "r1", 1, 0));
        ++systems;
        for (StateId p = 0; p < 3; ++p)
          for (StateId q = 0; q < 2; ++q)
            for (auto& u : starts_u) {
              ++rep.cases;
              const std::vector<Configuration> start{{p, q, u, {}}};
              auto lossy = bounded_post(s, start, Bound{bound}, Mode::Lossy);
              auto wl = bounded_post(s, start, Bound{bound}, Mode::WriteLossy);
              if (lossy.pruned || wl.pruned) {
                ++rep.inconclusive;
              } else if (lossy.configs != wl.configs) {
                rep.fail("system " + std::to_string(systems) + " from " +
                         format_configuration(s, start[0]) + ": " +
                         std::to_string(lossy.configs.size()) + " lossy vs " +
                         std::to_string(wl.configs.size()) + " write-lossy configurations");
              } else {
                ++rep.passed;
              }
            }
      }
  if (systems < min_systems) rep.fail("family has only " + std::to_string(systems) + " systems");
  rep.note = std::to_string(systems) + " systems";
  return rep;
}

// ------------------------------------------------------------------ Pre*

CheckReport check_pre_star(std::size_t samples, std::uint64_t seed) {
  CheckReport rep;
  rep.name = "pre* vs coreach";
  Rng rng(seed ^ 0x85ebca6bULL);
  RandomSystemOptions opts;
  opts.sender_tests = {{TestClass::Zero, Channel::L}};
  opts.acyclic_sender = opts.acyclic_receiver = true;
  const auto oracle = make_bounded_oracle(Bound{6});
  std::size_t elements = 0;
  PreStarOptions po;
  po.max_candidate_len = 4;
  for (std::size_t i = 0; i < samples; ++i) {
    ReachInstance inst = random_instance(rng, opts, false, false);
    const Ucst& s = inst.system;
    ++rep.cases;
    try {
      UpwardClosedSet target;
      target.insert(inst.final_empty());
      PreStarResult pre = pre_star_z1l(s, to_regular(s, target), oracle, po);
      if (pre.inconclusive) {
        ++rep.inconclusive;
        continue;
      }
      const Configuration fin = inst.final_empty();
      auto co = bounded_coreach(
          s, [&](const Configuration& c) { return c == fin; }, Bound{4});
      UpwardClosedSet expect;
      for (auto& c : co)
        if (c.u.empty()) expect.insert(c);
      if (!pre.set.is_antichain() || !pre.set.same_as(expect)) {
        std::ostringstream os;
        os << "sample " << i << ": pre* has " << pre.set.minimal.size() << " minimal elements, coreach "
           << expect.minimal.size();
        rep.fail(os.str());
      } else {
        elements += expect.minimal.size();
        ++rep.passed;
      }
    } catch (const std::exception& e) {
      rep.fail("sample " + std::to_string(i) + ": " + e.what());
    }
  }
  rep.note = std::to_string(elements) + " minimal elements matched";
  return rep;
}

CheckReport check_decide(std::size_t samples, std::uint64_t seed) {
  CheckReport rep;
  rep.name = "decide E-E-Reach[Z1]";
  Rng rng(seed ^ 0xc2b2ae35ULL);
  RandomSystemOptions opts;
  opts.sender_tests = {{TestClass::Zero, Channel::R}, {TestClass::Zero, Channel::L}};
  opts.acyclic_sender = true;
  const auto oracle = make_bounded_oracle(Bound{6});
  std::size_t positives = 0;
  while (rep.cases < samples) {
    ReachInstance inst = random_instance(rng, opts, false, false);
    bool has_rz = false;
    for (auto& r : inst.system.sender_rules) has_rz |= r.tests(Channel::R);
    if (!has_rz) continue;
    ++rep.cases;
    try {
      Verdict v = bounded_reach(inst, Bound{4});
      DecideResult d = decide_eereach_z1(inst, oracle);
      if (d.inconclusive || v.kind == Verdict::Kind::NotWithinBound) {
        ++rep.inconclusive;
      } else if (d.reachable != v.reachable()) {
        rep.fail("case " + std::to_string(rep.cases) + ": decide says " +
                 (d.reachable ? "reachable" : "unreachable") + ", exploration " + to_string(v.kind));
      } else {
        positives += d.reachable;
        ++rep.passed;
      }
    } catch (const std::exception& e) {
      rep.fail(std::string("case ") + std::to_string(rep.cases) + ": " + e.what());
    }
  }
  rep.note = std::to_string(positives) + " reachable";
  return rep;
}

std::vector<CheckReport> run_validation(const ValidateOptions& o) {
  std::vector<CheckReport> out;
  for (auto k : {StageKind::ElimReceiverTests, StageKind::ElimInitial, StageKind::ElimN1,
                 StageKind::ElimFinal})
    out.push_back(check_stage_agreement(k, o.samples, o.seed, std::min<std::size_t>(o.bound, 2)));
  out.push_back(check_pep_round_trip(o.samples, o.seed, o.bound, o.mutant));
  out.push_back(check_commutation(o.samples * 100, o.seed));
  out.push_back(check_write_lossy(50, o.bound));
  out.push_back(check_pre_star(o.samples, o.seed));
  out.push_back(check_decide(o.samples, o.seed));
  return out;
}

}  // namespace ucst
