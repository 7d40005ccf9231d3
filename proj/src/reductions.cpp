#include "ucst/reductions.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>

namespace ucst {

// ------------------------------------------------------------------ bounds

Bound BoundInflation::apply(const Bound& b) const {
  Bound out = b;
  out.max_channel_len = b.max_channel_len * channel_mul + channel_add;
  if (b.max_steps)
    out.max_steps = b.max_steps * steps_mul + steps_add + steps_per_channel * b.max_channel_len;
  return out;
}

std::string BoundInflation::describe() const {
  std::ostringstream os;
  os << "channel K -> " << channel_mul << "K+" << channel_add << ", steps N -> " << steps_mul
     << "N+" << steps_add;
  if (steps_per_channel) os << "+" << steps_per_channel << "K";
  return os.str();
}

const char* to_string(StageKind k) {
  switch (k) {
    case StageKind::ElimReceiverTests: return "elim_receiver_tests";
    case StageKind::ElimInitial: return "elim_initial";
    case StageKind::ElimN1: return "elim_n1";
    case StageKind::ElimFinal: return "elim_final";
  }
  return "?";
}

namespace {

const std::vector<std::string> kReserved = {"z", "n", "#"};

void require_fresh(const Alphabet& m, const std::string& sym) {
  if (m.contains(sym))
    throw InputError("symbol '" + sym + "' is reserved; rename it in the input alphabet");
}

// Same words, symbols renamed through `map` into `to`.
Nfa relabel(const Nfa& a, const Alphabet& to, const std::vector<Symbol>& map) {
  Nfa out(to);
  for (std::size_t s = 0; s < a.num_states(); ++s)
    out.add_state(a.is_initial(static_cast<Nfa::State>(s)), a.is_accepting(static_cast<Nfa::State>(s)));
  for (std::size_t s = 0; s < a.num_states(); ++s)
    for (auto& e : a.edges(static_cast<Nfa::State>(s)))
      out.add_edge(static_cast<Nfa::State>(s), e.symbol == kEpsilon ? kEpsilon : map.at(e.symbol),
                   e.target);
  return out;
}

Nfa retarget_test(const Rule& r, const Alphabet& m) {
  switch (r.test_class()) {
    case TestClass::Zero: return test_zero(m);
    case TestClass::NonEmpty: return test_nonempty(m);
    default: return r.test_lang().with_alphabet(m);
  }
}

// Copy of a rule with its test language moved to alphabet m.
Rule carry(const Rule& r, const Alphabet& m, StateId from, StateId to) {
  Rule out = r;
  out.source = from;
  out.target = to;
  if (r.is_test()) out = make_test(r.name, from, r.channel, retarget_test(r, m), to);
  return out;
}

struct Builder {
  Ucst t;
  std::vector<RuleOrigin> sender_origin, receiver_origin;

  void add(Agent a, Rule r, RuleOrigin o) {
    if (!r.name.empty()) r.name = t.fresh_rule_name(sanitize_symbol_name(r.name));
    t.add_rule(a, std::move(r));
    (a == Agent::Sender ? sender_origin : receiver_origin).push_back(std::move(o));
  }
};

// Rules realizing an automaton whose symbols are actions: entry is the
// automaton's start, every accepted word leads to exit.  Symbol k of `gen`
// is actions[k] = (channel, message).
void embed(Builder& b, Agent agent, const Nfa& gen_raw,
           const std::vector<std::pair<Channel, Symbol>>& actions, StateId entry, StateId exit,
           const std::string& base, const std::string& role, std::vector<StateId>& state_origin) {
  const Nfa gen = gen_raw.trimmed();
  const auto n = static_cast<Nfa::State>(gen.num_states());
  if (n == 0) return;
  std::vector<char> incoming(n, 0), outgoing(n, 0);
  for (Nfa::State s = 0; s < n; ++s)
    for (auto& e : gen.edges(s)) incoming[e.target] = 1, outgoing[s] = 1;
  const auto inits = gen.initial_states();
  std::vector<StateId> map(n, -1);
  Nfa::State merged_init = -1;
  if (inits.size() == 1 && !incoming[inits[0]]) {
    merged_init = inits[0];
    map[merged_init] = entry;
  }
  int counter = 0;
  auto fresh = [&] {
    const std::string name = b.t.fresh_state_name(agent, base + "~" + std::to_string(counter++));
    StateId id = agent == Agent::Sender ? b.t.add_sender_state(name) : b.t.add_receiver_state(name);
    state_origin.push_back(-1);
    return id;
  };
  std::vector<char> merged_exit(n, 0);
  for (Nfa::State s = 0; s < n; ++s) {
    if (s == merged_init) continue;
    if (gen.is_accepting(s) && !outgoing[s]) {
      map[s] = exit;
      merged_exit[s] = 1;
    } else {
      map[s] = fresh();
    }
  }
  int rule_counter = 0;
  auto rule_name = [&](const std::string& what) {
    return base + "~" + what + std::to_string(rule_counter++);
  };
  const RuleOrigin aux = RuleOrigin::aux(role);
  if (merged_init < 0)
    for (auto s : inits) b.add(agent, make_nop(rule_name("in"), entry, map[s]), aux);
  for (Nfa::State s = 0; s < n; ++s)
    for (auto& e : gen.edges(s)) {
      auto [c, x] = actions.at(e.symbol);
      Rule r = agent == Agent::Sender ? make_write(rule_name("w"), map[s], c, x, map[e.target])
                                      : make_read(rule_name("r"), map[s], c, x, map[e.target]);
      b.add(agent, std::move(r), aux);
    }
  for (Nfa::State s = 0; s < n; ++s)
    if (gen.is_accepting(s) && !merged_exit[s]) b.add(agent, make_nop(rule_name("out"), map[s], exit), aux);
}

// Tagged alphabet "c!a" / "c?a" for every channel and message of m.
Alphabet tagged(const Alphabet& m, char op, std::vector<std::pair<Channel, Symbol>>& actions) {
  std::vector<std::string> names;
  for (Channel c : {Channel::R, Channel::L})
    for (Symbol x = 0; x < static_cast<Symbol>(m.size()); ++x) {
      names.push_back(std::string(to_string(c)) + op + m.name(x));
      actions.emplace_back(c, x);
    }
  return Alphabet(names);
}

std::vector<Symbol> tag_map(const Alphabet& m, Channel c) {
  std::vector<Symbol> out;
  const auto k = static_cast<Symbol>(m.size());
  for (Symbol x = 0; x < k; ++x) out.push_back(c == Channel::R ? x : k + x);
  return out;
}

Reduction start(StageKind kind, const ReachInstance& inst) {
  inst.check();
  Reduction red;
  red.kind = kind;
  red.source = inst;
  return red;
}

// ----------------------------------------------------------- run surgery

// Swap steps i and i+1 keeping both outer configurations.
bool swap_steps(const Ucst& s, Run& run, std::size_t i) {
  const Configuration c = run.at(i), e = run.at(i + 2);
  const StepLabel d1 = run.steps[i].label, d2 = run.steps[i + 1].label;
  for (auto& mid : successors(s, c, Mode::Lossy)) {
    if (mid.label != d2) continue;
    for (auto& fin : successors(s, mid.result, Mode::Lossy)) {
      if (fin.label != d1 || fin.result != e) continue;
      run.steps[i] = {d2, mid.result};
      run.steps[i + 1] = {d1, e};
      return true;
    }
  }
  return false;
}

void must_swap(const Ucst& s, Run& run, std::size_t i) {
  if (!swap_steps(s, run, i))
    throw InternalError("witness transport: steps " + std::to_string(i) + " and " +
                        std::to_string(i + 1) + " do not commute");
}

}  // namespace

RunCheck check_witness(const ReachInstance& inst, const Run& run) {
  RunCheck chk = validate_run(inst.system, run, Mode::Lossy);
  if (!chk) return chk;
  auto fail = [](std::string why) { return RunCheck{false, 0, std::move(why)}; };
  const auto& a = run.start;
  if (a.p != inst.p_in || a.q != inst.q_in) return fail("run does not start in (p_in, q_in)");
  if (!inst.U.accepts(a.u) || !inst.V.accepts(a.v)) return fail("start channels outside U x V");
  const auto& z = run.end();
  if (z.p != inst.p_fi || z.q != inst.q_fi) return fail("run does not end in (p_fi, q_fi)");
  if (!inst.Up.accepts(z.u) || !inst.Vp.accepts(z.v)) return fail("end channels outside U' x V'");
  return {};
}

Run Reduction::pull_back(const Run& target_run) const {
  if (auto chk = check_witness(target, target_run); !chk)
    throw InputError(std::string(to_string(kind)) + ": not a target witness: " + chk.reason);
  const Ucst& ts = target.system;
  const auto role = [&](const Step& st) -> const RuleOrigin* {
    if (st.label.is_loss()) return nullptr;
    const auto& tab = st.label.rule.agent == Agent::Sender ? sender_rule_origin : receiver_rule_origin;
    return &tab.at(st.label.rule.index);
  };
  const auto is_role = [&](const Step& st, Agent a, const char* r) {
    const RuleOrigin* o = role(st);
    return o && st.label.rule.agent == a && o->kind == RuleOrigin::Kind::Auxiliary && o->role == r;
  };
  const auto is_sender = [](const Step& st) {
    return !st.label.is_loss() && st.label.rule.agent == Agent::Sender;
  };

  Run run = target_run;
  std::size_t begin = 0, end = run.steps.size();
  if (kind == StageKind::ElimReceiverTests) {
    run = to_head_lossy(ts, run);
    // Make every padding segment contiguous.
    for (std::size_t i = 0; i < run.steps.size(); ++i) {
      if (!is_role(run.steps[i], Agent::Sender, "pad-enter")) continue;
      std::size_t pos = i;
      for (;;) {
        std::size_t j = pos + 1;
        while (j < run.steps.size() && !is_sender(run.steps[j])) ++j;
        if (j >= run.steps.size()) break;
        for (std::size_t k = j; k > pos + 1; --k) must_swap(ts, run, k - 1);
        ++pos;
        const RuleOrigin* o = role(run.steps[pos]);
        if (o->kind == RuleOrigin::Kind::Source) break;  // the padded write itself
      }
    }
  } else if (kind == StageKind::ElimInitial) {
    for (std::size_t i = 0; i < run.steps.size(); ++i) {
      if (!is_sender(run.steps[i])) continue;
      if (!is_role(run.steps[i], Agent::Sender, "generator")) break;
      for (std::size_t k = i; k > begin; --k) must_swap(ts, run, k - 1);
      ++begin;
    }
  } else if (kind == StageKind::ElimFinal) {
    for (std::size_t i = run.steps.size(); i-- > 0;) {
      if (!is_role(run.steps[i], Agent::Receiver, "cleaning")) continue;
      for (std::size_t k = i; k + 1 < end; ++k) must_swap(ts, run, k);
      --end;
    }
  }

  const auto keep = static_cast<Symbol>(source.system.alphabet.size());
  auto project = [&](const Configuration& c) {
    Configuration out;
    out.p = sender_origin.at(c.p);
    out.q = receiver_origin.at(c.q);
    if (out.p < 0 || out.q < 0)
      throw InternalError(std::string(to_string(kind)) + ": configuration " +
                          format_configuration(ts, c) + " has no source counterpart");
    for (Symbol x : c.u)
      if (x < keep) out.u.push_back(x);
    for (Symbol x : c.v)
      if (x < keep) out.v.push_back(x);
    if (!r_buffer.empty() && r_buffer[c.p] != kEpsilon) out.u.push_back(r_buffer[c.p]);
    if (!l_buffer.empty() && l_buffer[c.p] != kEpsilon) out.v.push_back(l_buffer[c.p]);
    return out;
  };

  Run out;
  out.start = project(run.at(begin));
  for (std::size_t i = begin; i < end; ++i) {
    const Step& st = run.steps[i];
    const Configuration before = out.end();
    const Configuration after = project(st.result);
    if (st.label.is_loss()) {
      if (after != before) out.steps.push_back({StepLabel::loss(), after});
      continue;
    }
    const RuleOrigin* o = role(st);
    if (o->kind == RuleOrigin::Kind::Auxiliary) {
      if (after != before)
        throw InternalError(std::string(to_string(kind)) + ": auxiliary rule '" +
                            ts.rule(st.label.rule).name + "' changes the projection");
      continue;
    }
    out.steps.push_back({StepLabel::of(o->source), after});
  }
  if (auto chk = check_witness(source, out); !chk)
    throw InternalError(std::string(to_string(kind)) + ": transported run fails at step " +
                        std::to_string(chk.failing_index) + ": " + chk.reason);
  return out;
}

// ------------------------------------------------------ stage 1: Receiver

Reduction elim_receiver_tests(const ReachInstance& inst) {
  Reduction red = start(StageKind::ElimReceiverTests, inst);
  const Ucst& s = inst.system;
  auto frag = classify_tests(s);
  if (!frag.within({TestClass::Zero, TestClass::NonEmpty}, {Agent::Sender, Agent::Receiver},
                   {Channel::R, Channel::L}))
    throw InputError("elim_receiver_tests needs Z/N tests only, got " + frag.describe());
  for (auto& r : kReserved) require_fresh(s.alphabet, r);
  const Alphabet m2 = s.alphabet.extended({"z", "n"});
  const Symbol z = m2.at("z"), n = m2.at("n");

  Builder b;
  b.t.alphabet = m2;
  b.t.sender_states = s.sender_states;
  b.t.receiver_states = s.receiver_states;
  for (StateId p = 0; p < static_cast<StateId>(s.sender_states.size()); ++p) red.sender_origin.push_back(p);
  for (StateId q = 0; q < static_cast<StateId>(s.receiver_states.size()); ++q) red.receiver_origin.push_back(q);

  for (std::size_t i = 0; i < s.sender_rules.size(); ++i) {
    const Rule& r = s.sender_rules[i];
    b.add(Agent::Sender, carry(r, m2, r.source, r.target),
          RuleOrigin::of({Agent::Sender, static_cast<std::int32_t>(i)}));
  }
  auto new_sender_state = [&](const std::string& base, StateId origin) {
    StateId id = b.t.add_sender_state(b.t.fresh_state_name(Agent::Sender, base));
    red.sender_origin.push_back(origin);
    return id;
  };
  // Testing loops.
  for (StateId p = 0; p < static_cast<StateId>(s.sender_states.size()); ++p)
    for (Channel c : {Channel::R, Channel::L}) {
      const std::string base = s.sender_states[p] + "~z" + to_string(c);
      StateId p1 = new_sender_state(base + "1", p), p2 = new_sender_state(base + "2", p);
      const auto aux = RuleOrigin::aux("test-loop");
      b.add(Agent::Sender, make_test(base + "~t1", p, c, test_zero(m2), p1), aux);
      b.add(Agent::Sender, make_write(base + "~w", p1, c, z, p2), aux);
      b.add(Agent::Sender, make_test(base + "~t2", p2, c, test_zero(m2), p), aux);
    }
  // Padding before every write.
  for (std::size_t i = 0; i < s.sender_rules.size(); ++i) {
    const Rule& r = s.sender_rules[i];
    if (!r.is_write()) continue;
    StateId pt = new_sender_state(s.sender_states[r.source] + "~pad" + std::to_string(i), r.source);
    b.add(Agent::Sender, make_nop(r.name + "~enter", r.source, pt), RuleOrigin::aux("pad-enter"));
    b.add(Agent::Sender, make_write(r.name + "~pad", pt, r.channel, n, pt), RuleOrigin::aux("pad"));
    b.add(Agent::Sender, make_write(r.name + "~put", pt, r.channel, r.msg(), r.target),
          RuleOrigin::of({Agent::Sender, static_cast<std::int32_t>(i)}));
  }
  // Receiver tests become reads of the marker symbols.
  for (std::size_t j = 0; j < s.receiver_rules.size(); ++j) {
    const Rule& r = s.receiver_rules[j];
    Rule nr = carry(r, m2, r.source, r.target);
    if (r.is_test_of(TestClass::Zero)) nr = make_read(r.name, r.source, r.channel, z, r.target);
    if (r.is_test_of(TestClass::NonEmpty)) nr = make_read(r.name, r.source, r.channel, n, r.target);
    b.add(Agent::Receiver, std::move(nr), RuleOrigin::of({Agent::Receiver, static_cast<std::int32_t>(j)}));
  }

  ReachInstance& t = red.target;
  t.system = std::move(b.t);
  t.p_in = inst.p_in, t.p_fi = inst.p_fi, t.q_in = inst.q_in, t.q_fi = inst.q_fi;
  // pad_closure appends n; move it to its place in m2.
  const Alphabet mn = s.alphabet.extended({"n"});
  std::vector<Symbol> to_m2;
  for (Symbol x = 0; x < static_cast<Symbol>(s.alphabet.size()); ++x) to_m2.push_back(x);
  to_m2.push_back(n);
  t.U = relabel(pad_closure(inst.U, "n"), m2, to_m2);
  t.V = relabel(pad_closure(inst.V, "n"), m2, to_m2);
  t.Up = inst.Up.with_alphabet(m2);
  t.Vp = inst.Vp.with_alphabet(m2);
  red.sender_rule_origin = std::move(b.sender_origin);
  red.receiver_rule_origin = std::move(b.receiver_origin);
  red.inflation = {2, 1, 4, 4, 0};
  t.check();
  return red;
}

// -------------------------------------------------- stage 2: initial data

Reduction elim_initial(const ReachInstance& inst) {
  Reduction red = start(StageKind::ElimInitial, inst);
  const Ucst& s = inst.system;
  auto frag = classify_tests(s);
  if (frag.has_receiver_tests())
    throw InputError("elim_initial needs a Receiver without tests, got " + frag.describe());

  Builder b;
  b.t = s;
  b.t.sender_rules.clear();
  b.t.receiver_rules.clear();
  for (std::size_t i = 0; i < s.sender_rules.size(); ++i)
    b.add(Agent::Sender, s.sender_rules[i], RuleOrigin::of({Agent::Sender, static_cast<std::int32_t>(i)}));
  for (std::size_t j = 0; j < s.receiver_rules.size(); ++j)
    b.add(Agent::Receiver, s.receiver_rules[j],
          RuleOrigin::of({Agent::Receiver, static_cast<std::int32_t>(j)}));
  for (StateId p = 0; p < static_cast<StateId>(s.sender_states.size()); ++p) red.sender_origin.push_back(p);
  for (StateId q = 0; q < static_cast<StateId>(s.receiver_states.size()); ++q) red.receiver_origin.push_back(q);

  const StateId p_new = b.t.add_sender_state(b.t.fresh_state_name(Agent::Sender, "p_new"));
  red.sender_origin.push_back(-1);
  std::vector<std::pair<Channel, Symbol>> actions;
  const Alphabet tg = tagged(s.alphabet, '!', actions);
  const Nfa gen = concat(relabel(inst.U, tg, tag_map(s.alphabet, Channel::R)),
                         relabel(inst.V, tg, tag_map(s.alphabet, Channel::L)));
  embed(b, Agent::Sender, gen, actions, p_new, inst.p_in, "gen", "generator", red.sender_origin);

  ReachInstance& t = red.target;
  t.system = std::move(b.t);
  t.p_in = p_new, t.p_fi = inst.p_fi, t.q_in = inst.q_in, t.q_fi = inst.q_fi;
  t.U = t.V = Nfa::epsilon(s.alphabet);
  t.Up = inst.Up, t.Vp = inst.Vp;
  red.sender_rule_origin = std::move(b.sender_origin);
  red.receiver_rule_origin = std::move(b.receiver_origin);
  red.inflation = {1, 0, 1, 2, 2};
  t.check();
  return red;
}

// ------------------------------------------------- stage 3: N1 via buffers

Reduction elim_n1(const ReachInstance& inst) {
  Reduction red = start(StageKind::ElimN1, inst);
  const Ucst& s = inst.system;
  auto frag = classify_tests(s);
  if (!frag.within({TestClass::Zero, TestClass::NonEmpty}, {Agent::Sender}, {Channel::R, Channel::L}))
    throw InputError("elim_n1 needs Sender Z/N tests only, got " + frag.describe());
  if (!inst.is_empty_initial()) throw InputError("elim_n1 needs U = V = {EPS}");

  const Alphabet& m = s.alphabet;
  std::vector<Symbol> buf{kEpsilon};
  for (Symbol x = 0; x < static_cast<Symbol>(m.size()); ++x) buf.push_back(x);
  const auto nb = static_cast<StateId>(buf.size());
  auto bname = [&](Symbol x) { return x == kEpsilon ? std::string("_") : m.name(x); };
  auto sid = [&](StateId p, std::size_t xi, std::size_t yi) {
    return static_cast<StateId>((p * nb + static_cast<StateId>(xi)) * nb + static_cast<StateId>(yi));
  };

  Builder b;
  b.t.alphabet = m;
  b.t.receiver_states = s.receiver_states;
  for (StateId p = 0; p < static_cast<StateId>(s.sender_states.size()); ++p)
    for (std::size_t xi = 0; xi < buf.size(); ++xi)
      for (std::size_t yi = 0; yi < buf.size(); ++yi) {
        b.t.add_sender_state(b.t.fresh_state_name(
            Agent::Sender, s.sender_states[p] + "[" + bname(buf[xi]) + "," + bname(buf[yi]) + "]"));
        red.sender_origin.push_back(p);
        red.r_buffer.push_back(buf[xi]);
        red.l_buffer.push_back(buf[yi]);
      }
  for (StateId q = 0; q < static_cast<StateId>(s.receiver_states.size()); ++q) red.receiver_origin.push_back(q);

  auto suffix = [&](std::size_t xi, std::size_t yi) { return "@" + bname(buf[xi]) + bname(buf[yi]); };
  for (std::size_t i = 0; i < s.sender_rules.size(); ++i) {
    const Rule& r = s.sender_rules[i];
    const auto origin = RuleOrigin::of({Agent::Sender, static_cast<std::int32_t>(i)});
    for (std::size_t xi = 0; xi < buf.size(); ++xi)
      for (std::size_t yi = 0; yi < buf.size(); ++yi) {
        const StateId from = sid(r.source, xi, yi);
        const std::string name = r.name + suffix(xi, yi);
        const bool r_empty = xi == 0, l_empty = yi == 0;
        if (r.is_nop()) {
          b.add(Agent::Sender, make_nop(name, from, sid(r.target, xi, yi)), origin);
        } else if (r.is_write()) {
          const auto mi = static_cast<std::size_t>(r.msg()) + 1;
          if (r.channel == Channel::R && r_empty)
            b.add(Agent::Sender, make_nop(name, from, sid(r.target, mi, yi)), origin);
          if (r.channel == Channel::L && l_empty)
            b.add(Agent::Sender, make_nop(name, from, sid(r.target, xi, mi)), origin);
        } else if (r.is_test_of(TestClass::NonEmpty)) {
          if (r.channel == Channel::R ? !r_empty : !l_empty)
            b.add(Agent::Sender, make_nop(name, from, sid(r.target, xi, yi)), origin);
        } else if (r.is_test_of(TestClass::Zero)) {
          if (r.channel == Channel::R ? r_empty : l_empty)
            b.add(Agent::Sender, make_test(name, from, r.channel, test_zero(m), sid(r.target, xi, yi)),
                  origin);
        }
      }
  }
  for (StateId p = 0; p < static_cast<StateId>(s.sender_states.size()); ++p)
    for (std::size_t xi = 0; xi < buf.size(); ++xi)
      for (std::size_t yi = 0; yi < buf.size(); ++yi) {
        const std::string base = "flush~" + s.sender_states[p] + suffix(xi, yi);
        if (xi)
          b.add(Agent::Sender, make_write(base + "~r", sid(p, xi, yi), Channel::R, buf[xi], sid(p, 0, yi)),
                RuleOrigin::aux("flush"));
        if (yi)
          b.add(Agent::Sender, make_write(base + "~l", sid(p, xi, yi), Channel::L, buf[yi], sid(p, xi, 0)),
                RuleOrigin::aux("flush"));
      }
  for (std::size_t j = 0; j < s.receiver_rules.size(); ++j)
    b.add(Agent::Receiver, s.receiver_rules[j],
          RuleOrigin::of({Agent::Receiver, static_cast<std::int32_t>(j)}));

  ReachInstance& t = red.target;
  t.system = std::move(b.t);
  t.p_in = sid(inst.p_in, 0, 0), t.p_fi = sid(inst.p_fi, 0, 0);
  t.q_in = inst.q_in, t.q_fi = inst.q_fi;
  t.U = inst.U, t.V = inst.V, t.Up = inst.Up, t.Vp = inst.Vp;
  red.sender_rule_origin = std::move(b.sender_origin);
  red.receiver_rule_origin = std::move(b.receiver_origin);
  red.inflation = {1, 0, 2, 2, 0};
  t.check();
  return red;
}

// ---------------------------------------------------- stage 4: final data

Reduction elim_final(const ReachInstance& inst) {
  Reduction red = start(StageKind::ElimFinal, inst);
  const Ucst& s = inst.system;
  auto frag = classify_tests(s);
  if (!frag.within({TestClass::Zero}, {Agent::Sender}, {Channel::R, Channel::L}))
    throw InputError("elim_final needs Sender Z tests only, got " + frag.describe());
  if (!inst.is_empty_initial()) throw InputError("elim_final needs U = V = {EPS}");
  require_fresh(s.alphabet, "#");
  const Alphabet m2 = s.alphabet.extended({"#"});
  const Symbol hash = m2.at("#");

  Builder b;
  b.t.alphabet = m2;
  b.t.receiver_states = s.receiver_states;
  // Mode bit 0 = top (still testable), 1 = # written.
  auto sid = [](StateId p, int x, int y) { return p * 4 + x * 2 + y; };
  const char* mode_name[] = {"T", "#"};
  for (StateId p = 0; p < static_cast<StateId>(s.sender_states.size()); ++p)
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) {
        b.t.add_sender_state(b.t.fresh_state_name(
            Agent::Sender, s.sender_states[p] + "~" + mode_name[x] + mode_name[y]));
        red.sender_origin.push_back(p);
      }
  for (StateId q = 0; q < static_cast<StateId>(s.receiver_states.size()); ++q) red.receiver_origin.push_back(q);

  for (StateId p = 0; p < static_cast<StateId>(s.sender_states.size()); ++p) {
    const std::string base = "mark~" + s.sender_states[p];
    for (int y = 0; y < 2; ++y)
      b.add(Agent::Sender,
            make_write(base + "~r" + mode_name[y], sid(p, 0, y), Channel::R, hash, sid(p, 1, y)),
            RuleOrigin::aux("mode"));
    for (int x = 0; x < 2; ++x)
      b.add(Agent::Sender,
            make_write(base + "~l" + mode_name[x], sid(p, x, 0), Channel::L, hash, sid(p, x, 1)),
            RuleOrigin::aux("mode"));
  }
  for (std::size_t i = 0; i < s.sender_rules.size(); ++i) {
    const Rule& r = s.sender_rules[i];
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) {
        if (r.tests(Channel::R) && x) continue;
        if (r.tests(Channel::L) && y) continue;
        Rule nr = carry(r, m2, sid(r.source, x, y), sid(r.target, x, y));
        nr.name = r.name + "~" + mode_name[x] + mode_name[y];
        b.add(Agent::Sender, std::move(nr), RuleOrigin::of({Agent::Sender, static_cast<std::int32_t>(i)}));
      }
  }
  for (std::size_t j = 0; j < s.receiver_rules.size(); ++j) {
    const Rule& r = s.receiver_rules[j];
    b.add(Agent::Receiver, carry(r, m2, r.source, r.target),
          RuleOrigin::of({Agent::Receiver, static_cast<std::int32_t>(j)}));
  }

  const StateId q_f = b.t.add_receiver_state(b.t.fresh_state_name(Agent::Receiver, "q_f"));
  red.receiver_origin.push_back(-1);
  std::vector<std::pair<Channel, Symbol>> actions;
  const Alphabet tg = tagged(m2, '?', actions);
  const auto k = static_cast<Symbol>(m2.size());
  Nfa gen = concat(Nfa::word(tg, {hash}), Nfa::word(tg, {k + hash}));
  std::vector<Symbol> r_map, l_map;
  for (Symbol x = 0; x < static_cast<Symbol>(s.alphabet.size()); ++x) r_map.push_back(x), l_map.push_back(k + x);
  gen = concat(gen, relabel(inst.Up, tg, r_map));
  gen = concat(gen, relabel(inst.Vp, tg, l_map));
  embed(b, Agent::Receiver, gen, actions, inst.q_fi, q_f, "clean", "cleaning", red.receiver_origin);

  ReachInstance& t = red.target;
  t.system = std::move(b.t);
  t.p_in = sid(inst.p_in, 0, 0), t.p_fi = sid(inst.p_fi, 1, 1);
  t.q_in = inst.q_in, t.q_fi = q_f;
  t.U = t.V = t.Up = t.Vp = Nfa::epsilon(m2);
  red.sender_rule_origin = std::move(b.sender_origin);
  red.receiver_rule_origin = std::move(b.receiver_origin);
  red.inflation = {1, 1, 1, 4, 2};
  t.check();
  return red;
}

// --------------------------------------------------------------- pipeline

std::optional<PipelineTarget> parse_pipeline_target(const std::string& s) {
  if (s == "z1n1") return PipelineTarget::Z1N1;
  if (s == "eg") return PipelineTarget::EG;
  if (s == "egz1") return PipelineTarget::EGZ1;
  if (s == "eez1") return PipelineTarget::EEZ1;
  if (s == "eez1l") return PipelineTarget::EEZ1L;
  if (s == "pep") return PipelineTarget::Pep;
  return std::nullopt;
}

Run PipelineTrace::pull_back(const Run& final_run) const {
  Run run = final_run;
  for (auto it = stages.rbegin(); it != stages.rend(); ++it) run = it->pull_back(run);
  return run;
}

Bound PipelineTrace::inflate(const Bound& b) const {
  Bound out = b;
  for (auto& st : stages) out = st.inflation.apply(out);
  return out;
}

std::string PipelineTrace::report() const {
  std::ostringstream os;
  for (auto& line : log) os << line << "\n";
  return os.str();
}

namespace {

std::string summary(const ReachInstance& inst) {
  const Ucst& s = inst.system;
  std::ostringstream os;
  os << "|M|=" << s.alphabet.size() << " |Q1|=" << s.sender_states.size()
     << " |Q2|=" << s.receiver_states.size() << " |D1|=" << s.sender_rules.size()
     << " |D2|=" << s.receiver_rules.size() << " fragment=" << classify_tests(s).describe();
  return os.str();
}

}  // namespace

PipelineTrace run_pipeline(const ReachInstance& inst, PipelineTarget to) {
  inst.check();
  PipelineTrace tr;
  tr.input = inst;
  tr.log.push_back("input: " + summary(inst));
  auto frag = classify_tests(inst.system);
  if (!frag.within({TestClass::Zero, TestClass::NonEmpty}, {Agent::Sender, Agent::Receiver},
                   {Channel::R, Channel::L}))
    throw InputError("pipeline needs a UCST[Z,N] instance, got " + frag.describe());
  for (auto& r : kReserved) require_fresh(inst.system.alphabet, r);

  auto stage = [&](StageKind k, bool needed, Reduction (*fn)(const ReachInstance&)) {
    if (!needed) {
      tr.log.push_back(std::string(to_string(k)) + ": skipped (nothing to eliminate)");
      return;
    }
    tr.stages.push_back(fn(tr.final_instance()));
    tr.log.push_back(std::string(to_string(k)) + ": " + summary(tr.final_instance()) +
                     "; bounds " + tr.stages.back().inflation.describe());
  };
  const int depth = static_cast<int>(to);
  stage(StageKind::ElimReceiverTests, classify_tests(inst.system).has_receiver_tests(),
        elim_receiver_tests);
  if (depth >= static_cast<int>(PipelineTarget::EG))
    stage(StageKind::ElimInitial, !tr.final_instance().is_empty_initial(), elim_initial);
  if (depth >= static_cast<int>(PipelineTarget::EGZ1)) {
    auto f = classify_tests(tr.final_instance().system);
    bool has_n = std::any_of(f.tests.begin(), f.tests.end(),
                             [](const TestInfo& t) { return t.cls == TestClass::NonEmpty; });
    stage(StageKind::ElimN1, has_n, elim_n1);
  }
  if (depth >= static_cast<int>(PipelineTarget::EEZ1))
    stage(StageKind::ElimFinal, !tr.final_instance().is_empty_final(), elim_final);
  if (depth >= static_cast<int>(PipelineTarget::EEZ1L)) {
    auto f = classify_tests(tr.final_instance().system);
    if (!f.within({TestClass::Zero}, {Agent::Sender}, {Channel::L}))
      throw InputError("instance keeps Z1^r tests (" + f.describe() +
                       "); it needs the Turing reduction decide_eereach_z1, not a many-one reduction");
  }
  if (to == PipelineTarget::Pep) {
    tr.pep = ucst_to_pep(tr.final_instance());
    tr.log.push_back("ucst_to_pep: |sigma|=" + std::to_string(tr.pep->sigma.size()) +
                     " |gamma|=" + std::to_string(tr.pep->gamma.size()) +
                     " R states=" + std::to_string(tr.pep->R.num_states()));
  }
  return tr;
}

// -------------------------------------------------------------------- PEP

PepInstance ucst_to_pep(const ReachInstance& inst, PepBuildOptions opts) {
  const PreSolutionContext ctx = PreSolutionContext::build(inst);
  PepInstance out;
  out.sigma = ctx.sigma;
  out.gamma = inst.system.alphabet;
  out.u_map = ctx.read_l;
  out.v_map = ctx.write_l;
  const auto k = static_cast<Symbol>(ctx.sigma.size());
  if (opts.intersect_er) {
    // State 0 idle; state 1+x expects a read of x on r right now.
    Nfa er(ctx.sigma);
    er.add_state(true, true);
    for (std::size_t x = 0; x < out.gamma.size(); ++x) er.add_state();
    for (Symbol a = 0; a < k; ++a) {
      if (!ctx.write_r[a].empty())
        er.add_edge(0, a, 1 + ctx.write_r[a][0]);
      else if (!ctx.read_r[a].empty())
        er.add_edge(1 + ctx.read_r[a][0], a, 0);
      else
        er.add_edge(0, a, 0);
    }
    out.R = intersect(er, ctx.paths).trimmed();
  } else {
    out.R = ctx.paths.trimmed();
  }
  Nfa tl(ctx.sigma);
  tl.add_state(true, false);
  tl.add_state(false, true);
  for (Symbol a = 0; a < k; ++a)
    if (ctx.in_tl[a]) tl.add_edge(0, a, 1);
  out.Rp = concat(tl, Nfa::universal(ctx.sigma)).trimmed();
  out.check();
  return out;
}

ReachInstance pep_to_ucst(const PepInstance& inst) {
  inst.check();
  const Dfa dr = determinize(inst.R);
  const auto live = dr.live_states();
  const Dfa dm = determinize(complement(inst.Rp));
  const auto k = static_cast<Symbol>(inst.sigma.size());

  Ucst s;
  s.alphabet = inst.gamma;
  // Sender node: (R state, committed copies of M', ready flag).
  using Key = std::tuple<int, std::vector<int>, bool>;
  std::map<Key, StateId> ids;
  std::deque<Key> todo;
  auto node = [&](int d, std::vector<int> set, bool ready) {
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
    Key key{d, set, ready};
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    std::string name = (ready ? "ready" : "g") + std::to_string(ids.size());
    StateId id = s.add_sender_state(s.fresh_state_name(Agent::Sender, name));
    ids.emplace(key, id);
    todo.push_back(key);
    return id;
  };
  const StateId p_in = node(dr.initial, {}, false);
  const StateId p_fi = s.add_sender_state(s.fresh_state_name(Agent::Sender, "p_fi"));
  while (!todo.empty()) {
    const auto [d, set, ready] = todo.front();
    todo.pop_front();
    const StateId me = ids.at({d, set, ready});
    if (!ready) {
      bool all = std::all_of(set.begin(), set.end(), [&](int m) { return dm.accepting[m]; });
      if (dr.accepting[d] && all) s.add_rule(Agent::Sender, make_nop("", me, p_fi));
      const StateId wait = node(d, set, true);
      s.add_rule(Agent::Sender, make_test("", me, Channel::L, test_zero(s.alphabet), wait));
      std::vector<int> committed = set;
      committed.push_back(dm.initial);
      const StateId commit = node(d, committed, true);
      s.add_rule(Agent::Sender, make_nop("", me, commit));
      continue;
    }
    for (Symbol a = 0; a < k; ++a) {
      const int d2 = dr.step(d, a);
      if (!live[d2]) continue;
      std::vector<int> next;
      for (int m : set) next.push_back(dm.step(m, a));
      const StateId target = node(d2, next, false);
      std::vector<std::pair<Channel, Symbol>> chain;
      for (Symbol x : inst.u_map[a]) chain.emplace_back(Channel::R, x);
      for (Symbol x : inst.v_map[a]) chain.emplace_back(Channel::L, x);
      StateId cur = me;
      for (std::size_t i = 0; i < chain.size(); ++i) {
        StateId nxt = target;
        if (i + 1 < chain.size())
          nxt = s.add_sender_state(s.fresh_state_name(
              Agent::Sender, s.sender_states[me] + "~" + inst.sigma.name(a) + std::to_string(i)));
        s.add_rule(Agent::Sender, make_write("", cur, chain[i].first, chain[i].second, nxt));
        cur = nxt;
      }
      if (chain.empty()) s.add_rule(Agent::Sender, make_nop("", me, target));
    }
  }
  const StateId q_loop = s.add_receiver_state(s.fresh_state_name(Agent::Receiver, "q_loop"));
  for (Symbol x = 0; x < static_cast<Symbol>(inst.gamma.size()); ++x) {
    const StateId mx = s.add_receiver_state(s.fresh_state_name(Agent::Receiver, "m_" + inst.gamma.name(x)));
    s.add_rule(Agent::Receiver, make_read("", q_loop, Channel::L, x, mx));
    s.add_rule(Agent::Receiver, make_read("", mx, Channel::R, x, q_loop));
  }
  return ReachInstance::empty_empty(std::move(s), p_in, q_loop, p_fi, q_loop);
}

// ------------------------------------------------------------------- Pre*

bool UpwardClosedSet::leq(const Configuration& a, const Configuration& b) {
  return a.p == b.p && a.q == b.q && a.u.empty() && b.u.empty() && subword(a.v, b.v);
}

bool UpwardClosedSet::contains(const Configuration& c) const {
  return std::any_of(minimal.begin(), minimal.end(), [&](const Configuration& m) { return leq(m, c); });
}

bool UpwardClosedSet::insert(const Configuration& c) {
  if (!c.u.empty()) throw InternalError("upward-closed sets live in Conf_{r=eps}");
  if (contains(c)) return false;
  minimal.erase(std::remove_if(minimal.begin(), minimal.end(),
                               [&](const Configuration& m) { return leq(c, m); }),
                minimal.end());
  minimal.push_back(c);
  return true;
}

void UpwardClosedSet::insert_all(const UpwardClosedSet& o) {
  for (auto& c : o.minimal) insert(c);
}

bool UpwardClosedSet::is_antichain() const {
  for (std::size_t i = 0; i < minimal.size(); ++i) {
    if (!minimal[i].u.empty()) return false;
    for (std::size_t j = 0; j < minimal.size(); ++j)
      if (i != j && leq(minimal[i], minimal[j])) return false;
  }
  return true;
}

bool UpwardClosedSet::same_as(const UpwardClosedSet& o) const { return sorted() == o.sorted(); }

std::vector<Configuration> UpwardClosedSet::sorted() const {
  auto out = minimal;
  std::sort(out.begin(), out.end());
  return out;
}

RegularTarget to_regular(const Ucst& s, const UpwardClosedSet& w) {
  RegularTarget out;
  for (auto& c : w.minimal) {
    Nfa up = upward_closure(Nfa::word(s.alphabet, c.v));
    auto key = std::make_pair(c.p, c.q);
    auto it = out.find(key);
    if (it == out.end())
      out.emplace(key, up);
    else
      it->second = union_of(it->second, up);
  }
  return out;
}

PreStarResult pre_star_z1l(const Ucst& s, const RegularTarget& w, const ReachOracle& oracle,
                           PreStarOptions opts) {
  auto frag = classify_tests(s);
  if (!frag.within({TestClass::Zero}, {Agent::Sender}, {Channel::L}))
    throw InputError("pre_star_z1l needs a UCST[Z1^l] system, got " + frag.describe());
  PreStarResult res;
  const auto np = static_cast<StateId>(s.sender_states.size());
  const auto nq = static_cast<StateId>(s.receiver_states.size());
  const Nfa eps = Nfa::epsilon(s.alphabet);
  const auto words = enumerate_words(Nfa::universal(s.alphabet), opts.max_candidate_len);

  auto reaches = [&](StateId p, StateId q, const Nfa& v) {
    bool inconclusive = false;
    for (auto& [pq, lang] : w) {
      ReachInstance inst;
      inst.system = s;
      inst.p_in = p, inst.q_in = q, inst.p_fi = pq.first, inst.q_fi = pq.second;
      inst.U = eps, inst.V = v, inst.Up = eps, inst.Vp = lang.with_alphabet(s.alphabet);
      ++res.oracle_calls;
      switch (oracle(inst)) {
        case OracleAnswer::Yes: return OracleAnswer::Yes;
        case OracleAnswer::Inconclusive: inconclusive = true; break;
        case OracleAnswer::No: break;
      }
    }
    return inconclusive ? OracleAnswer::Inconclusive : OracleAnswer::No;
  };

  for (;;) {
    // W' per state pair: complement of the current upward closure.
    std::map<std::pair<StateId, StateId>, Nfa> rest;
    std::vector<std::pair<StateId, StateId>> yes;
    for (StateId p = 0; p < np; ++p)
      for (StateId q = 0; q < nq; ++q) {
        Nfa covered = Nfa::empty(s.alphabet);
        for (auto& c : res.set.minimal)
          if (c.p == p && c.q == q) covered = union_of(covered, Nfa::word(s.alphabet, c.v));
        Nfa wp = complement(upward_closure(covered)).trimmed();
        if (wp.is_empty()) continue;
        auto ans = reaches(p, q, wp);
        if (ans == OracleAnswer::Inconclusive) res.inconclusive = true;
        if (ans == OracleAnswer::Yes) yes.emplace_back(p, q);
        rest.emplace(std::make_pair(p, q), std::move(wp));
      }
    if (yes.empty()) return res;
    bool grown = false;
    for (auto& v : words) {
      for (auto& pq : yes) {
        if (!rest.at(pq).accepts(v)) continue;
        auto ans = reaches(pq.first, pq.second, Nfa::word(s.alphabet, v));
        if (ans == OracleAnswer::Inconclusive) res.inconclusive = true;
        if (ans != OracleAnswer::Yes) continue;
        res.set.insert({pq.first, pq.second, {}, v});
        grown = true;
        break;
      }
      if (grown) break;
    }
    if (!grown) {
      // The disjunction found a witness beyond the candidate length.
      res.inconclusive = true;
      return res;
    }
  }
}

DecideResult decide_eereach_z1(const ReachInstance& inst, const ReachOracle& oracle,
                               PreStarOptions opts) {
  const Ucst& s = inst.system;
  auto frag = classify_tests(s);
  if (!frag.within({TestClass::Zero}, {Agent::Sender}, {Channel::R, Channel::L}))
    throw InputError("decide_eereach_z1 needs Sender Z tests only, got " + frag.describe());
  if (!inst.is_empty_initial() || !inst.is_empty_final())
    throw InputError("decide_eereach_z1 needs an E-E-Reach instance");

  Ucst sp = s;
  std::vector<Rule> zr;
  sp.sender_rules.clear();
  for (auto& r : s.sender_rules) (r.tests(Channel::R) ? zr : sp.sender_rules).push_back(r);

  DecideResult res;
  UpwardClosedSet fin;
  fin.insert(inst.final_empty());
  auto step = [&](const UpwardClosedSet& target) {
    PreStarResult pr = pre_star_z1l(sp, to_regular(sp, target), oracle, opts);
    res.oracle_calls += pr.oracle_calls;
    res.inconclusive = res.inconclusive || pr.inconclusive;
    return pr.set;
  };
  res.t = step(fin);
  for (;;) {
    UpwardClosedSet tp;
    for (auto& r : zr)
      for (auto& c : res.t.minimal)
        if (c.p == r.target) tp.insert({r.source, c.q, {}, c.v});
    if (tp.minimal.empty()) break;
    UpwardClosedSet next = res.t;
    next.insert_all(step(tp));
    if (next.same_as(res.t)) break;
    res.t = std::move(next);
    ++res.stabilization_index;
  }
  res.reachable = res.t.contains(inst.initial_empty());
  return res;
}

ReachOracle make_pep_oracle(std::size_t max_len) {
  return [max_len](const ReachInstance& inst) {
    ReachInstance cur = inst;
    if (!cur.is_empty_initial()) cur = elim_initial(cur).target;
    if (!cur.is_empty_final()) cur = elim_final(cur).target;
    return bounded_solve(ucst_to_pep(cur), max_len) ? OracleAnswer::Yes : OracleAnswer::No;
  };
}

}  // namespace ucst
