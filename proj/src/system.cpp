#include "ucst/system.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace ucst {

const char* to_string(Channel c) { return c == Channel::R ? "r" : "l"; }
const char* to_string(Agent a) { return a == Agent::Sender ? "s" : "r"; }
const char* to_string(Mode m) {
  switch (m) {
    case Mode::Reliable: return "reliable";
    case Mode::Lossy: return "lossy";
    case Mode::WriteLossy: return "write-lossy";
  }
  return "?";
}

Symbol Rule::msg() const {
  if (auto* w = std::get_if<WriteAction>(&action)) return w->msg;
  if (auto* r = std::get_if<ReadAction>(&action)) return r->msg;
  return kEpsilon;
}

// -------------------------------------------------------------------- Ucst

StateId Ucst::add_sender_state(const std::string& name) {
  if (find_sender_state(name) || find_receiver_state(name))
    throw InputError("duplicate state '" + name + "'");
  sender_states.push_back(name);
  return static_cast<StateId>(sender_states.size() - 1);
}

StateId Ucst::add_receiver_state(const std::string& name) {
  if (find_sender_state(name) || find_receiver_state(name))
    throw InputError("duplicate state '" + name + "'");
  receiver_states.push_back(name);
  return static_cast<StateId>(receiver_states.size() - 1);
}

namespace {
std::optional<StateId> index_of(const std::vector<std::string>& v, const std::string& n) {
  auto it = std::find(v.begin(), v.end(), n);
  if (it == v.end()) return std::nullopt;
  return static_cast<StateId>(it - v.begin());
}
}  // namespace

std::optional<StateId> Ucst::find_sender_state(const std::string& name) const {
  return index_of(sender_states, name);
}

std::optional<StateId> Ucst::find_receiver_state(const std::string& name) const {
  return index_of(receiver_states, name);
}

RuleRef Ucst::add_rule(Agent agent, Rule rule) {
  auto& v = agent == Agent::Sender ? sender_rules : receiver_rules;
  if (rule.name.empty())
    rule.name = fresh_rule_name(agent == Agent::Sender ? "s" + std::to_string(v.size())
                                                       : "r" + std::to_string(v.size()));
  v.push_back(std::move(rule));
  return {agent, static_cast<std::int32_t>(v.size() - 1)};
}

std::string Ucst::fresh_state_name(Agent, const std::string& base) const {
  std::string n = base;
  while (find_sender_state(n) || find_receiver_state(n)) n += "'";
  return n;
}

std::string Ucst::fresh_rule_name(const std::string& base) const {
  auto used = [&](const std::string& n) {
    for (auto* rs : {&sender_rules, &receiver_rules})
      for (auto& r : *rs)
        if (r.name == n) return true;
    return false;
  };
  std::string n = base;
  while (used(n)) n += "'";
  return n;
}

void Ucst::check() const {
  std::unordered_set<std::string> names;
  for (auto* v : {&sender_states, &receiver_states})
    for (auto& n : *v)
      if (!names.insert(n).second) throw InputError("duplicate state '" + n + "'");
  std::unordered_set<std::string> rule_names;
  for (Agent a : {Agent::Sender, Agent::Receiver}) {
    const auto nstates = static_cast<StateId>(states(a).size());
    for (auto& r : rules(a)) {
      if (!valid_symbol_name(r.name) || !rule_names.insert(r.name).second)
        throw InputError("invalid or duplicate rule name '" + r.name + "'");
      if (r.source < 0 || r.source >= nstates || r.target < 0 || r.target >= nstates)
        throw InputError("rule '" + r.name + "' uses a state of the wrong agent");
      if ((r.is_write() || r.is_read()) &&
          (r.msg() < 0 || static_cast<std::size_t>(r.msg()) >= alphabet.size()))
        throw InputError("rule '" + r.name + "' uses a message outside the alphabet");
      if ((a == Agent::Sender && r.is_read()) || (a == Agent::Receiver && r.is_write()))
        throw InputError("rule '" + r.name + "': Sender only writes, Receiver only reads");
      if (r.is_test() && r.test_lang().alphabet() != alphabet)
        throw InputError("rule '" + r.name + "' tests a language over another alphabet");
    }
  }
}

// ------------------------------------------------------------------- tests

Nfa test_zero(const Alphabet& m) { return Nfa::epsilon(m); }
Nfa test_nonempty(const Alphabet& m) { return plus(Nfa::any_letter(m)); }
Nfa test_even(const Alphabet& m) {
  return star(concat(Nfa::any_letter(m), Nfa::any_letter(m)));
}
Nfa test_odd(const Alphabet& m) { return concat(Nfa::any_letter(m), test_even(m)); }
Nfa test_head(const Alphabet& m, Symbol a) {
  return concat(Nfa::word(m, {a}), Nfa::universal(m));
}

TestClass classify_language(const Nfa& lang, Symbol* head) {
  const Alphabet& m = lang.alphabet();
  if (language_equal(lang, test_zero(m)).equal) return TestClass::Zero;
  if (language_equal(lang, test_nonempty(m)).equal) return TestClass::NonEmpty;
  if (language_equal(lang, test_even(m)).equal) return TestClass::Even;
  if (language_equal(lang, test_odd(m)).equal) return TestClass::Odd;
  for (Symbol a = 0; a < static_cast<Symbol>(m.size()); ++a) {
    if (language_equal(lang, test_head(m, a)).equal) {
      if (head) *head = a;
      return TestClass::Head;
    }
  }
  return TestClass::Other;
}

Rule make_nop(std::string name, StateId from, StateId to) {
  return {std::move(name), from, Channel::R, NopAction{}, to};
}
Rule make_write(std::string name, StateId from, Channel c, Symbol x, StateId to) {
  return {std::move(name), from, c, WriteAction{x}, to};
}
Rule make_read(std::string name, StateId from, Channel c, Symbol x, StateId to) {
  return {std::move(name), from, c, ReadAction{x}, to};
}
Rule make_test(std::string name, StateId from, Channel c, Nfa lang, StateId to) {
  TestAction t{std::move(lang)};
  t.cls = classify_language(t.lang, &t.head);
  return {std::move(name), from, c, std::move(t), to};
}

// ----------------------------------------------------------- configuration

bool Configuration::operator<(const Configuration& o) const {
  if (p != o.p) return p < o.p;
  if (q != o.q) return q < o.q;
  if (u.size() != o.u.size()) return u.size() < o.u.size();
  if (u != o.u) return u < o.u;
  if (v.size() != o.v.size()) return v.size() < o.v.size();
  return v < o.v;
}

std::size_t ConfigurationHash::operator()(const Configuration& c) const {
  std::size_t h = static_cast<std::size_t>(c.p) * 1000003u ^ static_cast<std::size_t>(c.q);
  auto mix = [&h](std::size_t x) { h ^= x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
  for (Symbol x : c.u) mix(static_cast<std::size_t>(x) + 1);
  mix(0xabcdefu);
  for (Symbol x : c.v) mix(static_cast<std::size_t>(x) + 7);
  return h;
}

std::string format_configuration(const Ucst& s, const Configuration& c) {
  return "(" + s.sender_states.at(c.p) + ", " + s.receiver_states.at(c.q) + ", " +
         s.alphabet.format(c.u) + ", " + s.alphabet.format(c.v) + ")";
}

// ---------------------------------------------------------------- instance

ReachInstance ReachInstance::empty_empty(Ucst s, StateId p_in, StateId q_in, StateId p_fi,
                                         StateId q_fi) {
  ReachInstance inst;
  Nfa e = Nfa::epsilon(s.alphabet);
  inst.system = std::move(s);
  inst.p_in = p_in;
  inst.q_in = q_in;
  inst.p_fi = p_fi;
  inst.q_fi = q_fi;
  inst.U = inst.V = inst.Up = inst.Vp = e;
  return inst;
}

namespace {
bool is_eps_lang(const Nfa& a) {
  return language_equal(a, Nfa::epsilon(a.alphabet())).equal;
}
}  // namespace

bool ReachInstance::is_empty_initial() const { return is_eps_lang(U) && is_eps_lang(V); }
bool ReachInstance::is_empty_final() const { return is_eps_lang(Up) && is_eps_lang(Vp); }

void ReachInstance::check() const {
  system.check();
  auto ns = static_cast<StateId>(system.sender_states.size());
  auto nr = static_cast<StateId>(system.receiver_states.size());
  if (p_in < 0 || p_in >= ns || p_fi < 0 || p_fi >= ns) throw InputError("bad sender state in instance");
  if (q_in < 0 || q_in >= nr || q_fi < 0 || q_fi >= nr) throw InputError("bad receiver state in instance");
  for (const Nfa* c : {&U, &V, &Up, &Vp})
    if (c->alphabet() != system.alphabet) throw InputError("constraint alphabet differs from system alphabet");
}

// --------------------------------------------------------------- semantics

std::string format_label(const Ucst& s, const StepLabel& l) {
  if (l.is_loss()) return "los";
  std::string n = s.rule(l.rule).name;
  return l.dropped ? n + "~" : n;
}

std::string format_run(const Ucst& s, const Run& run) {
  std::ostringstream out;
  out << format_configuration(s, run.start) << "\n";
  for (auto& st : run.steps)
    out << "  --" << format_label(s, st.label) << "--> " << format_configuration(s, st.result) << "\n";
  return out.str();
}

std::optional<Configuration> fire(const Ucst& s, RuleRef ref, const Configuration& c) {
  const Rule& r = s.rule(ref);
  const bool sender = ref.agent == Agent::Sender;
  if ((sender ? c.p : c.q) != r.source) return std::nullopt;
  Configuration d = c;
  (sender ? d.p : d.q) = r.target;
  Word& ch = r.channel == Channel::R ? d.u : d.v;
  switch (r.action.index()) {
    case 0:  // nop
      break;
    case 1:
      if (!r.test_lang().accepts(ch)) return std::nullopt;
      break;
    case 2:
      ch.push_back(r.msg());
      break;
    case 3:
      if (ch.empty() || ch.front() != r.msg()) return std::nullopt;
      ch.erase(ch.begin());
      break;
  }
  return d;
}

namespace {
void check_config(const Ucst& s, const Configuration& c) {
  if (c.p < 0 || static_cast<std::size_t>(c.p) >= s.sender_states.size() || c.q < 0 ||
      static_cast<std::size_t>(c.q) >= s.receiver_states.size())
    throw InputError("configuration state outside the system");
}
}  // namespace

std::vector<Step> successors(const Ucst& s, const Configuration& c, Mode mode) {
  check_config(s, c);
  std::vector<Step> out;
  for (Agent a : {Agent::Sender, Agent::Receiver}) {
    const auto& rules = s.rules(a);
    const StateId cur = a == Agent::Sender ? c.p : c.q;
    for (std::int32_t i = 0; i < static_cast<std::int32_t>(rules.size()); ++i) {
      if (rules[i].source != cur) continue;
      RuleRef ref{a, i};
      auto d = fire(s, ref, c);
      if (!d) continue;
      out.push_back({StepLabel::of(ref), *d});
      if (mode == Mode::WriteLossy && rules[i].writes(Channel::L)) {
        Configuration e = c;
        (a == Agent::Sender ? e.p : e.q) = rules[i].target;
        out.push_back({StepLabel::of(ref, true), std::move(e)});
      }
    }
  }
  if (mode == Mode::Lossy) {
    for (std::size_t k = 0; k < c.v.size(); ++k) {
      if (k > 0 && c.v[k] == c.v[k - 1]) continue;  // same result as position k-1
      Configuration d = c;
      d.v.erase(d.v.begin() + static_cast<std::ptrdiff_t>(k));
      out.push_back({StepLabel::loss(), std::move(d)});
    }
  }
  return out;
}

// ---------------------------------------------------------- classification

namespace {
char class_letter(TestClass c) {
  switch (c) {
    case TestClass::Zero: return 'Z';
    case TestClass::NonEmpty: return 'N';
    case TestClass::Even:
    case TestClass::Odd: return 'P';
    case TestClass::Head: return 'H';
    case TestClass::Other: return '?';
  }
  return '?';
}
}  // namespace

FragmentReport classify_tests(const Ucst& s) {
  FragmentReport rep;
  for (Agent a : {Agent::Sender, Agent::Receiver}) {
    const auto& rules = s.rules(a);
    for (std::int32_t i = 0; i < static_cast<std::int32_t>(rules.size()); ++i) {
      const Rule& r = rules[i];
      if (!r.is_test()) continue;
      const auto& t = std::get<TestAction>(r.action);
      rep.tests.push_back({{a, i}, a, r.channel, t.cls, t.head});
      // Receiver head tests are never consumed by a reduction: reported as other.
      if (t.cls == TestClass::Other || (t.cls == TestClass::Head && a == Agent::Receiver)) {
        rep.fragment.insert("other");
      } else {
        std::string atom(1, class_letter(t.cls));
        atom += a == Agent::Sender ? "1^" : "2^";
        atom += to_string(r.channel);
        rep.fragment.insert(atom);
      }
    }
  }
  return rep;
}

bool FragmentReport::within(std::initializer_list<TestClass> classes,
                            std::initializer_list<Agent> agents,
                            std::initializer_list<Channel> channels) const {
  auto in = [](auto list, auto x) { return std::find(list.begin(), list.end(), x) != list.end(); };
  for (auto& t : tests)
    if (!in(classes, t.cls) || !in(agents, t.agent) || !in(channels, t.channel)) return false;
  return true;
}

bool FragmentReport::has_receiver_tests() const {
  return std::any_of(tests.begin(), tests.end(),
                     [](const TestInfo& t) { return t.agent == Agent::Receiver; });
}

std::string FragmentReport::describe() const {
  if (fragment.empty()) return "{}";
  std::string out = "{";
  bool first = true;
  for (auto& a : fragment) {
    if (!first) out += ",";
    out += a;
    first = false;
  }
  return out + "}";
}

// ------------------------------------------------------------- run checks

RunCheck validate_run(const Ucst& s, const Run& run, Mode mode) {
  auto fail = [](std::size_t i, std::string why) { return RunCheck{false, i, std::move(why)}; };
  try {
    check_config(s, run.start);
  } catch (const InputError& e) {
    return fail(0, e.what());
  }
  for (std::size_t i = 0; i < run.steps.size(); ++i) {
    const Configuration& c = run.at(i);
    const Step& st = run.steps[i];
    if (st.label.is_loss()) {
      if (mode != Mode::Lossy) return fail(i, "loss step outside lossy mode");
      const Configuration& d = st.result;
      if (d.p != c.p || d.q != c.q || d.u != c.u || !subword_one(d.v, c.v))
        return fail(i, "loss step does not delete one symbol of l");
      continue;
    }
    const RuleRef ref = st.label.rule;
    if (ref.index < 0 || static_cast<std::size_t>(ref.index) >= s.rules(ref.agent).size())
      return fail(i, "unknown rule");
    const Rule& r = s.rule(ref);
    std::optional<Configuration> d;
    if (st.label.dropped) {
      if (mode != Mode::WriteLossy || !r.writes(Channel::L))
        return fail(i, "dropped write outside write-lossy mode");
      if ((ref.agent == Agent::Sender ? c.p : c.q) == r.source) {
        d = c;
        (ref.agent == Agent::Sender ? d->p : d->q) = r.target;
      }
    } else {
      d = fire(s, ref, c);
    }
    if (!d) return fail(i, "rule '" + r.name + "' not enabled");
    if (*d != st.result) return fail(i, "rule '" + r.name + "' yields a different configuration");
  }
  return {};
}

namespace {
bool head_loss_at(const Run& run, std::size_t i) {
  const Word& before = run.at(i).v;
  const Word& after = run.steps[i].result.v;
  return !before.empty() && std::equal(before.begin() + 1, before.end(), after.begin(), after.end());
}

bool reliable_after(const Run& run, std::size_t i) {
  for (std::size_t j = i + 1; j < run.steps.size(); ++j)
    if (!run.steps[j].label.is_loss()) return true;
  return false;
}
}  // namespace

bool is_head_lossy(const Run& run) {
  for (std::size_t i = 0; i < run.steps.size(); ++i)
    if (run.steps[i].label.is_loss() && !head_loss_at(run, i) && reliable_after(run, i)) return false;
  return true;
}

const char* to_string(CommuteCase c) {
  switch (c) {
    case CommuteCase::None: return "none";
    case CommuteCase::NoContact: return "no-contact";
    case CommuteCase::PostponableLoss: return "postponable-loss";
    case CommuteCase::AdvanceableSender: return "advanceable-sender";
    case CommuteCase::AdvanceableLoss: return "advanceable-loss";
  }
  return "?";
}

namespace {

// Channel a step touches; nullopt for Nop.  A loss touches l.
std::optional<Channel> touched(const Ucst& s, const StepLabel& l) {
  if (l.is_loss()) return Channel::L;
  const Rule& r = s.rule(l.rule);
  if (r.is_nop()) return std::nullopt;
  return r.channel;
}

// Tests whose truth survives the swap: Z and N only.
bool zn_or_not_test(const Ucst& s, const StepLabel& l) {
  if (l.is_loss()) return true;
  const Rule& r = s.rule(l.rule);
  return !r.is_test() || r.test_class() == TestClass::Zero || r.test_class() == TestClass::NonEmpty;
}

}  // namespace

CommuteCase commute_case(const Ucst& s, const Run& run, std::size_t i) {
  if (i + 1 >= run.steps.size()) return CommuteCase::None;
  const StepLabel& d1 = run.steps[i].label;
  const StepLabel& d2 = run.steps[i + 1].label;
  if (d1.dropped || d2.dropped) return CommuteCase::None;
  const auto c1 = touched(s, d1), c2 = touched(s, d2);

  // 1. No contact.
  if (d1.is_loss() && !d2.is_loss()) {
    if (c2 != Channel::L) return CommuteCase::NoContact;
  } else if (!d1.is_loss() && d2.is_loss()) {
    if (c1 != Channel::L) return CommuteCase::NoContact;
  } else if (!d1.is_loss() && !d2.is_loss()) {
    if (d1.rule.agent != d2.rule.agent && (!c1 || !c2 || *c1 != *c2)) return CommuteCase::NoContact;
  }

  // 2. Postponable loss.
  if (d1.is_loss() && !head_loss_at(run, i) && zn_or_not_test(s, d2)) {
    // A Z test on l cannot follow a non-head loss (l still holds its head).
    return CommuteCase::PostponableLoss;
  }

  // 3. Advanceable Sender.
  if ((d1.is_loss() || d1.rule.agent == Agent::Receiver) && !d2.is_loss() &&
      d2.rule.agent == Agent::Sender && zn_or_not_test(s, d1) && zn_or_not_test(s, d2)) {
    const Rule& r2 = s.rule(d2.rule);
    bool z_test = r2.is_test_of(TestClass::Zero);
    // A Receiver Z test on c does not survive a Sender write on c moved before it.
    bool blocked = !d1.is_loss() && s.rule(d1.rule).is_test_of(TestClass::Zero) && r2.is_write() &&
                   s.rule(d1.rule).channel == r2.channel;
    if (!z_test && !blocked) return CommuteCase::AdvanceableSender;
  }

  // 4. Advanceable loss.
  if (d2.is_loss()) {
    bool excluded = false;
    if (!d1.is_loss()) {
      const Rule& r1 = s.rule(d1.rule);
      if (r1.tests(Channel::L) && r1.test_class() != TestClass::Zero) excluded = true;
      if (d1.rule.agent == Agent::Sender && r1.writes(Channel::L)) excluded = true;
    }
    if (!excluded) return CommuteCase::AdvanceableLoss;
  }
  return CommuteCase::None;
}

CommuteResult commute(const Ucst& s, const Run& run, std::size_t i) {
  CommuteResult res;
  res.applied = commute_case(s, run, i);
  if (res.applied == CommuteCase::None) return res;
  const Configuration& c = run.at(i);
  const Configuration& e = run.at(i + 2);
  const StepLabel& d1 = run.steps[i].label;
  const StepLabel& d2 = run.steps[i + 1].label;
  for (auto& mid : successors(s, c, Mode::Lossy)) {
    if (mid.label != d2) continue;
    for (auto& fin : successors(s, mid.result, Mode::Lossy)) {
      if (fin.label != d1 || fin.result != e) continue;
      Run out = run;
      out.steps[i] = {d2, mid.result};
      out.steps[i + 1] = {d1, e};
      res.run = std::move(out);
      return res;
    }
  }
  throw InternalError(std::string("commutation case ") + to_string(res.applied) +
                      " holds but no intermediate configuration exists at step " + std::to_string(i));
}

Run to_head_lossy(const Ucst& s, const Run& input) {
  Run run = input;
  auto offending = [&](std::size_t k) {
    return run.steps[k].label.is_loss() && !head_loss_at(run, k) && reliable_after(run, k);
  };
  for (;;) {
    std::optional<std::size_t> last;
    for (std::size_t k = 0; k < run.steps.size(); ++k)
      if (offending(k)) last = k;
    if (!last) return run;
    // Bubble the rightmost offending loss until it is a head loss or trailing.
    for (std::size_t k = *last; offending(k); ++k) {
      auto r = commute(s, run, k);
      if (!r.run) throw InternalError("postponable loss did not commute");
      run = std::move(*r.run);
    }
  }
}

}  // namespace ucst
