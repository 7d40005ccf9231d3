#include "ucst/pep.hpp"

#include <functional>

namespace ucst {

Word PepInstance::u(const Word& w) const {
  Word out;
  for (Symbol a : w) out.insert(out.end(), u_map.at(a).begin(), u_map.at(a).end());
  return out;
}

Word PepInstance::v(const Word& w) const {
  Word out;
  for (Symbol a : w) out.insert(out.end(), v_map.at(a).begin(), v_map.at(a).end());
  return out;
}

void PepInstance::check() const {
  if (u_map.size() != sigma.size() || v_map.size() != sigma.size())
    throw InputError("PEP morphisms must be total on sigma");
  for (auto* m : {&u_map, &v_map})
    for (auto& w : *m)
      for (Symbol x : w)
        if (x < 0 || static_cast<std::size_t>(x) >= gamma.size())
          throw InputError("PEP morphism image outside gamma");
  if (R.alphabet() != sigma || Rp.alphabet() != sigma)
    throw InputError("PEP constraint alphabets must equal sigma");
}

namespace {

// Suffix condition, given a complete DFA for the reversal of R′.
bool suffixes_embed(const PepInstance& inst, const Dfa& rev_rp, const Word& w) {
  int state = rev_rp.initial;
  // The empty suffix always embeds; walk suffixes from the shortest.
  Word us, vs;  // u and v of the current suffix, built right to left
  for (std::size_t i = w.size(); i-- > 0;) {
    state = rev_rp.step(state, w[i]);
    const Word& ua = inst.u_map[w[i]];
    const Word& va = inst.v_map[w[i]];
    us.insert(us.begin(), ua.begin(), ua.end());
    vs.insert(vs.begin(), va.begin(), va.end());
    if (rev_rp.accepting[state] && !subword(us, vs)) return false;
  }
  return true;
}

bool embeds(const PepInstance& inst, const Word& w) { return subword(inst.u(w), inst.v(w)); }

}  // namespace

bool is_solution(const PepInstance& inst, const Word& w) {
  for (Symbol a : w)
    if (a < 0 || static_cast<std::size_t>(a) >= inst.sigma.size()) return false;
  if (!inst.R.accepts(w) || !embeds(inst, w)) return false;
  return suffixes_embed(inst, determinize(inst.Rp.reversed()), w);
}

std::optional<Word> bounded_solve(const PepInstance& inst, std::size_t max_len) {
  const Dfa d = determinize(inst.R);
  const Dfa rev_rp = determinize(inst.Rp.reversed());
  const int n = d.num_states();
  const auto k = static_cast<Symbol>(d.alphabet.size());
  std::vector<std::vector<char>> can(max_len + 1, std::vector<char>(n, 0));
  for (int s = 0; s < n; ++s) can[0][s] = d.accepting[s];
  for (std::size_t r = 1; r <= max_len; ++r)
    for (int s = 0; s < n; ++s)
      for (Symbol x = 0; x < k && !can[r][s]; ++x) can[r][s] = can[r - 1][d.step(s, x)];

  Word cur;
  std::function<bool(int, std::size_t)> dfs = [&](int s, std::size_t rem) {
    if (rem == 0) return embeds(inst, cur) && suffixes_embed(inst, rev_rp, cur);
    for (Symbol x = 0; x < k; ++x) {
      int t = d.step(s, x);
      if (!can[rem - 1][t]) continue;
      cur.push_back(x);
      if (dfs(t, rem - 1)) return true;
      cur.pop_back();
    }
    return false;
  };
  for (std::size_t len = 0; len <= max_len; ++len) {
    cur.clear();
    if (can[len][d.initial] && dfs(d.initial, len)) return cur;
  }
  return std::nullopt;
}

// ----------------------------------------------------------- pre-solutions

const char* to_string(PreCondition c) {
  switch (c) {
    case PreCondition::None: return "none";
    case PreCondition::C1: return "c1";
    case PreCondition::C2: return "c2";
    case PreCondition::C3: return "c3";
    case PreCondition::C4: return "c4";
    case PreCondition::C5: return "c5";
  }
  return "?";
}

namespace {

Nfa path_automaton(const Ucst& s, Agent a, const Alphabet& sigma, Symbol offset, StateId from,
                   StateId to) {
  Nfa n(sigma);
  const auto& states = s.states(a);
  for (StateId q = 0; q < static_cast<StateId>(states.size()); ++q) n.add_state(q == from, q == to);
  const auto& rules = s.rules(a);
  for (std::size_t i = 0; i < rules.size(); ++i)
    n.add_edge(rules[i].source, offset + static_cast<Symbol>(i), rules[i].target);
  return n;
}

}  // namespace

PreSolutionContext PreSolutionContext::build(const ReachInstance& inst) {
  const Ucst& s = inst.system;
  auto frag = classify_tests(s);
  if (!frag.within({TestClass::Zero}, {Agent::Sender}, {Channel::L}))
    throw InputError("pre-solutions need a UCST[Z1^l] system, got " + frag.describe());
  if (!inst.is_empty_initial() || !inst.is_empty_final())
    throw InputError("pre-solutions need an E-E-Reach instance");
  PreSolutionContext ctx;
  ctx.instance = inst;
  std::vector<std::string> names;
  for (auto& r : s.sender_rules) names.push_back(r.name);
  for (auto& r : s.receiver_rules) names.push_back(r.name);
  ctx.sigma = Alphabet(names);
  for (Agent a : {Agent::Sender, Agent::Receiver}) {
    for (auto& r : s.rules(a)) {
      auto one = [&](bool cond) { return cond ? Word{r.msg()} : Word{}; };
      ctx.read_r.push_back(one(r.reads(Channel::R)));
      ctx.write_r.push_back(one(r.writes(Channel::R)));
      ctx.read_l.push_back(one(r.reads(Channel::L)));
      ctx.write_l.push_back(one(r.writes(Channel::L)));
      ctx.is_sender.push_back(a == Agent::Sender);
      ctx.in_tl.push_back(a == Agent::Sender && r.tests(Channel::L));
    }
  }
  const auto n1 = static_cast<Symbol>(s.sender_rules.size());
  ctx.paths = shuffle(path_automaton(s, Agent::Sender, ctx.sigma, 0, inst.p_in, inst.p_fi),
                      path_automaton(s, Agent::Receiver, ctx.sigma, n1, inst.q_in, inst.q_fi));
  return ctx;
}

Symbol PreSolutionContext::letter(RuleRef r) const {
  return r.agent == Agent::Sender
             ? r.index
             : static_cast<Symbol>(instance.system.sender_rules.size()) + r.index;
}

RuleRef PreSolutionContext::rule_of(Symbol a) const {
  const auto n1 = static_cast<Symbol>(instance.system.sender_rules.size());
  return a < n1 ? RuleRef{Agent::Sender, a} : RuleRef{Agent::Receiver, a - n1};
}

namespace {

Word image(const std::vector<Word>& proj, const Word& w, std::size_t from = 0) {
  Word out;
  for (std::size_t i = from; i < w.size(); ++i)
    out.insert(out.end(), proj[w[i]].begin(), proj[w[i]].end());
  return out;
}

bool check_c3(const PreSolutionContext& ctx, const Word& w) {
  Word written;
  std::size_t read = 0;
  for (Symbol a : w) {
    for (Symbol x : ctx.write_r[a]) written.push_back(x);
    for (Symbol x : ctx.read_r[a]) {
      if (read >= written.size() || written[read] != x) return false;
      ++read;
    }
  }
  return true;
}

bool check_c5(const PreSolutionContext& ctx, const Word& w) {
  for (std::size_t i = 0; i < w.size(); ++i)
    if (ctx.in_tl[w[i]] && !subword(image(ctx.read_l, w, i + 1), image(ctx.write_l, w, i + 1)))
      return false;
  return true;
}

}  // namespace

PreSolutionCheck is_pre_solution(const PreSolutionContext& ctx, const Word& w) {
  auto fail = [](PreCondition c) { return PreSolutionCheck{false, c}; };
  for (Symbol a : w)
    if (a < 0 || static_cast<std::size_t>(a) >= ctx.sigma.size()) return fail(PreCondition::C1);
  if (!ctx.paths.accepts(w)) return fail(PreCondition::C1);
  if (image(ctx.read_r, w) != image(ctx.write_r, w)) return fail(PreCondition::C2);
  if (!check_c3(ctx, w)) return fail(PreCondition::C3);
  if (!subword(image(ctx.read_l, w), image(ctx.write_l, w))) return fail(PreCondition::C4);
  if (!check_c5(ctx, w)) return fail(PreCondition::C5);
  return {};
}

namespace {

// Leftmost-first adjacent switches until none applies.  `first_sender` picks
// the direction: true swaps (Sender, Receiver) pairs.
Word stabilize(const PreSolutionContext& ctx, Word w, bool first_sender,
               bool (*recheck)(const PreSolutionContext&, const Word&)) {
  if (!is_pre_solution(ctx, w)) throw InputError("stabilization input is not a pre-solution");
  const std::size_t limit = w.size() * w.size() + 1;
  for (std::size_t switches = 0;; ++switches) {
    if (switches > limit) throw InternalError("stabilization exceeded |σ|² switches");
    bool moved = false;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
      if (ctx.is_sender[w[i]] != first_sender || ctx.is_sender[w[i + 1]] == first_sender) continue;
      std::swap(w[i], w[i + 1]);
      if (recheck(ctx, w)) {
        moved = true;
        break;
      }
      std::swap(w[i], w[i + 1]);
    }
    if (!moved) return w;
  }
}

}  // namespace

Word advance_stabilize(const PreSolutionContext& ctx, const Word& w) {
  return stabilize(ctx, w, true, check_c3);
}

Word postpone_stabilize(const PreSolutionContext& ctx, const Word& w) {
  return stabilize(ctx, w, false, check_c5);
}

Run run_from_postpone_stable(const PreSolutionContext& ctx, const Word& w) {
  const Ucst& s = ctx.instance.system;
  Run run;
  run.start = ctx.instance.initial_empty();
  Configuration cur = run.start;
  auto lose_head = [&] {
    cur.v.erase(cur.v.begin());
    run.steps.push_back({StepLabel::loss(), cur});
  };
  for (std::size_t i = 0; i < w.size(); ++i) {
    const RuleRef ref = ctx.rule_of(w[i]);
    const Rule& r = s.rule(ref);
    if (r.reads(Channel::L)) {
      while (!cur.v.empty() && cur.v.front() != r.msg()) lose_head();
    } else if (r.tests(Channel::L)) {
      while (!cur.v.empty()) lose_head();
    }
    auto next = fire(s, ref, cur);
    if (!next)
      throw InternalError("replay of postpone-stable word failed at letter " + std::to_string(i) +
                          " (" + r.name + ")");
    cur = *next;
    run.steps.push_back({StepLabel::of(ref), cur});
  }
  while (!cur.v.empty()) lose_head();
  if (cur != ctx.instance.final_empty())
    throw InternalError("replay of postpone-stable word does not end in the final configuration");
  return run;
}

Word run_to_presolution(const PreSolutionContext& ctx, const Run& run) {
  const Ucst& s = ctx.instance.system;
  if (!validate_run(s, run, Mode::Lossy)) throw InputError("run does not validate");
  if (run.start != ctx.instance.initial_empty() || run.end() != ctx.instance.final_empty())
    throw InputError("run does not go from the initial to the final configuration");
  Word w;
  for (auto& st : run.steps)
    if (!st.label.is_loss()) w.push_back(ctx.letter(st.label.rule));
  return w;
}

}  // namespace ucst
