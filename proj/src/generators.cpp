#include "ucst/generators.hpp"

#include <deque>
#include <map>
#include <sstream>

namespace ucst {

void QueueAutomaton::check() const {
  const auto n = static_cast<StateId>(states.size());
  if (initial < 0 || initial >= n || final < 0 || final >= n)
    throw InputError("queue automaton: initial/final state out of range");
  for (auto& r : rules) {
    if (r.source < 0 || r.source >= n || r.target < 0 || r.target >= n)
      throw InputError("queue automaton: rule state out of range");
    if (r.msg < 0 || static_cast<std::size_t>(r.msg) >= alphabet.size())
      throw InputError("queue automaton: message outside the alphabet");
  }
}

QueueAutomaton QueueAutomaton::program(const Alphabet& m, const std::string& ops) {
  QueueAutomaton qa;
  qa.alphabet = m;
  qa.states.push_back("s0");
  std::istringstream in(ops);
  for (std::string op; in >> op;) {
    if (op.size() < 2 || (op[0] != '!' && op[0] != '?'))
      throw InputError("queue program: expected '!a' or '?a', got '" + op + "'");
    const auto id = static_cast<StateId>(qa.states.size());
    qa.states.push_back("s" + std::to_string(id));
    qa.rules.push_back({id - 1, op[0] == '!', m.at(op.substr(1)), id});
  }
  qa.final = static_cast<StateId>(qa.states.size() - 1);
  return qa;
}

namespace {

// Explores (state, queue) with queue length <= cap; calls visit on each.
template <class Visit>
void qa_explore(const QueueAutomaton& qa, std::size_t cap, Visit visit) {
  qa.check();
  std::set<std::pair<StateId, Word>> seen;
  std::deque<std::pair<StateId, Word>> todo;
  seen.insert({qa.initial, {}});
  todo.push_back({qa.initial, {}});
  while (!todo.empty()) {
    auto [p, w] = todo.front();
    todo.pop_front();
    visit(p, w);
    for (auto& r : qa.rules) {
      if (r.source != p) continue;
      Word nw = w;
      if (r.write) {
        nw.push_back(r.msg);
      } else {
        if (w.empty() || w.front() != r.msg) continue;
        nw.erase(nw.begin());
      }
      if (nw.size() > cap) {
        visit(-1, nw);
        continue;
      }
      if (seen.insert({r.target, nw}).second) todo.push_back({r.target, nw});
    }
  }
}

void proxy_receiver(Ucst& s, StateId& q_proxy) {
  q_proxy = s.add_receiver_state(s.fresh_state_name(Agent::Receiver, "q_proxy"));
  for (Symbol x = 0; x < static_cast<Symbol>(s.alphabet.size()); ++x) {
    const std::string n = sanitize_symbol_name(s.alphabet.name(x));
    const StateId m = s.add_receiver_state(s.fresh_state_name(Agent::Receiver, "q_" + n));
    s.add_rule(Agent::Receiver, make_read(s.fresh_rule_name("get_" + n), q_proxy, Channel::L, x, m));
    s.add_rule(Agent::Receiver, make_read(s.fresh_rule_name("take_" + n), m, Channel::R, x, q_proxy));
  }
}

std::string rname(const char* what, std::size_t i, int k = -1) {
  std::string n = std::string(what) + std::to_string(i);
  if (k >= 0) n += "_" + std::to_string(k);
  return n;
}

}  // namespace

bool qa_reaches(const QueueAutomaton& qa, std::size_t max_queue) {
  bool hit = false;
  qa_explore(qa, max_queue, [&](StateId p, const Word& w) {
    if (p == qa.final && w.empty()) hit = true;
  });
  return hit;
}

std::size_t qa_max_queue(const QueueAutomaton& qa, std::size_t cap) {
  std::size_t best = 0;
  qa_explore(qa, cap, [&](StateId, const Word& w) { best = std::max(best, w.size()); });
  return best;
}

UcstFile gen_queue_parity(const QueueAutomaton& qa) {
  qa.check();
  Ucst s;
  s.alphabet = qa.alphabet;
  for (auto& n : qa.states) s.add_sender_state(n);
  const Nfa even = test_even(s.alphabet), odd = test_odd(s.alphabet);
  for (std::size_t i = 0; i < qa.rules.size(); ++i) {
    const auto& r = qa.rules[i];
    if (r.write) {
      s.add_rule(Agent::Sender, make_write(rname("w", i), r.source, Channel::R, r.msg, r.target));
      continue;
    }
    // Record the parity, ask the proxy, wait for the parity to flip.
    for (int branch = 0; branch < 2; ++branch) {
      const std::string base = qa.states[r.source] + "~read" + std::to_string(i) + (branch ? "e" : "o");
      const StateId a = s.add_sender_state(s.fresh_state_name(Agent::Sender, base + "1"));
      const StateId b = s.add_sender_state(s.fresh_state_name(Agent::Sender, base + "2"));
      const Nfa& before = branch ? even : odd;
      const Nfa& after = branch ? odd : even;
      s.add_rule(Agent::Sender, make_test(rname("par", i, branch), r.source, Channel::R, before, a));
      s.add_rule(Agent::Sender, make_write(rname("ask", i, branch), a, Channel::L, r.msg, b));
      s.add_rule(Agent::Sender, make_test(rname("flip", i, branch), b, Channel::R, after, r.target));
    }
  }
  StateId q_proxy;
  proxy_receiver(s, q_proxy);
  UcstFile f;
  f.instance = ReachInstance::empty_empty(std::move(s), qa.initial, q_proxy, qa.final, q_proxy);
  f.instance.check();
  return f;
}

UcstFile gen_queue_head(const QueueAutomaton& qa) {
  qa.check();
  Ucst s;
  // Colour c of message x is symbol 2x+c.
  for (Symbol x = 0; x < static_cast<Symbol>(qa.alphabet.size()); ++x)
    for (int c = 0; c < 2; ++c) {
      std::string n = qa.alphabet.name(x) + "_" + std::to_string(c);
      while (s.alphabet.contains(n)) n += "'";
      s.alphabet.add(n);
    }
  auto col = [](Symbol x, int c) { return 2 * x + c; };
  // Sender state (p, next write colour w, expected head colour h).
  auto sid = [](StateId p, int w, int h) { return p * 4 + w * 2 + h; };
  for (auto& n : qa.states)
    for (int w = 0; w < 2; ++w)
      for (int h = 0; h < 2; ++h)
        s.add_sender_state(n + "~" + std::to_string(w) + std::to_string(h));
  const StateId p_fi = s.add_sender_state(s.fresh_state_name(Agent::Sender, "p_fi"));
  for (int w = 0; w < 2; ++w)
    for (int h = 0; h < 2; ++h)
      s.add_rule(Agent::Sender,
                 make_nop("done" + std::to_string(w) + std::to_string(h), sid(qa.final, w, h), p_fi));
  const auto nm = static_cast<Symbol>(qa.alphabet.size());
  for (std::size_t i = 0; i < qa.rules.size(); ++i) {
    const auto& r = qa.rules[i];
    for (int w = 0; w < 2; ++w)
      for (int h = 0; h < 2; ++h) {
        const int k = w * 2 + h;
        if (r.write) {
          s.add_rule(Agent::Sender, make_write(rname("w", i, k), sid(r.source, w, h), Channel::R,
                                               col(r.msg, w), sid(r.target, 1 - w, h)));
          continue;
        }
        const std::string base = s.sender_states[sid(r.source, w, h)] + "~read" + std::to_string(i);
        const StateId a = s.add_sender_state(s.fresh_state_name(Agent::Sender, base + "a"));
        const StateId b = s.add_sender_state(s.fresh_state_name(Agent::Sender, base + "b"));
        const StateId done = sid(r.target, w, 1 - h);
        s.add_rule(Agent::Sender, make_test(rname("head", i, k), sid(r.source, w, h), Channel::R,
                                            test_head(s.alphabet, col(r.msg, h)), a));
        s.add_rule(Agent::Sender, make_write(rname("ask", i, k), a, Channel::L, col(r.msg, h), b));
        // Confirm by the next head colour, or go on unconfirmed (r may now be empty).
        for (Symbol y = 0; y < nm; ++y)
          s.add_rule(Agent::Sender, make_test(rname("seen", i, k) + "_" + std::to_string(y), b,
                                              Channel::R, test_head(s.alphabet, col(y, 1 - h)), done));
        s.add_rule(Agent::Sender, make_nop(rname("go", i, k), b, done));
      }
  }
  StateId q_proxy;
  proxy_receiver(s, q_proxy);
  UcstFile f;
  f.instance = ReachInstance::empty_empty(std::move(s), sid(qa.initial, 0, 0), q_proxy, p_fi, q_proxy);
  f.instance.check();
  return f;
}

UcstFile gen_writelossy_queue(const QueueAutomaton& qa) {
  qa.check();
  Ucst s;
  s.alphabet = qa.alphabet;
  for (auto& n : qa.states) s.add_sender_state(n);
  for (std::size_t i = 0; i < qa.rules.size(); ++i) {
    const auto& r = qa.rules[i];
    if (r.write) {
      s.add_rule(Agent::Sender, make_write(rname("w", i), r.source, Channel::R, r.msg, r.target));
      continue;
    }
    const std::string base = qa.states[r.source] + "~read" + std::to_string(i);
    const StateId a = s.add_sender_state(s.fresh_state_name(Agent::Sender, base + "a"));
    const StateId b = s.add_sender_state(s.fresh_state_name(Agent::Sender, base + "b"));
    s.add_rule(Agent::Sender, make_write(rname("ask", i), r.source, Channel::L, r.msg, a));
    s.add_rule(Agent::Sender, make_test(rname("sent", i), a, Channel::L, test_nonempty(s.alphabet), b));
    s.add_rule(Agent::Sender, make_test(rname("served", i), b, Channel::L, test_zero(s.alphabet), r.target));
  }
  StateId q_proxy;
  proxy_receiver(s, q_proxy);
  UcstFile f;
  f.instance = ReachInstance::empty_empty(std::move(s), qa.initial, q_proxy, qa.final, q_proxy);
  f.mode = Mode::WriteLossy;
  f.instance.check();
  return f;
}

// ------------------------------------------------------------- semi-Thue

bool SemiThueSystem::length_preserving() const {
  for (auto& [a, b] : rules)
    if (a.size() != b.size()) return false;
  return true;
}

SemiThueSystem SemiThueSystem::parse(const Alphabet& m, const std::string& text) {
  SemiThueSystem t;
  t.alphabet = m;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    auto arrow = item.find("->");
    if (arrow == std::string::npos) {
      bool blank = item.find_first_not_of(" \t") == std::string::npos;
      if (blank) continue;
      throw InputError("semi-Thue rule '" + item + "': expected 'alpha->beta'");
    }
    t.rules.emplace_back(m.parse_word(item.substr(0, arrow)), m.parse_word(item.substr(arrow + 2)));
  }
  return t;
}

std::set<Word> thue_step(const SemiThueSystem& t, const Word& x) {
  std::set<Word> out;
  for (auto& [a, b] : t.rules) {
    if (a.size() > x.size()) continue;
    for (std::size_t i = 0; i + a.size() <= x.size(); ++i) {
      if (!std::equal(a.begin(), a.end(), x.begin() + static_cast<std::ptrdiff_t>(i))) continue;
      Word y(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(i));
      y.insert(y.end(), b.begin(), b.end());
      y.insert(y.end(), x.begin() + static_cast<std::ptrdiff_t>(i + a.size()), x.end());
      out.insert(std::move(y));
    }
  }
  return out;
}

std::optional<Word> thue_find_loop(const SemiThueSystem& t, std::size_t max_len, std::size_t max_steps) {
  if (!t.length_preserving()) throw InputError("thue_find_loop needs a length-preserving system");
  for (const Word& x : enumerate_words(Nfa::universal(t.alphabet), max_len)) {
    // BFS over words reachable in 1..max_steps rewrites.
    std::set<Word> seen;
    std::vector<Word> layer{x};
    for (std::size_t step = 1; step <= max_steps && !layer.empty(); ++step) {
      std::vector<Word> next;
      for (auto& w : layer)
        for (auto& y : thue_step(t, w)) {
          if (y == x) return x;
          if (seen.insert(y).second) next.push_back(y);
        }
      layer = std::move(next);
    }
  }
  return std::nullopt;
}

UcstFile ThueRecurrent::as_file() const {
  UcstFile f;
  f.instance = ReachInstance::empty_empty(system, p_in, q_in, p_loop, q_loop);
  f.generated = true;
  return f;
}

ThueRecurrent gen_thue_recurrent(const SemiThueSystem& t) {
  if (!t.length_preserving()) throw InputError("gen_thue_recurrent needs a length-preserving system");
  ThueRecurrent out;
  Ucst& s = out.system;
  if (t.alphabet.contains("#")) throw InputError("semi-Thue alphabet must not contain '#'");
  s.alphabet = t.alphabet.extended({"#"});
  const Symbol hash = s.alphabet.at("#");
  const auto ng = static_cast<Symbol>(t.alphabet.size());
  auto letter = [&](Symbol x) { return sanitize_symbol_name(t.alphabet.name(x)); };

  out.p_in = s.add_sender_state("p_in");
  out.p_loop = s.add_sender_state("p_loop");
  const StateId p_test = s.add_sender_state("p_tested");
  const StateId p_z = s.add_sender_state("p_z");
  const StateId p_zz = s.add_sender_state("p_zz");
  for (Symbol x = 0; x < ng; ++x)
    s.add_rule(Agent::Sender, make_write("guess_" + letter(x), out.p_in, Channel::L, x, out.p_in));
  s.add_rule(Agent::Sender, make_nop("start", out.p_in, out.p_loop));
  s.add_rule(Agent::Sender, make_test("empty_r", out.p_loop, Channel::R, test_zero(s.alphabet), p_test));
  s.add_rule(Agent::Sender, make_write("mark_l", p_test, Channel::L, hash, p_z));
  // Copy loops: l then r per letter.
  for (auto [from, tag] : {std::pair{p_z, "pre"}, std::pair{p_zz, "post"}})
    for (Symbol x = 0; x < ng; ++x) {
      const StateId mid = s.add_sender_state(std::string("p_") + tag + "_" + letter(x));
      s.add_rule(Agent::Sender, make_write(std::string(tag) + "_l_" + letter(x), from, Channel::L, x, mid));
      s.add_rule(Agent::Sender, make_write(std::string(tag) + "_r_" + letter(x), mid, Channel::R, x, from));
    }
  // Rewrite rules: alpha on r, then beta on l.
  for (std::size_t i = 0; i < t.rules.size(); ++i) {
    const auto& [a, b] = t.rules[i];
    std::vector<std::pair<Channel, Symbol>> chain;
    for (Symbol x : a) chain.emplace_back(Channel::R, x);
    for (Symbol x : b) chain.emplace_back(Channel::L, x);
    StateId cur = p_z;
    for (std::size_t k = 0; k < chain.size(); ++k) {
      StateId nxt = p_zz;
      if (k + 1 < chain.size())
        nxt = s.add_sender_state("p_rule" + std::to_string(i) + "_" + std::to_string(k));
      s.add_rule(Agent::Sender, make_write("rule" + std::to_string(i) + "_" + std::to_string(k), cur,
                                           chain[k].first, chain[k].second, nxt));
      cur = nxt;
    }
    if (chain.empty()) s.add_rule(Agent::Sender, make_nop("rule" + std::to_string(i), p_z, p_zz));
  }
  s.add_rule(Agent::Sender, make_write("mark_r", p_zz, Channel::R, hash, out.p_loop));

  out.q_loop = out.q_in = s.add_receiver_state("q_loop");
  for (Symbol x = 0; x <= ng; ++x) {
    const std::string n = x == hash ? std::string("hash") : letter(x);
    const StateId m = s.add_receiver_state("q_" + n);
    s.add_rule(Agent::Receiver, make_read("get_" + n, out.q_loop, Channel::L, x, m));
    s.add_rule(Agent::Receiver, make_read("take_" + n, m, Channel::R, x, out.q_loop));
  }
  s.check();
  return out;
}

}  // namespace ucst
