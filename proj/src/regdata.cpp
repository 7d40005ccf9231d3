#include "ucst/regdata.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <sstream>

namespace ucst {

namespace {

bool special_in_name(char c) {
  return std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == '|' ||
         c == '*' || c == '+' || c == '.' || c == ':' || c == ',';
}

}  // namespace

bool valid_symbol_name(const std::string& n) {
  if (n.empty() || n == "EPS" || n == "ANY" || n == "NONE") return false;
  return std::none_of(n.begin(), n.end(), special_in_name);
}

std::string sanitize_symbol_name(const std::string& n) {
  std::string out = n;
  for (char& c : out)
    if (special_in_name(c)) c = '_';
  if (!valid_symbol_name(out)) out = "_" + out;
  return out;
}

namespace {

void require_same(const Nfa& a, const Nfa& b, const char* op) {
  if (a.alphabet() != b.alphabet())
    throw InputError(std::string(op) + ": alphabet mismatch");
}

}  // namespace

// ---------------------------------------------------------------- Alphabet

Alphabet::Alphabet(std::vector<std::string> names) {
  for (auto& n : names) add(n);
}

const std::string& Alphabet::name(Symbol s) const {
  if (s < 0 || static_cast<std::size_t>(s) >= names_.size())
    throw InputError("symbol id out of range: " + std::to_string(s));
  return names_[s];
}

std::optional<Symbol> Alphabet::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Symbol Alphabet::at(std::string_view name) const {
  auto s = find(name);
  if (!s) throw InputError("unknown symbol '" + std::string(name) + "'");
  return *s;
}

Symbol Alphabet::add(const std::string& name) {
  if (!valid_symbol_name(name)) throw InputError("invalid symbol name '" + name + "'");
  if (index_.count(name)) throw InputError("duplicate symbol '" + name + "'");
  auto id = static_cast<Symbol>(names_.size());
  names_.push_back(name);
  index_.emplace(name, id);
  return id;
}

Alphabet Alphabet::extended(const std::vector<std::string>& extra) const {
  Alphabet out = *this;
  for (auto& n : extra) out.add(n);
  return out;
}

std::string Alphabet::format(const Word& w) const {
  if (w.empty()) return "EPS";
  bool compact = std::all_of(names_.begin(), names_.end(),
                             [](const std::string& n) { return n.size() == 1; });
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!compact && i) out += ' ';
    out += name(w[i]);
  }
  return out;
}

Word Alphabet::parse_word(std::string_view text) const {
  Word w;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) {
    if (tok == "EPS") continue;
    if (auto s = find(tok)) {
      w.push_back(*s);
      continue;
    }
    for (char c : tok) w.push_back(at(std::string(1, c)));
  }
  return w;
}

// --------------------------------------------------------------------- Nfa

Nfa::State Nfa::add_state(bool initial, bool accepting) {
  initial_.push_back(initial);
  accepting_.push_back(accepting);
  edges_.emplace_back();
  return static_cast<State>(edges_.size() - 1);
}

void Nfa::add_edge(State from, Symbol symbol, State to) {
  if (symbol != kEpsilon && (symbol < 0 || static_cast<std::size_t>(symbol) >= alphabet_.size()))
    throw InputError("transition symbol outside alphabet");
  auto& es = edges_.at(from);
  (void)edges_.at(to);
  for (auto& e : es)
    if (e.symbol == symbol && e.target == to) return;
  es.push_back({symbol, to});
}

std::vector<Nfa::State> Nfa::initial_states() const {
  std::vector<State> out;
  for (State s = 0; s < static_cast<State>(num_states()); ++s)
    if (initial_[s]) out.push_back(s);
  return out;
}

bool Nfa::has_epsilon() const {
  for (auto& es : edges_)
    for (auto& e : es)
      if (e.symbol == kEpsilon) return true;
  return false;
}

std::vector<Nfa::State> Nfa::closure(std::vector<State> set) const {
  std::vector<char> seen(num_states(), 0);
  std::vector<State> stack;
  for (State s : set)
    if (!seen[s]) seen[s] = 1, stack.push_back(s);
  while (!stack.empty()) {
    State s = stack.back();
    stack.pop_back();
    for (auto& e : edges_[s])
      if (e.symbol == kEpsilon && !seen[e.target]) seen[e.target] = 1, stack.push_back(e.target);
  }
  std::vector<State> out;
  for (State s = 0; s < static_cast<State>(num_states()); ++s)
    if (seen[s]) out.push_back(s);
  return out;
}

bool Nfa::accepts(const Word& w) const {
  for (Symbol x : w)
    if (x < 0 || static_cast<std::size_t>(x) >= alphabet_.size())
      throw InputError("word symbol outside alphabet");
  auto cur = closure(initial_states());
  for (Symbol x : w) {
    std::vector<State> nxt;
    for (State s : cur)
      for (auto& e : edges_[s])
        if (e.symbol == x) nxt.push_back(e.target);
    cur = closure(std::move(nxt));
    if (cur.empty()) return false;
  }
  return std::any_of(cur.begin(), cur.end(), [&](State s) { return accepting_[s]; });
}

bool Nfa::is_empty() const {
  auto reach = closure(initial_states());
  std::vector<char> seen(num_states(), 0);
  std::vector<State> stack;
  for (State s : reach) seen[s] = 1, stack.push_back(s);
  while (!stack.empty()) {
    State s = stack.back();
    stack.pop_back();
    if (accepting_[s]) return false;
    for (auto& e : edges_[s])
      if (!seen[e.target]) seen[e.target] = 1, stack.push_back(e.target);
  }
  return true;
}

std::optional<Word> Nfa::shortest_word() const {
  Nfa n = normalized();
  std::vector<int> parent(n.num_states(), -2);
  std::vector<Symbol> via(n.num_states(), kEpsilon);
  std::deque<State> q;
  for (State s : n.initial_states()) parent[s] = -1, q.push_back(s);
  while (!q.empty()) {
    State s = q.front();
    q.pop_front();
    if (n.accepting_[s]) {
      Word w;
      for (State t = s; parent[t] >= 0; t = parent[t]) w.push_back(via[t]);
      std::reverse(w.begin(), w.end());
      return w;
    }
    for (auto& e : n.edges_[s])
      if (parent[e.target] == -2) parent[e.target] = s, via[e.target] = e.symbol, q.push_back(e.target);
  }
  return std::nullopt;
}

Nfa Nfa::normalized() const {
  const auto n = static_cast<State>(num_states());
  std::vector<std::vector<State>> cl(n);
  for (State s = 0; s < n; ++s) cl[s] = closure({s});

  Nfa out(alphabet_);
  std::vector<State> id(n, -1);
  std::deque<State> q;
  for (State s = 0; s < n; ++s)
    if (initial_[s]) id[s] = out.add_state(true, false), q.push_back(s);
  while (!q.empty()) {
    State s = q.front();
    q.pop_front();
    for (State t : cl[s]) {
      if (accepting_[t]) out.accepting_[id[s]] = 1;
      for (auto& e : edges_[t]) {
        if (e.symbol == kEpsilon) continue;
        if (id[e.target] < 0) id[e.target] = out.add_state(), q.push_back(e.target);
        out.add_edge(id[s], e.symbol, id[e.target]);
      }
    }
  }
  return out;
}

Nfa Nfa::trimmed() const {
  Nfa a = normalized();
  const auto n = static_cast<State>(a.num_states());
  std::vector<std::vector<State>> rev(n);
  for (State s = 0; s < n; ++s)
    for (auto& e : a.edges_[s]) rev[e.target].push_back(s);
  std::vector<char> live(n, 0);
  std::vector<State> stack;
  for (State s = 0; s < n; ++s)
    if (a.accepting_[s]) live[s] = 1, stack.push_back(s);
  while (!stack.empty()) {
    State s = stack.back();
    stack.pop_back();
    for (State p : rev[s])
      if (!live[p]) live[p] = 1, stack.push_back(p);
  }
  Nfa out(alphabet_);
  std::vector<State> id(n, -1);
  for (State s = 0; s < n; ++s)
    if (live[s]) id[s] = out.add_state(a.initial_[s], a.accepting_[s]);
  for (State s = 0; s < n; ++s) {
    if (!live[s]) continue;
    for (auto& e : a.edges_[s])
      if (live[e.target]) out.add_edge(id[s], e.symbol, id[e.target]);
  }
  return out;
}

Nfa Nfa::with_alphabet(const Alphabet& superset) const {
  if (superset.size() < alphabet_.size() ||
      !std::equal(alphabet_.names().begin(), alphabet_.names().end(), superset.names().begin()))
    throw InputError("with_alphabet: target alphabet does not extend the source");
  Nfa out = *this;
  out.alphabet_ = superset;
  return out;
}

Nfa Nfa::reversed() const {
  Nfa out(alphabet_);
  for (State s = 0; s < static_cast<State>(num_states()); ++s)
    out.add_state(accepting_[s], initial_[s]);
  for (State s = 0; s < static_cast<State>(num_states()); ++s)
    for (auto& e : edges_[s]) out.add_edge(e.target, e.symbol, s);
  return out;
}

Nfa Nfa::epsilon(const Alphabet& a) {
  Nfa n(a);
  n.add_state(true, true);
  return n;
}

Nfa Nfa::empty(const Alphabet& a) {
  Nfa n(a);
  n.add_state(true, false);
  return n;
}

Nfa Nfa::word(const Alphabet& a, const Word& w) {
  Nfa n(a);
  State cur = n.add_state(true, w.empty());
  for (std::size_t i = 0; i < w.size(); ++i) {
    State nxt = n.add_state(false, i + 1 == w.size());
    n.add_edge(cur, w[i], nxt);
    cur = nxt;
  }
  return n;
}

Nfa Nfa::any_letter(const Alphabet& a) {
  Nfa n(a);
  State s = n.add_state(true, false);
  State t = n.add_state(false, true);
  for (Symbol x = 0; x < static_cast<Symbol>(a.size()); ++x) n.add_edge(s, x, t);
  return n;
}

Nfa Nfa::universal(const Alphabet& a) {
  Nfa n(a);
  State s = n.add_state(true, true);
  for (Symbol x = 0; x < static_cast<Symbol>(a.size()); ++x) n.add_edge(s, x, s);
  return n;
}

// --------------------------------------------------------------------- Dfa

bool Dfa::accepts(const Word& w) const {
  int s = initial;
  for (Symbol x : w) s = step(s, x);
  return accepting[s];
}

std::vector<char> Dfa::live_states() const {
  const int n = num_states();
  const auto k = static_cast<Symbol>(alphabet.size());
  std::vector<std::vector<int>> rev(n);
  for (int s = 0; s < n; ++s)
    for (Symbol x = 0; x < k; ++x) rev[step(s, x)].push_back(s);
  std::vector<char> live(n, 0);
  std::vector<int> stack;
  for (int s = 0; s < n; ++s)
    if (accepting[s]) live[s] = 1, stack.push_back(s);
  while (!stack.empty()) {
    int s = stack.back();
    stack.pop_back();
    for (int p : rev[s])
      if (!live[p]) live[p] = 1, stack.push_back(p);
  }
  return live;
}

Dfa determinize(const Nfa& a) {
  Nfa n = a.normalized();
  const auto k = static_cast<Symbol>(n.alphabet().size());
  Dfa d;
  d.alphabet = n.alphabet();
  std::map<std::vector<Nfa::State>, int> ids;
  std::vector<std::vector<Nfa::State>> sets;
  auto intern = [&](std::vector<Nfa::State> set) {
    auto [it, fresh] = ids.emplace(set, static_cast<int>(sets.size()));
    if (fresh) {
      bool acc = std::any_of(set.begin(), set.end(), [&](auto s) { return n.is_accepting(s); });
      d.accepting.push_back(acc);
      sets.push_back(std::move(set));
    }
    return it->second;
  };
  d.initial = intern(n.initial_states());
  for (std::size_t i = 0; i < sets.size(); ++i) {
    for (Symbol x = 0; x < k; ++x) {
      std::vector<Nfa::State> nxt;
      for (auto s : sets[i])
        for (auto& e : n.edges(s))
          if (e.symbol == x) nxt.push_back(e.target);
      std::sort(nxt.begin(), nxt.end());
      nxt.erase(std::unique(nxt.begin(), nxt.end()), nxt.end());
      int t = intern(std::move(nxt));
      d.next.push_back(t);
    }
  }
  return d;
}

Nfa to_nfa(const Dfa& d) {
  Nfa n(d.alphabet);
  for (int s = 0; s < d.num_states(); ++s) n.add_state(s == d.initial, d.accepting[s]);
  for (int s = 0; s < d.num_states(); ++s)
    for (Symbol x = 0; x < static_cast<Symbol>(d.alphabet.size()); ++x)
      n.add_edge(s, x, d.step(s, x));
  return n;
}

// -------------------------------------------------------------- operations

Nfa union_of(const Nfa& a, const Nfa& b) {
  require_same(a, b, "union");
  Nfa out(a.alphabet());
  auto off = static_cast<Nfa::State>(a.num_states());
  for (Nfa::State s = 0; s < off; ++s) out.add_state(a.is_initial(s), a.is_accepting(s));
  for (Nfa::State s = 0; s < static_cast<Nfa::State>(b.num_states()); ++s)
    out.add_state(b.is_initial(s), b.is_accepting(s));
  for (Nfa::State s = 0; s < off; ++s)
    for (auto& e : a.edges(s)) out.add_edge(s, e.symbol, e.target);
  for (Nfa::State s = 0; s < static_cast<Nfa::State>(b.num_states()); ++s)
    for (auto& e : b.edges(s)) out.add_edge(s + off, e.symbol, e.target + off);
  return out;
}

namespace {

// Reachable product of two epsilon-free automata; `step` enumerates moves.
template <class Step>
Nfa product(const Nfa& a, const Nfa& b, const Alphabet& alpha, bool accept_both, Step step) {
  Nfa out(alpha);
  std::map<std::pair<Nfa::State, Nfa::State>, Nfa::State> ids;
  std::deque<std::pair<Nfa::State, Nfa::State>> q;
  auto intern = [&](Nfa::State s, Nfa::State t, bool init) {
    auto [it, fresh] = ids.emplace(std::make_pair(s, t), 0);
    if (fresh) {
      bool acc = accept_both ? (a.is_accepting(s) && b.is_accepting(t)) : false;
      it->second = out.add_state(init, acc);
      q.emplace_back(s, t);
    }
    return it->second;
  };
  for (auto s : a.initial_states())
    for (auto t : b.initial_states()) intern(s, t, true);
  while (!q.empty()) {
    auto [s, t] = q.front();
    q.pop_front();
    Nfa::State from = ids.at({s, t});
    step(s, t, [&](Symbol x, Nfa::State s2, Nfa::State t2) {
      Nfa::State to = intern(s2, t2, false);
      out.add_edge(from, x, to);
    });
  }
  return out;
}

}  // namespace

Nfa intersect(const Nfa& a0, const Nfa& b0) {
  require_same(a0, b0, "intersect");
  Nfa a = a0.normalized(), b = b0.normalized();
  return product(a, b, a.alphabet(), true, [&](auto s, auto t, auto emit) {
    for (auto& e : a.edges(s))
      for (auto& f : b.edges(t))
        if (e.symbol == f.symbol) emit(e.symbol, e.target, f.target);
  });
}

Nfa complement(const Nfa& a) {
  Dfa d = determinize(a);
  for (auto& acc : d.accepting) acc = !acc;
  return to_nfa(d);
}

Nfa concat(const Nfa& a, const Nfa& b) {
  require_same(a, b, "concat");
  Nfa out(a.alphabet());
  auto off = static_cast<Nfa::State>(a.num_states());
  for (Nfa::State s = 0; s < off; ++s) out.add_state(a.is_initial(s), false);
  for (Nfa::State s = 0; s < static_cast<Nfa::State>(b.num_states()); ++s)
    out.add_state(false, b.is_accepting(s));
  for (Nfa::State s = 0; s < off; ++s) {
    for (auto& e : a.edges(s)) out.add_edge(s, e.symbol, e.target);
    if (a.is_accepting(s))
      for (auto t : b.initial_states()) out.add_edge(s, kEpsilon, t + off);
  }
  for (Nfa::State s = 0; s < static_cast<Nfa::State>(b.num_states()); ++s)
    for (auto& e : b.edges(s)) out.add_edge(s + off, e.symbol, e.target + off);
  return out;
}

Nfa star(const Nfa& a) {
  Nfa out(a.alphabet());
  Nfa::State hub = out.add_state(true, true);
  for (Nfa::State s = 0; s < static_cast<Nfa::State>(a.num_states()); ++s)
    out.add_state(false, false);
  for (Nfa::State s = 0; s < static_cast<Nfa::State>(a.num_states()); ++s) {
    if (a.is_initial(s)) out.add_edge(hub, kEpsilon, s + 1);
    if (a.is_accepting(s)) out.add_edge(s + 1, kEpsilon, hub);
    for (auto& e : a.edges(s)) out.add_edge(s + 1, e.symbol, e.target + 1);
  }
  return out;
}

Nfa plus(const Nfa& a) { return concat(a, star(a)); }

Nfa shuffle(const Nfa& a0, const Nfa& b0) {
  Alphabet alpha = a0.alphabet();
  std::vector<Symbol> remap;
  for (auto& n : b0.alphabet().names()) {
    auto s = alpha.find(n);
    remap.push_back(s ? *s : alpha.add(n));
  }
  Nfa a = a0.with_alphabet(alpha).normalized();
  Nfa b = b0.normalized();
  return product(a, b, alpha, true, [&](auto s, auto t, auto emit) {
    for (auto& e : a.edges(s)) emit(e.symbol, e.target, t);
    for (auto& f : b.edges(t)) emit(remap[f.symbol], s, f.target);
  });
}

Nfa pad_closure(const Nfa& a0, const std::string& pad_symbol) {
  if (a0.alphabet().contains(pad_symbol))
    throw InputError("pad symbol '" + pad_symbol + "' already in alphabet");
  Alphabet alpha = a0.alphabet().extended({pad_symbol});
  Symbol pad = alpha.at(pad_symbol);
  Nfa a = a0.normalized().with_alphabet(alpha);
  Nfa out = a;
  const auto n = static_cast<Nfa::State>(a.num_states());
  for (Nfa::State s = 0; s < n; ++s) {
    if (a.edges(s).empty()) continue;
    // Waiting copy of s: only reachable by padding, never accepting.
    Nfa::State w = out.add_state();
    out.add_edge(s, pad, w);
    out.add_edge(w, pad, w);
    for (auto& e : a.edges(s)) out.add_edge(w, e.symbol, e.target);
  }
  return out;
}

Nfa upward_closure(const Nfa& a0) {
  Nfa a = a0.normalized();
  for (Nfa::State s = 0; s < static_cast<Nfa::State>(a.num_states()); ++s)
    for (Symbol x = 0; x < static_cast<Symbol>(a.alphabet().size()); ++x) a.add_edge(s, x, s);
  return a;
}

Nfa downward_closure(const Nfa& a0) {
  Nfa a = a0.normalized();
  for (Nfa::State s = 0; s < static_cast<Nfa::State>(a.num_states()); ++s) {
    auto es = a.edges(s);
    for (auto& e : es) a.add_edge(s, kEpsilon, e.target);
  }
  return a;
}

Equality language_equal(const Nfa& a, const Nfa& b) {
  require_same(a, b, "language_equal");
  Dfa da = determinize(a), db = determinize(b);
  const auto k = static_cast<Symbol>(a.alphabet().size());
  std::map<std::pair<int, int>, std::pair<int, Symbol>> parent;  // -> (parent index, symbol)
  std::vector<std::pair<int, int>> order;
  std::deque<int> q;
  order.emplace_back(da.initial, db.initial);
  parent[order[0]] = {-1, kEpsilon};
  q.push_back(0);
  while (!q.empty()) {
    int i = q.front();
    q.pop_front();
    auto [s, t] = order[i];
    if (da.accepting[s] != db.accepting[t]) {
      Word w;
      for (int j = i; parent[order[j]].first >= 0; j = parent[order[j]].first)
        w.push_back(parent[order[j]].second);
      std::reverse(w.begin(), w.end());
      return {false, w};
    }
    for (Symbol x = 0; x < k; ++x) {
      std::pair<int, int> nxt{da.step(s, x), db.step(t, x)};
      if (parent.emplace(nxt, std::make_pair(i, x)).second) {
        order.push_back(nxt);
        q.push_back(static_cast<int>(order.size() - 1));
      }
    }
  }
  return {true, std::nullopt};
}

bool subword(const Word& w1, const Word& w2) {
  std::size_t i = 0;
  for (std::size_t j = 0; j < w2.size() && i < w1.size(); ++j)
    if (w1[i] == w2[j]) ++i;
  return i == w1.size();
}

bool subword_one(const Word& w1, const Word& w2) {
  return w1.size() + 1 == w2.size() && subword(w1, w2);
}

std::vector<Word> enumerate_words(const Nfa& a, std::size_t max_len) {
  Dfa d = determinize(a);
  const int n = d.num_states();
  const auto k = static_cast<Symbol>(d.alphabet.size());
  // can[r][s]: an accepting state is reachable from s in exactly r steps.
  std::vector<std::vector<char>> can(max_len + 1, std::vector<char>(n, 0));
  for (int s = 0; s < n; ++s) can[0][s] = d.accepting[s];
  for (std::size_t r = 1; r <= max_len; ++r)
    for (int s = 0; s < n; ++s)
      for (Symbol x = 0; x < k && !can[r][s]; ++x) can[r][s] = can[r - 1][d.step(s, x)];
  std::vector<Word> out;
  Word cur;
  std::function<void(int, std::size_t)> dfs = [&](int s, std::size_t rem) {
    if (rem == 0) {
      out.push_back(cur);
      return;
    }
    for (Symbol x = 0; x < k; ++x) {
      int t = d.step(s, x);
      if (!can[rem - 1][t]) continue;
      cur.push_back(x);
      dfs(t, rem - 1);
      cur.pop_back();
    }
  };
  for (std::size_t len = 0; len <= max_len; ++len)
    if (can[len][d.initial]) dfs(d.initial, len);
  return out;
}

bool has_word_longer_than(const Nfa& a0, std::size_t k) {
  Nfa a = a0.trimmed();
  const auto n = static_cast<Nfa::State>(a.num_states());
  // Longest path by DFS with cycle detection; a cycle in a trim automaton
  // means an infinite language.
  std::vector<int> color(n, 0);
  std::vector<long> best(n, -1);
  bool cyclic = false;
  std::function<long(Nfa::State)> longest = [&](Nfa::State s) -> long {
    if (color[s] == 2) return best[s];
    if (color[s] == 1) {
      cyclic = true;
      return 0;
    }
    color[s] = 1;
    long b = a.is_accepting(s) ? 0 : -1;
    for (auto& e : a.edges(s)) {
      long sub = longest(e.target);
      if (sub >= 0) b = std::max(b, sub + 1);
    }
    color[s] = 2;
    return best[s] = b;
  };
  long m = -1;
  for (auto s : a.initial_states()) m = std::max(m, longest(s));
  return cyclic || m > static_cast<long>(k);
}

// ------------------------------------------------------------------- regex

namespace {

class RegexParser {
 public:
  RegexParser(std::string_view text, const Alphabet& a) : text_(text), alpha_(a) { lex(); }

  Nfa parse() {
    Nfa n = alt();
    if (pos_ != toks_.size()) fail("unexpected '" + toks_[pos_] + "'");
    return n;
  }

 private:
  static bool special(char c) { return c == '(' || c == ')' || c == '|' || c == '*' || c == '+' || c == '.'; }

  void lex() {
    std::size_t i = 0;
    while (i < text_.size()) {
      char c = text_[i];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
      } else if (special(c)) {
        if (c != '.') toks_.emplace_back(1, c);
        ++i;
      } else {
        std::size_t j = i;
        while (j < text_.size() && !std::isspace(static_cast<unsigned char>(text_[j])) && !special(text_[j])) ++j;
        toks_.emplace_back(text_.substr(i, j - i));
        i = j;
      }
    }
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw InputError("regex '" + std::string(text_) + "': " + msg);
  }

  bool at(const char* t) const { return pos_ < toks_.size() && toks_[pos_] == t; }

  Nfa alt() {
    Nfa n = seq();
    while (at("|")) {
      ++pos_;
      n = union_of(n, seq());
    }
    return n;
  }

  Nfa seq() {
    Nfa n = Nfa::epsilon(alpha_);
    bool first = true;
    while (pos_ < toks_.size() && !at("|") && !at(")")) {
      Nfa p = postfix();
      n = first ? std::move(p) : concat(n, p);
      first = false;
    }
    if (first) fail("empty expression; write EPS for the empty word");
    return n;
  }

  Nfa postfix() {
    Nfa n = atom();
    while (at("*") || at("+")) {
      n = at("*") ? star(n) : plus(n);
      ++pos_;
    }
    return n;
  }

  Nfa atom() {
    if (pos_ >= toks_.size()) fail("unexpected end");
    const std::string tok = toks_[pos_++];
    if (tok == "(") {
      Nfa n = alt();
      if (!at(")")) fail("missing ')'");
      ++pos_;
      return n;
    }
    if (tok == ")" || tok == "|" || tok == "*" || tok == "+") fail("unexpected '" + tok + "'");
    if (tok == "EPS") return Nfa::epsilon(alpha_);
    if (tok == "NONE") return Nfa::empty(alpha_);
    if (tok == "ANY") return Nfa::any_letter(alpha_);
    try {
      return Nfa::word(alpha_, alpha_.parse_word(tok));
    } catch (const InputError&) {
      fail("unknown symbol '" + tok + "'");
    }
  }

  std::string_view text_;
  const Alphabet& alpha_;
  std::vector<std::string> toks_;
  std::size_t pos_ = 0;
};

// Regex text with its binding strength: 0 union, 1 concatenation, 2 atom.
struct Rx {
  std::string text;
  int prec = 2;
  bool none = true;
  bool eps = false;
};

Rx rx_none() { return {}; }
Rx rx_eps() { return {"EPS", 2, false, true}; }
Rx rx_sym(const std::string& s) { return {s, 2, false, false}; }

Rx rx_union(const Rx& a, const Rx& b) {
  if (a.none) return b;
  if (b.none) return a;
  if (a.text == b.text) return a;
  return {a.text + " | " + b.text, 0, false, false};
}

std::string wrap(const Rx& r, int need) { return r.prec < need ? "(" + r.text + ")" : r.text; }

Rx rx_concat(const Rx& a, const Rx& b) {
  if (a.none || b.none) return rx_none();
  if (a.eps) return b;
  if (b.eps) return a;
  return {wrap(a, 1) + " " + wrap(b, 1), 1, false, false};
}

Rx rx_star(const Rx& a) {
  if (a.none || a.eps) return rx_eps();
  if (a.prec == 2 && !a.text.empty() && a.text.back() == '*') return a;
  return {wrap(a, 2) + "*", 2, false, false};
}

}  // namespace

Nfa parse_regex(std::string_view text, const Alphabet& alphabet) {
  return RegexParser(text, alphabet).parse();
}

std::string to_regex(const Nfa& a0) {
  Nfa a = a0.trimmed();
  const int n = static_cast<int>(a.num_states());
  if (n == 0) return "NONE";
  // Generalized automaton: states 0..n-1, start n, final n+1.
  const int S = n, F = n + 1, N = n + 2;
  std::vector<std::vector<Rx>> g(N, std::vector<Rx>(N));
  for (int s = 0; s < n; ++s) {
    if (a.is_initial(s)) g[S][s] = rx_union(g[S][s], rx_eps());
    if (a.is_accepting(s)) g[s][F] = rx_union(g[s][F], rx_eps());
    for (auto& e : a.edges(s))
      g[s][e.target] = rx_union(g[s][e.target], rx_sym(a.alphabet().name(e.symbol)));
  }
  for (int k = 0; k < n; ++k) {
    Rx loop = rx_star(g[k][k]);
    for (int i = 0; i < N; ++i) {
      if (i == k || g[i][k].none) continue;
      for (int j = 0; j < N; ++j) {
        if (j == k || g[k][j].none) continue;
        g[i][j] = rx_union(g[i][j], rx_concat(rx_concat(g[i][k], loop), g[k][j]));
      }
    }
    for (int i = 0; i < N; ++i) g[i][k] = g[k][i] = rx_none();
  }
  const Rx& r = g[S][F];
  return r.none ? "NONE" : r.text;
}

}  // namespace ucst
