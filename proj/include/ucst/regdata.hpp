#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ucst {

using Symbol = std::int32_t;
inline constexpr Symbol kEpsilon = -1;
using Word = std::vector<Symbol>;

/// Malformed user input: bad files, alphabet mismatches, fragment violations.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Broken internal invariant (a bug, never a user mistake).
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Symbol names: nonempty, not EPS/ANY/NONE, no whitespace or ()|*+.:,
bool valid_symbol_name(const std::string& n);
/// Replaces forbidden characters by '_'.
std::string sanitize_symbol_name(const std::string& n);

/// Ordered set of symbol names; a symbol is its index.  Extending an
/// alphabet appends, so ids of the original symbols stay valid.
class Alphabet {
 public:
  Alphabet() = default;
  explicit Alphabet(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  bool empty() const { return names_.empty(); }
  const std::string& name(Symbol s) const;
  const std::vector<std::string>& names() const { return names_; }
  std::optional<Symbol> find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name).has_value(); }
  Symbol at(std::string_view name) const;
  Symbol add(const std::string& name);
  Alphabet extended(const std::vector<std::string>& extra) const;

  /// Space-separated names, or juxtaposed if every name is one character.
  std::string format(const Word& w) const;
  /// Inverse of format: whitespace-separated tokens; a token that is not a
  /// symbol is split into one-character symbols; "EPS" is the empty word.
  Word parse_word(std::string_view text) const;

  bool operator==(const Alphabet& o) const { return names_ == o.names_; }
  bool operator!=(const Alphabet& o) const { return !(*this == o); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, Symbol> index_;
};

class Nfa {
 public:
  using State = std::int32_t;
  struct Edge {
    Symbol symbol;  // kEpsilon for an epsilon move
    State target;
  };

  Nfa() = default;
  explicit Nfa(Alphabet alphabet) : alphabet_(std::move(alphabet)) {}

  State add_state(bool initial = false, bool accepting = false);
  void add_edge(State from, Symbol symbol, State to);
  void set_initial(State s, bool v = true) { initial_.at(s) = v; }
  void set_accepting(State s, bool v = true) { accepting_.at(s) = v; }

  const Alphabet& alphabet() const { return alphabet_; }
  std::size_t num_states() const { return edges_.size(); }
  bool is_initial(State s) const { return initial_[s]; }
  bool is_accepting(State s) const { return accepting_[s]; }
  const std::vector<Edge>& edges(State s) const { return edges_[s]; }
  std::vector<State> initial_states() const;
  bool has_epsilon() const;

  bool accepts(const Word& w) const;
  bool is_empty() const;
  std::optional<Word> shortest_word() const;

  /// Epsilon-free, only states reachable from an initial state.
  Nfa normalized() const;
  /// normalized() restricted to states that can also reach acceptance.
  Nfa trimmed() const;
  /// Same language over a superset alphabet whose prefix is ours.
  Nfa with_alphabet(const Alphabet& superset) const;
  Nfa reversed() const;

  static Nfa epsilon(const Alphabet& a);
  static Nfa empty(const Alphabet& a);
  static Nfa word(const Alphabet& a, const Word& w);
  static Nfa any_letter(const Alphabet& a);
  static Nfa universal(const Alphabet& a);

 private:
  std::vector<State> closure(std::vector<State> set) const;

  Alphabet alphabet_;
  std::vector<char> initial_;
  std::vector<char> accepting_;
  std::vector<std::vector<Edge>> edges_;
};

/// Complete DFA, states numbered in BFS order over symbol order.
struct Dfa {
  Alphabet alphabet;
  int initial = 0;
  std::vector<char> accepting;
  std::vector<int> next;  // next[state * |alphabet| + symbol]

  int num_states() const { return static_cast<int>(accepting.size()); }
  int step(int state, Symbol s) const { return next[state * alphabet.size() + s]; }
  bool accepts(const Word& w) const;
  /// live[s]: some accepting state is reachable from s.
  std::vector<char> live_states() const;
};

Dfa determinize(const Nfa& a);
Nfa to_nfa(const Dfa& d);

Nfa union_of(const Nfa& a, const Nfa& b);
Nfa intersect(const Nfa& a, const Nfa& b);
Nfa complement(const Nfa& a);
Nfa concat(const Nfa& a, const Nfa& b);
Nfa star(const Nfa& a);
Nfa plus(const Nfa& a);
Nfa shuffle(const Nfa& a, const Nfa& b);
Nfa pad_closure(const Nfa& a, const std::string& pad_symbol);
Nfa upward_closure(const Nfa& a);
Nfa downward_closure(const Nfa& a);

struct Equality {
  bool equal = true;
  std::optional<Word> witness;  // shortest word in the symmetric difference
};
Equality language_equal(const Nfa& a, const Nfa& b);

bool subword(const Word& w1, const Word& w2);
bool subword_one(const Word& w1, const Word& w2);

/// Words of L(a) with length <= max_len, length-lexicographic order.
std::vector<Word> enumerate_words(const Nfa& a, std::size_t max_len);
/// True if L(a) contains a word longer than k (always true when infinite).
bool has_word_longer_than(const Nfa& a, std::size_t k);

/// Regex surface syntax: juxtaposition, |, *, +, (), EPS, ANY, NONE.
Nfa parse_regex(std::string_view text, const Alphabet& alphabet);
/// Regex for L(a) by state elimination; parse_regex(to_regex(a)) == L(a).
std::string to_regex(const Nfa& a);

}  // namespace ucst
