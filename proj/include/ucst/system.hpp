#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "ucst/regdata.hpp"

namespace ucst {

enum class Channel : std::uint8_t { R, L };
enum class Agent : std::uint8_t { Sender, Receiver };
enum class Mode : std::uint8_t { Reliable, Lossy, WriteLossy };

const char* to_string(Channel c);
const char* to_string(Agent a);
const char* to_string(Mode m);

using StateId = std::int32_t;

enum class TestClass : std::uint8_t { Zero, NonEmpty, Even, Odd, Head, Other };

/// Class of a test language over its own alphabet (Z, N, Even, Odd, H_a).
TestClass classify_language(const Nfa& lang, Symbol* head = nullptr);

struct NopAction {};
struct TestAction {
  Nfa lang;
  TestClass cls = TestClass::Other;  // cached classify_language(lang)
  Symbol head = kEpsilon;
};
struct WriteAction {
  Symbol msg;
};
struct ReadAction {
  Symbol msg;
};
using Action = std::variant<NopAction, TestAction, WriteAction, ReadAction>;

struct Rule {
  std::string name;
  StateId source = 0;
  Channel channel = Channel::R;  // ignored for Nop
  Action action;
  StateId target = 0;

  bool is_nop() const { return std::holds_alternative<NopAction>(action); }
  bool is_test() const { return std::holds_alternative<TestAction>(action); }
  bool is_write() const { return std::holds_alternative<WriteAction>(action); }
  bool is_read() const { return std::holds_alternative<ReadAction>(action); }
  bool writes(Channel c) const { return is_write() && channel == c; }
  bool reads(Channel c) const { return is_read() && channel == c; }
  bool tests(Channel c) const { return is_test() && channel == c; }
  Symbol msg() const;
  const Nfa& test_lang() const { return std::get<TestAction>(action).lang; }
  TestClass test_class() const { return std::get<TestAction>(action).cls; }
  bool is_test_of(TestClass c) const { return is_test() && test_class() == c; }
};

struct RuleRef {
  Agent agent = Agent::Sender;
  std::int32_t index = 0;
  bool operator==(const RuleRef& o) const { return agent == o.agent && index == o.index; }
  bool operator!=(const RuleRef& o) const { return !(*this == o); }
  bool operator<(const RuleRef& o) const {
    return agent != o.agent ? agent < o.agent : index < o.index;
  }
};

/// Sender and Receiver joined by a reliable channel r and a lossy channel l.
struct Ucst {
  Alphabet alphabet;
  std::vector<std::string> sender_states;
  std::vector<std::string> receiver_states;
  std::vector<Rule> sender_rules;
  std::vector<Rule> receiver_rules;

  StateId add_sender_state(const std::string& name);
  StateId add_receiver_state(const std::string& name);
  std::optional<StateId> find_sender_state(const std::string& name) const;
  std::optional<StateId> find_receiver_state(const std::string& name) const;
  RuleRef add_rule(Agent agent, Rule rule);

  const std::vector<Rule>& rules(Agent a) const {
    return a == Agent::Sender ? sender_rules : receiver_rules;
  }
  const std::vector<std::string>& states(Agent a) const {
    return a == Agent::Sender ? sender_states : receiver_states;
  }
  const Rule& rule(RuleRef r) const { return rules(r.agent).at(r.index); }
  std::size_t num_rules() const { return sender_rules.size() + receiver_rules.size(); }
  /// Unique name not already used by a state of the given agent.
  std::string fresh_state_name(Agent a, const std::string& base) const;
  std::string fresh_rule_name(const std::string& base) const;

  /// Throws InputError on any structural violation.
  void check() const;
};

Nfa test_zero(const Alphabet& m);
Nfa test_nonempty(const Alphabet& m);
Nfa test_even(const Alphabet& m);
Nfa test_odd(const Alphabet& m);
Nfa test_head(const Alphabet& m, Symbol a);

Rule make_nop(std::string name, StateId from, StateId to);
Rule make_write(std::string name, StateId from, Channel c, Symbol x, StateId to);
Rule make_read(std::string name, StateId from, Channel c, Symbol x, StateId to);
Rule make_test(std::string name, StateId from, Channel c, Nfa lang, StateId to);

struct Configuration {
  StateId p = 0;
  StateId q = 0;
  Word u;  // contents of r
  Word v;  // contents of l

  bool operator==(const Configuration& o) const {
    return p == o.p && q == o.q && u == o.u && v == o.v;
  }
  bool operator!=(const Configuration& o) const { return !(*this == o); }
  bool operator<(const Configuration& o) const;
};

struct ConfigurationHash {
  std::size_t operator()(const Configuration& c) const;
};

std::string format_configuration(const Ucst& s, const Configuration& c);

struct ReachInstance {
  Ucst system;
  StateId p_in = 0, p_fi = 0, q_in = 0, q_fi = 0;
  Nfa U, V, Up, Vp;

  /// Instance with all four constraints equal to {ε}.
  static ReachInstance empty_empty(Ucst s, StateId p_in, StateId q_in, StateId p_fi, StateId q_fi);
  Configuration initial_empty() const { return {p_in, q_in, {}, {}}; }
  Configuration final_empty() const { return {p_fi, q_fi, {}, {}}; }
  bool is_empty_initial() const;  // U = V = {ε}
  bool is_empty_final() const;    // Up = Vp = {ε}
  void check() const;
};

struct StepLabel {
  enum class Kind : std::uint8_t { Rule, Loss };
  Kind kind = Kind::Loss;
  RuleRef rule;
  bool dropped = false;  // write-lossy: the l-write was lost while being sent

  static StepLabel loss() { return {}; }
  static StepLabel of(RuleRef r, bool dropped = false) { return {Kind::Rule, r, dropped}; }
  bool is_loss() const { return kind == Kind::Loss; }
  bool operator==(const StepLabel& o) const {
    return kind == o.kind && (kind == Kind::Loss || (rule == o.rule && dropped == o.dropped));
  }
  bool operator!=(const StepLabel& o) const { return !(*this == o); }
};

struct Step {
  StepLabel label;
  Configuration result;
};

struct Run {
  Configuration start;
  std::vector<Step> steps;

  const Configuration& end() const { return steps.empty() ? start : steps.back().result; }
  const Configuration& at(std::size_t i) const { return i == 0 ? start : steps[i - 1].result; }
  std::size_t size() const { return steps.size(); }
};

std::string format_label(const Ucst& s, const StepLabel& l);
std::string format_run(const Ucst& s, const Run& run);

/// Result of firing one rule reliably at c, or nullopt if disabled.
std::optional<Configuration> fire(const Ucst& s, RuleRef r, const Configuration& c);

std::vector<Step> successors(const Ucst& s, const Configuration& c, Mode mode);

// ---------------------------------------------------------- classification

struct TestInfo {
  RuleRef rule;
  Agent agent;
  Channel channel;
  TestClass cls;
  Symbol head = kEpsilon;  // for Head
};

struct FragmentReport {
  std::vector<TestInfo> tests;
  /// Atoms such as "Z1^l", "N2^r", "P1^r", "H1^r", "other".
  std::set<std::string> fragment;

  /// Every test is of a class in `classes`, owned by an agent in `agents`,
  /// on a channel in `channels`.
  bool within(std::initializer_list<TestClass> classes, std::initializer_list<Agent> agents,
              std::initializer_list<Channel> channels) const;
  bool has_receiver_tests() const;
  std::string describe() const;
};

FragmentReport classify_tests(const Ucst& s);

// ------------------------------------------------------------- run checks

struct RunCheck {
  bool ok = true;
  std::size_t failing_index = 0;  // index of the first bad step
  std::string reason;
  explicit operator bool() const { return ok; }
};

RunCheck validate_run(const Ucst& s, const Run& run, Mode mode);
bool is_head_lossy(const Run& run);

enum class CommuteCase : std::uint8_t { None, NoContact, PostponableLoss, AdvanceableSender, AdvanceableLoss };
const char* to_string(CommuteCase c);

/// Which commutation case covers steps i, i+1 (lossy mode).
CommuteCase commute_case(const Ucst& s, const Run& run, std::size_t i);

struct CommuteResult {
  CommuteCase applied = CommuteCase::None;
  std::optional<Run> run;  // set iff applied != None
};

/// Swap steps i and i+1, recomputing the middle configuration.  Throws
/// InternalError if a case applies but no middle configuration exists.
CommuteResult commute(const Ucst& s, const Run& run, std::size_t i);

/// Head-lossy run with the same endpoints, by postponing non-head losses.
Run to_head_lossy(const Ucst& s, const Run& run);

}  // namespace ucst
