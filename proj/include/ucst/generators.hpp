#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ucst/system.hpp"
#include "ucst/textio.hpp"

namespace ucst {

/// One FIFO queue; each rule writes or reads one message.
struct QueueAutomaton {
  struct Rule {
    StateId source = 0;
    bool write = true;
    Symbol msg = 0;
    StateId target = 0;
  };
  Alphabet alphabet;
  std::vector<std::string> states;
  std::vector<Rule> rules;
  StateId initial = 0;
  StateId final = 0;

  void check() const;
  /// Straight-line automaton from "!a ?a !b": write a, read a, write b.
  static QueueAutomaton program(const Alphabet& m, const std::string& ops);
};

/// Final state with empty queue reachable, queue length never above max_queue.
bool qa_reaches(const QueueAutomaton& qa, std::size_t max_queue);
/// Largest queue length over runs with queue length at most cap; cap+1 means "exceeds".
std::size_t qa_max_queue(const QueueAutomaton& qa, std::size_t cap);

/// Reads simulated with parity tests on r and a proxy Receiver.
UcstFile gen_queue_parity(const QueueAutomaton& qa);
/// Reads simulated with head tests over a two-coloured alphabet.
UcstFile gen_queue_head(const QueueAutomaton& qa);
/// Reads simulated with l-write, N and Z tests on l; write-lossy semantics.
UcstFile gen_writelossy_queue(const QueueAutomaton& qa);

struct SemiThueSystem {
  Alphabet alphabet;
  std::vector<std::pair<Word, Word>> rules;

  bool length_preserving() const;
  /// "ab->ba, ba->ab" over the given alphabet.
  static SemiThueSystem parse(const Alphabet& m, const std::string& rules);
};

std::set<Word> thue_step(const SemiThueSystem& t, const Word& x);
/// Shortest-length, then lexicographically least x with x ->+ x in at most
/// max_steps rewrites, over words of length <= max_len.
std::optional<Word> thue_find_loop(const SemiThueSystem& t, std::size_t max_len, std::size_t max_steps);

struct ThueRecurrent {
  Ucst system;
  StateId p_in = 0, q_in = 0, p_loop = 0, q_loop = 0;
  UcstFile as_file() const;  // E-E instance (p_in,q_loop) to (p_loop,q_loop)
};

ThueRecurrent gen_thue_recurrent(const SemiThueSystem& t);

}  // namespace ucst
