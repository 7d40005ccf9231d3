#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ucst/system.hpp"

namespace ucst {

/// Post embedding with partial codirectness: find σ ∈ R with u(σ) ⊑ v(σ)
/// and u(σ′) ⊑ v(σ′) for every suffix σ′ of σ in R′.
struct PepInstance {
  Alphabet sigma;
  Alphabet gamma;
  std::vector<Word> u_map;  // indexed by sigma symbol
  std::vector<Word> v_map;
  Nfa R;
  Nfa Rp;

  Word u(const Word& sigma_word) const;
  Word v(const Word& sigma_word) const;
  void check() const;
};

bool is_solution(const PepInstance& inst, const Word& sigma_word);

/// Length-lexicographically least solution of length <= max_len.
std::optional<Word> bounded_solve(const PepInstance& inst, std::size_t max_len);

/// Projections of an E-E-Reach[Z1^l] instance onto rule letters.  Sender rule
/// i is letter i, Receiver rule j is letter |Δ1|+j.
struct PreSolutionContext {
  ReachInstance instance;
  Alphabet sigma;
  std::vector<Word> read_r, write_r, read_l, write_l;
  std::vector<char> is_sender;
  std::vector<char> in_tl;  // Sender Z tests on l
  Nfa paths;                // P1 shuffled with P2

  static PreSolutionContext build(const ReachInstance& inst);
  Symbol letter(RuleRef r) const;
  RuleRef rule_of(Symbol letter) const;
};

enum class PreCondition { None, C1, C2, C3, C4, C5 };
const char* to_string(PreCondition c);

struct PreSolutionCheck {
  bool ok = true;
  PreCondition failed = PreCondition::None;
  explicit operator bool() const { return ok; }
};

PreSolutionCheck is_pre_solution(const PreSolutionContext& ctx, const Word& sigma_word);

Word advance_stabilize(const PreSolutionContext& ctx, const Word& sigma_word);
Word postpone_stabilize(const PreSolutionContext& ctx, const Word& sigma_word);
/// Replays a postpone-stable pre-solution from C_in with lazy losses.
Run run_from_postpone_stable(const PreSolutionContext& ctx, const Word& sigma_word);
Word run_to_presolution(const PreSolutionContext& ctx, const Run& run);

}  // namespace ucst
