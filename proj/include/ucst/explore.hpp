#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <string>

#include "ucst/system.hpp"

namespace ucst {

struct Bound {
  std::size_t max_channel_len = 4;
  std::size_t max_steps = 0;   // longest witness considered; 0 = unlimited
  std::size_t max_states = 0;  // exploration budget; 0 = unlimited
};

struct Verdict {
  enum class Kind { Reachable, NotWithinBound, Unreachable };
  Kind kind = Kind::NotWithinBound;
  std::optional<Run> witness;  // set iff Reachable
  std::size_t explored = 0;

  bool reachable() const { return kind == Kind::Reachable; }
};

const char* to_string(Verdict::Kind k);

Verdict bounded_reach(const ReachInstance& inst, const Bound& bound, Mode mode = Mode::Lossy);

/// All configurations within the channel bound from which a target is
/// reachable without leaving the bound.
std::set<Configuration> bounded_coreach(const Ucst& s,
                                        const std::function<bool(const Configuration&)>& target,
                                        const Bound& bound, Mode mode = Mode::Lossy);

struct PostResult {
  std::set<Configuration> configs;
  bool pruned = false;  // some successor exceeded the bound
};

/// Configurations reachable from `starts` without leaving the channel bound.
PostResult bounded_post(const Ucst& s, const std::vector<Configuration>& starts, const Bound& bound,
                        Mode mode = Mode::Lossy);

struct LassoWitness {
  Run stem;   // from the initial configuration to X
  Run cycle;  // from X back to X, at least one step
};

struct RecurrentResult {
  std::optional<LassoWitness> lasso;
  bool exhaustive = false;  // no pruning: absence of a lasso is certified
  std::size_t explored = 0;
};

/// Lasso from (p_in,q_in,ε,ε) through a configuration with control (p,q).
RecurrentResult bounded_recurrent(const Ucst& s, StateId p_in, StateId q_in, StateId p, StateId q,
                                  const Bound& bound, Mode mode = Mode::Lossy);

// ---------------------------------------------------------------- oracles

enum class OracleAnswer { Yes, No, Inconclusive };
using ReachOracle = std::function<OracleAnswer(const ReachInstance&)>;

/// bounded_reach as a decision oracle.  NOT-WITHIN-BOUND maps to No unless
/// strict, in which case it is Inconclusive.
ReachOracle make_bounded_oracle(Bound bound, Mode mode = Mode::Lossy, bool strict = false);

class OracleInconclusive : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Recurrent reachability for test-free systems: (p,q) reachable and p on a
/// Sender cycle or q on a Receiver cycle of Nop rules.
bool ucs_recurrent_decide(const Ucst& s, StateId p_in, StateId q_in, StateId p, StateId q,
                          const ReachOracle& oracle);

}  // namespace ucst
