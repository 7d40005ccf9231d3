#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ucst/explore.hpp"
#include "ucst/pep.hpp"
#include "ucst/system.hpp"

namespace ucst {

/// How a bound on the source instance translates to the target instance.
struct BoundInflation {
  std::size_t channel_mul = 1;
  std::size_t channel_add = 0;
  std::size_t steps_mul = 1;
  std::size_t steps_add = 0;
  std::size_t steps_per_channel = 0;  // extra steps per unit of source channel bound

  Bound apply(const Bound& b) const;
  std::string describe() const;
};

/// What a target rule stands for in the source system.
struct RuleOrigin {
  enum class Kind : std::uint8_t { Source, Auxiliary };
  Kind kind = Kind::Auxiliary;
  RuleRef source;
  std::string role;  // auxiliary rules: "test-loop", "pad-enter", "flush", ...

  static RuleOrigin of(RuleRef r) { return {Kind::Source, r, ""}; }
  static RuleOrigin aux(std::string role) { return {Kind::Auxiliary, {}, std::move(role)}; }
};

enum class StageKind { ElimReceiverTests, ElimInitial, ElimN1, ElimFinal };
const char* to_string(StageKind k);

/// One instance transformation together with what is needed to transport
/// target witnesses back to the source.
struct Reduction {
  StageKind kind;
  ReachInstance source;
  ReachInstance target;
  BoundInflation inflation;
  std::vector<StateId> sender_origin;    // target sender state -> source state, -1 if none
  std::vector<StateId> receiver_origin;  // target receiver state -> source state, -1 if none
  std::vector<RuleOrigin> sender_rule_origin;
  std::vector<RuleOrigin> receiver_rule_origin;
  std::vector<Symbol> r_buffer, l_buffer;  // per target sender state (buffer stage only)

  /// Source witness from a validated target witness (lossy mode).  Throws
  /// InternalError if the transported run fails to validate.
  Run pull_back(const Run& target_run) const;
};

Reduction elim_receiver_tests(const ReachInstance& inst);
Reduction elim_initial(const ReachInstance& inst);
Reduction elim_n1(const ReachInstance& inst);
Reduction elim_final(const ReachInstance& inst);

/// Witness check against the instance: valid lossy run, start and end
/// satisfy the four constraints.
RunCheck check_witness(const ReachInstance& inst, const Run& run);

// ------------------------------------------------------------- pipeline

enum class PipelineTarget { Z1N1, EG, EGZ1, EEZ1, EEZ1L, Pep };
std::optional<PipelineTarget> parse_pipeline_target(const std::string& s);

struct PipelineTrace {
  ReachInstance input;
  std::vector<Reduction> stages;
  std::vector<std::string> log;
  std::optional<PepInstance> pep;

  const ReachInstance& final_instance() const {
    return stages.empty() ? input : stages.back().target;
  }
  Run pull_back(const Run& final_run) const;
  /// Bound on the final instance corresponding to a bound on the input.
  Bound inflate(const Bound& b) const;
  std::string report() const;
};

PipelineTrace run_pipeline(const ReachInstance& inst, PipelineTarget to);

// ------------------------------------------------------------------ PEP

struct PepBuildOptions {
  bool intersect_er = true;  // false only for mutation testing
};

PepInstance ucst_to_pep(const ReachInstance& inst, PepBuildOptions opts = {});
ReachInstance pep_to_ucst(const PepInstance& inst);

// ------------------------------------------------------------------- Pre*

/// Upward-closed subset of Conf_{r=ε}, by its minimal elements.
struct UpwardClosedSet {
  std::vector<Configuration> minimal;

  static bool leq(const Configuration& a, const Configuration& b);  // a ⊑ b
  bool contains(const Configuration& c) const;
  /// Adds c unless already covered; drops elements above c.  True if added.
  bool insert(const Configuration& c);
  void insert_all(const UpwardClosedSet& o);
  bool is_antichain() const;
  bool same_as(const UpwardClosedSet& o) const;
  std::vector<Configuration> sorted() const;
};

/// State-indexed regular l-languages over Conf_{r=ε}.
using RegularTarget = std::map<std::pair<StateId, StateId>, Nfa>;
RegularTarget to_regular(const Ucst& s, const UpwardClosedSet& w);

struct PreStarOptions {
  std::size_t max_candidate_len = 4;
};

struct PreStarResult {
  UpwardClosedSet set;
  bool inconclusive = false;
  std::size_t oracle_calls = 0;
};

PreStarResult pre_star_z1l(const Ucst& s, const RegularTarget& w, const ReachOracle& oracle,
                           PreStarOptions opts = {});

struct DecideResult {
  bool reachable = false;
  bool inconclusive = false;
  std::size_t stabilization_index = 0;  // number of T_k updates until stable
  UpwardClosedSet t;
  std::size_t oracle_calls = 0;
};

DecideResult decide_eereach_z1(const ReachInstance& inst, const ReachOracle& oracle,
                               PreStarOptions opts = {});

/// G-G-Reach[Z1^l] oracle through the PEP bridge: positive answers exact,
/// negative answers relative to max_len.
ReachOracle make_pep_oracle(std::size_t max_len);

}  // namespace ucst
