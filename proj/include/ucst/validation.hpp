#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ucst/explore.hpp"
#include "ucst/reductions.hpp"
#include "ucst/system.hpp"

namespace ucst {

using Rng = std::mt19937_64;

/// Uniform in [0, n); independent of the standard library's distributions.
std::size_t pick(Rng& rng, std::size_t n);

struct RandomSystemOptions {
  std::size_t max_sender_states = 3;
  std::size_t max_receiver_states = 3;
  std::size_t max_sender_rules = 4;
  std::size_t max_receiver_rules = 4;
  std::size_t alphabet = 2;
  std::vector<std::pair<TestClass, Channel>> sender_tests;    // allowed test kinds
  std::vector<std::pair<TestClass, Channel>> receiver_tests;
  bool acyclic_sender = false;    // rules only go from state i to state j > i
  bool acyclic_receiver = false;
};

Ucst random_system(Rng& rng, const RandomSystemOptions& opts);

/// Random control states; constraints are {ε} unless general_initial /
/// general_final, in which case they are drawn from a small pool of regexes.
ReachInstance random_instance(Rng& rng, const RandomSystemOptions& opts, bool general_initial,
                              bool general_final);

/// Run of up to max_len random lossy steps from a random configuration.
Run random_run(Rng& rng, const Ucst& s, std::size_t max_len, std::size_t max_initial_len = 2);

struct CheckReport {
  std::string name;
  std::size_t cases = 0;
  std::size_t passed = 0;
  std::size_t failed = 0;
  std::size_t inconclusive = 0;
  std::vector<std::string> failures;  // first few, for diagnostics
  std::string note;

  bool ok() const { return failed == 0; }
  void fail(const std::string& why);
  std::string line() const;
};

struct ValidateOptions {
  std::uint64_t seed = 1;
  std::size_t samples = 100;
  std::size_t bound = 4;
  bool mutant = false;  // skip the E_r* intersection in the PEP bridge
};

/// Source and target of one reduction stage on random in-fragment instances.
/// Hard disagreements: one side certified unreachable, the other reachable.
/// Target witnesses are pulled back and checked.
CheckReport check_stage_agreement(StageKind k, std::size_t samples, std::uint64_t seed,
                                  std::size_t bound);

/// Random UCST[Z1^l] E-E instances through the PEP bridge, both directions.
CheckReport check_pep_round_trip(std::size_t samples, std::uint64_t seed, std::size_t bound,
                                 bool mutant = false);

/// Commutation cases on sampled adjacent step pairs, and head-lossy runs.
CheckReport check_commutation(std::size_t pairs, std::uint64_t seed);

/// Lossy and write-lossy reachable sets from (p,q,u,ε) on a fixed family of
/// small UCST[Z] systems.
CheckReport check_write_lossy(std::size_t min_systems, std::size_t bound);

/// pre_star_z1l against bounded_coreach on systems with bounded channels.
CheckReport check_pre_star(std::size_t samples, std::uint64_t seed);

/// decide_eereach_z1 against bounded_reach on systems with bounded channels.
CheckReport check_decide(std::size_t samples, std::uint64_t seed);

std::vector<CheckReport> run_validation(const ValidateOptions& opts);

}  // namespace ucst
