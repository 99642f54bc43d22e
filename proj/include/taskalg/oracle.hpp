#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "taskalg/formula.hpp"
#include "taskalg/mdp.hpp"
#include "taskalg/penalty.hpp"

namespace taskalg {

struct OracleResult {
  bool feasible = false;
  /// Non-empty emissions whose label does not satisfy the formula.
  int min_violations = 0;
  /// Transitions of the witness, counting the terminating Stay.
  int min_steps = 0;
  /// |non-empty projection| of the witness.
  int min_emissions = 0;
  Execution witness;
};

/// Lexicographic (violations, steps) search. Termination is a Stay inside a
/// region whose label satisfies `formula`. Ties prefer the lower row-major cell.
OracleResult min_violation_path(const LabeledMdp& mdp, Cell s0, const Formula& formula);

/// As above, with every transition that emits an avoided proposition removed.
OracleResult safe_min_violation_path(const LabeledMdp& mdp, Cell s0, const Formula& formula,
                                     const std::set<std::string>& avoid);

struct EnumerationOptions {
  std::size_t node_cap = 20'000'000;
};

/// Best total reward over every simple path from `s0` that terminates
/// (anywhere) within `step_bound` transitions, conditioned on goal `goal`;
/// the never-terminate floor when nothing better exists. Throws ExplosionGuard
/// past the node cap.
double optimal_return(const LabeledMdp& mdp, const RewardSpec& spec, Cell s0, int goal, int step_bound,
                      const EnumerationOptions& opts = {});

/// optimal_return for every goal region from one enumeration.
std::vector<double> optimal_returns(const LabeledMdp& mdp, const RewardSpec& spec, Cell s0, int step_bound,
                                    const EnumerationOptions& opts = {});

/// Independent recomputation of the penalty multiplier by edge relaxation
/// to a fixed point. Throws EnvironmentDisconnected like penalty_multiplier.
int constrained_path_bound(const LabeledMdp& mdp);

}  // namespace taskalg
