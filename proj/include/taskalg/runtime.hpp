#pragma once

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "taskalg/formula.hpp"
#include "taskalg/mdp.hpp"
#include "taskalg/oracle.hpp"
#include "taskalg/penalty.hpp"

namespace taskalg {

enum class PathClass { Pure, MinimumViolation, PrioritizedSafety, SafetyOnly, Violating, NonTerminating };

std::string_view path_class_name(PathClass c);

using PolicyFn = std::function<Action(Cell)>;

struct TrajectoryReport {
  Cell start;
  Execution execution;
  /// One entry per transition, including the terminating Stay.
  std::vector<Action> actions;
  std::vector<LabelSet> projection;
  std::vector<LabelSet> nonempty;
  /// Per-transition rewards and tiers; filled by score().
  std::vector<double> rewards;
  std::vector<RewardTier> tiers;
  PathStats stats;
  double total_reward = 0.0;
  std::optional<PathClass> path_class;
  bool chatter = false;
  bool hit_max_steps = false;

  bool terminated() const { return execution.terminated; }
};

/// Follows `policy` from `s0` until termination, an exact cell revisit
/// (chatter), or `max_steps` transitions.
TrajectoryReport rollout(const LabeledMdp& mdp, const PolicyFn& policy, Cell s0, int max_steps);

/// Default rollout bound: c_p squared, but never below the cell count + 1 so
/// that a chatter loop is always detected before the bound.
int default_max_steps(const LabeledMdp& mdp, const PenaltyConfig& cfg);

/// Scores the rollout under `spec`. Rewards are conditioned on the terminal
/// region (or on no region when the run never terminated, which also adds
/// the never-terminate floor). Fills rewards, tiers, stats and total_reward,
/// and throws Error if the closed form disagrees with the transition sum.
double score(TrajectoryReport& report, const RewardSpec& spec, const LabeledMdp& mdp);

/// Closed-form total from path statistics.
double closed_form_reward(const PathStats& stats, const PenaltyConfig& cfg);

/// Oracle minima the classifier compares against.
struct OracleMinima {
  std::optional<int> min_emissions;
  std::optional<int> safe_min_emissions;
};

OracleMinima oracle_minima(const LabeledMdp& mdp, Cell s0, const TaskSpec& task);

PathClass classify(const TrajectoryReport& report, const TaskSpec& task, const LabeledMdp& mdp,
                   const OracleMinima& minima);
/// Computes the oracle minima from the report's start cell, then classifies.
PathClass classify(TrajectoryReport& report, const TaskSpec& task, const LabeledMdp& mdp);

}  // namespace taskalg
