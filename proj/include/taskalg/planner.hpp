#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "taskalg/mdp.hpp"
#include "taskalg/penalty.hpp"
#include "taskalg/qtable.hpp"

namespace taskalg {

struct ExtendedQ {
  QTable<double> table;
  RewardSpec task;
  bool converged = false;
  double residual = 0.0;
  int sweeps = 0;
  std::uint64_t env_fingerprint = 0;

  const PenaltyConfig& config() const { return task.config; }
};

struct SolveOptions {
  double tol = 1e-9;
  /// Defaults to max(|S| * |G| * c_p, |S| + 2).
  std::optional<int> max_sweeps;
  /// Worker threads splitting the goal regions; 0 picks the hardware count.
  int workers = 1;
};

int default_max_sweeps(const LabeledMdp& mdp, const PenaltyConfig& cfg);

/// Synchronous undiscounted value iteration from the never-terminate floor.
/// A run that exhausts its sweep budget returns with `converged == false`.
ExtendedQ value_iterate(const LabeledMdp& mdp, const RewardSpec& spec, const SolveOptions& opts = {});

struct BoundaryTables {
  ExtendedQ upper;
  ExtendedQ lower;
};

BoundaryTables boundary_tables(const LabeledMdp& mdp, const PenaltyConfig& cfg, const SolveOptions& opts = {});

/// Largest one-step Bellman error of `table` under `spec`.
double bellman_residual(const LabeledMdp& mdp, const RewardSpec& spec, const QTable<double>& table);

struct SafetyOptions {
  std::size_t max_subsets = 1024;
  bool allow_explosion = false;
};

struct SafetyExtendedQ {
  /// Sorted by size, then lexicographically; subsets[0] is always empty.
  std::vector<std::vector<int>> subsets;
  std::vector<ExtendedQ> slices;
  RewardSpec base;

  bool converged() const;
  /// Slice for exactly this G_ok set, or nullptr.
  const ExtendedQ* slice(const std::vector<int>& g_ok) const;
};

/// All region subsets of size <= k, in SafetyExtendedQ order.
std::vector<std::vector<int>> enumerate_subsets(int regions, int k);

SafetyExtendedQ value_iterate_safety(const LabeledMdp& mdp, const RewardSpec& base, int k,
                                     const SolveOptions& opts = {}, const SafetyOptions& safety = {});

/// Greedy policy of a table. Per (cell, goal): first action of maximal value.
/// Per cell: the first action whose max over goals is largest, the goal being
/// the lowest region attaining it. Cells of an environment without regions stay put.
struct Policy {
  int regions = 0;
  std::vector<Action> per_cell;
  std::vector<int> chosen_goal;
  std::vector<double> cell_value;
  std::vector<Action> per_goal;

  Action operator()(const LabeledMdp& mdp, Cell c) const { return per_cell[mdp.index(c)]; }
  Action action(int cell) const { return per_cell[cell]; }
  Action goal_action(int cell, int goal) const { return per_goal[cell * regions + goal]; }
};

Policy extract_policy(const QTable<double>& table);

}  // namespace taskalg
