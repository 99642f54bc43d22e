#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "taskalg/formula.hpp"
#include "taskalg/planner.hpp"

namespace taskalg {

/// Trained tables for one environment and one PenaltyConfig, keyed by
/// RewardSpec::key(): "A", "not-A", "not-A&not-B", "@U", "@empty".
class TaskLibrary {
 public:
  TaskLibrary() = default;

  /// Throws IncompatibleTables when `q` disagrees with existing members on
  /// shape, config, or environment fingerprint.
  void add(ExtendedQ q);
  void add_safety(SafetyExtendedQ s);

  bool contains(const std::string& key) const { return tables_.contains(key); }
  /// Throws MissingTask.
  const ExtendedQ& at(const std::string& key) const;
  const SafetyExtendedQ* safety(const std::string& key) const;

  std::vector<std::string> keys() const;
  std::vector<std::string> safety_keys() const;
  bool empty() const { return tables_.empty() && safety_.empty(); }
  const std::optional<PenaltyConfig>& config() const { return config_; }
  std::uint64_t fingerprint() const { return fingerprint_; }

 private:
  void admit(const ExtendedQ& q);

  std::map<std::string, ExtendedQ> tables_;
  std::map<std::string, SafetyExtendedQ> safety_;
  std::optional<PenaltyConfig> config_;
  std::uint64_t fingerprint_ = 0;
  int cells_ = -1;
  int regions_ = -1;
};

/// Trains the given keys (plus the boundary pair) with one shared config.
/// Keys use the library convention; "not-A&not-B" trains a joint negated task.
TaskLibrary train_library(const LabeledMdp& mdp, const PenaltyConfig& cfg,
                          const std::vector<std::string>& keys, const SolveOptions& opts = {});

/// Library spec for a key, or nullopt if the key is not a trainable task.
std::optional<RewardSpec> spec_for_key(const std::string& key, const PenaltyConfig& cfg);

/// Which operator produced a composed value.
struct Provenance {
  std::string op;  // "table", "neg", "conj", "disj"
  std::string key;
  std::vector<Provenance> children;
};

std::string render(const Provenance& p);

struct CompileOptions {
  /// Use the safety-extended slice for this G_ok wherever the library has one.
  std::optional<std::vector<int>> g_ok;
};

struct Composed {
  QTable<double> table;
  Provenance provenance;
  std::vector<std::string> warnings;
  PenaltyConfig config;
};

/// Folds a task formula over library tables. Under MinimumViolation, Not is
/// the analytic negation against "@U"/"@empty". Under PrioritizedSafety a
/// negated literal is the learned "not-p" table, and a set of negated
/// literals in one conjunction chain uses a joint "not-p&not-q" table when
/// present.
Composed compile(const TaskSpec& task, const TaskLibrary& lib, const CompileOptions& opts = {});

QTable<double> neg(const ExtendedQ& q, const ExtendedQ& upper, const ExtendedQ& lower);
QTable<double> conj(const ExtendedQ& a, const ExtendedQ& b);
QTable<double> disj(const ExtendedQ& a, const ExtendedQ& b);

/// Per-goal policy and its value, as exposed by any training method.
struct PolicyOracle {
  int cells = 0;
  int regions = 0;
  std::function<Action(int cell, int goal)> policy;
  std::function<double(int cell, int goal)> value;

  static PolicyOracle from_table(QTable<double> table);

  /// Goals attaining the largest value; among them the earliest action in
  /// the fixed order, then the lowest goal. Stay when there are no goals.
  Action act(int cell) const;
};

/// Per (s, g): the first oracle's action if its value is <= the second's.
PolicyOracle policy_select_conj(const PolicyOracle& o1, const PolicyOracle& o2);
/// Per (s, g): the first oracle's action if its value is >= the second's.
PolicyOracle policy_select_disj(const PolicyOracle& o1, const PolicyOracle& o2);

}  // namespace taskalg
