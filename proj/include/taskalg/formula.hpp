#pragma once

#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "taskalg/mdp.hpp"

namespace taskalg {

/// Immutable Boolean formula over named propositions. Copies share nodes.
class Formula {
 public:
  enum class Kind { Prop, Not, And, Or };

  static Formula prop(std::string name);
  static Formula negation(Formula child);
  static Formula conjunction(Formula lhs, Formula rhs);
  static Formula disjunction(Formula lhs, Formula rhs);

  Kind kind() const { return node_->kind; }
  const std::string& name() const { return node_->name; }
  const Formula& child() const { return *node_->lhs; }
  const Formula& lhs() const { return *node_->lhs; }
  const Formula& rhs() const { return *node_->rhs; }

  bool is_literal() const {
    return kind() == Kind::Prop || (kind() == Kind::Not && child().kind() == Kind::Prop);
  }

  /// Structural equality.
  friend bool operator==(const Formula& a, const Formula& b);

 private:
  struct Node {
    Kind kind;
    std::string name;
    std::shared_ptr<const Formula> lhs;
    std::shared_ptr<const Formula> rhs;
  };
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Grammar: identifiers `[A-Za-z_][A-Za-z0-9_]*`, unary `!` or `~`, infix `&`
/// and `|`, parentheses. Precedence `!` > `&` > `|`, binary operators are
/// left-associative.
Formula parse(std::string_view text);

/// Canonical text form; `parse(render(f)) == f`.
std::string render(const Formula& f);

Formula to_nnf(const Formula& f);
bool is_nnf(const Formula& f);

std::set<std::string> propositions_of(const Formula& f);
/// Propositions that occur directly under a negation (meaningful in NNF).
std::set<std::string> negated_propositions(const Formula& f);

/// `true` iff every proposition of `f` is satisfied by membership in `l`.
bool eval(const Formula& f, const std::set<std::string>& l);
/// Evaluates against a label of `mdp`. Throws InvalidEnvironment when `f`
/// names a proposition the environment does not declare.
bool eval(const Formula& f, LabelSet l, const LabeledMdp& mdp);

/// Precomputed truth table over the environment's label sets, for hot loops.
class BoundFormula {
 public:
  BoundFormula(const Formula& f, const LabeledMdp& mdp);
  bool operator()(LabelSet l) const;

 private:
  std::vector<int> prop_ids_;
  std::vector<bool> table_;
};

enum class Semantics { MinimumViolation, PrioritizedSafety };

std::string_view semantics_name(Semantics s);
Semantics parse_semantics(std::string_view name);

struct TaskSpec {
  Formula formula;
  Semantics semantics;
  /// Propositions whose emission is forbidden. Empty under MinimumViolation.
  std::set<std::string> avoid;
  /// Some top-level conjunct requires and forbids the same proposition.
  bool contradictory = false;
};

TaskSpec make_task_spec(const Formula& f, Semantics semantics);

struct GoalPartition {
  std::vector<int> satisfying;
  std::vector<int> non_satisfying;
  /// No region satisfies the formula; reported as a warning.
  bool semantically_empty = false;
};

GoalPartition partition_goals(const Formula& f, const LabeledMdp& mdp);

}  // namespace taskalg
