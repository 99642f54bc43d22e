#pragma once

#include <optional>
#include <string>
#include <vector>

#include "taskalg/formula.hpp"
#include "taskalg/mdp.hpp"

namespace taskalg {

/// Step/goal rewards and the geometric penalty ladder spaced by `c_p`.
///
/// With `extra_term_tier` off (the default) the ladder is
///   r_badstep = C r, r_worststep = r_badterm = C^2 r, r_worstterm = C^3 r,
///   never-terminate floor = C^4 r.
/// Turning it on pushes bad termination one tier below the worst pass-through
/// (C^3 r) and shifts the two tiers below it down by one factor of C.
struct PenaltyConfig {
  double r_step = -0.1;
  double r_goal = 2.0;
  int c_p = 1;
  bool extra_term_tier = false;

  double r_badstep() const { return c_p * r_step; }
  double r_worststep() const { return c_p * r_badstep(); }
  double r_badterm() const { return extra_term_tier ? c_p * r_worststep() : r_worststep(); }
  double r_worstterm() const { return c_p * r_badterm(); }
  double r_neverterm_floor() const { return c_p * r_worstterm(); }

  /// Throws Error unless r_step < 0 < r_goal and c_p >= 1.
  void validate() const;

  bool operator==(const PenaltyConfig&) const = default;
};

enum class RewardKind { Positive, Negated, BoundaryU, BoundaryEmpty };

/// Reward definition for one task. A non-empty `g_ok` turns any kind into its
/// safety-extended variant.
struct RewardSpec {
  RewardKind kind = RewardKind::Positive;
  /// Satisfaction test for Positive tasks.
  std::optional<Formula> formula;
  /// Negated propositions for Negated tasks; more than one means a
  /// pre-trained conjunction of negations.
  std::vector<std::string> negated;
  /// Sorted region ids passed through at the lighter R_step rate.
  std::vector<int> g_ok;
  PenaltyConfig config;

  static RewardSpec positive(Formula f, PenaltyConfig cfg);
  static RewardSpec negated_task(std::vector<std::string> props, PenaltyConfig cfg);
  static RewardSpec boundary_u(PenaltyConfig cfg);
  static RewardSpec boundary_empty(PenaltyConfig cfg);
  RewardSpec with_g_ok(std::vector<int> regions) const;

  bool safety_extended() const { return !g_ok.empty(); }
  /// Library key: "A", "not-A", "not-A&not-B", "@U", "@empty", or a rendered formula.
  std::string key() const;
};

enum class RewardTier { Step, BadStep, WorstStep, Goal, BadTerm, WorstTerm };

double tier_value(const PenaltyConfig& cfg, RewardTier tier);

/// One transition of the extended MDP, conditioned on goal region `goal`.
struct Transition {
  Cell s;
  Action a = Action::Stay;
  int goal = -1;
  Cell next;
  LabelSet emitted;
  bool done = false;
};

Transition make_transition(const LabeledMdp& mdp, Cell s, Action a, int goal);

/// Evaluates a RewardSpec against one environment. Formula propositions are
/// bound once at construction.
class RewardModel {
 public:
  RewardModel(const RewardSpec& spec, const LabeledMdp& mdp);

  RewardTier tier(const Transition& t) const;
  double operator()(const Transition& t) const { return tier_value(spec_.config, tier(t)); }
  const RewardSpec& spec() const { return spec_; }

 private:
  RewardTier base_tier(const Transition& t) const;

  RewardSpec spec_;
  const LabeledMdp* mdp_;
  std::optional<BoundFormula> satisfied_;
  LabelSet negated_mask_;
  std::vector<bool> ok_region_;
};

double reward_positive(const RewardSpec& spec, const LabeledMdp& mdp, const Transition& t);
double reward_negated(const RewardSpec& spec, const LabeledMdp& mdp, const Transition& t);
double reward_boundary(const RewardSpec& spec, const LabeledMdp& mdp, const Transition& t);
double reward_safety_extended(const RewardSpec& spec, const LabeledMdp& mdp, const Transition& t);

/// Literal used to pick obstacle regions: `q` (regions containing q) or `!q`.
struct Literal {
  std::string prop;
  bool negated = false;
};

/// Longest, over cell pairs of g1 x g2, of the lexicographically shortest
/// path by (entries into regions violating `lit`, steps). `nullopt` when some
/// pair is unreachable.
std::optional<int> avoid_path_len(const LabeledMdp& mdp, int g1, int g2, const Literal& lit);

struct PenaltyMultiplier {
  int c_p = 1;
  /// Region pair and literal attaining the maximum (or -1 when c_p came from the floor of 1).
  int g1 = -1;
  int g2 = -1;
  Literal literal;
};

/// Smallest N >= 1 dominating every finite avoid_path_len over region pairs,
/// propositions and polarities. Throws EnvironmentDisconnected when no
/// region pair has a finite length (including an empty goal set).
PenaltyMultiplier penalty_multiplier_detail(const LabeledMdp& mdp);
int penalty_multiplier(const LabeledMdp& mdp);

}  // namespace taskalg
