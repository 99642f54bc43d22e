#include "taskalg/runtime.hpp"

#include <algorithm>
#include <cmath>

#include "taskalg/errors.hpp"

namespace taskalg {

std::string_view path_class_name(PathClass c) {
  switch (c) {
    case PathClass::Pure: return "Pure";
    case PathClass::MinimumViolation: return "MinimumViolation";
    case PathClass::PrioritizedSafety: return "PrioritizedSafety";
    case PathClass::SafetyOnly: return "SafetyOnly";
    case PathClass::Violating: return "Violating";
    case PathClass::NonTerminating: return "NonTerminating";
  }
  return "?";
}

TrajectoryReport rollout(const LabeledMdp& mdp, const PolicyFn& policy, Cell s0, int max_steps) {
  if (max_steps < 1) throw Error("max_steps must be at least 1");
  if (!mdp.in_bounds(s0)) throw InvalidEnvironment("start cell out of bounds");
  if (mdp.is_wall(s0)) throw InvalidEnvironment("start cell is a wall");
  TrajectoryReport rep;
  rep.start = s0;
  rep.execution.steps.push_back({s0, LabelSet{}});
  std::vector<bool> seen(static_cast<std::size_t>(mdp.num_cells()), false);
  seen[mdp.index(s0)] = true;
  Cell s = s0;
  for (;;) {
    if (static_cast<int>(rep.actions.size()) >= max_steps) {
      rep.hit_max_steps = true;
      break;
    }
    const Action a = policy(s);
    const StepResult r = mdp.step(s, a);
    rep.actions.push_back(a);
    if (r.done) {
      rep.execution.terminated = true;
      rep.execution.terminal_region = mdp.region_of(s);
      break;
    }
    rep.execution.steps.push_back({r.next, r.emitted});
    s = r.next;
    if (seen[mdp.index(s)]) {
      rep.chatter = true;
      break;
    }
    seen[mdp.index(s)] = true;
  }
  rep.projection = project(rep.execution);
  rep.nonempty = project_nonempty(rep.execution);
  return rep;
}

int default_max_steps(const LabeledMdp& mdp, const PenaltyConfig& cfg) {
  return std::max(cfg.c_p * cfg.c_p, mdp.num_cells() + 1);
}

double closed_form_reward(const PathStats& stats, const PenaltyConfig& cfg) {
  double total = cfg.r_step * stats.l_unlabeled + cfg.r_badstep() * stats.l_bad_label +
                 cfg.r_worststep() * stats.l_worst_pass_through;
  switch (stats.termination) {
    case Termination::Goal: total += cfg.r_goal; break;
    case Termination::BadTerm: total += cfg.r_badterm(); break;
    case Termination::WorstTerm: total += cfg.r_worstterm(); break;
    case Termination::NeverTerm: total += cfg.r_neverterm_floor(); break;
  }
  return total;
}

double score(TrajectoryReport& report, const RewardSpec& spec, const LabeledMdp& mdp) {
  const RewardModel model(spec, mdp);
  const int goal = report.execution.terminal_region.value_or(-1);
  report.rewards.clear();
  report.tiers.clear();
  report.stats = PathStats{};
  double sum = 0.0;
  Cell s = report.start;
  for (Action a : report.actions) {
    const Transition t = make_transition(mdp, s, a, goal);
    const RewardTier tier = model.tier(t);
    const double r = tier_value(spec.config, tier);
    report.tiers.push_back(tier);
    report.rewards.push_back(r);
    sum += r;
    switch (tier) {
      case RewardTier::Step: ++report.stats.l_unlabeled; break;
      case RewardTier::BadStep: ++report.stats.l_bad_label; break;
      case RewardTier::WorstStep: ++report.stats.l_worst_pass_through; break;
      case RewardTier::Goal: report.stats.termination = Termination::Goal; break;
      case RewardTier::BadTerm: report.stats.termination = Termination::BadTerm; break;
      case RewardTier::WorstTerm: report.stats.termination = Termination::WorstTerm; break;
    }
    s = t.next;
  }
  if (!report.execution.terminated) {
    report.stats.termination = Termination::NeverTerm;
    sum += spec.config.r_neverterm_floor();
  }
  const double closed = closed_form_reward(report.stats, spec.config);
  if (std::abs(closed - sum) > 1e-9 * std::max(1.0, std::abs(sum))) {
    throw Error("closed-form reward disagrees with the transition sum");
  }
  report.total_reward = sum;
  return sum;
}

OracleMinima oracle_minima(const LabeledMdp& mdp, Cell s0, const TaskSpec& task) {
  OracleMinima m;
  const OracleResult any = min_violation_path(mdp, s0, task.formula);
  if (any.feasible) m.min_emissions = any.min_emissions;
  if (task.avoid.empty()) {
    m.safe_min_emissions = m.min_emissions;
  } else {
    const OracleResult safe = safe_min_violation_path(mdp, s0, task.formula, task.avoid);
    if (safe.feasible) m.safe_min_emissions = safe.min_emissions;
  }
  return m;
}

PathClass classify(const TrajectoryReport& report, const TaskSpec& task, const LabeledMdp& mdp,
                   const OracleMinima& minima) {
  if (!report.execution.terminated) return PathClass::NonTerminating;
  const LabelSet final_label = mdp.region(*report.execution.terminal_region).label;
  const bool satisfied = eval(task.formula, final_label, mdp);
  LabelSet avoid_mask;
  for (const auto& p : task.avoid) {
    auto idx = mdp.prop_index(p);
    if (!idx) throw InvalidEnvironment("avoid set names undeclared proposition '" + p + "'");
    avoid_mask = avoid_mask | LabelSet::single(*idx);
  }
  bool unsafe = false;
  for (LabelSet l : report.nonempty) unsafe = unsafe || l.intersects(avoid_mask);
  if (!satisfied || unsafe) return PathClass::Violating;

  const int n = static_cast<int>(report.nonempty.size());
  if (n <= 1) return PathClass::Pure;
  if (task.avoid.empty()) {
    return minima.min_emissions && n == *minima.min_emissions ? PathClass::MinimumViolation : PathClass::SafetyOnly;
  }
  return minima.safe_min_emissions && n == *minima.safe_min_emissions ? PathClass::PrioritizedSafety
                                                                      : PathClass::SafetyOnly;
}

PathClass classify(TrajectoryReport& report, const TaskSpec& task, const LabeledMdp& mdp) {
  const PathClass c = classify(report, task, mdp, oracle_minima(mdp, report.start, task));
  report.path_class = c;
  return c;
}

}  // namespace taskalg
