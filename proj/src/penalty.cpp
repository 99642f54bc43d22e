#include "taskalg/penalty.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <tuple>

#include "taskalg/errors.hpp"

namespace taskalg {

void PenaltyConfig::validate() const {
  if (!(r_step < 0.0)) throw Error("r_step must be negative");
  if (!(r_goal > 0.0)) throw Error("r_goal must be positive");
  if (c_p < 1) throw Error("c_p must be at least 1");
}

RewardSpec RewardSpec::positive(Formula f, PenaltyConfig cfg) {
  RewardSpec s;
  s.kind = RewardKind::Positive;
  s.formula = std::move(f);
  s.config = cfg;
  return s;
}

RewardSpec RewardSpec::negated_task(std::vector<std::string> props, PenaltyConfig cfg) {
  if (props.empty()) throw Error("a negated task needs at least one proposition");
  std::sort(props.begin(), props.end());
  props.erase(std::unique(props.begin(), props.end()), props.end());
  RewardSpec s;
  s.kind = RewardKind::Negated;
  s.negated = std::move(props);
  s.config = cfg;
  return s;
}

RewardSpec RewardSpec::boundary_u(PenaltyConfig cfg) {
  RewardSpec s;
  s.kind = RewardKind::BoundaryU;
  s.config = cfg;
  return s;
}

RewardSpec RewardSpec::boundary_empty(PenaltyConfig cfg) {
  RewardSpec s;
  s.kind = RewardKind::BoundaryEmpty;
  s.config = cfg;
  return s;
}

RewardSpec RewardSpec::with_g_ok(std::vector<int> regions) const {
  std::sort(regions.begin(), regions.end());
  regions.erase(std::unique(regions.begin(), regions.end()), regions.end());
  RewardSpec s = *this;
  s.g_ok = std::move(regions);
  return s;
}

std::string RewardSpec::key() const {
  switch (kind) {
    case RewardKind::BoundaryU: return "@U";
    case RewardKind::BoundaryEmpty: return "@empty";
    case RewardKind::Negated: {
      std::string k;
      for (const auto& p : negated) {
        if (!k.empty()) k += "&";
        k += "not-" + p;
      }
      return k;
    }
    case RewardKind::Positive: return formula ? render(*formula) : std::string{};
  }
  return {};
}

double tier_value(const PenaltyConfig& cfg, RewardTier tier) {
  switch (tier) {
    case RewardTier::Step: return cfg.r_step;
    case RewardTier::BadStep: return cfg.r_badstep();
    case RewardTier::WorstStep: return cfg.r_worststep();
    case RewardTier::Goal: return cfg.r_goal;
    case RewardTier::BadTerm: return cfg.r_badterm();
    case RewardTier::WorstTerm: return cfg.r_worstterm();
  }
  return cfg.r_step;
}

Transition make_transition(const LabeledMdp& mdp, Cell s, Action a, int goal) {
  const StepResult r = mdp.step(s, a);
  return Transition{s, a, goal, r.next, r.emitted, r.done};
}

RewardModel::RewardModel(const RewardSpec& spec, const LabeledMdp& mdp) : spec_(spec), mdp_(&mdp) {
  spec_.config.validate();
  if (spec_.kind == RewardKind::Positive) {
    if (!spec_.formula) throw Error("positive reward spec without a formula");
    satisfied_.emplace(*spec_.formula, mdp);
  }
  if (spec_.kind == RewardKind::Negated) {
    if (spec_.negated.empty()) throw Error("negated reward spec without propositions");
    for (const auto& p : spec_.negated) {
      auto idx = mdp.prop_index(p);
      if (!idx) throw InvalidEnvironment("negated task uses undeclared proposition '" + p + "'");
      negated_mask_ = negated_mask_ | LabelSet::single(*idx);
    }
  }
  ok_region_.assign(static_cast<std::size_t>(mdp.num_regions()), false);
  for (int g : spec_.g_ok) {
    if (g < 0 || g >= mdp.num_regions()) throw InvalidEnvironment("G_ok names a region that does not exist");
    ok_region_[static_cast<std::size_t>(g)] = true;
  }
}

RewardTier RewardModel::base_tier(const Transition& t) const {
  const LabeledMdp& mdp = *mdp_;
  if (t.done) {
    const int here = mdp.region_of(t.s);
    if (here != t.goal) return RewardTier::WorstTerm;
    const LabelSet label = mdp.region(here).label;
    bool ok = false;
    switch (spec_.kind) {
      case RewardKind::Positive: ok = (*satisfied_)(label); break;
      case RewardKind::Negated: ok = !label.intersects(negated_mask_); break;
      case RewardKind::BoundaryU: ok = true; break;
      case RewardKind::BoundaryEmpty: ok = false; break;
    }
    return ok ? RewardTier::Goal : RewardTier::BadTerm;
  }
  if (spec_.kind == RewardKind::Negated && t.emitted.intersects(negated_mask_)) {
    return RewardTier::WorstStep;
  }
  if (!t.emitted.empty() && mdp.region_of(t.next) != t.goal) return RewardTier::BadStep;
  return RewardTier::Step;
}

RewardTier RewardModel::tier(const Transition& t) const {
  const RewardTier base = base_tier(t);
  if (base == RewardTier::BadStep && !spec_.g_ok.empty()) {
    const int entered = mdp_->region_of(t.next);
    if (entered >= 0 && ok_region_[static_cast<std::size_t>(entered)]) return RewardTier::Step;
  }
  return base;
}

namespace {

void require_kind(bool ok, const char* what) {
  if (!ok) throw Error(std::string("reward spec is not ") + what);
}

}  // namespace

double reward_positive(const RewardSpec& spec, const LabeledMdp& mdp, const Transition& t) {
  require_kind(spec.kind == RewardKind::Positive && !spec.safety_extended(), "a positive task");
  return RewardModel(spec, mdp)(t);
}

double reward_negated(const RewardSpec& spec, const LabeledMdp& mdp, const Transition& t) {
  require_kind(spec.kind == RewardKind::Negated && !spec.safety_extended(), "a negated task");
  return RewardModel(spec, mdp)(t);
}

double reward_boundary(const RewardSpec& spec, const LabeledMdp& mdp, const Transition& t) {
  require_kind((spec.kind == RewardKind::BoundaryU || spec.kind == RewardKind::BoundaryEmpty) &&
                   !spec.safety_extended(),
               "a boundary task");
  return RewardModel(spec, mdp)(t);
}

double reward_safety_extended(const RewardSpec& spec, const LabeledMdp& mdp, const Transition& t) {
  require_kind(spec.safety_extended(), "safety-extended");
  return RewardModel(spec, mdp)(t);
}

namespace {

using Cost = std::pair<int, int>;  // (violating entries, steps)
constexpr Cost kUnreached{std::numeric_limits<int>::max(), std::numeric_limits<int>::max()};

// Lexicographic Dijkstra from one source cell.
std::vector<Cost> lexicographic_distances(const LabeledMdp& mdp, Cell source,
                                          const std::vector<bool>& violating_region) {
  std::vector<Cost> dist(static_cast<std::size_t>(mdp.num_cells()), kUnreached);
  using Item = std::tuple<int, int, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  const int src = mdp.index(source);
  dist[src] = {0, 0};
  heap.emplace(0, 0, src);
  while (!heap.empty()) {
    auto [v, s, u] = heap.top();
    heap.pop();
    if (Cost{v, s} != dist[u]) continue;
    const Cell cu = mdp.cell(u);
    for (Action a : {Action::Up, Action::Down, Action::Left, Action::Right}) {
      const StepResult r = mdp.step(cu, a);
      const int w = mdp.index(r.next);
      if (w == u) continue;
      const int entered = mdp.region_of(r.next);
      const bool bad = !r.emitted.empty() && entered >= 0 && violating_region[entered];
      const Cost c{v + (bad ? 1 : 0), s + 1};
      if (c < dist[w]) {
        dist[w] = c;
        heap.emplace(c.first, c.second, w);
      }
    }
  }
  return dist;
}

std::vector<bool> violating_regions(const LabeledMdp& mdp, const Literal& lit) {
  auto idx = mdp.prop_index(lit.prop);
  if (!idx) throw InvalidEnvironment("unknown proposition '" + lit.prop + "'");
  std::vector<bool> out;
  for (const auto& r : mdp.regions()) out.push_back(r.label.contains(*idx) != lit.negated);
  return out;
}

}  // namespace

std::optional<int> avoid_path_len(const LabeledMdp& mdp, int g1, int g2, const Literal& lit) {
  if (g1 < 0 || g2 < 0 || g1 >= mdp.num_regions() || g2 >= mdp.num_regions()) {
    throw InvalidEnvironment("region id out of range");
  }
  if (g1 == g2) return 0;
  const auto violating = violating_regions(mdp, lit);
  int longest = 0;
  for (Cell s1 : mdp.region(g1).cells) {
    const auto dist = lexicographic_distances(mdp, s1, violating);
    for (Cell s2 : mdp.region(g2).cells) {
      const Cost c = dist[mdp.index(s2)];
      if (c == kUnreached) return std::nullopt;
      longest = std::max(longest, c.second);
    }
  }
  return longest;
}

PenaltyMultiplier penalty_multiplier_detail(const LabeledMdp& mdp) {
  const int n = mdp.num_regions();
  PenaltyMultiplier best;
  bool any_finite = false;
  int longest = 0;
  for (const auto& prop : mdp.propositions()) {
    for (bool neg : {false, true}) {
      const Literal lit{prop, neg};
      const auto violating = violating_regions(mdp, lit);
      for (int g1 = 0; g1 < n; ++g1) {
        // One Dijkstra per source cell serves every target region.
        std::vector<int> worst(static_cast<std::size_t>(n), 0);
        std::vector<bool> unreachable(static_cast<std::size_t>(n), false);
        for (Cell s1 : mdp.region(g1).cells) {
          const auto dist = lexicographic_distances(mdp, s1, violating);
          for (int g2 = 0; g2 < n; ++g2) {
            if (g2 == g1) continue;
            for (Cell s2 : mdp.region(g2).cells) {
              const Cost c = dist[mdp.index(s2)];
              if (c == kUnreached) {
                unreachable[g2] = true;
              } else {
                worst[g2] = std::max(worst[g2], c.second);
              }
            }
          }
        }
        for (int g2 = 0; g2 < n; ++g2) {
          if (g2 != g1 && unreachable[g2]) continue;
          any_finite = true;
          if (worst[g2] > longest) {
            longest = worst[g2];
            best.g1 = g1;
            best.g2 = g2;
            best.literal = lit;
          }
        }
      }
    }
  }
  if (!any_finite) {
    throw EnvironmentDisconnected(n == 0 ? "environment has no goal regions"
                                         : "no pair of goal regions is connected");
  }
  best.c_p = std::max(longest, 1);
  return best;
}

int penalty_multiplier(const LabeledMdp& mdp) { return penalty_multiplier_detail(mdp).c_p; }

}  // namespace taskalg
