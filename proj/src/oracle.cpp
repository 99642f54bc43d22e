#include "taskalg/oracle.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <tuple>

#include "taskalg/errors.hpp"

namespace taskalg {

namespace {

constexpr int kInf = std::numeric_limits<int>::max();

OracleResult search(const LabeledMdp& mdp, Cell s0, const Formula& formula, LabelSet forbidden) {
  if (!mdp.in_bounds(s0) || mdp.is_wall(s0)) throw InvalidEnvironment("oracle start cell is not walkable");
  const BoundFormula holds(formula, mdp);
  const int n = mdp.num_cells();
  // Node n stands for "terminated".
  std::vector<std::pair<int, int>> dist(static_cast<std::size_t>(n) + 1, {kInf, kInf});
  std::vector<int> parent(static_cast<std::size_t>(n) + 1, -1);
  using Item = std::tuple<int, int, int>;  // violations, steps, node
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  const int src = mdp.index(s0);
  dist[src] = {0, 0};
  heap.emplace(0, 0, src);
  while (!heap.empty()) {
    auto [v, s, u] = heap.top();
    heap.pop();
    if (std::pair{v, s} != dist[u]) continue;
    if (u == n) break;
    const Cell cu = mdp.cell(u);
    auto relax = [&](int w, int nv, int ns) {
      if (std::pair{nv, ns} < dist[w]) {
        dist[w] = {nv, ns};
        parent[w] = u;
        heap.emplace(nv, ns, w);
      }
    };
    if (mdp.region_of(cu) >= 0 && holds(mdp.label(cu))) relax(n, v, s + 1);
    for (Action a : {Action::Up, Action::Down, Action::Left, Action::Right}) {
      const StepResult r = mdp.step(cu, a);
      const int w = mdp.index(r.next);
      if (w == u || r.emitted.intersects(forbidden)) continue;
      const bool violation = !r.emitted.empty() && !holds(r.emitted);
      relax(w, v + (violation ? 1 : 0), s + 1);
    }
  }

  OracleResult out;
  if (dist[n].first == kInf) return out;
  out.feasible = true;
  out.min_violations = dist[n].first;
  out.min_steps = dist[n].second;
  std::vector<int> cells;
  for (int u = parent[n]; u != -1; u = parent[u]) cells.push_back(u);
  std::reverse(cells.begin(), cells.end());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Cell c = mdp.cell(cells[i]);
    LabelSet emitted;
    if (i > 0) {
      const LabelSet prev = mdp.label(mdp.cell(cells[i - 1]));
      if (mdp.label(c) != prev) emitted = mdp.label(c);
    }
    if (!emitted.empty()) ++out.min_emissions;
    out.witness.steps.push_back({c, emitted});
  }
  out.witness.terminated = true;
  out.witness.terminal_region = mdp.region_of(mdp.cell(cells.back()));
  return out;
}

class ReturnEnumerator {
 public:
  ReturnEnumerator(const LabeledMdp& mdp, const RewardSpec& spec, int bound, std::size_t cap)
      : mdp_(mdp), model_(spec, mdp), bound_(bound), cap_(cap),
        visited_(static_cast<std::size_t>(mdp.num_cells()), false),
        best_(static_cast<std::size_t>(mdp.num_regions()), spec.config.r_neverterm_floor()),
        ceiling_(spec.config.r_goal) {}

  std::vector<double> run(Cell s0) {
    std::vector<double> acc(best_.size(), 0.0);
    dfs(s0, acc, 0);
    return best_;
  }

 private:
  // One walk serves every goal: rewards along it are accumulated per goal.
  void dfs(Cell s, const std::vector<double>& acc, int depth) {
    if (++nodes_ > cap_) throw ExplosionGuard("path enumeration exceeded its node cap");
    if (depth + 1 > bound_) return;
    // Moves cost and no termination pays more than r_goal, so a walk that
    // cannot beat the incumbent for any goal is cut.
    bool open = false;
    for (std::size_t g = 0; g < acc.size() && !open; ++g) open = acc[g] + ceiling_ > best_[g];
    if (!open) return;
    visited_[mdp_.index(s)] = true;
    std::vector<double> next(acc.size());
    for (Action a : kActions) {
      const StepResult r = mdp_.step(s, a);
      if (!r.done && visited_[mdp_.index(r.next)]) continue;
      for (std::size_t g = 0; g < acc.size(); ++g) {
        next[g] = acc[g] + model_(Transition{s, a, static_cast<int>(g), r.next, r.emitted, r.done});
      }
      if (r.done) {
        for (std::size_t g = 0; g < acc.size(); ++g) best_[g] = std::max(best_[g], next[g]);
        continue;
      }
      dfs(r.next, next, depth + 1);
    }
    visited_[mdp_.index(s)] = false;
  }

  const LabeledMdp& mdp_;
  RewardModel model_;
  int bound_;
  std::size_t cap_;
  std::vector<bool> visited_;
  std::vector<double> best_;
  double ceiling_;
  std::size_t nodes_ = 0;
};

}  // namespace

OracleResult min_violation_path(const LabeledMdp& mdp, Cell s0, const Formula& formula) {
  return search(mdp, s0, formula, LabelSet{});
}

OracleResult safe_min_violation_path(const LabeledMdp& mdp, Cell s0, const Formula& formula,
                                     const std::set<std::string>& avoid) {
  LabelSet forbidden;
  for (const auto& p : avoid) {
    auto idx = mdp.prop_index(p);
    if (!idx) throw InvalidEnvironment("avoid set names undeclared proposition '" + p + "'");
    forbidden = forbidden | LabelSet::single(*idx);
  }
  return search(mdp, s0, formula, forbidden);
}

std::vector<double> optimal_returns(const LabeledMdp& mdp, const RewardSpec& spec, Cell s0, int step_bound,
                                    const EnumerationOptions& opts) {
  if (step_bound < 1) throw Error("step bound must be at least 1");
  if (!mdp.in_bounds(s0) || mdp.is_wall(s0)) throw InvalidEnvironment("oracle start cell is not walkable");
  return ReturnEnumerator(mdp, spec, step_bound, opts.node_cap).run(s0);
}

double optimal_return(const LabeledMdp& mdp, const RewardSpec& spec, Cell s0, int goal, int step_bound,
                      const EnumerationOptions& opts) {
  if (goal < 0 || goal >= mdp.num_regions()) throw InvalidEnvironment("goal region out of range");
  return optimal_returns(mdp, spec, s0, step_bound, opts)[static_cast<std::size_t>(goal)];
}

int constrained_path_bound(const LabeledMdp& mdp) {
  const int n = mdp.num_cells();
  const int regions = mdp.num_regions();
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < n; ++u) {
    for (Action a : {Action::Up, Action::Down, Action::Left, Action::Right}) {
      const int w = mdp.index(mdp.successor(mdp.cell(u), a));
      if (w != u) edges.emplace_back(u, w);
    }
  }
  bool any = false;
  int longest = 0;
  for (std::size_t p = 0; p < mdp.propositions().size(); ++p) {
    for (bool negated : {false, true}) {
      // A cell is an obstacle entry when stepping onto it changes the label
      // into one that violates the literal.
      auto violates = [&](int cell) {
        const LabelSet l = mdp.label(mdp.cell(cell));
        return !l.empty() && l.contains(static_cast<int>(p)) != negated;
      };
      for (int src = 0; src < n; ++src) {
        const int g1 = mdp.region_of(mdp.cell(src));
        if (g1 < 0) continue;
        std::vector<std::pair<int, int>> dist(static_cast<std::size_t>(n), {kInf, kInf});
        dist[src] = {0, 0};
        for (bool changed = true; changed;) {
          changed = false;
          for (auto [u, w] : edges) {
            if (dist[u].first == kInf) continue;
            const bool entry = mdp.label(mdp.cell(w)) != mdp.label(mdp.cell(u)) && violates(w);
            const std::pair<int, int> c{dist[u].first + (entry ? 1 : 0), dist[u].second + 1};
            if (c < dist[w]) {
              dist[w] = c;
              changed = true;
            }
          }
        }
        for (int g2 = 0; g2 < regions; ++g2) {
          if (g2 == g1) {
            any = true;
            continue;
          }
          bool reachable = true;
          int worst = 0;
          for (Cell t : mdp.region(g2).cells) {
            const auto& d = dist[mdp.index(t)];
            if (d.first == kInf) {
              reachable = false;
              break;
            }
            worst = std::max(worst, d.second);
          }
          if (!reachable) continue;
          any = true;
          longest = std::max(longest, worst);
        }
      }
    }
  }
  if (!any) throw EnvironmentDisconnected("no pair of goal regions is connected");
  return std::max(longest, 1);
}

}  // namespace taskalg
