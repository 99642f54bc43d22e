#include <doctest.h>

#include <functional>
#include <queue>

#include "support/fixtures.hpp"
#include "taskalg/errors.hpp"
#include "taskalg/oracle.hpp"
#include "taskalg/planner.hpp"

using namespace taskalg;
using taskalg::testing::example_grid;

namespace {

// C sits in the top-right corner with A on both of its neighbours.
LabeledMdp blocked() {
  return build_mdp(3, 3, {"A", "C"}, {{{2, 2}, {"C"}}, {{1, 2}, {"A"}}, {{2, 1}, {"A"}}});
}

// Best (violations, transitions incl. the final Stay) over every simple walk.
std::pair<int, int> enumerate_best(const LabeledMdp& m, Cell s0, const Formula& f) {
  const BoundFormula holds(f, m);
  std::pair<int, int> best{1 << 30, 1 << 30};
  std::vector<bool> seen(static_cast<std::size_t>(m.num_cells()), false);
  std::function<void(Cell, int, int)> go = [&](Cell s, int violations, int steps) {
    if (m.region_of(s) >= 0 && holds(m.label(s))) best = std::min(best, {violations, steps + 1});
    seen[m.index(s)] = true;
    for (Action a : {Action::Up, Action::Down, Action::Left, Action::Right}) {
      const StepResult r = m.step(s, a);
      if (seen[m.index(r.next)]) continue;
      const bool bad = !r.emitted.empty() && !holds(r.emitted);
      go(r.next, violations + (bad ? 1 : 0), steps + 1);
    }
    seen[m.index(s)] = false;
  };
  go(s0, 0, 0);
  return best;
}

}  // namespace

TEST_SUITE("oracle") {
  TEST_CASE("example_grid minimum violations") {
    const LabeledMdp m = example_grid();
    const OracleResult pure = min_violation_path(m, {4, 3}, parse("C"));
    CHECK(pure.feasible);
    CHECK(pure.min_violations == 0);
    CHECK(pure.min_emissions == 1);

    const OracleResult through_a = min_violation_path(m, {0, 0}, parse("!A & C"));
    CHECK(through_a.min_violations == 1);
    CHECK(through_a.min_emissions == 2);
    CHECK(through_a.min_steps == 5);
    CHECK(project_nonempty(through_a.witness) == std::vector<LabelSet>{m.label({1, 0}), m.label({3, 1})});
    CHECK(through_a.witness.terminated);
    CHECK(through_a.witness.terminal_region == 3);

    const OracleResult here = min_violation_path(m, {3, 1}, parse("C"));
    CHECK(here.min_violations == 0);
    CHECK(here.min_steps == 1);
    CHECK(here.min_emissions == 0);
  }

  TEST_CASE("example_grid safe route") {
    const LabeledMdp m = example_grid();
    const OracleResult around_a = safe_min_violation_path(m, {0, 0}, parse("C"), {"A"});
    REQUIRE(around_a.feasible);
    CHECK(project_nonempty(around_a.witness) == std::vector<LabelSet>{m.label({2, 3}), m.label({3, 1})});

    for (const char* f : {"C", "!A & C", "A | B"}) {
      const OracleResult a = min_violation_path(m, {0, 0}, parse(f));
      const OracleResult b = safe_min_violation_path(m, {0, 0}, parse(f), {});
      CHECK(a.min_violations == b.min_violations);
      CHECK(a.min_steps == b.min_steps);
      CHECK(project(a.witness) == project(b.witness));
    }
    CHECK_THROWS_AS(safe_min_violation_path(m, {0, 0}, parse("C"), {"Z"}), InvalidEnvironment);
  }

  TEST_CASE("a goal walled in by the avoided proposition") {
    const LabeledMdp m = blocked();
    const OracleResult r = safe_min_violation_path(m, {0, 0}, parse("C"), {"A"});
    CHECK_FALSE(r.feasible);
    CHECK(min_violation_path(m, {0, 0}, parse("C")).feasible);
    // Independent check: flood fill that refuses to step onto A never reaches C.
    std::vector<bool> seen(static_cast<std::size_t>(m.num_cells()), false);
    std::queue<Cell> open;
    open.push({0, 0});
    seen[0] = true;
    bool reached = false;
    while (!open.empty()) {
      const Cell c = open.front();
      open.pop();
      reached = reached || c == Cell{2, 2};
      for (Action a : {Action::Up, Action::Down, Action::Left, Action::Right}) {
        const Cell n = m.successor(c, a);
        if (seen[m.index(n)] || m.label(n).contains(0)) continue;
        seen[m.index(n)] = true;
        open.push(n);
      }
    }
    CHECK_FALSE(reached);
  }

  TEST_CASE("witnesses are lexicographically optimal") {
    std::vector<LabeledMdp> envs{example_grid(), blocked()};
    testing::for_each_small_instance(4, 3, [&](const LabeledMdp& m) {
      if (envs.size() < 40) envs.push_back(m);
      return envs.size() < 40;
    });
    for (const LabeledMdp& m : envs) {
      for (const char* text : {"A", "!A", "A & !B"}) {
        const Formula f = parse(text);
        bool declared = true;
        for (const auto& p : propositions_of(f)) declared = declared && m.prop_index(p).has_value();
        if (!declared) continue;
        for (int i = 0; i < m.num_cells(); ++i) {
          const OracleResult r = min_violation_path(m, m.cell(i), f);
          const auto best = enumerate_best(m, m.cell(i), f);
          if (!r.feasible) {
            CHECK(best.first == (1 << 30));
            continue;
          }
          CHECK(std::pair{r.min_violations, r.min_steps} == best);
          CHECK(static_cast<int>(r.witness.steps.size()) == r.min_steps);
        }
      }
    }
  }

  TEST_CASE("optimal return basics") {
    const LabeledMdp m = build_mdp(3, 3, {"A", "B"}, {{{0, 0}, {"A"}}, {{2, 2}, {"B"}}}, {{1, 2}, {2, 1}});
    PenaltyConfig cfg;
    cfg.c_p = 2;
    const RewardSpec a = RewardSpec::positive(parse("A"), cfg);
    CHECK(optimal_return(m, a, {0, 0}, 0, 1) == cfg.r_goal);
    // Region 1 is walled off from (0,0); stopping at once in region 0 is the best it can do.
    CHECK(optimal_return(m, a, {0, 0}, 1, 10) == cfg.r_worstterm());
    CHECK(optimal_return(m, a, {0, 0}, 1, 10) > cfg.r_neverterm_floor());
    CHECK_THROWS_AS(optimal_return(m, a, {0, 0}, 5, 10), InvalidEnvironment);
    CHECK_THROWS_AS(optimal_return(m, a, {0, 0}, 0, 0), Error);
    EnumerationOptions tiny;
    tiny.node_cap = 3;
    CHECK_THROWS_AS(optimal_return(m, a, {1, 1}, 0, 10, tiny), ExplosionGuard);
  }

  TEST_CASE("optimal return equals the planner on a two-region grid") {
    const LabeledMdp m = build_mdp(3, 3, {"A", "B"}, {{{0, 2}, {"A"}}, {{2, 0}, {"B"}}});
    PenaltyConfig cfg;
    cfg.c_p = penalty_multiplier(m);
    for (const RewardSpec& spec : {RewardSpec::positive(parse("A"), cfg), RewardSpec::negated_task({"B"}, cfg),
                                   RewardSpec::boundary_empty(cfg)}) {
      const ExtendedQ q = value_iterate(m, spec);
      for (int i = 0; i < m.num_cells(); ++i) {
        for (int g = 0; g < m.num_regions(); ++g) {
          CHECK(q.table.value(i, g) ==
                doctest::Approx(optimal_return(m, spec, m.cell(i), g, m.num_cells() + 1)).epsilon(1e-12));
        }
      }
    }
  }

  TEST_CASE("the relaxation bound agrees with the multiplier") {
    CHECK(constrained_path_bound(example_grid()) == 8);
    CHECK(constrained_path_bound(testing::chatter_layout()) == penalty_multiplier(testing::chatter_layout()));
    CHECK_THROWS_AS(constrained_path_bound(build_mdp(2, 2, {"A"}, {})), EnvironmentDisconnected);
  }
}
