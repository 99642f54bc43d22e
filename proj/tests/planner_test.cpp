#include <doctest.h>

#include "support/fixtures.hpp"
#include "taskalg/errors.hpp"
#include "taskalg/oracle.hpp"
#include "taskalg/planner.hpp"

using namespace taskalg;
using taskalg::testing::example_grid;

namespace {

PenaltyConfig example_grid_config() {
  PenaltyConfig cfg;
  cfg.c_p = 8;
  return cfg;
}

void check_against_enumeration(const LabeledMdp& m, const RewardSpec& spec, int bound) {
  const ExtendedQ q = value_iterate(m, spec);
  REQUIRE(q.converged);
  for (int i = 0; i < m.num_cells(); ++i) {
    const std::vector<double> best = optimal_returns(m, spec, m.cell(i), bound);
    for (int g = 0; g < m.num_regions(); ++g) CHECK(q.table.value(i, g) == doctest::Approx(best[g]).epsilon(1e-12));
  }
}

bool entrywise_le(const QTable<double>& a, const QTable<double>& b) { return dominated_by(a, b, 0.0); }

}  // namespace

TEST_SUITE("planner") {
  TEST_CASE("one-cell world") {
    const LabeledMdp m = build_mdp(1, 1, {"A"}, {{{0, 0}, {"A"}}});
    PenaltyConfig cfg;
    cfg.c_p = penalty_multiplier(m);
    CHECK(cfg.c_p == 1);
    const ExtendedQ q = value_iterate(m, RewardSpec::positive(parse("A"), cfg));
    REQUIRE(q.converged);
    CHECK(q.table(0, 0, Action::Stay) == cfg.r_goal);
    for (Action a : {Action::Up, Action::Down, Action::Left, Action::Right}) {
      CHECK(q.table(0, 0, a) == cfg.r_step + cfg.r_goal);
    }
  }

  TEST_CASE("task C next to the C region") {
    const LabeledMdp m = example_grid();
    const PenaltyConfig cfg = example_grid_config();
    const ExtendedQ q = value_iterate(m, RewardSpec::positive(parse("C"), cfg));
    CHECK(q.table(m.index({3, 0}), 3, Action::Up) == doctest::Approx(cfg.r_step + cfg.r_goal));
    CHECK(q.table(m.index({4, 1}), 3, Action::Left) == doctest::Approx(cfg.r_step + cfg.r_goal));
    CHECK(q.table(m.index({4, 3}), 3, Action::Down) == doctest::Approx(3 * cfg.r_step + cfg.r_goal));
  }

  TEST_CASE("values match exhaustive enumeration on example_grid") {
    const LabeledMdp m = example_grid();
    const PenaltyConfig cfg = example_grid_config();
    // Every simple path fits in |S| + 1 transitions.
    check_against_enumeration(m, RewardSpec::positive(parse("C"), cfg), m.num_cells() + 1);
    check_against_enumeration(m, RewardSpec::negated_task({"A"}, cfg), m.num_cells() + 1);
  }

  TEST_CASE("leaving an A region costs a worst pass-through under not-A") {
    const LabeledMdp m = example_grid();
    const PenaltyConfig cfg = example_grid_config();
    const ExtendedQ q = value_iterate(m, RewardSpec::negated_task({"A"}, cfg));
    // From (1,0){A} to the C region: step out (unlabeled), two moves, enter C.
    CHECK(q.table.value(m.index({1, 0}), 3) == doctest::Approx(3 * cfg.r_step + cfg.r_goal));
    // From (0,0): every route to C enters an A region or the B region first.
    const double v = q.table.value(m.index({0, 0}), 3);
    CHECK(v == doctest::Approx(optimal_return(m, RewardSpec::negated_task({"A"}, cfg), {0, 0}, 3, m.num_cells() + 1)));
    CHECK(v < 4 * cfg.r_step + cfg.r_goal);
  }

  TEST_CASE("values stay inside the reward range and the residual is tiny") {
    const LabeledMdp m = example_grid();
    const PenaltyConfig cfg = example_grid_config();
    for (const RewardSpec& spec : {RewardSpec::positive(parse("A"), cfg), RewardSpec::negated_task({"B"}, cfg),
                                   RewardSpec::boundary_u(cfg), RewardSpec::boundary_empty(cfg)}) {
      const ExtendedQ q = value_iterate(m, spec);
      CHECK(q.converged);
      CHECK(q.residual <= 1e-9);
      CHECK(bellman_residual(m, spec, q.table) <= 1e-9);
      CHECK(q.table.values().minCoeff() >= cfg.r_neverterm_floor());
      CHECK(q.table.values().maxCoeff() <= cfg.r_goal);
      CHECK(q.env_fingerprint == m.fingerprint());
    }
  }

  TEST_CASE("a perturbed table has a visible residual") {
    const LabeledMdp m = example_grid();
    const RewardSpec spec = RewardSpec::positive(parse("A"), example_grid_config());
    ExtendedQ q = value_iterate(m, spec);
    // (0,1) Right leads to (1,1), whose value the perturbation does not touch.
    q.table(m.index({0, 1}), 2, Action::Right) += 0.25;
    CHECK(bellman_residual(m, spec, q.table) >= 0.25 - 1e-12);
  }

  TEST_CASE("sweep budget exhaustion is reported") {
    const LabeledMdp m = example_grid();
    SolveOptions opts;
    opts.max_sweeps = 1;
    const ExtendedQ q = value_iterate(m, RewardSpec::positive(parse("C"), example_grid_config()), opts);
    CHECK_FALSE(q.converged);
    CHECK(q.sweeps == 1);
    CHECK(q.residual > 1e-9);
    CHECK(default_max_sweeps(m, example_grid_config()) == 20 * 6 * 8);
  }

  TEST_CASE("results do not depend on the worker count") {
    const LabeledMdp m = testing::random_environment(5);
    PenaltyConfig cfg;
    cfg.c_p = penalty_multiplier(m);
    const RewardSpec spec = RewardSpec::positive(parse("A | !C"), cfg);
    const ExtendedQ one = value_iterate(m, spec);
    for (int workers : {2, 3, 7, 0}) {
      SolveOptions opts;
      opts.workers = workers;
      const ExtendedQ many = value_iterate(m, spec, opts);
      CHECK(many.table == one.table);
      CHECK(many.sweeps == one.sweeps);
    }
  }

  TEST_CASE("boundary tables bracket every task") {
    const LabeledMdp m = example_grid();
    const PenaltyConfig cfg = example_grid_config();
    const BoundaryTables b = boundary_tables(m, cfg);
    CHECK(entrywise_le(b.lower.table, b.upper.table));
    for (const char* t : {"A", "B", "C"}) {
      const ExtendedQ q = value_iterate(m, RewardSpec::positive(parse(t), cfg));
      CHECK(entrywise_le(b.lower.table, q.table));
      CHECK(entrywise_le(q.table, b.upper.table));
    }
    for (const Region& g : m.regions()) {
      for (Cell c : g.cells) CHECK(b.upper.table(m.index(c), g.id, Action::Stay) == cfg.r_goal);
    }
  }

  TEST_CASE("subset enumeration order") {
    CHECK(enumerate_subsets(3, 0) == std::vector<std::vector<int>>{{}});
    CHECK(enumerate_subsets(3, 2) ==
          std::vector<std::vector<int>>{{}, {0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2}});
    CHECK(enumerate_subsets(2, 5).size() == 4);
  }

  TEST_CASE("safety slices") {
    const LabeledMdp m = example_grid();
    const PenaltyConfig cfg = example_grid_config();
    const RewardSpec base = RewardSpec::positive(parse("C"), cfg);
    const ExtendedQ plain = value_iterate(m, base);

    const SafetyExtendedQ k0 = value_iterate_safety(m, base, 0);
    REQUIRE(k0.slices.size() == 1);
    CHECK(k0.slices[0].table == plain.table);

    const SafetyExtendedQ k2 = value_iterate_safety(m, base, 2);
    CHECK(k2.converged());
    CHECK(k2.slices.size() == 1 + 6 + 15);
    CHECK(k2.slice({})->table == plain.table);
    CHECK(k2.slice({0, 3}) != nullptr);
    CHECK(k2.slice({0, 1, 2}) == nullptr);
    // A larger pass-through set never lowers a value.
    for (std::size_t i = 0; i < k2.subsets.size(); ++i) {
      for (std::size_t j = 0; j < k2.subsets.size(); ++j) {
        const auto& small = k2.subsets[i];
        const auto& large = k2.subsets[j];
        if (small.size() >= large.size()) continue;
        if (!std::includes(large.begin(), large.end(), small.begin(), small.end())) continue;
        CHECK(entrywise_le(k2.slices[i].table, k2.slices[j].table));
      }
    }
  }

  TEST_CASE("subset explosion guard") {
    const LabeledMdp m = example_grid();
    const RewardSpec base = RewardSpec::positive(parse("C"), example_grid_config());
    SafetyOptions tight;
    tight.max_subsets = 5;
    CHECK_THROWS_AS(value_iterate_safety(m, base, 2, {}, tight), SubsetExplosion);
    tight.allow_explosion = true;
    CHECK_NOTHROW(value_iterate_safety(m, base, 1, {}, tight));
    CHECK_THROWS_AS(value_iterate_safety(m, base.with_g_ok({1}), 1), Error);
  }

  TEST_CASE("greedy policy tie-breaks") {
    QTable<double> t(2, 2);
    t.values().setZero();
    // Uniform: first action, lowest goal.
    Policy p = extract_policy(t);
    CHECK(p.action(0) == Action::Up);
    CHECK(p.chosen_goal[0] == 0);

    t(1, 0, Action::Stay) = 1.0;
    t(1, 1, Action::Left) = 1.0;
    p = extract_policy(t);
    // Left and Stay both reach 1.0 over goals; Left comes first.
    CHECK(p.action(1) == Action::Left);
    CHECK(p.chosen_goal[1] == 1);
    CHECK(p.goal_action(1, 0) == Action::Stay);
    CHECK(p.cell_value[1] == 1.0);

    t(0, 1, Action::Stay) = 3.0;
    p = extract_policy(t);
    CHECK(p.action(0) == Action::Stay);
    CHECK(p.chosen_goal[0] == 1);
  }

  TEST_CASE("no regions means Stay everywhere") {
    const Policy p = extract_policy(QTable<double>(4, 0));
    for (int i = 0; i < 4; ++i) CHECK(p.action(i) == Action::Stay);
  }
}
