#include <doctest.h>

#include <set>

#include "support/fixtures.hpp"
#include "taskalg/errors.hpp"
#include "taskalg/mdp.hpp"

using namespace taskalg;
using taskalg::testing::example_grid;

namespace {

// Applies `actions` from `s0`, building the execution the same way a rollout does.
Execution walk(const LabeledMdp& m, Cell s0, const std::vector<Action>& actions) {
  Execution x;
  x.steps.push_back({s0, LabelSet{}});
  Cell s = s0;
  for (Action a : actions) {
    const StepResult r = m.step(s, a);
    if (r.done) {
      x.terminated = true;
      x.terminal_region = m.region_of(s);
      break;
    }
    x.steps.push_back({r.next, r.emitted});
    s = r.next;
  }
  return x;
}

LabelSet bits(std::uint32_t b) { return LabelSet(b); }

}  // namespace

TEST_SUITE("mdp") {
  TEST_CASE("example_grid has six regions and the two B cells share one") {
    const LabeledMdp m = example_grid();
    CHECK(m.num_regions() == 6);
    CHECK(m.region_of({2, 2}) == m.region_of({2, 3}));
    CHECK(m.region(m.region_of({2, 2})).cells.size() == 2);
    CHECK(m.region_of({0, 0}) == -1);
  }

  TEST_CASE("region ids follow row-major order of first cells") {
    const LabeledMdp m = example_grid();
    CHECK(m.region_of({1, 0}) == 0);
    CHECK(m.region_of({1, 1}) == 1);
    CHECK(m.region_of({2, 1}) == 2);
    CHECK(m.region_of({3, 1}) == 3);
    CHECK(m.region_of({1, 2}) == 4);
    CHECK(m.region_of({2, 2}) == 5);
  }

  TEST_CASE("unlabeled grid has no regions") {
    const LabeledMdp m = build_mdp(3, 3, {"A"}, {});
    CHECK(m.num_regions() == 0);
    for (int i = 0; i < m.num_cells(); ++i) CHECK(m.label(m.cell(i)).empty());
  }

  TEST_CASE("adjacent equal labels merge") {
    const LabeledMdp m = build_mdp(2, 1, {"A"}, {{{0, 0}, {"A"}}, {{1, 0}, {"A"}}});
    REQUIRE(m.num_regions() == 1);
    CHECK(m.region(0).cells.size() == 2);
  }

  TEST_CASE("diagonal neighbours stay separate") {
    const LabeledMdp m = build_mdp(2, 2, {"A"}, {{{0, 0}, {"A"}}, {{1, 1}, {"A"}}});
    CHECK(m.num_regions() == 2);
  }

  TEST_CASE("different labels never merge") {
    const LabeledMdp m = build_mdp(2, 1, {"A", "B"}, {{{0, 0}, {"A"}}, {{1, 0}, {"A", "B"}}});
    CHECK(m.num_regions() == 2);
  }

  TEST_CASE("construction errors") {
    CHECK_THROWS_AS(build_mdp(0, 3, {"A"}, {}), InvalidEnvironment);
    CHECK_THROWS_AS(build_mdp(2, 2, {"A"}, {{{2, 0}, {"A"}}}), InvalidEnvironment);
    CHECK_THROWS_AS(build_mdp(2, 2, {"A"}, {{{0, 0}, {}}}), InvalidEnvironment);
    CHECK_THROWS_AS(build_mdp(2, 2, {"A"}, {{{0, 0}, {"Z"}}}), InvalidEnvironment);
    CHECK_THROWS_AS(build_mdp(2, 2, {"A"}, {}, {{5, 5}}), InvalidEnvironment);
  }

  TEST_CASE("step emits the new label only on change") {
    const LabeledMdp m = example_grid();
    StepResult r = m.step({1, 3}, Action::Right);
    CHECK(r.next == Cell{2, 3});
    CHECK(r.emitted == m.label({2, 3}));
    CHECK_FALSE(r.done);

    r = m.step({2, 2}, Action::Up);
    CHECK(r.next == Cell{2, 3});
    CHECK(r.emitted.empty());
    CHECK_FALSE(r.done);

    r = m.step({3, 1}, Action::Stay);
    CHECK(r.next == Cell{3, 1});
    CHECK(r.emitted.empty());
    CHECK(r.done);
  }

  TEST_CASE("leaving a region into an unlabeled cell emits nothing") {
    const LabeledMdp m = example_grid();
    const StepResult r = m.step({3, 1}, Action::Right);
    CHECK(r.next == Cell{4, 1});
    CHECK(r.emitted.empty());
  }

  TEST_CASE("off-grid moves and unlabeled Stay are no-ops") {
    const LabeledMdp m = example_grid();
    for (Action a : {Action::Left, Action::Down, Action::Stay}) {
      const StepResult r = m.step({0, 0}, a);
      CHECK(r.next == Cell{0, 0});
      CHECK(r.emitted.empty());
      CHECK_FALSE(r.done);
    }
    CHECK(m.step({4, 3}, Action::Up).next == Cell{4, 3});
    CHECK(m.step({4, 3}, Action::Right).next == Cell{4, 3});
  }

  TEST_CASE("walls block moves") {
    const LabeledMdp m = build_mdp(3, 1, {"A"}, {{{2, 0}, {"A"}}}, {{1, 0}});
    CHECK(m.is_wall({1, 0}));
    CHECK(m.step({0, 0}, Action::Right).next == Cell{0, 0});
    CHECK(m.step({2, 0}, Action::Left).next == Cell{2, 0});
  }

  TEST_CASE("projection of a path past the B region") {
    const LabeledMdp m = example_grid();
    // (1,3) -> (2,3){B} -> (3,3) -> (3,2) -> (3,1){C}, then stop.
    const Execution x =
        walk(m, {1, 3}, {Action::Right, Action::Right, Action::Down, Action::Down, Action::Stay});
    CHECK(x.terminated);
    CHECK(x.terminal_region == m.region_of({3, 1}));
    const std::vector<LabelSet> expected{{}, m.label({2, 3}), {}, {}, m.label({3, 1})};
    CHECK(project(x) == expected);
    CHECK(project_nonempty(x) == std::vector<LabelSet>{m.label({2, 3}), m.label({3, 1})});
  }

  TEST_CASE("two cell paths with the same projection") {
    const LabeledMdp m = example_grid();
    const Execution a = walk(m, {1, 3}, {Action::Right, Action::Right, Action::Down, Action::Down});
    const Execution b = walk(m, {3, 2}, {Action::Left, Action::Up, Action::Right, Action::Right, Action::Down,
                                          Action::Down, Action::Left});
    CHECK(project_nonempty(a) == project_nonempty(b));
    CHECK(project(a).front().empty());
  }

  TEST_CASE("crossing adjacent regions emits each label") {
    const LabeledMdp m = example_grid();
    // (1,1){A,B} -> (2,1){A,B,C} -> (3,1){C}
    const Execution x = walk(m, {0, 1}, {Action::Right, Action::Right, Action::Right});
    CHECK(project(x) == std::vector<LabelSet>{{}, m.label({1, 1}), m.label({2, 1}), m.label({3, 1})});
  }

  TEST_CASE("single-step execution projects to the empty set") {
    const Execution x = walk(example_grid(), {0, 0}, {});
    CHECK(project(x) == std::vector<LabelSet>{LabelSet{}});
    CHECK(project_nonempty(x).empty());
  }

  TEST_CASE("project_nonempty drops empty entries") {
    Execution x;
    for (std::uint32_t b : {0u, 0u, 1u, 0u, 3u, 0u, 2u}) x.steps.push_back({{0, 0}, bits(b)});
    CHECK(project_nonempty(x) == std::vector<LabelSet>{bits(1), bits(3), bits(2)});
    Execution empty;
    empty.steps.assign(4, {{0, 0}, {}});
    CHECK(project_nonempty(empty).empty());
  }

  TEST_CASE("step is deterministic and regions partition the labeled cells") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const LabeledMdp m = testing::random_environment(seed);
      std::set<int> seen;
      for (const Region& g : m.regions()) {
        for (Cell c : g.cells) {
          CHECK(seen.insert(m.index(c)).second);
          CHECK(m.label(c) == g.label);
          CHECK(m.region_of(c) == g.id);
        }
      }
      for (int i = 0; i < m.num_cells(); ++i) {
        const Cell c = m.cell(i);
        CHECK(seen.contains(i) == !m.label(c).empty());
        for (Action a : kActions) {
          const StepResult r1 = m.step(c, a), r2 = step(m, c, a);
          CHECK(r1.next == r2.next);
          CHECK(r1.emitted == r2.emitted);
          CHECK(r1.done == r2.done);
          // Emission soundness: a non-empty emission is exactly a label change.
          CHECK(r1.emitted.empty() == (r1.done || m.label(r1.next) == m.label(c) || m.label(r1.next).empty()));
        }
      }
    }
  }

  TEST_CASE("fingerprint separates environments") {
    CHECK(example_grid().fingerprint() == example_grid().fingerprint());
    CHECK(example_grid().fingerprint() != testing::chatter_layout().fingerprint());
    CHECK(build_mdp(2, 1, {"A"}, {}).fingerprint() != build_mdp(1, 2, {"A"}, {}).fingerprint());
  }

  TEST_CASE("action names round-trip") {
    for (Action a : kActions) CHECK(parse_action(action_name(a)) == a);
    CHECK_FALSE(parse_action("jump"));
  }
}
