#include <doctest.h>

#include <random>

#include "support/fixtures.hpp"
#include "taskalg/errors.hpp"
#include "taskalg/formula.hpp"

using namespace taskalg;
using taskalg::testing::example_grid;

namespace {

Formula P(const char* n) { return Formula::prop(n); }
Formula Not(Formula f) { return Formula::negation(std::move(f)); }
Formula And(Formula a, Formula b) { return Formula::conjunction(std::move(a), std::move(b)); }
Formula Or(Formula a, Formula b) { return Formula::disjunction(std::move(a), std::move(b)); }

Formula random_formula(std::mt19937& rng, int depth) {
  static const char* names[] = {"A", "B", "C", "D"};
  std::uniform_int_distribution<int> pick(0, depth > 0 ? 3 : 0);
  switch (pick(rng)) {
    case 0: return P(names[std::uniform_int_distribution<int>(0, 3)(rng)]);
    case 1: return Not(random_formula(rng, depth - 1));
    case 2: return And(random_formula(rng, depth - 1), random_formula(rng, depth - 1));
    default: return Or(random_formula(rng, depth - 1), random_formula(rng, depth - 1));
  }
}

std::set<std::string> assignment(int mask) {
  static const char* names[] = {"A", "B", "C", "D"};
  std::set<std::string> l;
  for (int i = 0; i < 4; ++i) {
    if (mask & (1 << i)) l.insert(names[i]);
  }
  return l;
}

}  // namespace

TEST_SUITE("formula") {
  TEST_CASE("precedence and grouping") {
    CHECK(parse("!A & C") == And(Not(P("A")), P("C")));
    CHECK(parse("A | B & C") == Or(P("A"), And(P("B"), P("C"))));
    CHECK(parse("!(A | B)") == Not(Or(P("A"), P("B"))));
    CHECK(parse("A & B & C") == And(And(P("A"), P("B")), P("C")));
    CHECK(parse("~A") == Not(P("A")));
    CHECK(parse("  !!x_1 ") == Not(Not(P("x_1"))));
  }

  TEST_CASE("syntax errors carry the offset") {
    auto offset = [](const char* text) -> long {
      try {
        parse(text);
      } catch (const ParseError& e) {
        return static_cast<long>(e.offset());
      }
      return -1;
    };
    CHECK(offset("") == 0);
    CHECK(offset("A &") == 3);
    CHECK(offset("A $ B") == 2);
    CHECK(offset("(A | B") == 6);
    CHECK(offset("A B") == 2);
    CHECK(offset("not-A") >= 0);
  }

  TEST_CASE("render round-trips") {
    std::mt19937 rng(7);
    for (int i = 0; i < 500; ++i) {
      const Formula f = random_formula(rng, 4);
      CHECK(parse(render(f)) == f);
    }
  }

  TEST_CASE("negation normal form examples") {
    CHECK(to_nnf(Not(Or(P("A"), P("B")))) == And(Not(P("A")), Not(P("B"))));
    CHECK(to_nnf(Not(Not(P("A")))) == P("A"));
    CHECK(to_nnf(Not(And(P("A"), Or(P("B"), P("C"))))) == Or(Not(P("A")), And(Not(P("B")), Not(P("C")))));
    CHECK(is_nnf(parse("!A & (B | !C)")));
    CHECK_FALSE(is_nnf(parse("!(A & B)")));
    CHECK_FALSE(is_nnf(parse("!!A")));
  }

  TEST_CASE("NNF preserves every truth assignment over four propositions") {
    std::mt19937 rng(11);
    for (int i = 0; i < 300; ++i) {
      const Formula f = random_formula(rng, 5);
      const Formula n = to_nnf(f);
      CHECK(is_nnf(n));
      for (int mask = 0; mask < 16; ++mask) CHECK(eval(f, assignment(mask)) == eval(n, assignment(mask)));
    }
  }

  TEST_CASE("evaluation") {
    CHECK(eval(parse("!A & C"), {"C"}));
    CHECK_FALSE(eval(parse("!A & C"), {"A", "B", "C"}));
    CHECK_FALSE(eval(parse("A | B"), {}));
    const LabeledMdp m = example_grid();
    CHECK(eval(parse("C & !A"), m.label({3, 1}), m));
    CHECK_THROWS_AS(eval(parse("Z"), m.label({3, 1}), m), InvalidEnvironment);
  }

  TEST_CASE("bound formula agrees with eval") {
    const LabeledMdp m = example_grid();
    std::mt19937 rng(3);
    for (int i = 0; i < 100; ++i) {
      Formula f = random_formula(rng, 3);
      if (propositions_of(f).contains("D")) continue;
      const BoundFormula bound(f, m);
      for (std::uint32_t b = 0; b < 8; ++b) CHECK(bound(LabelSet(b)) == eval(f, LabelSet(b), m));
    }
  }

  TEST_CASE("goal partition on example_grid") {
    const LabeledMdp m = example_grid();
    GoalPartition p = partition_goals(parse("C"), m);
    CHECK(p.satisfying == std::vector<int>{2, 3});
    CHECK(p.non_satisfying == std::vector<int>{0, 1, 4, 5});
    CHECK_FALSE(p.semantically_empty);

    p = partition_goals(parse("!A & C"), m);
    CHECK(p.satisfying == std::vector<int>{3});

    p = partition_goals(parse("A & !A"), m);
    CHECK(p.satisfying.empty());
    CHECK(p.non_satisfying.size() == 6);
    CHECK(p.semantically_empty);
  }

  TEST_CASE("proposition sets") {
    const Formula f = parse("!A & (B | !C)");
    CHECK(propositions_of(f) == std::set<std::string>{"A", "B", "C"});
    CHECK(negated_propositions(f) == std::set<std::string>{"A", "C"});
  }

  TEST_CASE("task specs") {
    const TaskSpec mv = make_task_spec(parse("!A & C"), Semantics::MinimumViolation);
    CHECK(mv.avoid.empty());
    const TaskSpec ps = make_task_spec(parse("!(A | B) & C"), Semantics::PrioritizedSafety);
    CHECK(ps.avoid == std::set<std::string>{"A", "B"});
    CHECK(make_task_spec(parse("A & !A"), Semantics::PrioritizedSafety).contradictory);
    CHECK(parse_semantics("min-violation") == Semantics::MinimumViolation);
    CHECK(parse_semantics(semantics_name(Semantics::PrioritizedSafety)) == Semantics::PrioritizedSafety);
    CHECK_THROWS(parse_semantics("fastest"));
  }
}
