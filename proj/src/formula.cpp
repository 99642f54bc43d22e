#include "taskalg/formula.hpp"

#include <cctype>

#include "taskalg/errors.hpp"

namespace taskalg {

Formula Formula::prop(std::string name) {
  return Formula(std::make_shared<const Node>(Node{Kind::Prop, std::move(name), nullptr, nullptr}));
}

Formula Formula::negation(Formula child) {
  return Formula(std::make_shared<const Node>(
      Node{Kind::Not, {}, std::make_shared<const Formula>(std::move(child)), nullptr}));
}

Formula Formula::conjunction(Formula lhs, Formula rhs) {
  return Formula(std::make_shared<const Node>(Node{Kind::And, {},
                                                   std::make_shared<const Formula>(std::move(lhs)),
                                                   std::make_shared<const Formula>(std::move(rhs))}));
}

Formula Formula::disjunction(Formula lhs, Formula rhs) {
  return Formula(std::make_shared<const Node>(Node{Kind::Or, {},
                                                   std::make_shared<const Formula>(std::move(lhs)),
                                                   std::make_shared<const Formula>(std::move(rhs))}));
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Formula::Kind::Prop: return a.name() == b.name();
    case Formula::Kind::Not: return a.child() == b.child();
    default: return a.lhs() == b.lhs() && a.rhs() == b.rhs();
  }
}

namespace {

// Precedence climbing over a hand-rolled tokenizer.
class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Formula parse_all() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("empty formula", pos_);
    Formula f = parse_binary(0);
    skip_ws();
    if (pos_ < text_.size()) throw ParseError(unexpected(), pos_);
    return f;
  }

 private:
  static int precedence(char op) { return op == '|' ? 1 : op == '&' ? 2 : -1; }

  Formula parse_binary(int min_prec) {
    Formula lhs = parse_unary();
    for (;;) {
      skip_ws();
      if (pos_ >= text_.size()) break;
      const char op = text_[pos_];
      const int prec = precedence(op);
      if (prec < 0 || prec < min_prec) break;
      ++pos_;
      Formula rhs = parse_binary(prec + 1);
      lhs = op == '&' ? Formula::conjunction(std::move(lhs), std::move(rhs))
                      : Formula::disjunction(std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  Formula parse_unary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of formula", pos_);
    const char c = text_[pos_];
    if (c == '!' || c == '~') {
      ++pos_;
      return Formula::negation(parse_unary());
    }
    if (c == '(') {
      const std::size_t open = pos_++;
      Formula inner = parse_binary(0);
      skip_ws();
      if (pos_ >= text_.size() || text_[pos_] != ')') throw ParseError("unbalanced '(' opened at " + std::to_string(open), pos_);
      ++pos_;
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t begin = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        ++pos_;
      }
      std::string name(text_.substr(begin, pos_ - begin));
      if (name == "not" && pos_ < text_.size() && text_[pos_] == '-') {
        throw ParseError("'not-' task keys are not formula syntax; write negation as '!'", begin);
      }
      return Formula::prop(std::move(name));
    }
    throw ParseError(unexpected(), pos_);
  }

  std::string unexpected() const {
    return std::string("unexpected token '") + text_[pos_] + "'";
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

int render_prec(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::Or: return 1;
    case Formula::Kind::And: return 2;
    default: return 3;
  }
}

void render_into(const Formula& f, std::string& out) {
  switch (f.kind()) {
    case Formula::Kind::Prop: out += f.name(); return;
    case Formula::Kind::Not: {
      out += '!';
      const bool paren = render_prec(f.child()) < 3;
      if (paren) out += '(';
      render_into(f.child(), out);
      if (paren) out += ')';
      return;
    }
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      const int p = render_prec(f);
      // Left-associative: only the right operand needs parentheses at equal precedence.
      const bool lparen = render_prec(f.lhs()) < p;
      const bool rparen = render_prec(f.rhs()) <= p;
      if (lparen) out += '(';
      render_into(f.lhs(), out);
      if (lparen) out += ')';
      out += f.kind() == Formula::Kind::And ? " & " : " | ";
      if (rparen) out += '(';
      render_into(f.rhs(), out);
      if (rparen) out += ')';
      return;
    }
  }
}

Formula nnf(const Formula& f, bool negate) {
  switch (f.kind()) {
    case Formula::Kind::Prop: return negate ? Formula::negation(f) : f;
    case Formula::Kind::Not: return nnf(f.child(), !negate);
    case Formula::Kind::And:
      return negate ? Formula::disjunction(nnf(f.lhs(), true), nnf(f.rhs(), true))
                    : Formula::conjunction(nnf(f.lhs(), false), nnf(f.rhs(), false));
    case Formula::Kind::Or:
      return negate ? Formula::conjunction(nnf(f.lhs(), true), nnf(f.rhs(), true))
                    : Formula::disjunction(nnf(f.lhs(), false), nnf(f.rhs(), false));
  }
  return f;
}

void collect_props(const Formula& f, std::set<std::string>& out, bool only_negated, bool under_not) {
  switch (f.kind()) {
    case Formula::Kind::Prop:
      if (!only_negated || under_not) out.insert(f.name());
      return;
    case Formula::Kind::Not: collect_props(f.child(), out, only_negated, true); return;
    default:
      collect_props(f.lhs(), out, only_negated, false);
      collect_props(f.rhs(), out, only_negated, false);
  }
}

template <typename Lookup>
bool eval_with(const Formula& f, const Lookup& holds) {
  switch (f.kind()) {
    case Formula::Kind::Prop: return holds(f.name());
    case Formula::Kind::Not: return !eval_with(f.child(), holds);
    case Formula::Kind::And: return eval_with(f.lhs(), holds) && eval_with(f.rhs(), holds);
    case Formula::Kind::Or: return eval_with(f.lhs(), holds) || eval_with(f.rhs(), holds);
  }
  return false;
}

void flatten_and(const Formula& f, std::vector<Formula>& out) {
  if (f.kind() == Formula::Kind::And) {
    flatten_and(f.lhs(), out);
    flatten_and(f.rhs(), out);
  } else {
    out.push_back(f);
  }
}

}  // namespace

Formula parse(std::string_view text) { return Parser(text).parse_all(); }

std::string render(const Formula& f) {
  std::string out;
  render_into(f, out);
  return out;
}

Formula to_nnf(const Formula& f) { return nnf(f, false); }

bool is_nnf(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::Prop: return true;
    case Formula::Kind::Not: return f.child().kind() == Formula::Kind::Prop;
    default: return is_nnf(f.lhs()) && is_nnf(f.rhs());
  }
}

std::set<std::string> propositions_of(const Formula& f) {
  std::set<std::string> out;
  collect_props(f, out, false, false);
  return out;
}

std::set<std::string> negated_propositions(const Formula& f) {
  std::set<std::string> out;
  collect_props(f, out, true, false);
  return out;
}

bool eval(const Formula& f, const std::set<std::string>& l) {
  return eval_with(f, [&l](const std::string& name) { return l.contains(name); });
}

bool eval(const Formula& f, LabelSet l, const LabeledMdp& mdp) {
  return eval_with(f, [&](const std::string& name) {
    auto idx = mdp.prop_index(name);
    if (!idx) throw InvalidEnvironment("formula uses undeclared proposition '" + name + "'");
    return l.contains(*idx);
  });
}

BoundFormula::BoundFormula(const Formula& f, const LabeledMdp& mdp) {
  std::vector<std::string> names;
  for (const auto& name : propositions_of(f)) {
    auto idx = mdp.prop_index(name);
    if (!idx) throw InvalidEnvironment("formula uses undeclared proposition '" + name + "'");
    names.push_back(name);
    prop_ids_.push_back(*idx);
  }
  if (prop_ids_.size() > 20) throw Error("formula mentions too many propositions");
  const std::size_t rows = std::size_t{1} << prop_ids_.size();
  table_.resize(rows);
  for (std::size_t row = 0; row < rows; ++row) {
    table_[row] = eval_with(f, [&](const std::string& name) {
      for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return ((row >> i) & 1u) != 0;
      }
      return false;
    });
  }
}

bool BoundFormula::operator()(LabelSet l) const {
  std::size_t row = 0;
  for (std::size_t i = 0; i < prop_ids_.size(); ++i) {
    if (l.contains(prop_ids_[i])) row |= std::size_t{1} << i;
  }
  return table_[row];
}

std::string_view semantics_name(Semantics s) {
  return s == Semantics::MinimumViolation ? "min-violation" : "prioritized-safety";
}

Semantics parse_semantics(std::string_view name) {
  if (name == "min-violation" || name == "mv") return Semantics::MinimumViolation;
  if (name == "prioritized-safety" || name == "ps") return Semantics::PrioritizedSafety;
  throw Error("unknown semantics '" + std::string(name) + "'");
}

TaskSpec make_task_spec(const Formula& f, Semantics semantics) {
  const Formula normal = to_nnf(f);
  TaskSpec spec{semantics == Semantics::PrioritizedSafety ? normal : f, semantics, {}, false};
  if (semantics == Semantics::PrioritizedSafety) spec.avoid = negated_propositions(normal);

  std::vector<Formula> conjuncts;
  flatten_and(normal, conjuncts);
  std::set<std::string> pos, neg;
  for (const auto& c : conjuncts) {
    if (c.kind() == Formula::Kind::Prop) pos.insert(c.name());
    if (c.kind() == Formula::Kind::Not) neg.insert(c.child().name());
  }
  for (const auto& p : pos) spec.contradictory = spec.contradictory || neg.contains(p);
  return spec;
}

GoalPartition partition_goals(const Formula& f, const LabeledMdp& mdp) {
  GoalPartition out;
  const BoundFormula holds(f, mdp);
  for (const auto& r : mdp.regions()) {
    (holds(r.label) ? out.satisfying : out.non_satisfying).push_back(r.id);
  }
  out.semantically_empty = out.satisfying.empty();
  return out;
}

}  // namespace taskalg
