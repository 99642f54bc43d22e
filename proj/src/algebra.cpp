#include "taskalg/algebra.hpp"

#include <algorithm>
#include <set>

namespace taskalg {

void TaskLibrary::admit(const ExtendedQ& q) {
  if (!config_) {
    config_ = q.config();
    fingerprint_ = q.env_fingerprint;
    cells_ = q.table.num_cells();
    regions_ = q.table.num_regions();
    return;
  }
  if (!(*config_ == q.config())) throw IncompatibleTables("table '" + q.task.key() + "' uses a different penalty config");
  if (fingerprint_ != q.env_fingerprint) throw IncompatibleTables("table '" + q.task.key() + "' was trained on another environment");
  if (cells_ != q.table.num_cells() || regions_ != q.table.num_regions()) {
    throw IncompatibleTables("table '" + q.task.key() + "' has a different shape");
  }
}

void TaskLibrary::add(ExtendedQ q) {
  if (q.task.safety_extended()) throw Error("safety-extended slices belong in add_safety");
  admit(q);
  std::string key = q.task.key();
  tables_.insert_or_assign(std::move(key), std::move(q));
}

void TaskLibrary::add_safety(SafetyExtendedQ s) {
  for (const auto& slice : s.slices) admit(slice);
  std::string key = s.base.key();
  if (!s.slices.empty() && !tables_.contains(key)) tables_.emplace(key, s.slices.front());
  safety_.insert_or_assign(std::move(key), std::move(s));
}

const ExtendedQ& TaskLibrary::at(const std::string& key) const {
  auto it = tables_.find(key);
  if (it == tables_.end()) throw MissingTask(key);
  return it->second;
}

const SafetyExtendedQ* TaskLibrary::safety(const std::string& key) const {
  auto it = safety_.find(key);
  return it == safety_.end() ? nullptr : &it->second;
}

std::vector<std::string> TaskLibrary::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : tables_) out.push_back(k);
  return out;
}

std::vector<std::string> TaskLibrary::safety_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : safety_) out.push_back(k);
  return out;
}

std::optional<RewardSpec> spec_for_key(const std::string& key, const PenaltyConfig& cfg) {
  if (key == "@U") return RewardSpec::boundary_u(cfg);
  if (key == "@empty") return RewardSpec::boundary_empty(cfg);
  if (key.rfind("not-", 0) == 0) {
    std::vector<std::string> props;
    std::size_t pos = 0;
    while (pos <= key.size()) {
      const std::size_t amp = key.find('&', pos);
      const std::string part = key.substr(pos, amp == std::string::npos ? std::string::npos : amp - pos);
      if (part.rfind("not-", 0) != 0 || part.size() == 4) return std::nullopt;
      props.push_back(part.substr(4));
      if (amp == std::string::npos) break;
      pos = amp + 1;
    }
    return RewardSpec::negated_task(props, cfg);
  }
  try {
    return RewardSpec::positive(parse(key), cfg);
  } catch (const ParseError&) {
    return std::nullopt;
  }
}

TaskLibrary train_library(const LabeledMdp& mdp, const PenaltyConfig& cfg, const std::vector<std::string>& keys,
                          const SolveOptions& opts) {
  TaskLibrary lib;
  auto bounds = boundary_tables(mdp, cfg, opts);
  lib.add(std::move(bounds.upper));
  lib.add(std::move(bounds.lower));
  for (const auto& key : keys) {
    if (lib.contains(key)) continue;
    auto spec = spec_for_key(key, cfg);
    if (!spec) throw Error("'" + key + "' is not a trainable task key");
    lib.add(value_iterate(mdp, *spec, opts));
  }
  return lib;
}

namespace {

void render_into(const Provenance& p, std::string& out) {
  if (p.op == "table") {
    out += p.key;
    return;
  }
  out += p.op + "(";
  for (std::size_t i = 0; i < p.children.size(); ++i) {
    if (i) out += ", ";
    render_into(p.children[i], out);
  }
  out += ")";
}

struct Node {
  QTable<double> table;
  Provenance provenance;
};

std::string g_ok_suffix(const std::vector<int>& g_ok) {
  std::string s = "[G_ok={";
  for (std::size_t i = 0; i < g_ok.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(g_ok[i]);
  }
  return s + "}]";
}

class Compiler {
 public:
  Compiler(const TaskLibrary& lib, const CompileOptions& opts) : lib_(lib), opts_(opts) {}

  Node leaf(const std::string& key) {
    if (opts_.g_ok) {
      if (const SafetyExtendedQ* s = lib_.safety(key)) {
        const ExtendedQ* slice = s->slice(*opts_.g_ok);
        if (!slice) throw MissingTask(key + g_ok_suffix(*opts_.g_ok));
        return {slice->table, {"table", key + g_ok_suffix(*opts_.g_ok), {}}};
      }
    }
    return {lib_.at(key).table, {"table", key, {}}};
  }

  static Node combine(const char* op, Node a, Node b) {
    QTable<double> t = std::string_view(op) == "conj" ? conj(a.table, b.table) : disj(a.table, b.table);
    return {std::move(t), {op, {}, {std::move(a.provenance), std::move(b.provenance)}}};
  }

  Node minimum_violation(const Formula& f) {
    switch (f.kind()) {
      case Formula::Kind::Prop: return leaf(f.name());
      case Formula::Kind::Not: {
        Node inner = minimum_violation(f.child());
        const Node upper = leaf("@U");
        const Node lower = leaf("@empty");
        return {neg(inner.table, upper.table, lower.table), {"neg", {}, {std::move(inner.provenance)}}};
      }
      case Formula::Kind::And: return combine("conj", minimum_violation(f.lhs()), minimum_violation(f.rhs()));
      case Formula::Kind::Or: return combine("disj", minimum_violation(f.lhs()), minimum_violation(f.rhs()));
    }
    throw Error("unreachable formula kind");
  }

  Node prioritized(const Formula& f) {
    switch (f.kind()) {
      case Formula::Kind::Prop: return leaf(f.name());
      case Formula::Kind::Not: {
        if (f.child().kind() != Formula::Kind::Prop) {
          throw NegationUnavailable("prioritized safety has no analytic negation for '" + render(f) + "'");
        }
        return negated({f.child().name()});
      }
      case Formula::Kind::Or: return combine("disj", prioritized(f.lhs()), prioritized(f.rhs()));
      case Formula::Kind::And: {
        std::vector<Formula> conjuncts;
        flatten(f, conjuncts);
        std::set<std::string> negs;
        std::vector<Formula> rest;
        for (const auto& c : conjuncts) {
          if (c.kind() == Formula::Kind::Not && c.child().kind() == Formula::Kind::Prop) {
            negs.insert(c.child().name());
          } else {
            rest.push_back(c);
          }
        }
        std::optional<Node> acc;
        auto fold = [&](Node n) { acc = acc ? combine("conj", std::move(*acc), std::move(n)) : std::move(n); };
        if (negs.size() > 1 && lib_.contains(joint_key(negs))) {
          fold(negated(negs));
        } else {
          for (const auto& p : negs) fold(negated({p}));
        }
        for (const auto& c : rest) fold(prioritized(c));
        return std::move(*acc);
      }
    }
    throw Error("unreachable formula kind");
  }

  const std::set<std::string>& negated_keys() const { return negated_keys_; }

 private:
  static std::string joint_key(const std::set<std::string>& props) {
    std::string key;
    for (const auto& p : props) {
      if (!key.empty()) key += "&";
      key += "not-" + p;
    }
    return key;
  }

  Node negated(const std::set<std::string>& props) {
    const std::string key = joint_key(props);
    Node n = leaf(key);
    negated_keys_.insert(key);
    return n;
  }

  static void flatten(const Formula& f, std::vector<Formula>& out) {
    if (f.kind() == Formula::Kind::And) {
      flatten(f.lhs(), out);
      flatten(f.rhs(), out);
    } else {
      out.push_back(f);
    }
  }

  const TaskLibrary& lib_;
  const CompileOptions& opts_;
  std::set<std::string> negated_keys_;
};

}  // namespace

std::string render(const Provenance& p) {
  std::string out;
  render_into(p, out);
  return out;
}

Composed compile(const TaskSpec& task, const TaskLibrary& lib, const CompileOptions& opts) {
  if (!lib.config()) throw MissingTask(render(task.formula));
  Compiler compiler(lib, opts);
  Composed out;
  out.config = *lib.config();
  Node root;
  if (task.semantics == Semantics::MinimumViolation) {
    root = compiler.minimum_violation(task.formula);
  } else {
    const Formula normal = is_nnf(task.formula) ? task.formula : to_nnf(task.formula);
    root = compiler.prioritized(normal);
    if (compiler.negated_keys().size() > 1 && !opts.g_ok) {
      std::string names;
      for (const auto& k : compiler.negated_keys()) names += (names.empty() ? "" : ", ") + k;
      out.warnings.push_back("AssumptionViolated: composition combines " +
                             std::to_string(compiler.negated_keys().size()) +
                             " learned negated tables (" + names +
                             ") without a safety-extended G_ok; rollouts may chatter");
    }
  }
  if (task.contradictory) out.warnings.push_back("SemanticallyEmpty: formula requires and forbids the same proposition");
  out.table = std::move(root.table);
  out.provenance = std::move(root.provenance);
  return out;
}

namespace {

void require_compatible(const ExtendedQ& a, const ExtendedQ& b) {
  if (!(a.config() == b.config())) throw IncompatibleTables("tables use different penalty configs");
  if (a.env_fingerprint != b.env_fingerprint) throw IncompatibleTables("tables come from different environments");
}

}  // namespace

QTable<double> neg(const ExtendedQ& q, const ExtendedQ& upper, const ExtendedQ& lower) {
  require_compatible(q, upper);
  require_compatible(q, lower);
  return neg(q.table, upper.table, lower.table);
}

QTable<double> conj(const ExtendedQ& a, const ExtendedQ& b) {
  require_compatible(a, b);
  return conj(a.table, b.table);
}

QTable<double> disj(const ExtendedQ& a, const ExtendedQ& b) {
  require_compatible(a, b);
  return disj(a.table, b.table);
}

PolicyOracle PolicyOracle::from_table(QTable<double> table) {
  auto shared = std::make_shared<const QTable<double>>(std::move(table));
  auto policy = std::make_shared<const Policy>(extract_policy(*shared));
  PolicyOracle o;
  o.cells = shared->num_cells();
  o.regions = shared->num_regions();
  o.policy = [policy](int cell, int goal) { return policy->goal_action(cell, goal); };
  o.value = [shared](int cell, int goal) { return shared->value(cell, goal); };
  return o;
}

Action PolicyOracle::act(int cell) const {
  if (regions == 0) return Action::Stay;
  double best = value(cell, 0);
  for (int g = 1; g < regions; ++g) best = std::max(best, value(cell, g));
  Action chosen = Action::Stay;
  bool have = false;
  for (int g = 0; g < regions; ++g) {
    if (value(cell, g) != best) continue;
    const Action a = policy(cell, g);
    if (!have || static_cast<int>(a) < static_cast<int>(chosen)) chosen = a;
    have = true;
  }
  return chosen;
}

namespace {

PolicyOracle select(const PolicyOracle& o1, const PolicyOracle& o2, bool conjunction) {
  if (o1.cells != o2.cells || o1.regions != o2.regions) throw IncompatibleTables("oracles cover different goal sets");
  auto first = [o1, o2, conjunction](int cell, int goal) {
    const double v1 = o1.value(cell, goal);
    const double v2 = o2.value(cell, goal);
    return conjunction ? v1 <= v2 : v1 >= v2;
  };
  PolicyOracle out;
  out.cells = o1.cells;
  out.regions = o1.regions;
  out.policy = [o1, o2, first](int cell, int goal) {
    return first(cell, goal) ? o1.policy(cell, goal) : o2.policy(cell, goal);
  };
  out.value = [o1, o2, first](int cell, int goal) {
    return first(cell, goal) ? o1.value(cell, goal) : o2.value(cell, goal);
  };
  return out;
}

}  // namespace

PolicyOracle policy_select_conj(const PolicyOracle& o1, const PolicyOracle& o2) { return select(o1, o2, true); }

PolicyOracle policy_select_disj(const PolicyOracle& o1, const PolicyOracle& o2) { return select(o1, o2, false); }

}  // namespace taskalg
