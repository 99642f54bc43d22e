// taskalg: train, compose, run and inspect tables on labeled grid worlds.
//
// Exit codes: 0 ok, 1 usage or other error, 2 environment error,
// 3 training did not converge, 4 missing task, 5 run did not terminate
// (or chattered).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "taskalg/algebra.hpp"
#include "taskalg/errors.hpp"
#include "taskalg/io.hpp"
#include "taskalg/oracle.hpp"
#include "taskalg/penalty.hpp"
#include "taskalg/planner.hpp"
#include "taskalg/render.hpp"
#include "taskalg/runtime.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace taskalg;

namespace {

enum Exit { kOk = 0, kFailure = 1, kEnv = 2, kConvergence = 3, kMissing = 4, kNonTermination = 5 };

struct RunConfig {
  std::string env;
  std::vector<std::string> tasks;
  std::string semantics = "min-violation";
  std::optional<double> r_step;
  std::optional<double> r_goal;
  std::optional<int> c_p;
  bool extra_tier = false;
  int k = 0;
  std::string start;
  std::optional<int> max_steps;
  std::optional<int> max_sweeps;
  int workers = 1;
  std::string lib;
  std::string out;
  std::string format = "text";
  std::string table;
  std::string report;
  std::string g_ok;
  std::string returns_key;
  bool color = false;
};

// Thrown for environment-level failures detected by the CLI itself.
struct EnvFailure : Error {
  using Error::Error;
};

std::vector<int> parse_ints(const std::string& text) {
  std::vector<int> out;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    if (part.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw Error("expected a comma-separated list of integers, got '" + text + "'");
    }
  }
  return out;
}

Cell start_cell(const RunConfig& rc, const LabeledMdp& mdp) {
  Cell c;
  if (!rc.start.empty()) {
    const auto xy = parse_ints(rc.start);
    if (xy.size() != 2) throw Error("--start expects X,Y");
    c = {xy[0], xy[1]};
  } else if (mdp.start()) {
    c = *mdp.start();
  } else {
    throw Error("no --start given and the environment declares none");
  }
  if (!mdp.in_bounds(c) || mdp.is_wall(c)) throw EnvFailure("start cell is outside the grid or on a wall");
  return c;
}

std::optional<std::vector<int>> g_ok_of(const RunConfig& rc) {
  if (rc.g_ok.empty()) return std::nullopt;
  auto v = parse_ints(rc.g_ok);
  std::sort(v.begin(), v.end());
  return v;
}

PenaltyConfig penalty_config(const RunConfig& rc, const LabeledMdp& mdp) {
  PenaltyConfig cfg;
  if (rc.r_step) cfg.r_step = *rc.r_step;
  if (rc.r_goal) cfg.r_goal = *rc.r_goal;
  cfg.extra_term_tier = rc.extra_tier;
  cfg.c_p = rc.c_p ? *rc.c_p : penalty_multiplier(mdp);
  cfg.validate();
  return cfg;
}

SolveOptions solve_options(const RunConfig& rc) {
  SolveOptions opts;
  opts.max_sweeps = rc.max_sweeps;
  opts.workers = rc.workers;
  return opts;
}

const std::string& single_task(const RunConfig& rc) {
  if (rc.tasks.size() != 1) throw Error("exactly one --task is required");
  return rc.tasks.front();
}

void emit(const RunConfig& rc, const std::string& text) {
  if (rc.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(rc.out, std::ios::binary);
  if (!f) throw Error("cannot write " + rc.out);
  f << text;
}

// A table to act on plus whatever is known about the task it solves.
struct LoadedPolicy {
  QTable<double> table;
  PenaltyConfig config;
  std::optional<TaskSpec> task;
  std::optional<RewardSpec> reward;
  Provenance provenance;
  std::vector<std::string> warnings;
};

// Reward used to score a rollout of `task`: the learned negated reward for
// a pure conjunction of negations under prioritized safety, otherwise the
// positive reward of the formula.
RewardSpec scoring_spec(const TaskSpec& task, const PenaltyConfig& cfg) {
  if (task.semantics == Semantics::PrioritizedSafety) {
    const auto props = propositions_of(task.formula);
    const auto negs = negated_propositions(task.formula);
    if (!negs.empty() && props == negs && render(task.formula).find('|') == std::string::npos) {
      return RewardSpec::negated_task({negs.begin(), negs.end()}, cfg);
    }
  }
  return RewardSpec::positive(task.formula, cfg);
}

std::optional<TaskSpec> task_of_key(const RewardSpec& spec) {
  switch (spec.kind) {
    case RewardKind::Positive:
      return make_task_spec(*spec.formula, Semantics::MinimumViolation);
    case RewardKind::Negated: {
      std::string text;
      for (const auto& p : spec.negated) text += (text.empty() ? "!" : " & !") + p;
      return make_task_spec(parse(text), Semantics::PrioritizedSafety);
    }
    default:
      return std::nullopt;
  }
}

TaskLibrary open_library(const RunConfig& rc, const LabeledMdp& mdp) {
  if (rc.lib.empty()) throw Error("no library directory: pass --lib or set TASKALG_LIB");
  return io::load_library(rc.lib, mdp);
}

LoadedPolicy compose_policy(const RunConfig& rc, const LabeledMdp& mdp) {
  const TaskSpec task = make_task_spec(parse(single_task(rc)), parse_semantics(rc.semantics));
  const TaskLibrary lib = open_library(rc, mdp);
  if (!lib.config()) throw MissingTask("@U");
  CompileOptions opts;
  opts.g_ok = g_ok_of(rc);
  Composed c = compile(task, lib, opts);
  LoadedPolicy lp{std::move(c.table), c.config, task, scoring_spec(task, c.config), std::move(c.provenance),
                  std::move(c.warnings)};
  return lp;
}

LoadedPolicy table_policy(const RunConfig& rc, const LabeledMdp& mdp) {
  io::TableFile f = io::read_table_file(rc.table);
  io::check_environment(f, mdp);
  LoadedPolicy lp{f.slices.front(), f.config, std::nullopt, std::nullopt, {"table", rc.table, {}}, {}};
  if (io::is_composed_file(f)) {
    const TaskSpec task = make_task_spec(parse(f.descriptor.at("formula").get<std::string>()),
                                         parse_semantics(f.descriptor.at("semantics").get<std::string>()));
    lp.task = task;
    lp.reward = scoring_spec(task, f.config);
    lp.provenance = io::provenance_from_json(f.descriptor.at("provenance"));
    lp.warnings = f.descriptor.value("warnings", std::vector<std::string>{});
  } else if (io::is_safety_file(f)) {
    const SafetyExtendedQ s = io::unpack_safety(f);
    const std::vector<int> g_ok = g_ok_of(rc).value_or(std::vector<int>{});
    const ExtendedQ* slice = s.slice(g_ok);
    if (!slice) throw MissingTask(s.base.key() + "[G_ok]");
    lp.table = slice->table;
    lp.reward = slice->task;
    lp.task = task_of_key(s.base);
  } else {
    const ExtendedQ q = io::unpack_extended(f);
    lp.reward = q.task;
    lp.task = task_of_key(q.task);
  }
  // An explicit --task overrides what the file says it solves.
  if (!rc.tasks.empty()) {
    lp.task = make_task_spec(parse(single_task(rc)), parse_semantics(rc.semantics));
    lp.reward = scoring_spec(*lp.task, f.config);
  }
  return lp;
}

LoadedPolicy load_policy(const RunConfig& rc, const LabeledMdp& mdp) {
  return rc.table.empty() ? compose_policy(rc, mdp) : table_policy(rc, mdp);
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

// Replays the action list of a structured report.
TrajectoryReport replay(const json& doc, const LabeledMdp& mdp) {
  const Cell s0{doc.at("start").at(0).get<int>(), doc.at("start").at(1).get<int>()};
  std::vector<Action> actions;
  for (const auto& a : doc.at("actions")) {
    auto parsed = parse_action(a.get<std::string>());
    if (!parsed) throw FormatError("unknown action '" + a.get<std::string>() + "' in report");
    actions.push_back(*parsed);
  }
  std::size_t i = 0;
  auto policy = [&](Cell) { return i < actions.size() ? actions[i++] : Action::Stay; };
  return rollout(mdp, policy, s0, static_cast<int>(actions.size()));
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

int cmd_cp(const RunConfig& rc) {
  const LabeledMdp mdp = io::load_environment(rc.env);
  const PenaltyMultiplier pm = penalty_multiplier_detail(mdp);
  if (rc.format == "structured") {
    json doc{{"c_p", pm.c_p}, {"g1", pm.g1}, {"g2", pm.g2}};
    doc["literal"] = pm.g1 < 0 ? json(nullptr) : json((pm.literal.negated ? "!" : "") + pm.literal.prop);
    emit(rc, doc.dump(2) + "\n");
  } else {
    std::ostringstream out;
    out << "c_p " << pm.c_p << "\n";
    if (pm.g1 >= 0) {
      out << "regions " << pm.g1 << " -> " << pm.g2 << "  literal " << (pm.literal.negated ? "!" : "")
          << pm.literal.prop << "\n";
    }
    emit(rc, out.str());
  }
  return kOk;
}

int cmd_train(const RunConfig& rc) {
  const LabeledMdp mdp = io::load_environment(rc.env);
  const PenaltyConfig cfg = penalty_config(rc, mdp);
  if (rc.tasks.empty()) throw Error("train needs at least one --task");
  if (!rc.out.empty() && rc.tasks.size() != 1) throw Error("--out takes exactly one --task");
  if (rc.out.empty() && rc.lib.empty()) throw Error("no destination: pass --out, --lib or set TASKALG_LIB");

  std::vector<std::string> keys = rc.tasks;
  // A library is useless for negation without its boundary pair.
  if (rc.out.empty()) {
    for (const char* b : {"@U", "@empty"}) {
      if (std::find(keys.begin(), keys.end(), b) == keys.end()) keys.push_back(b);
    }
    fs::create_directories(rc.lib);
  }

  const SolveOptions opts = solve_options(rc);
  bool converged = true;
  for (const auto& key : keys) {
    const std::optional<RewardSpec> spec = spec_for_key(key, cfg);
    if (!spec) throw Error("'" + key + "' is not a trainable task key");
    const fs::path dest = rc.out.empty() ? fs::path(rc.lib) / io::library_file_name(key) : fs::path(rc.out);
    io::TableFile file;
    bool ok = false;
    std::ostringstream line;
    const bool boundary = key == "@U" || key == "@empty";
    if (rc.k > 0 && !boundary) {
      const SafetyExtendedQ s = value_iterate_safety(mdp, *spec, rc.k, opts);
      ok = s.converged();
      file = io::pack(mdp, s);
      line << key << ": " << s.slices.size() << " slices (k=" << rc.k << ")";
    } else {
      const ExtendedQ q = value_iterate(mdp, *spec, opts);
      ok = q.converged;
      file = io::pack(mdp, q);
      line << key << ": " << q.sweeps << " sweeps, residual " << q.residual;
    }
    if (!ok) {
      std::cerr << key << ": value iteration did not converge; nothing written\n";
      converged = false;
      continue;
    }
    io::write_table_file(dest, file);
    std::cout << line.str() << " -> " << dest.string() << "\n";
  }
  std::cout << "c_p " << cfg.c_p << "\n";
  return converged ? kOk : kConvergence;
}

int cmd_compose(const RunConfig& rc) {
  const LabeledMdp mdp = io::load_environment(rc.env);
  const std::string& formula = single_task(rc);
  LoadedPolicy lp = compose_policy(rc, mdp);
  print_warnings(lp.warnings);
  std::cout << render(lp.provenance) << "\n";
  if (!rc.out.empty()) {
    Composed c{lp.table, lp.provenance, lp.warnings, lp.config};
    io::write_table_file(rc.out, io::pack(mdp, c, formula, lp.task->semantics));
    std::cout << "-> " << rc.out << "\n";
  }
  return kOk;
}

TrajectoryReport run_report(const RunConfig& rc, const LabeledMdp& mdp, LoadedPolicy& lp) {
  const Cell s0 = start_cell(rc, mdp);
  const Policy policy = extract_policy(lp.table);
  const int max_steps = rc.max_steps ? *rc.max_steps : default_max_steps(mdp, lp.config);
  TrajectoryReport report = rollout(mdp, [&](Cell c) { return policy(mdp, c); }, s0, max_steps);
  if (lp.reward) score(report, *lp.reward, mdp);
  if (lp.task) classify(report, *lp.task, mdp);
  return report;
}

int run_exit(const TrajectoryReport& report) {
  return report.terminated() && !report.chatter ? kOk : kNonTermination;
}

int cmd_run(const RunConfig& rc) {
  const LabeledMdp mdp = io::load_environment(rc.env);
  LoadedPolicy lp = load_policy(rc, mdp);
  print_warnings(lp.warnings);
  const TrajectoryReport report = run_report(rc, mdp, lp);
  if (rc.format == "structured") {
    emit(rc, io::report_to_json(report, mdp).dump(2) + "\n");
  } else if (rc.format == "svg") {
    emit(rc, render_report_svg(mdp, report));
  } else {
    emit(rc, io::report_transcript(report, mdp));
  }
  return run_exit(report);
}

int cmd_classify(const RunConfig& rc) {
  const LabeledMdp mdp = io::load_environment(rc.env);
  if (rc.report.empty()) throw Error("classify needs --report");
  const TaskSpec task = make_task_spec(parse(single_task(rc)), parse_semantics(rc.semantics));
  TrajectoryReport report = replay(read_json(rc.report), mdp);
  const PathClass c = classify(report, task, mdp);
  if (rc.format == "structured") {
    emit(rc, json{{"path_class", std::string(path_class_name(c))}, {"chatter", report.chatter}}.dump(2) + "\n");
  } else {
    emit(rc, std::string(path_class_name(c)) + "\n");
  }
  return run_exit(report);
}

json oracle_json(const OracleResult& r, const LabeledMdp& mdp) {
  json doc{{"feasible", r.feasible}};
  if (!r.feasible) return doc;
  doc["min_violations"] = r.min_violations;
  doc["min_steps"] = r.min_steps;
  doc["min_emissions"] = r.min_emissions;
  json cells = json::array();
  for (const auto& st : r.witness.steps) cells.push_back({st.state.x, st.state.y});
  doc["witness"] = std::move(cells);
  json labels = json::array();
  for (LabelSet l : project_nonempty(r.witness)) labels.push_back(mdp.label_names(l));
  doc["nonempty_projection"] = std::move(labels);
  return doc;
}

int cmd_oracle(const RunConfig& rc) {
  const LabeledMdp mdp = io::load_environment(rc.env);
  const Cell s0 = start_cell(rc, mdp);
  json doc{{"start", {s0.x, s0.y}}};
  if (!rc.returns_key.empty()) {
    const PenaltyConfig cfg = penalty_config(rc, mdp);
    const std::optional<RewardSpec> spec = spec_for_key(rc.returns_key, cfg);
    if (!spec) throw Error("'" + rc.returns_key + "' is not a task key");
    const int bound = rc.max_steps ? *rc.max_steps : mdp.num_cells() + 1;
    doc["key"] = rc.returns_key;
    doc["c_p"] = cfg.c_p;
    doc["optimal_returns"] = optimal_returns(mdp, *spec, s0, bound);
  } else {
    const TaskSpec task = make_task_spec(parse(single_task(rc)), parse_semantics(rc.semantics));
    doc["task"] = render(task.formula);
    doc["min_violation"] = oracle_json(min_violation_path(mdp, s0, task.formula), mdp);
    if (!task.avoid.empty()) {
      doc["avoid"] = task.avoid;
      doc["safe_min_violation"] = oracle_json(safe_min_violation_path(mdp, s0, task.formula, task.avoid), mdp);
    }
  }
  emit(rc, doc.dump(2) + "\n");
  return kOk;
}

int cmd_render(const RunConfig& rc) {
  const LabeledMdp mdp = io::load_environment(rc.env);
  if (!rc.report.empty()) {
    const TrajectoryReport report = replay(read_json(rc.report), mdp);
    emit(rc, rc.format == "svg" ? render_report_svg(mdp, report) : render_report_ascii(mdp, report));
    return kOk;
  }
  LoadedPolicy lp = load_policy(rc, mdp);
  print_warnings(lp.warnings);
  const Policy policy = extract_policy(lp.table);
  emit(rc, rc.format == "svg" ? render_policy_svg(mdp, policy) : render_policy_ascii(mdp, policy, rc.color));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boolean task composition on labeled grid worlds"};
  app.require_subcommand(1);
  RunConfig rc;
  if (const char* lib = std::getenv("TASKALG_LIB")) rc.lib = lib;

  auto env = [&](CLI::App* sub) { sub->add_option("--env", rc.env, "Environment file")->required(); };
  auto penalties = [&](CLI::App* sub) {
    sub->add_option("--r-step", rc.r_step, "Per-step reward (< 0)");
    sub->add_option("--r-goal", rc.r_goal, "Goal reward (> 0)");
    sub->add_option("--cp", rc.c_p, "Penalty multiplier override")->check(CLI::PositiveNumber);
    sub->add_flag("--extra-tier", rc.extra_tier, "Put bad termination one tier below worst pass-through");
  };
  auto task = [&](CLI::App* sub) {
    sub->add_option("--task", rc.tasks, "Task formula, e.g. '!A & C'");
    sub->add_option("--semantics", rc.semantics, "min-violation or prioritized-safety")
        ->check(CLI::IsMember({"min-violation", "prioritized-safety"}));
  };
  auto lib = [&](CLI::App* sub) {
    sub->add_option("--lib", rc.lib, "Library directory (default: $TASKALG_LIB)");
    sub->add_option("--g-ok", rc.g_ok, "Pass-through regions for safety slices, e.g. 4 or 1,3");
  };
  auto out = [&](CLI::App* sub, std::vector<std::string> formats) {
    sub->add_option("--out", rc.out, "Write output here instead of stdout");
    sub->add_option("--format", rc.format, "Output format")->check(CLI::IsMember(formats));
  };

  CLI::App* cp = app.add_subcommand("cp", "Print the penalty multiplier");
  env(cp);
  out(cp, {"text", "structured"});

  CLI::App* train = app.add_subcommand("train", "Value-iterate task tables into a library");
  env(train);
  train->add_option("--task", rc.tasks, "Task key: A, not-A, not-A&not-B, @U, @empty (repeatable)")->required();
  penalties(train);
  train->add_option("--k", rc.k, "Also train safety slices for G_ok subsets up to this size")
      ->check(CLI::NonNegativeNumber);
  train->add_option("--max-sweeps", rc.max_sweeps, "Sweep budget")->check(CLI::PositiveNumber);
  train->add_option("--workers", rc.workers, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  train->add_option("--lib", rc.lib, "Library directory (default: $TASKALG_LIB)");
  train->add_option("--out", rc.out, "Write a single table here instead of the library");

  CLI::App* compose = app.add_subcommand("compose", "Compose a formula from library tables");
  env(compose);
  task(compose);
  lib(compose);
  compose->add_option("--out", rc.out, "Write the composed table here");

  CLI::App* run = app.add_subcommand("run", "Roll out a composed formula or a table file");
  env(run);
  task(run);
  lib(run);
  run->add_option("--table", rc.table, "Table file to act on instead of composing");
  run->add_option("--start", rc.start, "Start cell X,Y (default: environment start)");
  run->add_option("--max-steps", rc.max_steps, "Rollout bound")->check(CLI::PositiveNumber);
  out(run, {"text", "structured", "svg"});

  CLI::App* classify_cmd = app.add_subcommand("classify", "Classify a structured run report");
  env(classify_cmd);
  task(classify_cmd);
  classify_cmd->add_option("--report", rc.report, "Report written by 'run --format structured'")->required();
  out(classify_cmd, {"text", "structured"});

  CLI::App* oracle = app.add_subcommand("oracle", "Reference minima and optimal returns");
  env(oracle);
  task(oracle);
  penalties(oracle);
  oracle->add_option("--start", rc.start, "Start cell X,Y (default: environment start)");
  oracle->add_option("--returns", rc.returns_key, "Print brute-force optimal returns per goal for this task key");
  oracle->add_option("--max-steps", rc.max_steps, "Step bound for --returns")->check(CLI::PositiveNumber);
  oracle->add_option("--out", rc.out, "Write output here instead of stdout");

  CLI::App* render_cmd = app.add_subcommand("render", "Draw a policy or a run report");
  env(render_cmd);
  task(render_cmd);
  lib(render_cmd);
  render_cmd->add_option("--table", rc.table, "Table file");
  render_cmd->add_option("--report", rc.report, "Structured run report");
  render_cmd->add_flag("--color", rc.color, "Tint arrows by value");
  out(render_cmd, {"text", "svg"});

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cp) return cmd_cp(rc);
    if (*train) return cmd_train(rc);
    if (*compose) return cmd_compose(rc);
    if (*run) return cmd_run(rc);
    if (*classify_cmd) return cmd_classify(rc);
    if (*oracle) return cmd_oracle(rc);
    if (*render_cmd) return cmd_render(rc);
  } catch (const MissingTask& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kMissing;
  } catch (const NegationUnavailable& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kMissing;
  } catch (const InvalidEnvironment& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kEnv;
  } catch (const EnvironmentDisconnected& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kEnv;
  } catch (const EnvFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kEnv;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kEnv;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
