#include "taskalg/planner.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace taskalg {

namespace {

// Transition structure shared by every goal slice.
struct Dynamics {
  std::vector<int> next;
  std::vector<char> done;
};

Dynamics tabulate(const LabeledMdp& mdp) {
  Dynamics d;
  const int n = mdp.num_cells();
  d.next.resize(static_cast<std::size_t>(n) * kNumActions);
  d.done.resize(d.next.size());
  for (int c = 0; c < n; ++c) {
    for (Action a : kActions) {
      const StepResult r = mdp.step(mdp.cell(c), a);
      const std::size_t k = static_cast<std::size_t>(c) * kNumActions + static_cast<int>(a);
      d.next[k] = mdp.index(r.next);
      d.done[k] = r.done ? 1 : 0;
    }
  }
  return d;
}

QTable<double> tabulate_rewards(const LabeledMdp& mdp, const RewardSpec& spec) {
  const RewardModel model(spec, mdp);
  QTable<double> r(mdp.num_cells(), mdp.num_regions());
  for (int c = 0; c < mdp.num_cells(); ++c) {
    for (int g = 0; g < mdp.num_regions(); ++g) {
      for (Action a : kActions) r(c, g, a) = model(make_transition(mdp, mdp.cell(c), a, g));
    }
  }
  return r;
}

int resolve_workers(int requested, int regions) {
  int w = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  return std::clamp(w, 1, std::max(regions, 1));
}

}  // namespace

int default_max_sweeps(const LabeledMdp& mdp, const PenaltyConfig& cfg) {
  const long long product = static_cast<long long>(mdp.num_cells()) * mdp.num_regions() * cfg.c_p;
  return static_cast<int>(std::min<long long>(std::max<long long>(product, mdp.num_cells() + 2), 1 << 30));
}

ExtendedQ value_iterate(const LabeledMdp& mdp, const RewardSpec& spec, const SolveOptions& opts) {
  if (!(opts.tol > 0.0)) throw Error("tolerance must be positive");
  const PenaltyConfig& cfg = spec.config;
  cfg.validate();
  const int cells = mdp.num_cells();
  const int regions = mdp.num_regions();
  const double floor = cfg.r_neverterm_floor();
  const int max_sweeps = opts.max_sweeps.value_or(default_max_sweeps(mdp, cfg));

  const Dynamics dyn = tabulate(mdp);
  const QTable<double> reward = tabulate_rewards(mdp, spec);

  QTable<double> q(cells, regions, floor);
  QTable<double> next_q(cells, regions, floor);
  std::vector<double> v(static_cast<std::size_t>(cells) * regions, floor);

  const int workers = resolve_workers(opts.workers, regions);
  std::vector<double> worker_residual(static_cast<std::size_t>(workers), 0.0);

  // Each worker owns the goal slices g = w, w + workers, ... and reads only
  // the previous sweep's values, so the result does not depend on `workers`.
  auto backup = [&](int w) {
    double res = 0.0;
    for (int g = w; g < regions; g += workers) {
      for (int c = 0; c < cells; ++c) {
        for (int a = 0; a < kNumActions; ++a) {
          const std::size_t k = static_cast<std::size_t>(c) * kNumActions + a;
          const Action act = static_cast<Action>(a);
          double target = reward(c, g, act);
          if (!dyn.done[k]) target += v[static_cast<std::size_t>(dyn.next[k]) * regions + g];
          target = std::max(floor, target);
          res = std::max(res, std::abs(target - q(c, g, act)));
          next_q(c, g, act) = target;
        }
      }
    }
    worker_residual[static_cast<std::size_t>(w)] = res;
  };

  ExtendedQ out;
  out.task = spec;
  out.env_fingerprint = mdp.fingerprint();
  out.residual = regions == 0 ? 0.0 : std::abs(floor);
  int sweep = 0;
  while (sweep < max_sweeps && regions > 0) {
    ++sweep;
    if (workers == 1) {
      backup(0);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(static_cast<std::size_t>(workers));
      for (int w = 0; w < workers; ++w) pool.emplace_back(backup, w);
      for (auto& t : pool) t.join();
    }
    std::swap(q, next_q);
    for (int c = 0; c < cells; ++c) {
      for (int g = 0; g < regions; ++g) v[static_cast<std::size_t>(c) * regions + g] = q.value(c, g);
    }
    out.residual = *std::max_element(worker_residual.begin(), worker_residual.end());
    if (out.residual <= opts.tol) break;
  }
  out.table = std::move(q);
  out.sweeps = sweep;
  out.converged = out.residual <= opts.tol;
  return out;
}

BoundaryTables boundary_tables(const LabeledMdp& mdp, const PenaltyConfig& cfg, const SolveOptions& opts) {
  return {value_iterate(mdp, RewardSpec::boundary_u(cfg), opts),
          value_iterate(mdp, RewardSpec::boundary_empty(cfg), opts)};
}

double bellman_residual(const LabeledMdp& mdp, const RewardSpec& spec, const QTable<double>& table) {
  const RewardModel model(spec, mdp);
  const double floor = spec.config.r_neverterm_floor();
  if (table.num_cells() != mdp.num_cells() || table.num_regions() != mdp.num_regions()) {
    throw IncompatibleTables("table does not match the environment");
  }
  double worst = 0.0;
  for (int c = 0; c < mdp.num_cells(); ++c) {
    for (int g = 0; g < mdp.num_regions(); ++g) {
      for (Action a : kActions) {
        const Transition t = make_transition(mdp, mdp.cell(c), a, g);
        double target = model(t);
        if (!t.done) target += table.value(mdp.index(t.next), g);
        target = std::max(floor, target);
        worst = std::max(worst, std::abs(target - table(c, g, a)));
      }
    }
  }
  return worst;
}

bool SafetyExtendedQ::converged() const {
  return std::all_of(slices.begin(), slices.end(), [](const ExtendedQ& q) { return q.converged; });
}

const ExtendedQ* SafetyExtendedQ::slice(const std::vector<int>& g_ok) const {
  std::vector<int> key = g_ok;
  std::sort(key.begin(), key.end());
  key.erase(std::unique(key.begin(), key.end()), key.end());
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    if (subsets[i] == key) return &slices[i];
  }
  return nullptr;
}

std::vector<std::vector<int>> enumerate_subsets(int regions, int k) {
  if (k < 0) throw Error("subset size bound must be non-negative");
  std::vector<std::vector<int>> out{{}};
  std::vector<int> current;
  // Size-major, lexicographic within a size.
  for (int size = 1; size <= std::min(k, regions); ++size) {
    current.resize(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) current[i] = i;
    for (;;) {
      out.push_back(current);
      int i = size - 1;
      while (i >= 0 && current[i] == regions - size + i) --i;
      if (i < 0) break;
      ++current[i];
      for (int j = i + 1; j < size; ++j) current[j] = current[j - 1] + 1;
    }
  }
  return out;
}

namespace {

double binomial_count(int n, int k) {
  double total = 0.0;
  double term = 1.0;
  for (int i = 0; i <= std::min(n, k); ++i) {
    total += term;
    term = term * (n - i) / (i + 1);
  }
  return total;
}

}  // namespace

SafetyExtendedQ value_iterate_safety(const LabeledMdp& mdp, const RewardSpec& base, int k,
                                     const SolveOptions& opts, const SafetyOptions& safety) {
  if (k < 0) throw Error("subset size bound must be non-negative");
  if (!base.g_ok.empty()) throw Error("base task of a safety-extended table must have an empty G_ok");
  const double count = binomial_count(mdp.num_regions(), k);
  if (count > static_cast<double>(safety.max_subsets) && !safety.allow_explosion) {
    throw SubsetExplosion("G_ok enumeration would produce " + std::to_string(static_cast<long long>(count)) +
                          " subsets (cap " + std::to_string(safety.max_subsets) + ")");
  }
  SafetyExtendedQ out;
  out.base = base;
  out.subsets = enumerate_subsets(mdp.num_regions(), k);
  out.slices.reserve(out.subsets.size());
  for (const auto& subset : out.subsets) {
    out.slices.push_back(value_iterate(mdp, subset.empty() ? base : base.with_g_ok(subset), opts));
  }
  return out;
}

Policy extract_policy(const QTable<double>& table) {
  Policy p;
  const int cells = table.num_cells();
  const int regions = table.num_regions();
  p.regions = regions;
  p.per_cell.assign(static_cast<std::size_t>(cells), Action::Stay);
  p.chosen_goal.assign(static_cast<std::size_t>(cells), -1);
  p.cell_value.assign(static_cast<std::size_t>(cells), 0.0);
  p.per_goal.assign(static_cast<std::size_t>(cells) * regions, Action::Stay);
  for (int c = 0; c < cells; ++c) {
    for (int g = 0; g < regions; ++g) {
      int best = 0;
      for (int a = 1; a < kNumActions; ++a) {
        if (table.values()(table.row(c, g), a) > table.values()(table.row(c, g), best)) best = a;
      }
      p.per_goal[static_cast<std::size_t>(c) * regions + g] = static_cast<Action>(best);
    }
    if (regions == 0) continue;
    bool have = false;
    for (Action a : kActions) {
      for (int g = 0; g < regions; ++g) {
        const double v = table(c, g, a);
        if (!have || v > p.cell_value[c]) {
          have = true;
          p.cell_value[c] = v;
          p.per_cell[c] = a;
          p.chosen_goal[c] = g;
        }
      }
    }
  }
  return p;
}

}  // namespace taskalg
