#include "taskalg/mdp.hpp"

#include <algorithm>
#include <queue>
#include <set>

#include "taskalg/errors.hpp"

namespace taskalg {

std::string_view action_name(Action a) {
  switch (a) {
    case Action::Up: return "up";
    case Action::Down: return "down";
    case Action::Left: return "left";
    case Action::Right: return "right";
    case Action::Stay: return "stay";
  }
  return "?";
}

std::optional<Action> parse_action(std::string_view name) {
  for (Action a : kActions) {
    if (action_name(a) == name) return a;
  }
  return std::nullopt;
}

LabeledMdp::LabeledMdp(int width, int height, std::vector<std::string> propositions,
                       std::vector<LabelSet> cell_labels, std::vector<bool> walls,
                       std::optional<Cell> start)
    : width_(width),
      height_(height),
      propositions_(std::move(propositions)),
      labels_(std::move(cell_labels)),
      walls_(std::move(walls)),
      start_(start) {
  if (width_ < 1 || height_ < 1) throw InvalidEnvironment("grid dimensions must be positive");
  if (propositions_.size() > 32) throw InvalidEnvironment("at most 32 propositions are supported");
  {
    std::set<std::string> seen;
    for (const auto& p : propositions_) {
      if (!seen.insert(p).second) throw InvalidEnvironment("duplicate proposition '" + p + "'");
    }
  }
  const auto n = static_cast<std::size_t>(num_cells());
  if (labels_.size() != n) throw InvalidEnvironment("label vector size mismatch");
  if (walls_.empty()) walls_.assign(n, false);
  if (walls_.size() != n) throw InvalidEnvironment("wall vector size mismatch");
  const std::uint32_t declared =
      propositions_.size() == 32 ? ~0u : ((1u << propositions_.size()) - 1u);
  for (std::size_t i = 0; i < n; ++i) {
    if ((labels_[i].bits() & ~declared) != 0) throw InvalidEnvironment("undeclared proposition in label");
    if (walls_[i] && !labels_[i].empty()) throw InvalidEnvironment("a wall cell cannot be labeled");
  }
  if (start_) {
    if (!in_bounds(*start_)) throw InvalidEnvironment("start cell out of bounds");
    if (is_wall(*start_)) throw InvalidEnvironment("start cell is a wall");
  }

  // Flood fill in row-major order so region ids follow each region's first cell.
  region_of_.assign(n, -1);
  for (int i = 0; i < num_cells(); ++i) {
    if (labels_[i].empty() || region_of_[i] >= 0) continue;
    Region r;
    r.id = static_cast<int>(regions_.size());
    r.label = labels_[i];
    std::queue<int> frontier;
    frontier.push(i);
    region_of_[i] = r.id;
    while (!frontier.empty()) {
      const int cur = frontier.front();
      frontier.pop();
      r.cells.push_back(cell(cur));
      for (Action a : {Action::Up, Action::Down, Action::Left, Action::Right}) {
        const Cell nb = successor(cell(cur), a);
        const int j = index(nb);
        if (j == cur || region_of_[j] >= 0 || labels_[j] != r.label) continue;
        region_of_[j] = r.id;
        frontier.push(j);
      }
    }
    std::sort(r.cells.begin(), r.cells.end(),
              [this](Cell a, Cell b) { return index(a) < index(b); });
    regions_.push_back(std::move(r));
  }
}

std::optional<int> LabeledMdp::prop_index(std::string_view name) const {
  for (std::size_t i = 0; i < propositions_.size(); ++i) {
    if (propositions_[i] == name) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::vector<std::string> LabeledMdp::label_names(LabelSet l) const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < propositions_.size(); ++i) {
    if (l.contains(static_cast<int>(i))) out.push_back(propositions_[i]);
  }
  return out;
}

std::string LabeledMdp::label_string(LabelSet l) const {
  std::string s = "{";
  bool first = true;
  for (const auto& name : label_names(l)) {
    if (!first) s += ",";
    s += name;
    first = false;
  }
  return s + "}";
}

Cell LabeledMdp::successor(Cell s, Action a) const {
  Cell n = s;
  switch (a) {
    case Action::Up: n.y += 1; break;
    case Action::Down: n.y -= 1; break;
    case Action::Left: n.x -= 1; break;
    case Action::Right: n.x += 1; break;
    case Action::Stay: break;
  }
  if (!in_bounds(n) || walls_[index(n)]) return s;
  return n;
}

StepResult LabeledMdp::step(Cell s, Action a) const {
  StepResult r;
  r.next = successor(s, a);
  const LabelSet from = label(s);
  const LabelSet to = label(r.next);
  r.emitted = (to != from) ? to : LabelSet{};
  r.done = (a == Action::Stay) && region_of(s) >= 0;
  return r;
}

std::uint64_t LabeledMdp::fingerprint() const {
  // FNV-1a over a canonical byte stream.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  mix(static_cast<std::uint64_t>(width_));
  mix(static_cast<std::uint64_t>(height_));
  for (const auto& p : propositions_) {
    for (unsigned char c : p) mix(c);
    mix(0xff);
  }
  for (int i = 0; i < num_cells(); ++i) {
    mix(labels_[i].bits());
    mix(walls_[i] ? 1 : 0);
  }
  return h;
}

LabeledMdp build_mdp(int width, int height, const std::vector<std::string>& propositions,
                     const std::vector<CellLabels>& labels, const std::vector<Cell>& walls,
                     std::optional<Cell> start) {
  if (width < 1 || height < 1) throw InvalidEnvironment("grid dimensions must be positive");
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  std::vector<LabelSet> cell_labels(n);
  std::vector<bool> listed(n, false);
  auto in_bounds = [&](Cell c) { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; };
  for (const auto& entry : labels) {
    const Cell c = entry.cell;
    if (!in_bounds(c)) {
      throw InvalidEnvironment("labeled cell (" + std::to_string(c.x) + "," + std::to_string(c.y) +
                               ") is out of bounds");
    }
    const auto i = static_cast<std::size_t>(c.y * width + c.x);
    if (listed[i]) throw InvalidEnvironment("cell listed twice in labeling");
    listed[i] = true;
    if (entry.labels.empty()) {
      throw InvalidEnvironment("explicit empty label-set for cell (" + std::to_string(c.x) + "," +
                               std::to_string(c.y) + ")");
    }
    LabelSet l;
    for (const auto& name : entry.labels) {
      auto it = std::find(propositions.begin(), propositions.end(), name);
      if (it == propositions.end()) throw InvalidEnvironment("undeclared proposition '" + name + "'");
      l = l | LabelSet::single(static_cast<int>(it - propositions.begin()));
    }
    cell_labels[i] = l;
  }
  std::vector<bool> wall_mask(n, false);
  for (Cell w : walls) {
    if (!in_bounds(w)) throw InvalidEnvironment("wall cell out of bounds");
    wall_mask[static_cast<std::size_t>(w.y * width + w.x)] = true;
  }
  return LabeledMdp(width, height, propositions, std::move(cell_labels), std::move(wall_mask), start);
}

StepResult step(const LabeledMdp& mdp, Cell s, Action a) { return mdp.step(s, a); }

std::vector<LabelSet> project(const Execution& x) {
  std::vector<LabelSet> out;
  out.reserve(x.steps.size());
  for (const auto& st : x.steps) out.push_back(st.emitted);
  return out;
}

std::vector<LabelSet> project_nonempty(const Execution& x) {
  std::vector<LabelSet> out;
  for (const auto& st : x.steps) {
    if (!st.emitted.empty()) out.push_back(st.emitted);
  }
  return out;
}

}  // namespace taskalg
