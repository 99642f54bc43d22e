#pragma once

#include <array>
#include <bit>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace taskalg {

enum class Action : std::uint8_t { Up = 0, Down = 1, Left = 2, Right = 3, Stay = 4 };

inline constexpr int kNumActions = 5;
/// Fixed action order; greedy tie-breaks always prefer the earliest entry.
inline constexpr std::array<Action, kNumActions> kActions{Action::Up, Action::Down, Action::Left,
                                                          Action::Right, Action::Stay};

std::string_view action_name(Action a);
std::optional<Action> parse_action(std::string_view name);

/// Grid coordinate. `y` grows upward, matching the usual plot orientation.
struct Cell {
  int x = 0;
  int y = 0;
  auto operator<=>(const Cell&) const = default;
};

/// Set of propositions, stored as a bitmask over the environment's
/// proposition indices (at most 32 propositions).
class LabelSet {
 public:
  constexpr LabelSet() = default;
  constexpr explicit LabelSet(std::uint32_t bits) : bits_(bits) {}

  static constexpr LabelSet single(int prop) { return LabelSet(std::uint32_t{1} << prop); }

  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool contains(int prop) const { return (bits_ >> prop) & 1u; }
  constexpr bool intersects(LabelSet o) const { return (bits_ & o.bits_) != 0; }
  constexpr std::uint32_t bits() const { return bits_; }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr LabelSet operator|(LabelSet o) const { return LabelSet(bits_ | o.bits_); }
  constexpr LabelSet operator&(LabelSet o) const { return LabelSet(bits_ & o.bits_); }
  constexpr bool operator==(const LabelSet&) const = default;

 private:
  std::uint32_t bits_ = 0;
};

/// A goal: maximal 4-connected component of cells sharing one non-empty label.
struct Region {
  int id = -1;
  std::vector<Cell> cells;
  LabelSet label;
};

struct StepResult {
  Cell next;
  LabelSet emitted;
  bool done = false;
};

struct ExecutionStep {
  Cell state;
  LabelSet emitted;
};

/// Finite execution. The first emitted label is always empty; a terminating
/// Stay does not append a step, it only sets `terminated`.
struct Execution {
  std::vector<ExecutionStep> steps;
  bool terminated = false;
  std::optional<int> terminal_region;
};

enum class Termination { Goal, BadTerm, WorstTerm, NeverTerm };

/// Path bookkeeping by reward tier. Counts cover non-terminating transitions.
struct PathStats {
  int l_unlabeled = 0;
  int l_bad_label = 0;
  int l_worst_pass_through = 0;
  Termination termination = Termination::NeverTerm;

  int l_max() const { return l_unlabeled + l_bad_label + l_worst_pass_through; }
};

struct CellLabels {
  Cell cell;
  std::vector<std::string> labels;
};

/// Labeled deterministic grid MDP. Immutable after construction.
class LabeledMdp {
 public:
  LabeledMdp(int width, int height, std::vector<std::string> propositions,
             std::vector<LabelSet> cell_labels, std::vector<bool> walls,
             std::optional<Cell> start);

  int width() const { return width_; }
  int height() const { return height_; }
  int num_cells() const { return width_ * height_; }
  int num_regions() const { return static_cast<int>(regions_.size()); }

  const std::vector<std::string>& propositions() const { return propositions_; }
  std::optional<int> prop_index(std::string_view name) const;
  std::vector<std::string> label_names(LabelSet l) const;
  std::string label_string(LabelSet l) const;

  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  int index(Cell c) const { return c.y * width_ + c.x; }
  Cell cell(int index) const { return {index % width_, index / width_}; }
  bool is_wall(Cell c) const { return walls_[index(c)]; }

  LabelSet label(Cell c) const { return labels_[index(c)]; }
  /// Region id containing `c`, or -1 for unlabeled cells.
  int region_of(Cell c) const { return region_of_[index(c)]; }
  const std::vector<Region>& regions() const { return regions_; }
  const Region& region(int id) const { return regions_.at(id); }

  const std::optional<Cell>& start() const { return start_; }

  /// Deterministic successor; off-grid and into-wall moves leave the state unchanged.
  Cell successor(Cell s, Action a) const;
  StepResult step(Cell s, Action a) const;

  /// Stable 64-bit digest of dimensions, propositions, labels and walls.
  std::uint64_t fingerprint() const;

 private:
  int width_;
  int height_;
  std::vector<std::string> propositions_;
  std::vector<LabelSet> labels_;
  std::vector<bool> walls_;
  std::vector<int> region_of_;
  std::vector<Region> regions_;
  std::optional<Cell> start_;
};

/// Builds an environment from a sparse labeling. Cells not listed are
/// unlabeled. Region ids follow row-major order of each region's first cell.
LabeledMdp build_mdp(int width, int height, const std::vector<std::string>& propositions,
                     const std::vector<CellLabels>& labels, const std::vector<Cell>& walls = {},
                     std::optional<Cell> start = std::nullopt);

StepResult step(const LabeledMdp& mdp, Cell s, Action a);

std::vector<LabelSet> project(const Execution& x);
std::vector<LabelSet> project_nonempty(const Execution& x);

}  // namespace taskalg
