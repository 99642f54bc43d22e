#include "fixtures.hpp"

#include <algorithm>
#include <random>

namespace taskalg::testing {

LabeledMdp example_grid() {
  return build_mdp(5, 4, {"A", "B", "C"},
                   {{{1, 2}, {"A"}},
                    {{1, 1}, {"A", "B"}},
                    {{1, 0}, {"A"}},
                    {{2, 3}, {"B"}},
                    {{2, 2}, {"B"}},
                    {{2, 1}, {"A", "B", "C"}},
                    {{3, 1}, {"C"}}},
                   {}, Cell{0, 0});
}

LabeledMdp chatter_layout() {
  return build_mdp(4, 4, {"A", "B", "C", "D"},
                   {{{1, 3}, {"D"}}, {{2, 2}, {"B"}}, {{3, 2}, {"A"}}, {{0, 0}, {"B"}}, {{3, 0}, {"C"}}}, {},
                   kChatterStart);
}

LabeledMdp random_environment(std::uint64_t seed, int width, int height, int min_regions, int max_regions) {
  std::mt19937_64 rng(seed);
  const std::vector<std::string> props{"A", "B", "C"};
  for (;;) {
    std::uniform_int_distribution<int> count(min_regions, max_regions);
    std::uniform_int_distribution<int> xs(0, width - 1), ys(0, height - 1), label(1, 7), size(1, 3), dir(0, 3);
    std::vector<LabelSet> cells(static_cast<std::size_t>(width * height));
    const int blobs = count(rng);
    for (int b = 0; b < blobs; ++b) {
      const LabelSet l(static_cast<std::uint32_t>(label(rng)));
      Cell c{xs(rng), ys(rng)};
      const int n = size(rng);
      for (int i = 0; i < n; ++i) {
        cells[static_cast<std::size_t>(c.y * width + c.x)] = l;
        static const int dx[] = {0, 0, -1, 1}, dy[] = {1, -1, 0, 0};
        const int d = dir(rng);
        c.x = std::clamp(c.x + dx[d], 0, width - 1);
        c.y = std::clamp(c.y + dy[d], 0, height - 1);
      }
    }
    LabeledMdp mdp(width, height, props, cells, {}, std::nullopt);
    if (mdp.num_regions() >= min_regions && mdp.num_regions() <= max_regions) return mdp;
  }
}

void for_each_small_instance(int side, int regions, const std::function<bool(const LabeledMdp&)>& visit) {
  const int n = side * side;
  const std::uint32_t palette[] = {0b01, 0b10, 0b11};
  std::vector<int> pos(static_cast<std::size_t>(regions));
  for (int i = 0; i < regions; ++i) pos[i] = i;
  for (;;) {
    int combos = 1;
    for (int i = 0; i < regions; ++i) combos *= 3;
    for (int code = 0; code < combos; ++code) {
      std::vector<LabelSet> cells(static_cast<std::size_t>(n));
      int k = code;
      for (int i = 0; i < regions; ++i) {
        cells[pos[i]] = LabelSet(palette[k % 3]);
        k /= 3;
      }
      if (!visit(LabeledMdp(side, side, {"A", "B"}, cells, {}, std::nullopt))) return;
    }
    int i = regions - 1;
    while (i >= 0 && pos[i] == n - regions + i) --i;
    if (i < 0) return;
    ++pos[i];
    for (int j = i + 1; j < regions; ++j) pos[j] = pos[j - 1] + 1;
  }
}

}  // namespace taskalg::testing
