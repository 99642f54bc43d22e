#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "taskalg/mdp.hpp"

namespace taskalg::testing {

/// 5x4 grid with propositions A, B, C and six regions.
LabeledMdp example_grid();

/// 4x4 grid where every safe route for !A & !B & C from (2,3) crosses the
/// {D} region at (1,3).
LabeledMdp chatter_layout();
inline constexpr Cell kChatterStart{2, 3};

/// width x height grid, propositions A, B, C, with between min_regions and
/// max_regions regions built from blobs of 1-3 cells carrying random
/// non-empty labels. Deterministic in `seed`.
LabeledMdp random_environment(std::uint64_t seed, int width = 8, int height = 8, int min_regions = 3,
                              int max_regions = 6);

/// Every placement of two or three single-cell regions on a side x side grid
/// with labels drawn from {A}, {B}, {A,B}, visited in a fixed order.
/// Stops early when `visit` returns false.
void for_each_small_instance(int side, int regions, const std::function<bool(const LabeledMdp&)>& visit);

}  // namespace taskalg::testing
