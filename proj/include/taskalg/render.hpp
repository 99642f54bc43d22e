#pragma once

#include <string>
#include <string_view>

#include "taskalg/mdp.hpp"
#include "taskalg/planner.hpp"
#include "taskalg/runtime.hpp"

namespace taskalg {

/// ↑ ↓ ← → for moves, ● for Stay.
std::string_view action_glyph(Action a);

/// Top row first. Walls print as '#'. With `color`, each glyph is tinted by
/// the cell's greedy value (ANSI 256-color ramp).
std::string render_policy_ascii(const LabeledMdp& mdp, const Policy& policy, bool color = false);

/// Grid with the visit order of a rollout: 0-9 then a-z, '*' beyond, '.' unvisited.
std::string render_report_ascii(const LabeledMdp& mdp, const TrajectoryReport& report);

std::string render_policy_svg(const LabeledMdp& mdp, const Policy& policy);
std::string render_report_svg(const LabeledMdp& mdp, const TrajectoryReport& report);

}  // namespace taskalg
