#include "taskalg/render.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace taskalg {

std::string_view action_glyph(Action a) {
  switch (a) {
    case Action::Up: return "↑";
    case Action::Down: return "↓";
    case Action::Left: return "←";
    case Action::Right: return "→";
    case Action::Stay: return "●";
  }
  return "?";
}

namespace {

constexpr int kCell = 40;

// Fixed palette indexed by region id.
const char* region_fill(int region) {
  static const char* palette[] = {"#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3",
                                  "#fdb462", "#b3de69", "#fccde5", "#d9d9d9", "#bc80bd"};
  return palette[region % 10];
}

void svg_grid(std::ostringstream& out, const LabeledMdp& mdp) {
  const int w = mdp.width() * kCell;
  const int h = mdp.height() * kCell;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 "
      << w << " " << h << "\" font-family=\"sans-serif\">\n";
  for (int i = 0; i < mdp.num_cells(); ++i) {
    const Cell c = mdp.cell(i);
    const int px = c.x * kCell;
    const int py = (mdp.height() - 1 - c.y) * kCell;
    const int r = mdp.region_of(c);
    const char* fill = mdp.is_wall(c) ? "#333333" : r >= 0 ? region_fill(r) : "#ffffff";
    out << "  <rect x=\"" << px << "\" y=\"" << py << "\" width=\"" << kCell << "\" height=\"" << kCell
        << "\" fill=\"" << fill << "\" stroke=\"#999999\"/>\n";
    if (!mdp.label(c).empty()) {
      out << "  <text x=\"" << px + 3 << "\" y=\"" << py + 11 << "\" font-size=\"9\">" << mdp.label_string(mdp.label(c))
          << "</text>\n";
    }
  }
}

}  // namespace

std::string render_policy_ascii(const LabeledMdp& mdp, const Policy& policy, bool color) {
  double lo = 0.0, hi = 0.0;
  if (color && !policy.cell_value.empty()) {
    lo = *std::min_element(policy.cell_value.begin(), policy.cell_value.end());
    hi = *std::max_element(policy.cell_value.begin(), policy.cell_value.end());
  }
  std::string out;
  for (int y = mdp.height() - 1; y >= 0; --y) {
    for (int x = 0; x < mdp.width(); ++x) {
      const Cell c{x, y};
      if (x) out += ' ';
      if (mdp.is_wall(c)) {
        out += '#';
        continue;
      }
      const Action a = policy(mdp, c);
      if (color && hi > lo) {
        // Red (low) to green (high) on the 6x6x6 cube.
        const double t = (policy.cell_value[mdp.index(c)] - lo) / (hi - lo);
        const int level = static_cast<int>(std::lround(t * 5));
        out += "\x1b[38;5;" + std::to_string(16 + 36 * (5 - level) + 6 * level) + "m";
        out += action_glyph(a);
        out += "\x1b[0m";
      } else {
        out += action_glyph(a);
      }
    }
    out += '\n';
  }
  return out;
}

std::string render_report_ascii(const LabeledMdp& mdp, const TrajectoryReport& report) {
  std::vector<int> order(static_cast<std::size_t>(mdp.num_cells()), -1);
  for (std::size_t i = 0; i < report.execution.steps.size(); ++i) {
    const int k = mdp.index(report.execution.steps[i].state);
    if (order[k] < 0) order[k] = static_cast<int>(i);
  }
  std::string out;
  for (int y = mdp.height() - 1; y >= 0; --y) {
    for (int x = 0; x < mdp.width(); ++x) {
      const Cell c{x, y};
      if (x) out += ' ';
      const int k = order[mdp.index(c)];
      if (mdp.is_wall(c)) {
        out += '#';
      } else if (k < 0) {
        out += '.';
      } else if (k < 10) {
        out += static_cast<char>('0' + k);
      } else if (k < 36) {
        out += static_cast<char>('a' + k - 10);
      } else {
        out += '*';
      }
    }
    out += '\n';
  }
  return out;
}

std::string render_policy_svg(const LabeledMdp& mdp, const Policy& policy) {
  std::ostringstream out;
  svg_grid(out, mdp);
  for (int i = 0; i < mdp.num_cells(); ++i) {
    const Cell c = mdp.cell(i);
    if (mdp.is_wall(c)) continue;
    const int px = c.x * kCell + kCell / 2;
    const int py = (mdp.height() - 1 - c.y) * kCell + kCell / 2 + 7;
    out << "  <text x=\"" << px << "\" y=\"" << py << "\" font-size=\"20\" text-anchor=\"middle\">"
        << action_glyph(policy(mdp, c)) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string render_report_svg(const LabeledMdp& mdp, const TrajectoryReport& report) {
  std::ostringstream out;
  svg_grid(out, mdp);
  out << "  <polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"3\" points=\"";
  for (const auto& st : report.execution.steps) {
    out << st.state.x * kCell + kCell / 2 << "," << (mdp.height() - 1 - st.state.y) * kCell + kCell / 2 << " ";
  }
  out << "\"/>\n";
  const Cell first = report.start;
  out << "  <circle cx=\"" << first.x * kCell + kCell / 2 << "\" cy=\"" << (mdp.height() - 1 - first.y) * kCell + kCell / 2
      << "\" r=\"5\" fill=\"#d62728\"/>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace taskalg
