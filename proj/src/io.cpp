#include "taskalg/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>

#include "taskalg/errors.hpp"

namespace taskalg::io {

using nlohmann::json;

namespace {

Cell cell_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    throw InvalidEnvironment(std::string(what) + " must be an [x, y] integer pair");
  }
  return {j[0].get<int>(), j[1].get<int>()};
}

template <typename T>
T required(const json& doc, const char* key) {
  if (!doc.contains(key)) throw InvalidEnvironment(std::string("environment is missing '") + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidEnvironment(std::string("environment field '") + key + "' has the wrong type");
  }
}

}  // namespace

LabeledMdp environment_from_json(const json& doc) {
  if (!doc.is_object()) throw InvalidEnvironment("environment document must be an object");
  const int schema = doc.value("schema_version", kEnvironmentSchema);
  if (schema != kEnvironmentSchema) {
    throw InvalidEnvironment("unsupported environment schema_version " + std::to_string(schema));
  }
  const int width = required<int>(doc, "width");
  const int height = required<int>(doc, "height");
  const auto props = required<std::vector<std::string>>(doc, "propositions");
  std::vector<CellLabels> cells;
  if (doc.contains("cells")) {
    for (const auto& c : doc.at("cells")) {
      CellLabels entry;
      try {
        entry.cell = {c.at("x").get<int>(), c.at("y").get<int>()};
        entry.labels = c.at("labels").get<std::vector<std::string>>();
      } catch (const json::exception&) {
        throw InvalidEnvironment("each cell needs integer x, y and a labels list");
      }
      cells.push_back(std::move(entry));
    }
  }
  std::vector<Cell> walls;
  if (doc.contains("walls")) {
    for (const auto& w : doc.at("walls")) walls.push_back(cell_from_json(w, "wall"));
  }
  std::optional<Cell> start;
  if (doc.contains("start") && !doc.at("start").is_null()) start = cell_from_json(doc.at("start"), "start");
  return build_mdp(width, height, props, cells, walls, start);
}

json environment_to_json(const LabeledMdp& mdp) {
  json doc;
  doc["schema_version"] = kEnvironmentSchema;
  doc["width"] = mdp.width();
  doc["height"] = mdp.height();
  doc["propositions"] = mdp.propositions();
  json cells = json::array();
  json walls = json::array();
  for (int i = 0; i < mdp.num_cells(); ++i) {
    const Cell c = mdp.cell(i);
    if (mdp.is_wall(c)) walls.push_back({c.x, c.y});
    if (!mdp.label(c).empty()) cells.push_back({{"x", c.x}, {"y", c.y}, {"labels", mdp.label_names(mdp.label(c))}});
  }
  doc["cells"] = cells;
  if (!walls.empty()) doc["walls"] = walls;
  if (mdp.start()) doc["start"] = {mdp.start()->x, mdp.start()->y};
  return doc;
}

LabeledMdp load_environment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidEnvironment("cannot open environment file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidEnvironment("environment file is not valid JSON: " + std::string(e.what()));
  }
  return environment_from_json(doc);
}

namespace {

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw FormatError("table file is truncated");
  return v;
}

}  // namespace

void write_table_file(const std::filesystem::path& path, const TableFile& file) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write table file '" + path.string() + "'");
  const Eigen::Index rows = Eigen::Index(file.width) * file.height * file.regions;
  for (const auto& s : file.slices) {
    if (s.values().rows() != rows) throw FormatError("slice shape does not match the header");
  }
  out.write("TQTB", 4);
  put<std::uint32_t>(out, kTableFormatVersion);
  put<std::int32_t>(out, file.width);
  put<std::int32_t>(out, file.height);
  put<std::int32_t>(out, file.regions);
  put<std::int32_t>(out, kNumActions);
  put<std::int32_t>(out, static_cast<std::int32_t>(file.slices.size()));
  put<double>(out, file.config.r_step);
  put<double>(out, file.config.r_goal);
  put<std::int32_t>(out, file.config.c_p);
  put<std::uint8_t>(out, file.config.extra_term_tier ? 1 : 0);
  put<std::uint64_t>(out, file.fingerprint);
  const std::string text = file.descriptor.dump();
  put<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& s : file.slices) {
    out.write(reinterpret_cast<const char*>(s.values().data()),
              static_cast<std::streamsize>(s.values().size() * sizeof(double)));
  }
  if (!out) throw FormatError("failed writing table file '" + path.string() + "'");
}

TableFile read_table_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open table file '" + path.string() + "'");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "TQTB", 4) != 0) throw FormatError("'" + path.string() + "' is not a table file");
  const auto version = get<std::uint32_t>(in);
  if (version != kTableFormatVersion) throw FormatError("unsupported table format version " + std::to_string(version));
  TableFile file;
  file.width = get<std::int32_t>(in);
  file.height = get<std::int32_t>(in);
  file.regions = get<std::int32_t>(in);
  const auto actions = get<std::int32_t>(in);
  const auto slices = get<std::int32_t>(in);
  if (actions != kNumActions) throw FormatError("table has an unexpected action count");
  if (file.width < 1 || file.height < 1 || file.regions < 0 || slices < 0) throw FormatError("corrupt table header");
  file.config.r_step = get<double>(in);
  file.config.r_goal = get<double>(in);
  file.config.c_p = get<std::int32_t>(in);
  file.config.extra_term_tier = get<std::uint8_t>(in) != 0;
  file.fingerprint = get<std::uint64_t>(in);
  const auto length = get<std::uint64_t>(in);
  if (length > (std::uint64_t{1} << 30)) throw FormatError("corrupt descriptor length");
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  if (!in) throw FormatError("table file is truncated");
  try {
    file.descriptor = json::parse(text);
  } catch (const json::parse_error&) {
    throw FormatError("table descriptor is not valid JSON");
  }
  const int cells = file.width * file.height;
  for (int i = 0; i < slices; ++i) {
    QTable<double> t(cells, file.regions);
    in.read(reinterpret_cast<char*>(t.values().data()),
            static_cast<std::streamsize>(t.values().size() * sizeof(double)));
    if (!in) throw FormatError("table file is truncated");
    file.slices.push_back(std::move(t));
  }
  return file;
}

json table_file_to_json(const TableFile& file) {
  json doc;
  doc["format_version"] = kTableFormatVersion;
  doc["width"] = file.width;
  doc["height"] = file.height;
  doc["regions"] = file.regions;
  doc["actions"] = json::array();
  for (Action a : kActions) doc["actions"].push_back(action_name(a));
  doc["config"] = {{"r_step", file.config.r_step},
                   {"r_goal", file.config.r_goal},
                   {"c_p", file.config.c_p},
                   {"extra_term_tier", file.config.extra_term_tier}};
  // Hex keeps all 64 bits exact regardless of the reader's integer width.
  std::ostringstream fp;
  fp << std::hex << file.fingerprint;
  doc["fingerprint"] = fp.str();
  doc["descriptor"] = file.descriptor;
  json slices = json::array();
  for (const auto& s : file.slices) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < s.values().rows(); ++r) {
      json row = json::array();
      for (int a = 0; a < kNumActions; ++a) row.push_back(s.values()(r, a));
      rows.push_back(std::move(row));
    }
    slices.push_back(std::move(rows));
  }
  doc["slices"] = std::move(slices);
  return doc;
}

TableFile table_file_from_json(const json& doc) {
  try {
    TableFile file;
    file.width = doc.at("width").get<int>();
    file.height = doc.at("height").get<int>();
    file.regions = doc.at("regions").get<int>();
    const auto& cfg = doc.at("config");
    file.config.r_step = cfg.at("r_step").get<double>();
    file.config.r_goal = cfg.at("r_goal").get<double>();
    file.config.c_p = cfg.at("c_p").get<int>();
    file.config.extra_term_tier = cfg.at("extra_term_tier").get<bool>();
    file.fingerprint = std::stoull(doc.at("fingerprint").get<std::string>(), nullptr, 16);
    file.descriptor = doc.at("descriptor");
    const int cells = file.width * file.height;
    for (const auto& rows : doc.at("slices")) {
      QTable<double> t(cells, file.regions);
      if (static_cast<Eigen::Index>(rows.size()) != t.values().rows()) throw FormatError("slice row count mismatch");
      for (Eigen::Index r = 0; r < t.values().rows(); ++r) {
        for (int a = 0; a < kNumActions; ++a) t.values()(r, a) = rows.at(r).at(a).get<double>();
      }
      file.slices.push_back(std::move(t));
    }
    return file;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed table export: ") + e.what());
  }
}

json reward_spec_to_json(const RewardSpec& spec) {
  json doc;
  switch (spec.kind) {
    case RewardKind::Positive: doc["kind"] = "positive"; break;
    case RewardKind::Negated: doc["kind"] = "negated"; break;
    case RewardKind::BoundaryU: doc["kind"] = "boundary-U"; break;
    case RewardKind::BoundaryEmpty: doc["kind"] = "boundary-empty"; break;
  }
  doc["key"] = spec.key();
  if (spec.formula) doc["formula"] = render(*spec.formula);
  doc["negated"] = spec.negated;
  doc["g_ok"] = spec.g_ok;
  return doc;
}

RewardSpec reward_spec_from_json(const json& doc, const PenaltyConfig& cfg) {
  try {
    const std::string kind = doc.at("kind").get<std::string>();
    RewardSpec spec;
    if (kind == "positive") {
      spec = RewardSpec::positive(parse(doc.at("formula").get<std::string>()), cfg);
    } else if (kind == "negated") {
      spec = RewardSpec::negated_task(doc.at("negated").get<std::vector<std::string>>(), cfg);
    } else if (kind == "boundary-U") {
      spec = RewardSpec::boundary_u(cfg);
    } else if (kind == "boundary-empty") {
      spec = RewardSpec::boundary_empty(cfg);
    } else {
      throw FormatError("unknown task kind '" + kind + "'");
    }
    const auto g_ok = doc.value("g_ok", std::vector<int>{});
    return g_ok.empty() ? spec : spec.with_g_ok(g_ok);
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed task descriptor: ") + e.what());
  }
}

namespace {

TableFile header_for(const LabeledMdp& mdp, const PenaltyConfig& cfg) {
  TableFile f;
  f.width = mdp.width();
  f.height = mdp.height();
  f.regions = mdp.num_regions();
  f.config = cfg;
  f.fingerprint = mdp.fingerprint();
  return f;
}

}  // namespace

TableFile pack(const LabeledMdp& mdp, const ExtendedQ& q) {
  TableFile f = header_for(mdp, q.config());
  f.descriptor = {{"type", "extended"},
                  {"task", reward_spec_to_json(q.task)},
                  {"converged", q.converged},
                  {"residual", q.residual},
                  {"sweeps", q.sweeps}};
  f.slices.push_back(q.table);
  return f;
}

TableFile pack(const LabeledMdp& mdp, const SafetyExtendedQ& q) {
  TableFile f = header_for(mdp, q.base.config);
  json converged = json::array(), residual = json::array(), sweeps = json::array();
  for (const auto& s : q.slices) {
    converged.push_back(s.converged);
    residual.push_back(s.residual);
    sweeps.push_back(s.sweeps);
    f.slices.push_back(s.table);
  }
  f.descriptor = {{"type", "safety"},
                  {"task", reward_spec_to_json(q.base)},
                  {"subsets", q.subsets},
                  {"converged", converged},
                  {"residual", residual},
                  {"sweeps", sweeps}};
  return f;
}

TableFile pack(const LabeledMdp& mdp, const Composed& c, const std::string& formula, Semantics semantics) {
  TableFile f = header_for(mdp, c.config);
  f.descriptor = {{"type", "composed"},
                  {"formula", formula},
                  {"semantics", std::string(semantics_name(semantics))},
                  {"provenance", provenance_to_json(c.provenance)},
                  {"warnings", c.warnings}};
  f.slices.push_back(c.table);
  return f;
}

void check_environment(const TableFile& file, const LabeledMdp& mdp) {
  if (file.width != mdp.width() || file.height != mdp.height() || file.regions != mdp.num_regions() ||
      file.fingerprint != mdp.fingerprint()) {
    throw FormatError("table was written for a different environment");
  }
}

bool is_safety_file(const TableFile& file) { return file.descriptor.value("type", "") == "safety"; }
bool is_composed_file(const TableFile& file) { return file.descriptor.value("type", "") == "composed"; }

ExtendedQ unpack_extended(const TableFile& file) {
  if (file.descriptor.value("type", "") != "extended" || file.slices.size() != 1) {
    throw FormatError("file does not hold a single trained table");
  }
  ExtendedQ q;
  q.table = file.slices.front();
  q.task = reward_spec_from_json(file.descriptor.at("task"), file.config);
  q.converged = file.descriptor.value("converged", false);
  q.residual = file.descriptor.value("residual", 0.0);
  q.sweeps = file.descriptor.value("sweeps", 0);
  q.env_fingerprint = file.fingerprint;
  return q;
}

SafetyExtendedQ unpack_safety(const TableFile& file) {
  if (!is_safety_file(file)) throw FormatError("file does not hold a safety-extended table");
  SafetyExtendedQ q;
  try {
    q.base = reward_spec_from_json(file.descriptor.at("task"), file.config);
    q.subsets = file.descriptor.at("subsets").get<std::vector<std::vector<int>>>();
    if (q.subsets.size() != file.slices.size()) throw FormatError("subset list does not match the slice count");
    for (std::size_t i = 0; i < file.slices.size(); ++i) {
      ExtendedQ s;
      s.table = file.slices[i];
      s.task = q.subsets[i].empty() ? q.base : q.base.with_g_ok(q.subsets[i]);
      s.converged = file.descriptor.at("converged").at(i).get<bool>();
      s.residual = file.descriptor.at("residual").at(i).get<double>();
      s.sweeps = file.descriptor.at("sweeps").at(i).get<int>();
      s.env_fingerprint = file.fingerprint;
      q.slices.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed safety descriptor: ") + e.what());
  }
  return q;
}

std::string library_file_name(const std::string& key) {
  if (key == "@U") return "boundary-U.qtab";
  if (key == "@empty") return "boundary-empty.qtab";
  std::string name;
  for (char c : key) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') {
      name += c;
    } else if (c == '&') {
      name += '+';
    } else {
      name += '~';
    }
  }
  return name + ".qtab";
}

TaskLibrary load_library(const std::filesystem::path& dir, const LabeledMdp& mdp) {
  TaskLibrary lib;
  if (!std::filesystem::is_directory(dir)) return lib;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".qtab") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    TableFile f = read_table_file(path);
    if (f.fingerprint != mdp.fingerprint() || is_composed_file(f)) continue;
    if (is_safety_file(f)) {
      lib.add_safety(unpack_safety(f));
    } else {
      lib.add(unpack_extended(f));
    }
  }
  return lib;
}

json provenance_to_json(const Provenance& p) {
  json doc{{"op", p.op}};
  if (!p.key.empty()) doc["key"] = p.key;
  if (!p.children.empty()) {
    doc["children"] = json::array();
    for (const auto& c : p.children) doc["children"].push_back(provenance_to_json(c));
  }
  return doc;
}

Provenance provenance_from_json(const json& doc) {
  Provenance p;
  p.op = doc.at("op").get<std::string>();
  p.key = doc.value("key", "");
  if (doc.contains("children")) {
    for (const auto& c : doc.at("children")) p.children.push_back(provenance_from_json(c));
  }
  return p;
}

namespace {

std::string tier_name(RewardTier t) {
  switch (t) {
    case RewardTier::Step: return "step";
    case RewardTier::BadStep: return "badstep";
    case RewardTier::WorstStep: return "worststep";
    case RewardTier::Goal: return "goal";
    case RewardTier::BadTerm: return "badterm";
    case RewardTier::WorstTerm: return "worstterm";
  }
  return "?";
}

std::string termination_name(Termination t) {
  switch (t) {
    case Termination::Goal: return "goal";
    case Termination::BadTerm: return "badTerm";
    case Termination::WorstTerm: return "worstTerm";
    case Termination::NeverTerm: return "neverTerm";
  }
  return "?";
}

std::string cell_text(Cell c) { return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")"; }

}  // namespace

json report_to_json(const TrajectoryReport& report, const LabeledMdp& mdp) {
  json doc;
  doc["start"] = {report.start.x, report.start.y};
  json steps = json::array();
  for (const auto& st : report.execution.steps) {
    steps.push_back({{"cell", {st.state.x, st.state.y}}, {"emitted", mdp.label_names(st.emitted)}});
  }
  doc["steps"] = std::move(steps);
  json actions = json::array();
  for (Action a : report.actions) actions.push_back(action_name(a));
  doc["actions"] = std::move(actions);
  json nonempty = json::array();
  for (LabelSet l : report.nonempty) nonempty.push_back(mdp.label_names(l));
  doc["nonempty_projection"] = std::move(nonempty);
  doc["terminated"] = report.execution.terminated;
  doc["terminal_region"] = report.execution.terminal_region ? json(*report.execution.terminal_region) : json(nullptr);
  doc["chatter"] = report.chatter;
  doc["hit_max_steps"] = report.hit_max_steps;
  if (!report.rewards.empty() || !report.actions.empty()) {
    doc["rewards"] = report.rewards;
    json tiers = json::array();
    for (RewardTier t : report.tiers) tiers.push_back(tier_name(t));
    doc["tiers"] = std::move(tiers);
    doc["stats"] = {{"l_unlabeled", report.stats.l_unlabeled},
                    {"l_badLabel", report.stats.l_bad_label},
                    {"l_worstPassThrough", report.stats.l_worst_pass_through},
                    {"termination", termination_name(report.stats.termination)}};
    doc["total_reward"] = report.total_reward;
  }
  doc["path_class"] = report.path_class ? json(std::string(path_class_name(*report.path_class))) : json(nullptr);
  return doc;
}

std::string report_transcript(const TrajectoryReport& report, const LabeledMdp& mdp) {
  std::ostringstream out;
  Cell s = report.start;
  for (std::size_t i = 0; i < report.actions.size(); ++i) {
    const StepResult r = mdp.step(s, report.actions[i]);
    out << "step " << i << "  " << cell_text(s) << "  " << action_name(report.actions[i]) << "  -> "
        << (r.done ? std::string("terminate") : cell_text(r.next));
    if (!r.done && !r.emitted.empty()) out << "  emitted " << mdp.label_string(r.emitted);
    if (i < report.rewards.size()) out << "  reward " << report.rewards[i];
    out << "\n";
    s = r.next;
  }
  out << "labels:";
  if (report.nonempty.empty()) out << " (none)";
  for (LabelSet l : report.nonempty) out << " " << mdp.label_string(l);
  out << "\n";
  if (report.execution.terminated) {
    out << "terminated in region " << *report.execution.terminal_region << " "
        << mdp.label_string(mdp.region(*report.execution.terminal_region).label) << "\n";
  } else {
    out << (report.chatter ? "chatter: revisited " + cell_text(report.execution.steps.back().state)
                           : std::string("step limit reached"))
        << "\n";
  }
  if (!report.rewards.empty() || !report.execution.terminated) out << "total reward " << report.total_reward << "\n";
  if (report.path_class) out << "class " << path_class_name(*report.path_class) << "\n";
  return out.str();
}

}  // namespace taskalg::io
