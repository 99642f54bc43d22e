#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "taskalg/algebra.hpp"
#include "taskalg/mdp.hpp"
#include "taskalg/planner.hpp"
#include "taskalg/runtime.hpp"

namespace taskalg::io {

inline constexpr int kEnvironmentSchema = 1;
inline constexpr std::uint32_t kTableFormatVersion = 1;

/// Environment document:
///   {"schema_version": 1, "width": W, "height": H, "propositions": [...],
///    "cells": [{"x": X, "y": Y, "labels": [...]}, ...],
///    "start": [X, Y] (optional), "walls": [[X, Y], ...] (optional)}
LabeledMdp environment_from_json(const nlohmann::json& doc);
nlohmann::json environment_to_json(const LabeledMdp& mdp);
LabeledMdp load_environment(const std::filesystem::path& path);

/// Contents of a table file: one or more slices of identical shape plus a
/// free-form JSON descriptor (task key, provenance, G_ok subsets, ...).
struct TableFile {
  int width = 0;
  int height = 0;
  int regions = 0;
  PenaltyConfig config;
  std::uint64_t fingerprint = 0;
  nlohmann::json descriptor = nlohmann::json::object();
  std::vector<QTable<double>> slices;
};

/// Binary layout, little-endian as written by the host:
///   "TQTB", u32 version, i32 width, height, regions, actions, slices,
///   f64 r_step, f64 r_goal, i32 c_p, u8 extra_term_tier, u64 fingerprint,
///   u64 descriptor length, descriptor bytes (JSON text),
///   then slices x rows x actions f64 values, row-major.
void write_table_file(const std::filesystem::path& path, const TableFile& file);
TableFile read_table_file(const std::filesystem::path& path);

/// Lossless structured-text form of the same content.
nlohmann::json table_file_to_json(const TableFile& file);
TableFile table_file_from_json(const nlohmann::json& doc);

nlohmann::json reward_spec_to_json(const RewardSpec& spec);
RewardSpec reward_spec_from_json(const nlohmann::json& doc, const PenaltyConfig& cfg);

TableFile pack(const LabeledMdp& mdp, const ExtendedQ& q);
TableFile pack(const LabeledMdp& mdp, const SafetyExtendedQ& q);
TableFile pack(const LabeledMdp& mdp, const Composed& c, const std::string& formula, Semantics semantics);

/// Throws FormatError unless the file was written for this environment.
void check_environment(const TableFile& file, const LabeledMdp& mdp);

ExtendedQ unpack_extended(const TableFile& file);
SafetyExtendedQ unpack_safety(const TableFile& file);
bool is_safety_file(const TableFile& file);
bool is_composed_file(const TableFile& file);

/// File name used for a key inside a library directory.
std::string library_file_name(const std::string& key);

/// Loads every table file in `dir` that matches the environment.
TaskLibrary load_library(const std::filesystem::path& dir, const LabeledMdp& mdp);

nlohmann::json provenance_to_json(const Provenance& p);
Provenance provenance_from_json(const nlohmann::json& doc);

nlohmann::json report_to_json(const TrajectoryReport& report, const LabeledMdp& mdp);
/// One line per transition: step, cell, action, emitted labels, reward.
std::string report_transcript(const TrajectoryReport& report, const LabeledMdp& mdp);

}  // namespace taskalg::io
