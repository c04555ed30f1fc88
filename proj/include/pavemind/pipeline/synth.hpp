#pragma once
// Seeded synthetic road networks in the input table schemas: PCI decaying
// along a per-route trend with treatment jumps, disease quantities driven by
// the PCI deficit, and a maintenance history consistent with the jumps.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pavemind/core/types.hpp"

namespace pavemind::pipeline {

inline const std::vector<std::string> kSyntheticDiseases = {"repair_1", "repair_2", "crack_1", "crack_2",
                                                            "crack_3"};

struct SyntheticSpec {
  std::uint64_t seed = 7;
  int n_routes = 3;
  int n_segments = 20;  // 10 m evaluation units per route
  int years = 9;
  int treatment_vocab_size = 6;
  int first_year = 2013;
};

struct SyntheticData {
  std::vector<core::DetectionRecord> detection;
  std::vector<core::MaintenanceRecord> maintenance;
  std::vector<core::RouteMeta> metas;
};

// Throws std::invalid_argument when a count is below 1 or years < 2.
SyntheticData gen_synthetic(const SyntheticSpec& spec);

struct SyntheticFiles {
  std::filesystem::path detection, maintenance, route_meta;
};

// Writes detection.csv, maintenance.csv and route_meta.csv into `dir`.
SyntheticFiles write_synthetic(const std::filesystem::path& dir, const SyntheticData& data);

}  // namespace pavemind::pipeline
