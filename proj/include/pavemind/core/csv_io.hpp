#pragma once
// CSV ingestion and emission for the three input tables.
//
// Detection:   route_id,segment_start_m,segment_end_m,year,pci,<disease codes...>
// Maintenance: route_id,segment_start_m,segment_end_m,year,treatment_code,measure,
//              location,cost_per_km,pre_pci,post_pci,next_year_pci
// Route meta:  route_id,road_grade,pavement_type,base_type,traffic_volume,
//              department,unit,area,special_section,admin_grade
//
// Loaders throw InputError naming the line and column of the first bad cell.

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pavemind/core/types.hpp"

namespace pavemind::core {

template <typename T>
struct LoadResult {
  std::vector<T> records;
  std::vector<std::string> warnings;
};

// Known codes. When empty, every code is accepted without warnings.
using Vocabulary = std::set<std::string, std::less<>>;

LoadResult<DetectionRecord> load_detection(const std::filesystem::path& path,
                                           const Vocabulary& disease_vocab = {});
LoadResult<MaintenanceRecord> load_maintenance(const std::filesystem::path& path,
                                               const Vocabulary& treatment_vocab = {});
LoadResult<RouteMeta> load_route_meta(const std::filesystem::path& path);

// Writers emit records in canonical order. `disease_codes` fixes the column
// order; when empty the sorted union of all codes is used.
void write_detection(const std::filesystem::path& path, std::vector<DetectionRecord> records,
                     std::vector<std::string> disease_codes = {});
void write_maintenance(const std::filesystem::path& path,
                       std::vector<MaintenanceRecord> records);
void write_route_meta(const std::filesystem::path& path, std::vector<RouteMeta> metas);

void sort_canonical(std::vector<DetectionRecord>& records);
void sort_canonical(std::vector<MaintenanceRecord>& records);

// Shortest decimal text that parses back to the same double.
std::string format_number(double v);
// Fixed-point text with `digits` decimals, used by report files.
std::string format_fixed(double v, int digits = 6);

std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace pavemind::core
