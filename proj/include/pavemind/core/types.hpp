#pragma once
// Road network records as read from the detection, maintenance and route
// metadata tables.

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pavemind::core {

// disease code -> quantity (m^2, m or count depending on the code)
using DiseaseMap = std::map<std::string, double>;

struct RouteMeta {
  std::string route_id;
  std::string road_grade;
  std::string pavement_type;
  std::string base_type;
  std::string traffic_volume;  // H, M or L
  std::string department;
  std::string unit;
  std::string area;
  int special_section = 0;  // 0 or 1
  std::string admin_grade;
};

struct SegmentKey {
  std::string route_id;
  double start_m = 0.0;
  double end_m = 0.0;

  double length_m() const { return end_m - start_m; }
  std::string label() const;
  auto operator<=>(const SegmentKey&) const = default;
};

struct DetectionRecord {
  std::string route_id;
  double segment_start_m = 0.0;
  double segment_end_m = 0.0;
  int year = 0;
  double pci = 0.0;
  DiseaseMap diseases;

  double length_m() const { return segment_end_m - segment_start_m; }
  SegmentKey segment() const { return {route_id, segment_start_m, segment_end_m}; }
  bool operator==(const DetectionRecord&) const = default;
};

struct MaintenanceRecord {
  std::string route_id;
  double segment_start_m = 0.0;
  double segment_end_m = 0.0;
  int year = 0;
  std::string treatment_code;
  std::string measure;
  std::string location;
  double cost_per_km = 0.0;
  double pre_pci = 0.0;
  double post_pci = 0.0;
  std::optional<double> next_year_pci;

  double length_m() const { return segment_end_m - segment_start_m; }
  SegmentKey segment() const { return {route_id, segment_start_m, segment_end_m}; }
  bool operator==(const MaintenanceRecord&) const = default;
};

// Route-level annual series. All vectors have length years.size().
struct RouteSeries {
  std::string route_id;
  std::vector<int> years;
  std::vector<double> pci;
  std::map<std::string, std::vector<double>> disease_series;
  // Years filled by linear interpolation between neighbours.
  std::vector<int> interpolated_years;

  std::size_t length() const { return years.size(); }
};

enum class BudgetScope { Network, PerRoute };

struct Budget {
  double amount = 0.0;
  BudgetScope scope = BudgetScope::Network;
};

}  // namespace pavemind::core
