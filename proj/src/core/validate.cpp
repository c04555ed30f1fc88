#include "pavemind/core/validate.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "pavemind/core/csv_io.hpp"

namespace pavemind::core {

std::size_t ValidationReport::count(IssueKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      issues.begin(), issues.end(), [&](const auto& i) { return i.kind == kind; }));
}

namespace {

void report_gaps(const std::set<int>& years, const std::string& route, const std::string& what,
                 ValidationReport& report) {
  if (years.empty()) return;
  for (int y = *years.begin(); y <= *years.rbegin(); ++y)
    if (!years.contains(y))
      report.issues.push_back({IssueKind::MissingYear, route,
                               what + ": missing year " + std::to_string(y) + " (interpolated)"});
}

}  // namespace

ValidationReport validate(const std::vector<DetectionRecord>& detection,
                          const std::vector<MaintenanceRecord>& maintenance,
                          const std::vector<RouteMeta>& metas) {
  ValidationReport report;

  std::map<std::string, std::set<int>> route_years;
  std::map<SegmentKey, std::set<int>> segment_years;
  std::map<std::pair<std::string, int>, std::vector<const DetectionRecord*>> by_route_year;
  for (const auto& r : detection) {
    route_years[r.route_id].insert(r.year);
    segment_years[r.segment()].insert(r.year);
    by_route_year[{r.route_id, r.year}].push_back(&r);
  }

  for (const auto& [route, years] : route_years) report_gaps(years, route, "route " + route, report);
  for (const auto& [seg, years] : segment_years) {
    const auto& ry = route_years[seg.route_id];
    std::set<int> clipped;
    // Only segment gaps that the route itself does not already explain.
    for (int y = *years.begin(); y <= *years.rbegin(); ++y)
      if (years.contains(y) || !ry.contains(y)) clipped.insert(y);
    report_gaps(clipped, seg.route_id, "segment " + seg.label(), report);
  }

  for (auto& [key, rows] : by_route_year) {
    std::sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) {
      return std::tie(a->segment_start_m, a->segment_end_m) <
             std::tie(b->segment_start_m, b->segment_end_m);
    });
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto* prev = rows[i - 1];
      const auto* cur = rows[i];
      const std::string where = " in " + std::to_string(key.second);
      if (prev->segment() == cur->segment()) {
        report.issues.push_back({IssueKind::DuplicateRecord, key.first,
                                 "duplicate segment " + cur->segment().label() + where});
      } else if (cur->segment_start_m < prev->segment_end_m) {
        report.issues.push_back({IssueKind::OverlappingSegment, key.first,
                                 "segments " + prev->segment().label() + " and " +
                                     cur->segment().label() + " overlap" + where});
      }
    }
  }

  std::map<std::string, std::vector<SegmentKey>> route_segments;
  for (const auto& [seg, years] : segment_years) route_segments[seg.route_id].push_back(seg);
  for (const auto& m : maintenance) {
    auto it = route_segments.find(m.route_id);
    if (it == route_segments.end()) {
      report.issues.push_back({IssueKind::OrphanMaintenance, m.route_id,
                               "maintenance on unknown route " + m.route_id + " in " +
                                   std::to_string(m.year)});
      continue;
    }
    const bool covered = std::any_of(it->second.begin(), it->second.end(), [&](const auto& s) {
      return s.start_m < m.segment_end_m && m.segment_start_m < s.end_m;
    });
    if (!covered)
      report.issues.push_back({IssueKind::OrphanMaintenance, m.route_id,
                               "maintenance segment " + m.segment().label() +
                                   " not covered by detection data"});
  }

  if (!metas.empty()) {
    std::set<std::string> known;
    for (const auto& m : metas) known.insert(m.route_id);
    for (const auto& [route, years] : route_years)
      if (!known.contains(route))
        report.issues.push_back(
            {IssueKind::MissingRouteMeta, route, "route " + route + " has no metadata row"});
  }
  return report;
}

}  // namespace pavemind::core
