#pragma once

#include <map>
#include <string>
#include <vector>

#include "pavemind/core/types.hpp"

namespace pavemind::core {

// Width of one evaluation unit in metres.
inline constexpr double kEvaluationUnitM = 10.0;

// Aggregates a route's detection rows per year: length-weighted mean PCI and
// summed disease quantities. Years missing between the first and last
// observation are filled by linear interpolation and listed in
// `interpolated_years`. Throws std::invalid_argument when the route is absent
// or has fewer than two distinct years.
RouteSeries build_series(const std::vector<DetectionRecord>& records, const std::string& route_id);

// Splits records into fixed units aligned to multiples of `unit_m`. Within a
// (route, year) a unit takes the overlap-weighted PCI of the records covering
// it and disease quantities prorated by overlap length. Aligned input maps to
// itself.
std::vector<DetectionRecord> rebucket(const std::vector<DetectionRecord>& records,
                                      double unit_m = kEvaluationUnitM);

std::vector<std::string> route_ids(const std::vector<DetectionRecord>& records);

// segment -> year -> record
using SegmentHistory = std::map<SegmentKey, std::map<int, DetectionRecord>>;
SegmentHistory segment_history(const std::vector<DetectionRecord>& records);

// Keeps rows whose year is <= last_year.
std::vector<DetectionRecord> up_to_year(const std::vector<DetectionRecord>& records,
                                        int last_year);

}  // namespace pavemind::core
