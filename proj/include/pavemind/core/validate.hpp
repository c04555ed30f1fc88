#pragma once

#include <string>
#include <vector>

#include "pavemind/core/types.hpp"

namespace pavemind::core {

enum class IssueKind {
  MissingYear,         // gap inside a route's or segment's year range
  OverlappingSegment,  // two rows of one route and year cover the same metres
  DuplicateRecord,     // same segment and year twice
  OrphanMaintenance,   // maintenance on an unknown route or uncovered segment
  MissingRouteMeta,    // detection route without a metadata row
};

struct ValidationIssue {
  IssueKind kind;
  std::string route_id;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool empty() const { return issues.empty(); }
  std::size_t count(IssueKind kind) const;
};

// Report-only check of a network. Metadata checks are skipped when `metas` is empty.
ValidationReport validate(const std::vector<DetectionRecord>& detection,
                          const std::vector<MaintenanceRecord>& maintenance,
                          const std::vector<RouteMeta>& metas = {});

}  // namespace pavemind::core
