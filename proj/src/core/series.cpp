#include "pavemind/core/series.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "pavemind/core/csv_io.hpp"

namespace pavemind::core {

RouteSeries build_series(const std::vector<DetectionRecord>& records,
                         const std::string& route_id) {
  struct YearAcc {
    double weighted_pci = 0.0;
    double length = 0.0;
    DiseaseMap diseases;
  };
  std::map<int, YearAcc> by_year;
  std::set<std::string> codes;
  for (const auto& r : records) {
    if (r.route_id != route_id) continue;
    auto& acc = by_year[r.year];
    acc.weighted_pci += r.pci * r.length_m();
    acc.length += r.length_m();
    for (const auto& [code, q] : r.diseases) {
      acc.diseases[code] += q;
      codes.insert(code);
    }
  }
  if (by_year.empty()) throw std::invalid_argument("build_series: route '" + route_id + "' absent");
  if (by_year.size() < 2)
    throw std::invalid_argument("build_series: route '" + route_id +
                                "' needs at least 2 distinct years");

  RouteSeries s;
  s.route_id = route_id;
  const int first = by_year.begin()->first;
  const int last = by_year.rbegin()->first;
  for (int y = first; y <= last; ++y) s.years.push_back(y);
  const std::size_t t = s.years.size();
  s.pci.assign(t, 0.0);
  for (const auto& c : codes) s.disease_series[c].assign(t, 0.0);

  for (const auto& [year, acc] : by_year) {
    const std::size_t i = static_cast<std::size_t>(year - first);
    s.pci[i] = acc.weighted_pci / acc.length;
    for (const auto& c : codes) {
      auto it = acc.diseases.find(c);
      s.disease_series[c][i] = it == acc.diseases.end() ? 0.0 : it->second;
    }
  }

  // Linear interpolation over gaps.
  auto lo = by_year.begin();
  for (auto hi = std::next(lo); hi != by_year.end(); lo = hi, ++hi) {
    const int y0 = lo->first, y1 = hi->first;
    for (int y = y0 + 1; y < y1; ++y) {
      const double w = static_cast<double>(y - y0) / (y1 - y0);
      const std::size_t i = static_cast<std::size_t>(y - first);
      const std::size_t i0 = static_cast<std::size_t>(y0 - first);
      const std::size_t i1 = static_cast<std::size_t>(y1 - first);
      s.pci[i] = (1 - w) * s.pci[i0] + w * s.pci[i1];
      for (auto& [c, v] : s.disease_series) v[i] = (1 - w) * v[i0] + w * v[i1];
      s.interpolated_years.push_back(y);
    }
  }
  return s;
}

std::vector<DetectionRecord> rebucket(const std::vector<DetectionRecord>& records,
                                      double unit_m) {
  if (!(unit_m > 0.0)) throw std::invalid_argument("rebucket: unit length must be positive");
  struct UnitAcc {
    double lo = 0.0, hi = 0.0;
    double weighted_pci = 0.0;
    double covered = 0.0;
    DiseaseMap diseases;
  };
  std::map<std::tuple<std::string, int, long long>, UnitAcc> units;
  for (const auto& r : records) {
    const long long k0 = static_cast<long long>(std::floor(r.segment_start_m / unit_m + 1e-9));
    const long long k1 = static_cast<long long>(std::ceil(r.segment_end_m / unit_m - 1e-9));
    for (long long k = k0; k < k1; ++k) {
      const double lo = std::max(r.segment_start_m, k * unit_m);
      const double hi = std::min(r.segment_end_m, (k + 1) * unit_m);
      const double overlap = hi - lo;
      if (overlap <= 1e-9) continue;
      auto [it, fresh] = units.try_emplace({r.route_id, r.year, k});
      UnitAcc& u = it->second;
      if (fresh) {
        u.lo = lo;
        u.hi = hi;
      } else {
        u.lo = std::min(u.lo, lo);
        u.hi = std::max(u.hi, hi);
      }
      u.weighted_pci += r.pci * overlap;
      u.covered += overlap;
      const double share = overlap / r.length_m();
      for (const auto& [c, q] : r.diseases) u.diseases[c] += q * share;
    }
  }
  std::vector<DetectionRecord> out;
  out.reserve(units.size());
  for (const auto& [key, u] : units) {
    DetectionRecord r;
    r.route_id = std::get<0>(key);
    r.year = std::get<1>(key);
    r.segment_start_m = u.lo;
    r.segment_end_m = u.hi;
    r.pci = u.weighted_pci / u.covered;
    r.diseases = u.diseases;
    out.push_back(std::move(r));
  }
  sort_canonical(out);
  return out;
}

std::vector<std::string> route_ids(const std::vector<DetectionRecord>& records) {
  std::set<std::string> ids;
  for (const auto& r : records) ids.insert(r.route_id);
  return {ids.begin(), ids.end()};
}

SegmentHistory segment_history(const std::vector<DetectionRecord>& records) {
  SegmentHistory h;
  for (const auto& r : records) h[r.segment()][r.year] = r;
  return h;
}

std::vector<DetectionRecord> up_to_year(const std::vector<DetectionRecord>& records,
                                        int last_year) {
  std::vector<DetectionRecord> out;
  std::copy_if(records.begin(), records.end(), std::back_inserter(out),
               [&](const auto& r) { return r.year <= last_year; });
  return out;
}

}  // namespace pavemind::core
