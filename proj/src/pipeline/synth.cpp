#include "pavemind/pipeline/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

#include "pavemind/core/csv_io.hpp"
#include "pavemind/core/rng.hpp"

namespace pavemind::pipeline {

namespace {

std::string route_name(int r) {
  char buf[16];
  if (r < 26)
    std::snprintf(buf, sizeof buf, "%c000", 'A' + r);
  else
    std::snprintf(buf, sizeof buf, "R%03d", r);
  return buf;
}

struct TreatmentKind {
  std::string code, measure, location;
  double cost_per_km;
  double gain_lo, gain_hi;
};

std::vector<TreatmentKind> treatment_kinds(int n, Rng& rng) {
  static const char* measures[] = {"preventive", "functional", "structural"};
  std::uniform_real_distribution<double> jitter(0.9, 1.1);
  std::vector<TreatmentKind> out;
  for (int k = 0; k < n; ++k) {
    char code[16];
    std::snprintf(code, sizeof code, "T%02d", k + 1);
    const int m = k % 3;
    const double lo = m == 0 ? 5.0 : m == 1 ? 11.0 : 19.0;
    out.push_back({code, measures[m], m == 2 ? "base" : "surface",
                   std::round((12.0 + 9.0 * k) * jitter(rng) * 100.0) / 100.0, lo, lo + 8.0});
  }
  return out;
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace

SyntheticData gen_synthetic(const SyntheticSpec& spec) {
  if (spec.n_routes < 1 || spec.n_segments < 1 || spec.treatment_vocab_size < 1)
    throw std::invalid_argument("gen_synthetic: counts must be >= 1");
  if (spec.years < 2) throw std::invalid_argument("gen_synthetic: a series needs at least two years");

  Rng rng = make_rng(spec.seed, "synthetic");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  const auto kinds = treatment_kinds(spec.treatment_vocab_size, rng);
  std::uniform_int_distribution<std::size_t> pick_kind(0, kinds.size() - 1);

  SyntheticData out;
  static const char* traffic[] = {"H", "M", "L"};
  for (int r = 0; r < spec.n_routes; ++r) {
    const auto id = route_name(r);
    core::RouteMeta meta;
    meta.route_id = id;
    meta.road_grade = u(rng) < 0.7 ? "A" : "B";
    meta.pavement_type = u(rng) < 0.7 ? "A" : "B";
    meta.base_type = u(rng) < 0.7 ? "A" : "B";
    meta.traffic_volume = traffic[r % 3];
    meta.department = std::string(1, static_cast<char>('A' + r % 26)) + "00";
    meta.unit = "U" + std::to_string(100 + r);
    meta.area = u(rng) < 0.5 ? "A" : "B";
    meta.special_section = u(rng) < 0.5 ? 1 : 0;
    meta.admin_grade = u(rng) < 0.5 ? "A" : "B";
    out.metas.push_back(meta);

    // Heavier traffic decays faster.
    const double route_decay = (r % 3 == 0 ? 4.5 : r % 3 == 1 ? 3.5 : 2.5) * (0.85 + 0.3 * u(rng));
    for (int s = 0; s < spec.n_segments; ++s) {
      const double start = s * 10.0;
      double pci = 88.0 + 10.0 * u(rng);
      const double decay = route_decay * (0.8 + 0.4 * u(rng));
      for (int t = 0; t < spec.years; ++t) {
        const int year = spec.first_year + t;
        if (t > 0) {
          pci = std::clamp(pci - decay + 0.8 * noise(rng), 0.0, 100.0);
          const double p_treat = pci < 65.0 ? 0.45 : pci < 78.0 ? 0.2 : 0.04;
          if (u(rng) < p_treat) {
            const auto& k = kinds[pick_kind(rng)];
            core::MaintenanceRecord m;
            m.route_id = id;
            m.segment_start_m = start;
            m.segment_end_m = start + 10.0;
            m.year = year;
            m.treatment_code = k.code;
            m.measure = k.measure;
            m.location = k.location;
            m.cost_per_km = round2(k.cost_per_km * (0.95 + 0.1 * u(rng)));
            m.pre_pci = round2(pci);
            pci = std::clamp(pci + k.gain_lo + (k.gain_hi - k.gain_lo) * u(rng), 0.0, 100.0);
            m.post_pci = round2(pci);
            out.maintenance.push_back(std::move(m));
          }
        }
        const double deficit = 100.0 - pci;
        auto qty = [&](double scale, double floor_at) {
          return round2(std::max(0.0, scale * std::max(0.0, deficit - floor_at) * (1.0 + 0.15 * noise(rng))));
        };
        core::DetectionRecord d;
        d.route_id = id;
        d.segment_start_m = start;
        d.segment_end_m = start + 10.0;
        d.year = year;
        d.pci = round2(pci);
        d.diseases["repair_1"] = round2(std::max(0.0, 0.4 + 0.3 * noise(rng)));
        d.diseases["repair_2"] = round2(2.0 * u(rng));
        d.diseases["crack_1"] = qty(0.06, 0.0);
        d.diseases["crack_2"] = qty(0.25, 5.0);
        d.diseases["crack_3"] = qty(0.15, 15.0);
        out.detection.push_back(std::move(d));
      }
    }
  }

  // next_year_pci from the following detection of the same unit.
  core::sort_canonical(out.detection);
  for (auto& m : out.maintenance) {
    auto it = std::find_if(out.detection.begin(), out.detection.end(), [&](const core::DetectionRecord& d) {
      return d.route_id == m.route_id && d.segment_start_m == m.segment_start_m && d.year == m.year + 1;
    });
    if (it != out.detection.end()) m.next_year_pci = it->pci;
  }
  core::sort_canonical(out.maintenance);
  return out;
}

SyntheticFiles write_synthetic(const std::filesystem::path& dir, const SyntheticData& data) {
  std::filesystem::create_directories(dir);
  SyntheticFiles f{dir / "detection.csv", dir / "maintenance.csv", dir / "route_meta.csv"};
  core::write_detection(f.detection, data.detection, kSyntheticDiseases);
  core::write_maintenance(f.maintenance, data.maintenance);
  core::write_route_meta(f.route_meta, data.metas);
  return f;
}

}  // namespace pavemind::pipeline
