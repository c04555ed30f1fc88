#include <algorithm>

#include "doctest.h"
#include "pavemind/core/csv_io.hpp"
#include "pavemind/core/errors.hpp"
#include "pavemind/core/rng.hpp"
#include "pavemind/core/series.hpp"
#include "pavemind/core/validate.hpp"
#include "pavemind/pipeline/synth.hpp"
#include "test_util.hpp"

using namespace pavemind;
using namespace pavemind::core;
using testutil::TempDir;
using testutil::write_file;

namespace {

const char* kDetHeader = "route_id,segment_start_m,segment_end_m,year,pci,crack_1\n";
const char* kMntHeader =
    "route_id,segment_start_m,segment_end_m,year,treatment_code,measure,location,cost_per_km,pre_pci,post_pci,"
    "next_year_pci\n";

DetectionRecord det(std::string route, double a, double b, int year, double pci, DiseaseMap d = {}) {
  return {std::move(route), a, b, year, pci, std::move(d)};
}

}  // namespace

TEST_CASE("load_detection reads the reference route table") {
  const auto r = load_detection(testutil::data_dir() / "reference_detection.csv");
  CHECK(r.records.size() == 27);
  CHECK(r.warnings.empty());
  const auto s = build_series(r.records, "A000");
  CHECK(s.length() == 9);
  CHECK(s.years.front() == 2013);
  CHECK(s.pci[0] == doctest::Approx(93.98).epsilon(1e-12));
  CHECK(s.pci[8] == doctest::Approx(73.83).epsilon(1e-12));
  CHECK(s.disease_series.at("crack_3")[8] == doctest::Approx(244.14));
}

TEST_CASE("load_detection edge cases") {
  TempDir dir("det");
  SUBCASE("header only") {
    write_file(dir / "d.csv", kDetHeader);
    CHECK(load_detection(dir / "d.csv").records.empty());
  }
  SUBCASE("pci out of range names row and column") {
    write_file(dir / "d.csv", std::string(kDetHeader) + "A,0,10,2014,80,1\nA,0,10,2015,101,1\n");
    try {
      load_detection(dir / "d.csv");
      FAIL("expected InputError");
    } catch (const InputError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("row 3") != std::string::npos);
      CHECK(msg.find("'pci'") != std::string::npos);
    }
  }
  SUBCASE("empty disease cell means zero") {
    write_file(dir / "d.csv", std::string(kDetHeader) + "A,0,10,2014,80,\n");
    CHECK(load_detection(dir / "d.csv").records.at(0).diseases.at("crack_1") == 0.0);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_detection(dir / "nope.csv"), InputError); }
  SUBCASE("bad header") {
    write_file(dir / "d.csv", "route,start\n");
    CHECK_THROWS_AS(load_detection(dir / "d.csv"), InputError);
  }
  SUBCASE("zero-length segment") {
    write_file(dir / "d.csv", std::string(kDetHeader) + "A,10,10,2014,80,1\n");
    CHECK_THROWS_AS(load_detection(dir / "d.csv"), InputError);
  }
  SUBCASE("unknown disease code warns and is kept") {
    write_file(dir / "d.csv", std::string(kDetHeader) + "A,0,10,2014,80,3\n");
    const auto r = load_detection(dir / "d.csv", Vocabulary{"crack_2"});
    CHECK(r.warnings.size() == 1);
    CHECK(r.records[0].diseases.at("crack_1") == 3.0);
  }
  SUBCASE("records come back sorted") {
    write_file(dir / "d.csv", std::string(kDetHeader) + "B,0,10,2014,80,1\nA,10,20,2015,70,1\nA,10,20,2014,75,1\n");
    const auto r = load_detection(dir / "d.csv");
    CHECK(r.records[0].route_id == "A");
    CHECK(r.records[0].year == 2014);
    CHECK(r.records[2].route_id == "B");
  }
}

TEST_CASE("load_maintenance") {
  TempDir dir("mnt");
  SUBCASE("fixture with 10 treatments") {
    std::string text = kMntHeader;
    for (int i = 0; i < 10; ++i)
      text += "A," + std::to_string(i * 10) + "," + std::to_string(i * 10 + 10) + ",2016,T01,preventive,surface,20,70,80,78\n";
    write_file(dir / "m.csv", text);
    const auto r = load_maintenance(dir / "m.csv");
    CHECK(r.records.size() == 10);
    CHECK(r.records[0].next_year_pci.value() == 78.0);
  }
  SUBCASE("negative cost") {
    write_file(dir / "m.csv", std::string(kMntHeader) + "A,0,10,2016,T01,preventive,surface,-1,70,80,\n");
    CHECK_THROWS_AS(load_maintenance(dir / "m.csv"), InputError);
  }
  SUBCASE("empty next_year_pci and unknown code") {
    write_file(dir / "m.csv", std::string(kMntHeader) + "A,0,10,2016,T99,preventive,surface,5,70,80,\n");
    const auto r = load_maintenance(dir / "m.csv", Vocabulary{"T01"});
    CHECK(r.records.size() == 1);
    CHECK_FALSE(r.records[0].next_year_pci.has_value());
    CHECK(r.warnings.size() == 1);
  }
}

TEST_CASE("load_route_meta validates traffic and special section") {
  const auto r = load_route_meta(testutil::data_dir() / "reference_route_meta.csv");
  REQUIRE(r.records.size() == 3);
  CHECK(r.records[1].admin_grade == "B");
  CHECK(r.records[2].special_section == 0);
  TempDir dir("meta");
  write_file(dir / "m.csv",
             "route_id,road_grade,pavement_type,base_type,traffic_volume,department,unit,area,special_section,"
             "admin_grade\nA,A,A,A,X,D,U,A,1,A\n");
  CHECK_THROWS_AS(load_route_meta(dir / "m.csv"), InputError);
}

TEST_CASE("round trip reproduces records") {
  TempDir dir("rt");
  pipeline::SyntheticSpec spec;
  spec.n_segments = 4;
  const auto data = pipeline::gen_synthetic(spec);
  const auto files = pipeline::write_synthetic(dir.path(), data);
  const auto d = load_detection(files.detection);
  const auto m = load_maintenance(files.maintenance);
  const auto r = load_route_meta(files.route_meta);
  CHECK(d.records == data.detection);
  CHECK(m.records == data.maintenance);
  CHECK(r.records.size() == data.metas.size());

  // Emitting what was loaded gives the same bytes.
  write_detection(dir / "d2.csv", d.records, pipeline::kSyntheticDiseases);
  write_maintenance(dir / "m2.csv", m.records);
  CHECK(testutil::read_file(dir / "d2.csv") == testutil::read_file(files.detection));
  CHECK(testutil::read_file(dir / "m2.csv") == testutil::read_file(files.maintenance));

  // The reference table survives a round trip field for field.
  const auto t = load_detection(testutil::data_dir() / "reference_detection.csv");
  write_detection(dir / "t.csv", t.records);
  CHECK(load_detection(dir / "t.csv").records == t.records);
}

TEST_CASE("build_series aggregation") {
  SUBCASE("equal-length segments average") {
    const std::vector<DetectionRecord> recs{det("A", 0, 10, 2014, 80), det("A", 10, 20, 2014, 60),
                                            det("A", 0, 10, 2015, 70), det("A", 10, 20, 2015, 70)};
    const auto s = build_series(recs, "A");
    CHECK(s.pci[0] == doctest::Approx(70.0));
  }
  SUBCASE("length weighting") {
    const std::vector<DetectionRecord> recs{det("A", 0, 30, 2014, 80, {{"c", 1}}), det("A", 30, 40, 2014, 40, {{"c", 2}}),
                                            det("A", 0, 40, 2015, 50)};
    const auto s = build_series(recs, "A");
    CHECK(s.pci[0] == doctest::Approx(70.0));
    CHECK(s.disease_series.at("c")[0] == doctest::Approx(3.0));
    CHECK(s.disease_series.at("c")[1] == doctest::Approx(0.0));
  }
  SUBCASE("single year is rejected") {
    CHECK_THROWS_AS(build_series({det("A", 0, 10, 2014, 80)}, "A"), std::invalid_argument);
  }
  SUBCASE("absent route") { CHECK_THROWS_AS(build_series({det("A", 0, 10, 2014, 80)}, "B"), std::invalid_argument); }
  SUBCASE("gap interpolation") {
    const auto s = build_series({det("A", 0, 10, 2015, 80), det("A", 0, 10, 2017, 60)}, "A");
    CHECK(s.years == std::vector<int>{2015, 2016, 2017});
    CHECK(s.pci[1] == doctest::Approx(70.0));
    CHECK(s.interpolated_years == std::vector<int>{2016});
  }
}

TEST_CASE("build_series properties on synthetic networks") {
  for (std::uint64_t seed : {1, 2, 3}) {
    pipeline::SyntheticSpec spec;
    spec.seed = seed;
    spec.n_segments = 7;
    const auto data = pipeline::gen_synthetic(spec);
    for (const auto& id : route_ids(data.detection)) {
      const auto s = build_series(data.detection, id);
      CHECK(s.pci.size() == s.years.size());
      for (const auto& [code, v] : s.disease_series) CHECK(v.size() == s.years.size());
      for (std::size_t t = 0; t < s.length(); ++t) {
        double lo = 100, hi = 0;
        for (const auto& d : data.detection)
          if (d.route_id == id && d.year == s.years[t]) lo = std::min(lo, d.pci), hi = std::max(hi, d.pci);
        CHECK(s.pci[t] >= lo - 1e-9);
        CHECK(s.pci[t] <= hi + 1e-9);
      }
    }
  }
}

TEST_CASE("rebucket") {
  const std::vector<DetectionRecord> aligned{det("A", 0, 10, 2014, 80, {{"c", 1}}), det("A", 10, 20, 2014, 60, {{"c", 2}})};
  CHECK(rebucket(aligned) == aligned);
  const auto split = rebucket({det("A", 0, 20, 2014, 75, {{"c", 4}})});
  REQUIRE(split.size() == 2);
  CHECK(split[1].segment_start_m == 10.0);
  CHECK(split[1].pci == doctest::Approx(75.0));
  CHECK(split[1].diseases.at("c") == doctest::Approx(2.0));
}

TEST_CASE("validate") {
  SUBCASE("clean synthetic fixture") {
    pipeline::SyntheticSpec spec;
    const auto data = pipeline::gen_synthetic(spec);
    const auto report = validate(data.detection, data.maintenance, data.metas);
    CHECK(report.empty());
  }
  SUBCASE("year gap") {
    const auto report = validate({det("A", 0, 10, 2015, 80), det("A", 0, 10, 2017, 70)}, {});
    REQUIRE(report.count(IssueKind::MissingYear) >= 1);
    CHECK(report.issues.front().message.find("missing year 2016") != std::string::npos);
  }
  SUBCASE("orphan maintenance") {
    MaintenanceRecord m;
    m.route_id = "Z";
    m.segment_end_m = 10;
    m.year = 2016;
    const auto report = validate({det("A", 0, 10, 2015, 80), det("A", 0, 10, 2016, 70)}, {m});
    CHECK(report.count(IssueKind::OrphanMaintenance) == 1);
  }
  SUBCASE("overlap and duplicate") {
    const auto report =
        validate({det("A", 0, 10, 2015, 80), det("A", 5, 15, 2015, 80), det("A", 0, 10, 2015, 70)}, {});
    CHECK(report.count(IssueKind::OverlappingSegment) + report.count(IssueKind::DuplicateRecord) >= 2);
  }
}

TEST_CASE("derive_seed is stable and name-sensitive") {
  CHECK(derive_seed(42, "dqn") == derive_seed(42, "dqn"));
  CHECK(derive_seed(42, "dqn") != derive_seed(42, "forecast"));
  CHECK(derive_seed(42, "dqn") != derive_seed(43, "dqn"));
}

TEST_CASE("format helpers") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(168.4) == "168.4");
  CHECK(format_fixed(-0.0000001, 6) == "0.000000");
  CHECK(split_csv_line("a,,b") == std::vector<std::string>{"a", "", "b"});
}
