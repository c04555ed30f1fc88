#include "pavemind/core/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>

#include "pavemind/core/errors.hpp"

namespace pavemind::core {

std::string SegmentKey::label() const {
  return route_id + ":" + format_number(start_m) + "-" + format_number(end_m);
}

namespace {

const std::vector<std::string> kDetectionFixed = {"route_id", "segment_start_m",
                                                  "segment_end_m", "year", "pci"};
const std::vector<std::string> kMaintenanceHeader = {
    "route_id", "segment_start_m", "segment_end_m", "year",     "treatment_code", "measure",
    "location", "cost_per_km",     "pre_pci",       "post_pci", "next_year_pci"};
const std::vector<std::string> kMetaHeader = {
    "route_id",   "road_grade", "pavement_type", "base_type", "traffic_volume",
    "department", "unit",       "area",          "special_section", "admin_grade"};

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

struct CsvTable {
  std::vector<std::string> header;
  // (line number, cells)
  std::vector<std::pair<int, std::vector<std::string>>> rows;
};

CsvTable read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file: " + path.string());
  CsvTable t;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
      line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    t.rows.emplace_back(line_no, std::move(cells));
  }
  if (t.header.empty()) throw InputError(path.string() + ": missing header");
  return t;
}

[[noreturn]] void cell_error(const std::filesystem::path& path, int line, const std::string& col,
                             const std::string& msg) {
  throw InputError(path.filename().string() + ": row " + std::to_string(line) + ", column '" +
                   col + "': " + msg);
}

double parse_double(const std::filesystem::path& path, int line, const std::string& col,
                    const std::string& cell) {
  const std::string s = trim(cell);
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
    cell_error(path, line, col, "not a number: '" + s + "'");
  return v;
}

int parse_int(const std::filesystem::path& path, int line, const std::string& col,
              const std::string& cell) {
  const std::string s = trim(cell);
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size())
    cell_error(path, line, col, "not an integer: '" + s + "'");
  return v;
}

double parse_pci(const std::filesystem::path& path, int line, const std::string& col,
                 const std::string& cell) {
  const double v = parse_double(path, line, col, cell);
  if (v < 0.0 || v > 100.0) cell_error(path, line, col, "PCI out of [0,100]: " + trim(cell));
  return v;
}

void check_header(const std::filesystem::path& path, const std::vector<std::string>& got,
                  const std::vector<std::string>& want, bool prefix_only) {
  const bool ok = prefix_only ? got.size() >= want.size() &&
                                    std::equal(want.begin(), want.end(), got.begin())
                              : got == want;
  if (!ok) {
    std::string expected;
    for (const auto& w : want) expected += (expected.empty() ? "" : ",") + w;
    throw InputError(path.string() + ": header does not match schema, expected " + expected +
                     (prefix_only ? ",<disease codes>" : ""));
  }
}

void check_width(const std::filesystem::path& path, int line, std::size_t got,
                 std::size_t want) {
  if (got != want)
    throw InputError(path.filename().string() + ": row " + std::to_string(line) + ": expected " +
                     std::to_string(want) + " columns, found " + std::to_string(got));
}

void check_segment(const std::filesystem::path& path, int line, double start, double end) {
  if (start < 0.0) cell_error(path, line, "segment_start_m", "negative start");
  if (end <= start) cell_error(path, line, "segment_end_m", "segment end must exceed start");
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string format_fixed(double v, int digits) {
  if (v == 0.0) v = 0.0;  // drop negative zero
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s(buf);
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

void sort_canonical(std::vector<DetectionRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return std::tie(a.route_id, a.segment_start_m, a.segment_end_m, a.year) <
           std::tie(b.route_id, b.segment_start_m, b.segment_end_m, b.year);
  });
}

void sort_canonical(std::vector<MaintenanceRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return std::tie(a.route_id, a.segment_start_m, a.segment_end_m, a.year, a.treatment_code) <
           std::tie(b.route_id, b.segment_start_m, b.segment_end_m, b.year, b.treatment_code);
  });
}

LoadResult<DetectionRecord> load_detection(const std::filesystem::path& path,
                                           const Vocabulary& disease_vocab) {
  const CsvTable t = read_table(path);
  check_header(path, t.header, kDetectionFixed, true);
  LoadResult<DetectionRecord> out;
  const std::vector<std::string> codes(t.header.begin() + 5, t.header.end());
  for (const auto& c : codes) {
    if (c.empty()) throw InputError(path.string() + ": empty disease column name");
    if (!disease_vocab.empty() && !disease_vocab.contains(c))
      out.warnings.push_back("unknown disease code '" + c + "' kept as passthrough");
  }
  for (const auto& [line, cells] : t.rows) {
    check_width(path, line, cells.size(), t.header.size());
    DetectionRecord r;
    r.route_id = cells[0];
    if (r.route_id.empty()) cell_error(path, line, "route_id", "empty route id");
    r.segment_start_m = parse_double(path, line, "segment_start_m", cells[1]);
    r.segment_end_m = parse_double(path, line, "segment_end_m", cells[2]);
    check_segment(path, line, r.segment_start_m, r.segment_end_m);
    r.year = parse_int(path, line, "year", cells[3]);
    r.pci = parse_pci(path, line, "pci", cells[4]);
    for (std::size_t i = 0; i < codes.size(); ++i) {
      const std::string& cell = cells[5 + i];
      const double q = cell.empty() ? 0.0 : parse_double(path, line, codes[i], cell);
      if (q < 0.0) cell_error(path, line, codes[i], "negative quantity");
      r.diseases[codes[i]] = q;
    }
    out.records.push_back(std::move(r));
  }
  sort_canonical(out.records);
  return out;
}

LoadResult<MaintenanceRecord> load_maintenance(const std::filesystem::path& path,
                                               const Vocabulary& treatment_vocab) {
  const CsvTable t = read_table(path);
  check_header(path, t.header, kMaintenanceHeader, false);
  LoadResult<MaintenanceRecord> out;
  for (const auto& [line, cells] : t.rows) {
    check_width(path, line, cells.size(), kMaintenanceHeader.size());
    MaintenanceRecord r;
    r.route_id = cells[0];
    if (r.route_id.empty()) cell_error(path, line, "route_id", "empty route id");
    r.segment_start_m = parse_double(path, line, "segment_start_m", cells[1]);
    r.segment_end_m = parse_double(path, line, "segment_end_m", cells[2]);
    check_segment(path, line, r.segment_start_m, r.segment_end_m);
    r.year = parse_int(path, line, "year", cells[3]);
    r.treatment_code = cells[4];
    if (r.treatment_code.empty()) cell_error(path, line, "treatment_code", "empty code");
    if (!treatment_vocab.empty() && !treatment_vocab.contains(r.treatment_code))
      out.warnings.push_back("row " + std::to_string(line) + ": unknown treatment code '" +
                             r.treatment_code + "' kept");
    r.measure = cells[5];
    r.location = cells[6];
    r.cost_per_km = parse_double(path, line, "cost_per_km", cells[7]);
    if (r.cost_per_km < 0.0) cell_error(path, line, "cost_per_km", "negative cost");
    r.pre_pci = parse_pci(path, line, "pre_pci", cells[8]);
    r.post_pci = parse_pci(path, line, "post_pci", cells[9]);
    if (!cells[10].empty()) r.next_year_pci = parse_pci(path, line, "next_year_pci", cells[10]);
    out.records.push_back(std::move(r));
  }
  sort_canonical(out.records);
  return out;
}

LoadResult<RouteMeta> load_route_meta(const std::filesystem::path& path) {
  const CsvTable t = read_table(path);
  check_header(path, t.header, kMetaHeader, false);
  LoadResult<RouteMeta> out;
  std::set<std::string> seen;
  for (const auto& [line, cells] : t.rows) {
    check_width(path, line, cells.size(), kMetaHeader.size());
    RouteMeta m;
    m.route_id = cells[0];
    if (m.route_id.empty()) cell_error(path, line, "route_id", "empty route id");
    if (!seen.insert(m.route_id).second)
      cell_error(path, line, "route_id", "duplicate route id '" + m.route_id + "'");
    m.road_grade = cells[1];
    m.pavement_type = cells[2];
    m.base_type = cells[3];
    m.traffic_volume = cells[4];
    if (m.traffic_volume != "H" && m.traffic_volume != "M" && m.traffic_volume != "L")
      cell_error(path, line, "traffic_volume", "expected H, M or L");
    m.department = cells[5];
    m.unit = cells[6];
    m.area = cells[7];
    m.special_section = parse_int(path, line, "special_section", cells[8]);
    if (m.special_section != 0 && m.special_section != 1)
      cell_error(path, line, "special_section", "expected 0 or 1");
    m.admin_grade = cells[9];
    out.records.push_back(std::move(m));
  }
  std::sort(out.records.begin(), out.records.end(),
            [](const auto& a, const auto& b) { return a.route_id < b.route_id; });
  return out;
}

void write_detection(const std::filesystem::path& path, std::vector<DetectionRecord> records,
                     std::vector<std::string> disease_codes) {
  if (disease_codes.empty()) {
    std::set<std::string> all;
    for (const auto& r : records)
      for (const auto& [c, q] : r.diseases) all.insert(c);
    disease_codes.assign(all.begin(), all.end());
  }
  sort_canonical(records);
  std::ofstream out(path);
  if (!out) throw InputError("cannot write file: " + path.string());
  out << "route_id,segment_start_m,segment_end_m,year,pci";
  for (const auto& c : disease_codes) out << ',' << c;
  out << '\n';
  for (const auto& r : records) {
    out << r.route_id << ',' << format_number(r.segment_start_m) << ','
        << format_number(r.segment_end_m) << ',' << r.year << ',' << format_number(r.pci);
    for (const auto& c : disease_codes) {
      auto it = r.diseases.find(c);
      out << ',' << format_number(it == r.diseases.end() ? 0.0 : it->second);
    }
    out << '\n';
  }
}

void write_maintenance(const std::filesystem::path& path,
                       std::vector<MaintenanceRecord> records) {
  sort_canonical(records);
  std::ofstream out(path);
  if (!out) throw InputError("cannot write file: " + path.string());
  for (std::size_t i = 0; i < kMaintenanceHeader.size(); ++i)
    out << (i ? "," : "") << kMaintenanceHeader[i];
  out << '\n';
  for (const auto& r : records) {
    out << r.route_id << ',' << format_number(r.segment_start_m) << ','
        << format_number(r.segment_end_m) << ',' << r.year << ',' << r.treatment_code << ','
        << r.measure << ',' << r.location << ',' << format_number(r.cost_per_km) << ','
        << format_number(r.pre_pci) << ',' << format_number(r.post_pci) << ','
        << (r.next_year_pci ? format_number(*r.next_year_pci) : "") << '\n';
  }
}

void write_route_meta(const std::filesystem::path& path, std::vector<RouteMeta> metas) {
  std::sort(metas.begin(), metas.end(),
            [](const auto& a, const auto& b) { return a.route_id < b.route_id; });
  std::ofstream out(path);
  if (!out) throw InputError("cannot write file: " + path.string());
  for (std::size_t i = 0; i < kMetaHeader.size(); ++i) out << (i ? "," : "") << kMetaHeader[i];
  out << '\n';
  for (const auto& m : metas)
    out << m.route_id << ',' << m.road_grade << ',' << m.pavement_type << ',' << m.base_type
        << ',' << m.traffic_volume << ',' << m.department << ',' << m.unit << ',' << m.area << ','
        << m.special_section << ',' << m.admin_grade << '\n';
}

}  // namespace pavemind::core
