#include "pavemind/priority/segment_rank.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "pavemind/core/csv_io.hpp"
#include "pavemind/core/errors.hpp"

namespace pavemind::priority {

bayesnet::Evidence SegmentFeatures::as_evidence() const {
  return {{"BT", base_type},  {"PT", pavement_type}, {"RG", road_grade}, {"DD", disease_degree},
          {"HTR", treatment_history}, {"AG", admin_grade}, {"A", area}, {"SS", special_section}};
}

QuartileBins QuartileBins::fit(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("QuartileBins: no values");
  std::sort(values.begin(), values.end());
  QuartileBins b;
  // Linear interpolation between order statistics.
  for (double q : {0.25, 0.5, 0.75}) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double w = pos - static_cast<double>(lo);
    b.edges.push_back((1 - w) * values[lo] + w * values[hi]);
  }
  return b;
}

std::string QuartileBins::label(double value) const {
  std::size_t bin = 0;
  while (bin < edges.size() && value > edges[bin]) ++bin;
  return "DD" + std::to_string(bin + 1);
}

std::vector<std::string> QuartileBins::labels() { return {"DD1", "DD2", "DD3", "DD4"}; }

bayesnet::Dag rank_network(const FactorDomains& domains) {
  bayesnet::Dag dag;
  dag.add_node(kProjectNode, kProjectLabels);
  for (const auto& f : kRankFactors) {
    auto it = domains.find(f);
    if (it == domains.end()) throw std::invalid_argument("rank_network: no domain for factor " + f);
    dag.add_node(f, it->second);
    dag.add_edge(kProjectNode, f);
  }
  bayesnet::validate_structure(dag);
  return dag;
}

RankModel learn_rank_model(const std::vector<RankObservation>& history, const FactorDomains& domains,
                           double alpha, const std::optional<bayesnet::Dag>& structure) {
  RankModel m;
  m.dag = structure ? *structure : rank_network(domains);
  bayesnet::validate_structure(m.dag);
  if (!m.dag.has_node(kProjectNode) || m.dag.node(kProjectNode).domain != kProjectLabels)
    throw std::invalid_argument("learn_rank_model: structure must declare MP : no|yes");
  std::vector<bayesnet::Record> records;
  records.reserve(history.size());
  for (const auto& h : history) {
    bayesnet::Record r;
    for (const auto& [k, v] : h.features.as_evidence())
      if (m.dag.has_node(k)) r[k] = v;
    r[kProjectNode] = h.maintained ? "yes" : "no";
    records.push_back(std::move(r));
  }
  m.cpts = bayesnet::learn_cpts(m.dag, records, alpha);
  return m;
}

double segment_maintenance_prob(const RankModel& model, const bayesnet::Evidence& evidence) {
  bayesnet::Evidence ev;
  for (const auto& [k, v] : evidence)
    if (model.dag.has_node(k)) ev[k] = v;
  const auto post = bayesnet::query(model.dag, model.cpts, {kProjectNode, ev});
  return post[1];
}

double segment_maintenance_prob(const RankModel& model, const SegmentFeatures& seg) {
  return segment_maintenance_prob(model, seg.as_evidence());
}

FeatureEncoder::FeatureEncoder(FactorDomains domains) : domains_(std::move(domains)) {
  for (const auto& f : kRankFactors) {
    auto it = domains_.find(f);
    if (it == domains_.end()) throw std::invalid_argument("FeatureEncoder: no domain for factor " + f);
    for (const auto& label : it->second) columns_.push_back(f + "=" + label);
  }
}

std::vector<double> FeatureEncoder::encode(const SegmentFeatures& seg) const {
  std::vector<double> x;
  x.reserve(columns_.size());
  const auto ev = seg.as_evidence();
  for (const auto& f : kRankFactors) {
    const auto& dom = domains_.at(f);
    const std::string& v = ev.at(f);
    if (std::find(dom.begin(), dom.end(), v) == dom.end())
      throw std::invalid_argument("FeatureEncoder: unknown label '" + v + "' for factor " + f);
    for (const auto& label : dom) x.push_back(label == v ? 1.0 : 0.0);
  }
  return x;
}

void apply_budget(PriorityList& list, const core::Budget& budget) {
  if (budget.amount < 0.0) throw std::invalid_argument("apply_budget: negative budget");
  list.selected_prefix_len = 0;
  if (budget.scope == core::BudgetScope::Network) {
    double total = 0.0;
    bool open = true;
    for (auto& e : list.entries) {
      total += e.cost;
      e.cumulative_cost = total;
      e.selected = false;
      if (open && total <= budget.amount) {
        e.selected = true;
        ++list.selected_prefix_len;
      } else {
        open = false;
      }
    }
  } else {
    std::map<std::string, std::pair<double, bool>> per_route;  // running total, prefix still open
    for (auto& e : list.entries) {
      auto& [total, open] = per_route.try_emplace(e.segment.route_id, 0.0, true).first->second;
      total += e.cost;
      e.cumulative_cost = total;
      e.selected = false;
      if (open && total <= budget.amount) {
        e.selected = true;
        ++list.selected_prefix_len;
      } else {
        open = false;
      }
    }
  }
}

PriorityList priority_list(std::vector<SegmentCandidate> segments, const LogisticModel& model,
                           const core::Budget& budget) {
  if (budget.amount < 0.0) throw std::invalid_argument("priority_list: negative budget");
  PriorityList out;
  out.entries.reserve(segments.size());
  for (auto& s : segments) {
    if (s.cost < 0.0) throw std::invalid_argument("priority_list: negative segment cost");
    out.entries.push_back({s.segment, model.score(s.encoded), s.cost, 0.0, false});
  }
  std::sort(out.entries.begin(), out.entries.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.segment < b.segment;
  });

  apply_budget(out, budget);
  return out;
}

void write_priority(const std::filesystem::path& path, const PriorityList& list) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write file: " + path.string());
  out << "rank,route_id,segment_start_m,segment_end_m,score,cost,cumulative_cost,selected\n";
  for (std::size_t i = 0; i < list.entries.size(); ++i) {
    const auto& e = list.entries[i];
    out << (i + 1) << ',' << e.segment.route_id << ',' << core::format_number(e.segment.start_m) << ','
        << core::format_number(e.segment.end_m) << ',' << core::format_fixed(e.score) << ','
        << core::format_fixed(e.cost) << ',' << core::format_fixed(e.cumulative_cost) << ','
        << (e.selected ? 1 : 0) << '\n';
  }
}

}  // namespace pavemind::priority
