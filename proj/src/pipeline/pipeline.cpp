#include "pavemind/pipeline/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "pavemind/bayesnet/bayesnet.hpp"
#include "pavemind/core/csv_io.hpp"
#include "pavemind/core/errors.hpp"
#include "pavemind/core/rng.hpp"
#include "pavemind/core/series.hpp"
#include "pavemind/core/validate.hpp"
#include "pavemind/priority/bayes_opt.hpp"
#include "pavemind/priority/logistic.hpp"
#include "pavemind/recommend/dqn.hpp"

namespace pavemind::pipeline {

using core::DetectionRecord;
using core::MaintenanceRecord;
using core::SegmentKey;

std::string stage_name(Stage s) {
  switch (s) {
    case Stage::Predict: return "predict";
    case Stage::RankRoutes: return "rank-routes";
    case Stage::Recommend: return "recommend";
    case Stage::SegmentRank: return "segment-rank";
  }
  return "unknown";
}

std::string RunReport::to_text() const {
  std::ostringstream out;
  out << "stages:\n";
  for (const auto& s : stages) out << "  " << s.stage << ' ' << core::format_fixed(s.seconds, 3) << " s\n";
  if (!selected_features.empty()) {
    out << "selected features:\n";
    for (const auto& [route, feats] : selected_features) {
      out << "  " << route << ':';
      if (feats.empty()) out << " (none)";
      for (const auto& f : feats) out << ' ' << f.code << " (r=" << core::format_fixed(f.r, 3) << ")";
      out << '\n';
    }
  }
  if (!route_priorities.empty()) {
    out << "route priority:\n";
    for (const auto& r : route_priorities)
      out << "  " << r.route_id << " predicted_pci=" << core::format_fixed(r.predicted_pci, 2)
          << " p_route=" << core::format_fixed(r.p_route, 4) << " p_segment=" << core::format_fixed(r.p_segment_assign, 4)
          << " priority=" << core::format_fixed(r.priority, 4) << '\n';
  }
  if (plan.segments > 0) {
    out << "plan: " << plan.segments << " segments, " << plan.selected << " selected, cost "
        << core::format_fixed(plan.selected_cost, 2) << '\n';
    for (const auto& [code, n] : plan.action_counts) out << "  " << code << ": " << n << '\n';
  }
  if (!warnings.empty()) {
    out << "warnings:\n";
    for (const auto& w : warnings) out << "  " << w << '\n';
  }
  return out.str();
}

namespace {

void warn(RunReport& report, std::string msg) {
  spdlog::warn("{}", msg);
  report.warnings.push_back(std::move(msg));
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

double km(const SegmentKey& s) { return s.length_m() / 1000.0; }

double disease_total(const DetectionRecord& d) {
  double s = 0.0;
  for (const auto& [code, q] : d.diseases) s += q;
  return s;
}

double structural_total(const DetectionRecord& d, const std::vector<std::string>& codes) {
  double s = 0.0;
  for (const auto& c : codes)
    if (auto it = d.diseases.find(c); it != d.diseases.end()) s += it->second;
  return s;
}

// Sorted distinct labels; padded so every network node has two labels.
std::vector<std::string> padded_domain(std::set<std::string> labels) {
  if (labels.size() < 2) labels.insert(labels.empty() ? "_none" : "_other");
  if (labels.size() < 2) labels.insert("_other");
  return {labels.begin(), labels.end()};
}

double median_positive(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return !(x > 0.0); }), v.end());
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Segment-level categorical context shared by the ranking and recommendation stages.
class SegmentContext {
 public:
  SegmentContext(const PipelineConfig& config, const Inputs& in)
      : config_(config), in_(in), history_(core::segment_history(in.detection)) {
    for (const auto& m : in.maintenance)
      if (m.year <= config.end_year) treatments_[m.route_id].push_back(&m);
    for (auto& [route, list] : treatments_)
      std::stable_sort(list.begin(), list.end(), [](auto* a, auto* b) { return a->year < b->year; });

    std::vector<double> totals, structural;
    for (const auto& d : in.detection) {
      if (d.year > config.end_year) continue;
      totals.push_back(disease_total(d) / km(d.segment()));
      structural.push_back(structural_total(d, config.structural_codes) / km(d.segment()));
    }
    if (totals.empty()) throw InputError("no detection records up to year " + std::to_string(config.end_year));
    dd_bins_ = priority::QuartileBins::fit(totals);
    sd_threshold_ = median_positive(structural);
    std::vector<double> costs;
    for (const auto& m : in.maintenance)
      if (m.year <= config.end_year) costs.push_back(m.cost_per_km);
    if (!costs.empty()) cost_bins_ = recommend::TercileBins::fit(costs);
  }

  const core::SegmentHistory& history() const { return history_; }
  const recommend::TercileBins& cost_bins() const { return cost_bins_; }

  // Latest detection of the segment at or before `year`.
  const DetectionRecord* detection_at_or_before(const SegmentKey& s, int year) const {
    auto it = history_.find(s);
    if (it == history_.end()) return nullptr;
    auto y = it->second.upper_bound(year);
    if (y == it->second.begin()) return nullptr;
    return &std::prev(y)->second;
  }

  const DetectionRecord* detection_in(const SegmentKey& s, int year) const {
    auto it = history_.find(s);
    if (it == history_.end()) return nullptr;
    auto y = it->second.find(year);
    return y == it->second.end() ? nullptr : &y->second;
  }

  // Treatments overlapping the segment with year in [from, to].
  std::vector<const MaintenanceRecord*> treatments(const SegmentKey& s, int from, int to) const {
    std::vector<const MaintenanceRecord*> out;
    auto it = treatments_.find(s.route_id);
    if (it == treatments_.end()) return out;
    for (const auto* m : it->second)
      if (m->year >= from && m->year <= to && m->segment_start_m < s.end_m && m->segment_end_m > s.start_m)
        out.push_back(m);
    return out;
  }

  bool treated(const SegmentKey& s, int from, int to) const { return !treatments(s, from, to).empty(); }

  std::string dd_label(const DetectionRecord& d) const { return dd_bins_.label(disease_total(d) / km(d.segment())); }

  std::string sd_label(const DetectionRecord& d) const {
    const double v = structural_total(d, config_.structural_codes) / km(d.segment());
    if (!(v > 0.0)) return "none";
    return v <= sd_threshold_ ? "moderate" : "severe";
  }

  priority::SegmentFeatures rank_features(const DetectionRecord& d) const {
    const auto& meta = in_.metas.at(d.route_id);
    priority::SegmentFeatures f;
    f.base_type = meta.base_type;
    f.pavement_type = meta.pavement_type;
    f.road_grade = meta.road_grade;
    f.disease_degree = dd_label(d);
    f.treatment_history = treated(d.segment(), std::numeric_limits<int>::min(), d.year) ? "yes" : "no";
    f.admin_grade = meta.admin_grade;
    f.area = meta.area;
    f.special_section = std::to_string(meta.special_section);
    return f;
  }

  std::string cost_band(double cost) const {
    return cost_bins_.edges.empty() ? "CO1" : cost_bins_.label(cost);
  }

 private:
  const PipelineConfig& config_;
  const Inputs& in_;
  core::SegmentHistory history_;
  std::map<std::string, std::vector<const MaintenanceRecord*>> treatments_;
  priority::QuartileBins dd_bins_;
  double sd_threshold_ = 0.0;
  recommend::TercileBins cost_bins_;
};

priority::FactorDomains rank_domains(const Inputs& in) {
  std::set<std::string> bt, pt, rg, ag, a;
  for (const auto& [id, m] : in.metas) {
    bt.insert(m.base_type);
    pt.insert(m.pavement_type);
    rg.insert(m.road_grade);
    ag.insert(m.admin_grade);
    a.insert(m.area);
  }
  return {{"BT", padded_domain(bt)},
          {"PT", padded_domain(pt)},
          {"RG", padded_domain(rg)},
          {"DD", priority::QuartileBins::labels()},
          {"HTR", {"no", "yes"}},
          {"AG", padded_domain(ag)},
          {"A", padded_domain(a)},
          {"SS", {"0", "1"}}};
}

// MP rows: factors observed in year y - 1 against a treatment in year y.
std::vector<priority::RankObservation> rank_history(const PipelineConfig& config, const SegmentContext& ctx) {
  std::vector<priority::RankObservation> rows;
  for (const auto& [seg, years] : ctx.history()) {
    for (const auto& [year, d] : years) {
      const int target = year + 1;
      if (target > config.end_year) break;
      rows.push_back({ctx.rank_features(d), ctx.treated(seg, target, target)});
    }
  }
  return rows;
}

std::map<std::string, double> natural_change(const std::vector<forecast::Forecast>& forecasts,
                                             const std::map<std::string, double>& last_pci) {
  std::map<std::string, double> out;
  for (const auto& f : forecasts) out[f.route_id] = f.pci_forecast.front() - last_pci.at(f.route_id);
  return out;
}

// Route PCI at the last observed year up to end_year. Recomputed from the
// truncated series the forecaster saw.
std::map<std::string, double> last_route_pci(const PipelineConfig& config, const Inputs& in) {
  std::map<std::string, double> out;
  const auto truncated = core::up_to_year(in.detection, config.end_year);
  for (const auto& id : core::route_ids(truncated)) out[id] = core::build_series(truncated, id).pci.back();
  return out;
}

std::optional<bayesnet::Dag> maybe_structure(const std::optional<std::filesystem::path>& path) {
  if (!path) return std::nullopt;
  return bayesnet::load_structure(*path);
}

template <typename F>
auto timed(RunReport& report, Stage stage, F&& body) {
  const auto name = stage_name(stage);
  spdlog::info("stage {} started", name);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    auto result = body();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.stages.push_back({name, secs});
    spdlog::info("stage {} finished in {:.3f} s", name, secs);
    return result;
  } catch (const InputError&) {
    throw;
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace

Inputs load_inputs(const PipelineConfig& config, RunReport& report) {
  Inputs in;
  auto det = core::load_detection(config.detection_path, config.disease_vocab);
  auto mnt = core::load_maintenance(config.maintenance_path, config.treatment_vocab);
  auto meta = core::load_route_meta(config.route_meta_path);
  for (auto& w : det.warnings) warn(report, std::move(w));
  for (auto& w : mnt.warnings) warn(report, std::move(w));
  for (auto& w : meta.warnings) warn(report, std::move(w));
  if (det.records.empty()) throw InputError(config.detection_path.string() + ": no detection records");

  const auto validation = core::validate(det.records, mnt.records, meta.records);
  for (const auto& issue : validation.issues) {
    if (issue.kind == core::IssueKind::MissingRouteMeta)
      throw InputError("route " + issue.route_id + " has no metadata row");
    warn(report, issue.message);
  }
  in.detection = core::rebucket(det.records);
  in.maintenance = std::move(mnt.records);
  for (auto& m : meta.records) in.metas.emplace(m.route_id, std::move(m));
  return in;
}

std::vector<forecast::Forecast> stage_predict(const PipelineConfig& config, const Inputs& in, RunReport& report) {
  const auto truncated = core::up_to_year(in.detection, config.end_year);
  std::vector<forecast::Forecast> out;
  for (const auto& id : core::route_ids(truncated)) {
    const auto series = core::build_series(truncated, id);
    auto fc = config.forecast;
    fc.lstm.seed = derive_seed(config.seed, "forecast/" + id);
    auto f = forecast::forecast_route(series, fc);
    spdlog::info("route {}: hidden {} features {} next pci {:.2f}", id, f.hidden_size, f.selection.selected.size(),
                 f.pci_forecast.front());
    for (const auto& w : f.warnings) warn(report, "route " + id + ": " + w);
    report.selected_features[id] = f.selection.selected;
    out.push_back(std::move(f));
  }
  std::filesystem::create_directories(config.out_dir);
  forecast::write_forecasts(config.out_dir / "forecasts.csv", out);
  return out;
}

RouteRanking stage_rank_routes(const PipelineConfig& config, const Inputs& in,
                               const std::vector<forecast::Forecast>& forecasts, RunReport& report) {
  const SegmentContext ctx(config, in);
  RouteRanking r;
  r.domains = rank_domains(in);
  r.model = priority::learn_rank_model(rank_history(config, ctx), r.domains, config.alpha,
                                       maybe_structure(config.rank_structure));

  std::map<std::string, std::pair<double, int>> p_seg;  // route -> (sum, count)
  for (const auto& [seg, years] : ctx.history()) {
    const auto* d = ctx.detection_at_or_before(seg, config.end_year);
    if (!d) continue;
    auto& acc = p_seg[seg.route_id];
    acc.first += priority::segment_maintenance_prob(r.model, ctx.rank_features(*d));
    ++acc.second;
  }

  std::vector<priority::RoutePriority> routes;
  for (const auto& f : forecasts) {
    priority::RoutePriority rp;
    rp.route_id = f.route_id;
    rp.predicted_pci = f.pci_forecast.front();
    auto it = p_seg.find(f.route_id);
    rp.p_segment_assign = it == p_seg.end() ? 0.0 : it->second.first / it->second.second;
    routes.push_back(rp);
  }
  std::vector<double> pcis;
  for (const auto& rp : routes) pcis.push_back(rp.predicted_pci);
  const auto probs = priority::assign_probabilities(pcis);
  for (std::size_t i = 0; i < routes.size(); ++i) routes[i].p_route = probs[i];
  r.routes = priority::rank_routes(std::move(routes));
  report.route_priorities = r.routes;

  std::filesystem::create_directories(config.out_dir);
  auto out = open_out(config.out_dir / "route_priority.csv");
  out << "rank,route_id,predicted_pci,p_route,p_segment_assign,priority\n";
  for (std::size_t i = 0; i < r.routes.size(); ++i) {
    const auto& rp = r.routes[i];
    out << i + 1 << ',' << rp.route_id << ',' << core::format_fixed(rp.predicted_pci) << ','
        << core::format_fixed(rp.p_route) << ',' << core::format_fixed(rp.p_segment_assign) << ','
        << core::format_fixed(rp.priority) << '\n';
  }
  return r;
}

Recommendation stage_recommend(const PipelineConfig& config, const Inputs& in,
                               const std::vector<forecast::Forecast>& forecasts, RunReport& report) {
  if (config.start_year > config.end_year) throw std::invalid_argument("start year after end year");
  const SegmentContext ctx(config, in);

  std::vector<MaintenanceRecord> past;
  for (const auto& m : in.maintenance)
    if (m.year <= config.end_year) past.push_back(m);
  Recommendation rec;
  rec.actions = recommend::build_action_set(past);

  // Treatment observations in the network vocabulary. Context comes from
  // the detection before the treatment year.
  std::vector<double> gains;
  for (const auto& m : past) gains.push_back(m.post_pci - m.pre_pci);
  const auto bands = recommend::EffectBands::fit(gains);

  std::set<std::string> pt, bt, ms, ls, ts;
  for (const auto& [id, meta] : in.metas) pt.insert(meta.pavement_type), bt.insert(meta.base_type);
  for (const auto& m : past) ms.insert(m.measure), ls.insert(m.location), ts.insert(m.treatment_code);
  recommend::NodeDomains domains = {{"HTR", {"no", "yes"}},
                                    {"PT", padded_domain(pt)},
                                    {"BT", padded_domain(bt)},
                                    {"PI", recommend::pci_band_labels()},
                                    {"DD", priority::QuartileBins::labels()},
                                    {"SD", {"none", "moderate", "severe"}},
                                    {"CO", recommend::TercileBins::labels()},
                                    {"M", padded_domain(ms)},
                                    {"L", padded_domain(ls)},
                                    {"T", padded_domain(ts)},
                                    {"Effective", bands.labels()}};

  auto state_at = [&](const SegmentKey& seg, const DetectionRecord& d, double change) {
    recommend::MdpState s;
    s.segment = seg;
    s.year = d.year;
    s.pci = d.pci;
    s.pci_band = recommend::pci_band(d.pci);
    s.predicted_next_pci = std::clamp(d.pci + change, 0.0, 100.0);
    const auto meta = in.metas.at(seg.route_id);
    const auto prior = ctx.treatments(seg, std::numeric_limits<int>::min(), d.year);
    s.factors = {{"HTR", prior.empty() ? "no" : "yes"},
                 {"PT", meta.pavement_type},
                 {"BT", meta.base_type},
                 {"PI", s.pci_band},
                 {"DD", ctx.dd_label(d)},
                 {"SD", ctx.sd_label(d)},
                 {"CO", prior.empty() ? "CO1" : ctx.cost_band(prior.back()->cost_per_km)}};
    return s;
  };

  const auto changes = natural_change(forecasts, last_route_pci(config, in));
  recommend::TransitionModel model;
  model.natural_change = changes;
  model.cost_bins = ctx.cost_bins();

  if (rec.actions.size() > 1) {
    std::vector<recommend::TreatmentObservation> obs;
    for (const auto& m : past) {
      const SegmentKey seg{m.route_id, m.segment_start_m, m.segment_end_m};
      const DetectionRecord* d = ctx.detection_at_or_before(seg, m.year - 1);
      if (!d) {
        // Raw maintenance spans may differ from evaluation units; use the first covered unit.
        for (auto it = ctx.history().lower_bound({m.route_id, -1e300, -1e300}); it != ctx.history().end(); ++it) {
          if (it->first.route_id != m.route_id) break;
          if (it->first.start_m < m.segment_end_m && it->first.end_m > m.segment_start_m) {
            d = ctx.detection_at_or_before(it->first, m.year - 1);
            if (d) break;
          }
        }
      }
      if (!d) continue;
      const auto meta = in.metas.find(m.route_id);
      if (meta == in.metas.end()) continue;
      recommend::TreatmentObservation o;
      o.htr = ctx.treated(d->segment(), std::numeric_limits<int>::min(), m.year - 1) ? "yes" : "no";
      o.pt = meta->second.pavement_type;
      o.bt = meta->second.base_type;
      o.pi = recommend::pci_band(m.pre_pci);
      o.dd = ctx.dd_label(*d);
      o.sd = ctx.sd_label(*d);
      o.measure = m.measure;
      o.location = m.location;
      o.cost_band = ctx.cost_band(m.cost_per_km);
      o.treatment = m.treatment_code;
      o.effective = bands.label(bands.index_of(m.post_pci - m.pre_pci));
      obs.push_back(std::move(o));
    }
    recommend::TreatmentStructures structures{maybe_structure(config.measure_structure),
                                              maybe_structure(config.location_structure),
                                              maybe_structure(config.treatment_structure),
                                              maybe_structure(config.effect_structure)};
    const auto nets = recommend::learn_treatment_networks(obs, domains, config.alpha, structures);
    model = recommend::make_transition_model(nets, bands, rec.actions, changes, ctx.cost_bins());
  } else {
    warn(report, "no maintenance history up to the end year; only NO_ACTION is available");
  }

  std::vector<recommend::MdpState> initial;
  double network_m = 0.0;
  for (const auto& [seg, years] : ctx.history()) {
    const auto c = changes.find(seg.route_id);
    if (c == changes.end()) continue;
    const auto* start = ctx.detection_at_or_before(seg, config.start_year);
    const auto* end = ctx.detection_at_or_before(seg, config.end_year);
    if (!end) continue;
    network_m += seg.length_m();
    initial.push_back(state_at(seg, start ? *start : *end, c->second));
    if (!start) initial.back().year = config.start_year;
    rec.states.push_back(state_at(seg, *end, c->second));
    rec.states.back().year = config.end_year;
  }
  for (auto& s : initial) s.year = std::max(s.year, config.start_year);

  recommend::StateEncoder encoder(domains);
  recommend::PavementEnvironment env(initial, rec.actions, model, encoder,
                                     {network_m / 1000.0, config.reward_scale}, config.end_year);
  auto dqn = config.dqn;
  dqn.seed = derive_seed(config.seed, "dqn");
  auto trained = recommend::dqn_train(env, dqn);
  spdlog::info("dqn: {} parameters, {} updates, final loss {:.6f}", trained.network.parameter_count(),
               trained.updates, trained.loss_trace.back());
  rec.loss_trace = trained.loss_trace;
  rec.plan = recommend::greedy_plan(trained.network, rec.states, rec.actions, model, encoder, config.reward_scale);

  std::filesystem::create_directories(config.out_dir);
  auto out = open_out(config.out_dir / "dqn_loss.csv");
  out << "epoch,loss\n";
  for (std::size_t e = 0; e < rec.loss_trace.size(); ++e)
    out << e + 1 << ',' << core::format_number(rec.loss_trace[e]) << '\n';
  return rec;
}

SegmentPlan stage_segment_rank(const PipelineConfig& config, const Inputs& in, const RouteRanking& ranking,
                               const Recommendation& rec, RunReport& report) {
  const SegmentContext ctx(config, in);
  const priority::FeatureEncoder encoder(ranking.domains);

  std::vector<std::vector<double>> xs;
  std::vector<int> ys;
  for (const auto& row : rank_history(config, ctx)) {
    xs.push_back(encoder.encode(row.features));
    ys.push_back(row.maintained ? 1 : 0);
  }
  priority::LogisticModel lr;
  const auto positives = std::count(ys.begin(), ys.end(), 1);
  if (positives == 0 || positives == static_cast<long>(ys.size())) {
    warn(report, "maintenance decisions are single-class; segment scores fall back to zero weights");
    lr.weights.assign(encoder.size(), 0.0);
  } else {
    auto lc = config.logistic;
    lc.seed = derive_seed(config.seed, "logistic");
    lr = priority::fit_logistic(xs, ys, lc);
  }

  // Incumbent of the relaxed one-hot box, used as a sanity anchor for the ordering.
  priority::SearchSpace space{std::vector<double>(encoder.size(), 0.0), std::vector<double>(encoder.size(), 1.0)};
  auto bo = config.bayes_opt;
  bo.seed = derive_seed(config.seed, "bayes_opt");
  const auto anchor =
      priority::bayes_opt([&](std::span<const double> x) { return lr.score(x); }, space, bo).best_value;

  std::map<SegmentKey, const recommend::PlanEntry*> plan_of;
  for (const auto& e : rec.plan) plan_of[e.segment] = &e;

  SegmentPlan out;
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& route : ranking.routes) {
    std::vector<priority::SegmentCandidate> candidates;
    for (const auto& [seg, years] : ctx.history()) {
      if (seg.route_id != route.route_id) continue;
      const auto* d = ctx.detection_at_or_before(seg, config.end_year);
      auto p = plan_of.find(seg);
      if (!d || p == plan_of.end()) continue;
      candidates.push_back({seg, encoder.encode(ctx.rank_features(*d)), p->second->action.cost_per_km * km(seg)});
    }
    auto list = priority::priority_list(std::move(candidates), lr, {0.0, core::BudgetScope::Network});
    for (auto& e : list.entries) {
      top = std::max(top, e.score);
      out.ordered_plan.push_back(*plan_of.at(e.segment));
      out.priority.entries.push_back(std::move(e));
    }
  }
  for (const auto& e : rec.plan)
    if (std::none_of(out.ordered_plan.begin(), out.ordered_plan.end(),
                     [&](const auto& o) { return o.segment == e.segment; }))
      throw std::logic_error("segment " + e.segment.label() + " missing from the ordering");
  priority::apply_budget(out.priority, config.budget);

  if (!out.priority.entries.empty() && top < anchor - 0.01 * std::abs(anchor))
    warn(report, "top segment score " + core::format_fixed(top, 4) + " is below 99% of the relaxed optimum " +
                     core::format_fixed(anchor, 4));

  report.plan = {};
  report.plan.segments = out.priority.entries.size();
  for (std::size_t i = 0; i < out.priority.entries.size(); ++i) {
    const auto& e = out.priority.entries[i];
    ++report.plan.action_counts[out.ordered_plan[i].action.code];
    if (e.selected) {
      ++report.plan.selected;
      report.plan.selected_cost += e.cost;
    }
  }

  std::filesystem::create_directories(config.out_dir);
  priority::write_priority(config.out_dir / "priority.csv", out.priority);
  recommend::write_plan(config.out_dir / "plan.csv", out.ordered_plan);
  emit_plot_data(config, in, rec, out, report);
  return out;
}

std::vector<std::filesystem::path> emit_plot_data(const PipelineConfig& config, const Inputs& in,
                                                  const Recommendation& rec, const SegmentPlan& plan,
                                                  RunReport& report) {
  std::map<SegmentKey, const recommend::MdpState*> state_of;
  for (const auto& s : rec.states) state_of[s.segment] = &s;
  std::map<SegmentKey, double> actual;
  for (const auto& d : in.detection)
    if (d.year == config.end_year + 1) actual[d.segment()] = d.pci;

  std::map<std::string, std::vector<std::size_t>> by_route;  // indices into the ordered plan
  for (std::size_t i = 0; i < plan.ordered_plan.size(); ++i) by_route[plan.ordered_plan[i].segment.route_id].push_back(i);

  std::vector<std::filesystem::path> files;
  const auto y0 = std::to_string(config.end_year), y1 = std::to_string(config.end_year + 1);
  for (const auto& [route, idx] : by_route) {
    const bool has_actual = std::all_of(idx.begin(), idx.end(), [&](std::size_t i) {
      return actual.contains(plan.ordered_plan[i].segment);
    });
    if (!has_actual) warn(report, "route " + route + ": no complete " + y1 + " detection; actual column omitted");
    const auto path = config.out_dir / ("plot_" + route + ".csv");
    auto out = open_out(path);
    out << "priority_index,pci_" << y0 << (has_actual ? ",pci_" + y1 + "_actual" : "") << ",recommended_effectiveness\n";
    std::size_t k = 1;
    for (std::size_t i : idx) {
      const auto& e = plan.ordered_plan[i];
      const auto* s = state_of.at(e.segment);
      out << k++ << ',' << core::format_fixed(s->pci);
      if (has_actual) out << ',' << core::format_fixed(actual.at(e.segment));
      out << ',' << core::format_fixed(std::clamp(s->predicted_next_pci + e.expected_effectiveness, 0.0, 100.0)) << '\n';
    }
    files.push_back(path);
  }
  return files;
}

RunReport run_pipeline(const PipelineConfig& config, Stage last) {
  config.check();
  RunReport report;
  const Inputs in = load_inputs(config, report);
  const auto forecasts = timed(report, Stage::Predict, [&] { return stage_predict(config, in, report); });
  if (last != Stage::Predict) {
    const auto ranking = timed(report, Stage::RankRoutes, [&] { return stage_rank_routes(config, in, forecasts, report); });
    if (last != Stage::RankRoutes) {
      const auto rec = timed(report, Stage::Recommend, [&] { return stage_recommend(config, in, forecasts, report); });
      if (last != Stage::Recommend)
        timed(report, Stage::SegmentRank, [&] { return stage_segment_rank(config, in, ranking, rec, report); });
    }
  }
  auto out = open_out(config.out_dir / "report.txt");
  out << report.to_text();
  return report;
}

}  // namespace pavemind::pipeline
