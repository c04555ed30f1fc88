#include "pavemind/recommend/treatment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "pavemind/core/csv_io.hpp"
#include "pavemind/core/errors.hpp"
#include "pavemind/recommend/mdp.hpp"

namespace pavemind::recommend {

double attenuation_rate(std::span<const std::pair<double, double>> samples) {
  if (samples.empty()) throw std::invalid_argument("attenuation_rate: no samples");
  double sum = 0.0;
  for (const auto& [now, next] : samples) {
    if (now == 0.0) throw std::invalid_argument("attenuation_rate: zero PCI in a sample");
    if (now < 0.0) throw std::invalid_argument("attenuation_rate: negative PCI in a sample");
    sum += (now - next) / now;
  }
  return sum / static_cast<double>(samples.size());
}

double reward(double segment_km, double network_km, double cost_per_km, double attenuation,
              double next_pci) {
  if (!(network_km > 0.0)) throw std::invalid_argument("reward: network length must be positive");
  if (segment_km < 0.0 || segment_km > network_km)
    throw std::invalid_argument("reward: segment length outside [0, network length]");
  return (1.0 - segment_km / network_km) * cost_per_km + attenuation * cost_per_km - next_pci;
}

namespace {

std::string mode_of(const std::map<std::string, int>& counts) {
  std::string best;
  int n = -1;
  for (const auto& [label, c] : counts)  // map order: alphabetical tie-break
    if (c > n) best = label, n = c;
  return best;
}

}  // namespace

std::vector<TreatmentAction> build_action_set(const std::vector<core::MaintenanceRecord>& history) {
  struct Acc {
    std::map<std::string, int> measures, locations;
    double cost = 0.0;
    int n = 0;
    std::vector<std::pair<double, double>> decay;
  };
  std::map<std::string, Acc> by_code;
  for (const auto& r : history) {
    if (r.treatment_code == kNoActionCode)
      throw std::invalid_argument("build_action_set: treatment code '" + kNoActionCode + "' is reserved");
    auto& a = by_code[r.treatment_code];
    ++a.measures[r.measure];
    ++a.locations[r.location];
    a.cost += r.cost_per_km;
    ++a.n;
    if (r.next_year_pci && r.post_pci > 0.0) a.decay.emplace_back(r.post_pci, *r.next_year_pci);
  }
  std::vector<TreatmentAction> actions{TreatmentAction::no_action()};
  for (const auto& [code, a] : by_code) {
    TreatmentAction t;
    t.code = code;
    t.measure = mode_of(a.measures);
    t.location = mode_of(a.locations);
    t.cost_per_km = a.cost / a.n;
    t.attenuation = a.decay.empty() ? 0.0 : std::max(0.0, attenuation_rate(a.decay));
    if (t.cost_per_km < 0.0) throw std::invalid_argument("build_action_set: negative cost for " + code);
    actions.push_back(std::move(t));
  }
  return actions;
}

std::string pci_band(double pci) {
  if (pci >= 90.0) return "excellent";
  if (pci >= 80.0) return "good";
  if (pci >= 70.0) return "fair";
  if (pci >= 60.0) return "poor";
  return "bad";
}

const std::vector<std::string>& pci_band_labels() {
  static const std::vector<std::string> labels = {"excellent", "good", "fair", "poor", "bad"};
  return labels;
}

TercileBins TercileBins::fit(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("TercileBins: no values");
  std::sort(values.begin(), values.end());
  TercileBins b;
  for (double q : {1.0 / 3.0, 2.0 / 3.0}) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double w = pos - static_cast<double>(lo);
    b.edges.push_back((1 - w) * values[lo] + w * values[hi]);
  }
  return b;
}

std::string TercileBins::label(double value) const {
  std::size_t bin = 0;
  while (bin < edges.size() && value > edges[bin]) ++bin;
  return "CO" + std::to_string(bin + 1);
}

std::vector<std::string> TercileBins::labels() { return {"CO1", "CO2", "CO3"}; }

EffectBands EffectBands::fit(std::span<const double> gains, double width) {
  if (!(width > 0.0)) throw std::invalid_argument("EffectBands: width must be positive");
  EffectBands b;
  b.width = width;
  if (gains.empty()) return b;
  auto [lo, hi] = std::minmax_element(gains.begin(), gains.end());
  b.first_bin = static_cast<int>(std::floor(*lo / width));
  b.last_bin = static_cast<int>(std::floor(*hi / width));
  // Networks need at least two labels per node.
  if (b.last_bin == b.first_bin) ++b.last_bin;
  return b;
}

std::size_t EffectBands::index_of(double gain) const {
  int k = static_cast<int>(std::floor(gain / width));
  k = std::clamp(k, first_bin, last_bin);
  return static_cast<std::size_t>(k - first_bin);
}

std::string EffectBands::label(std::size_t index) const {
  return "G" + std::to_string(first_bin + static_cast<int>(index));
}

std::vector<std::string> EffectBands::labels() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < size(); ++i) out.push_back(label(i));
  return out;
}

double EffectBands::midpoint(std::size_t index) const {
  return (static_cast<double>(first_bin + static_cast<int>(index)) + 0.5) * width;
}

namespace {

const std::vector<std::string>& domain_of(const NodeDomains& domains, const std::string& node) {
  auto it = domains.find(node);
  if (it == domains.end()) throw std::invalid_argument("treatment networks: no domain for node " + node);
  return it->second;
}

bayesnet::Dag star(const NodeDomains& domains, const std::string& root,
                   const std::vector<std::string>& children) {
  bayesnet::Dag dag;
  dag.add_node(root, domain_of(domains, root));
  for (const auto& c : children) {
    dag.add_node(c, domain_of(domains, c));
    dag.add_edge(root, c);
  }
  bayesnet::validate_structure(dag);
  return dag;
}

bayesnet::Record as_record(const TreatmentObservation& o) {
  return {{"HTR", o.htr}, {"PT", o.pt},       {"BT", o.bt},       {"PI", o.pi},
          {"DD", o.dd},   {"SD", o.sd},       {"M", o.measure},   {"L", o.location},
          {"CO", o.cost_band}, {"T", o.treatment}, {"Effective", o.effective}};
}

std::pair<bayesnet::Dag, bayesnet::CptSet> learn_one(const std::optional<bayesnet::Dag>& override_dag,
                                                     bayesnet::Dag fallback, const std::string& target,
                                                     const std::vector<bayesnet::Record>& all,
                                                     double alpha) {
  bayesnet::Dag dag = override_dag ? *override_dag : std::move(fallback);
  bayesnet::validate_structure(dag);
  if (!dag.has_node(target))
    throw std::invalid_argument("treatment networks: structure lacks node " + target);
  std::vector<bayesnet::Record> records;
  records.reserve(all.size());
  for (const auto& r : all) {
    bayesnet::Record kept;
    for (const auto& [k, v] : r)
      if (dag.has_node(k)) kept[k] = v;
    records.push_back(std::move(kept));
  }
  auto cpts = bayesnet::learn_cpts(dag, records, alpha);
  return {std::move(dag), std::move(cpts)};
}

std::vector<double> posterior(const bayesnet::Dag& dag, const bayesnet::CptSet& cpts,
                              const std::string& target, const bayesnet::Evidence& evidence) {
  bayesnet::Evidence ev;
  for (const auto& [k, v] : evidence)
    if (k != target && dag.has_node(k)) ev[k] = v;
  return bayesnet::query(dag, cpts, {target, ev});
}

}  // namespace

TreatmentNetworks learn_treatment_networks(const std::vector<TreatmentObservation>& history,
                                           const NodeDomains& domains, double alpha,
                                           const TreatmentStructures& structures) {
  std::vector<bayesnet::Record> records;
  records.reserve(history.size());
  for (const auto& o : history) records.push_back(as_record(o));

  TreatmentNetworks n;
  std::tie(n.measure_dag, n.measure_cpts) =
      learn_one(structures.measure, star(domains, "M", {"HTR", "PT", "BT", "PI", "DD"}), "M", records, alpha);
  std::tie(n.location_dag, n.location_cpts) =
      learn_one(structures.location, star(domains, "L", {"DD", "SD"}), "L", records, alpha);
  std::tie(n.treatment_dag, n.treatment_cpts) =
      learn_one(structures.treatment, star(domains, "T", {"L", "M", "CO"}), "T", records, alpha);
  std::tie(n.effect_dag, n.effect_cpts) =
      learn_one(structures.effect, star(domains, "T", {"Effective"}), "Effective", records, alpha);
  return n;
}

std::vector<double> measure_prob(const TreatmentNetworks& nets, const bayesnet::Evidence& evidence) {
  return posterior(nets.measure_dag, nets.measure_cpts, "M", evidence);
}

std::vector<double> location_prob(const TreatmentNetworks& nets, const bayesnet::Evidence& evidence) {
  return posterior(nets.location_dag, nets.location_cpts, "L", evidence);
}

std::vector<double> treatment_prob(const TreatmentNetworks& nets, const bayesnet::Evidence& evidence) {
  return posterior(nets.treatment_dag, nets.treatment_cpts, "T", evidence);
}

std::vector<double> effect_prob(const TreatmentNetworks& nets, const std::string& treatment_code) {
  return posterior(nets.effect_dag, nets.effect_cpts, "Effective", {{"T", treatment_code}});
}

TransitionModel make_transition_model(const TreatmentNetworks& nets, const EffectBands& bands,
                                      const std::vector<TreatmentAction>& actions,
                                      std::map<std::string, double> natural_change, TercileBins cost_bins) {
  TransitionModel m;
  m.bands = bands;
  m.natural_change = std::move(natural_change);
  m.cost_bins = std::move(cost_bins);
  const auto& effective = nets.effect_dag.node("Effective").domain;
  if (effective.size() != bands.size())
    throw std::invalid_argument("make_transition_model: Effective domain does not match the gain bands");
  for (const auto& a : actions) {
    if (a.is_no_action()) continue;
    m.effect_distribution[a.code] = effect_prob(nets, a.code);
  }
  return m;
}

namespace {

MdpState advance(const MdpState& s, double next_pci, double change) {
  MdpState n = s;
  n.year = s.year + 1;
  n.pci = next_pci;
  n.pci_band = pci_band(next_pci);
  n.predicted_next_pci = std::clamp(next_pci + change, 0.0, 100.0);
  n.factors["PI"] = n.pci_band;
  return n;
}

}  // namespace

NextStates transition(const MdpState& state, const TreatmentAction& action, const TransitionModel& model) {
  auto ch = model.natural_change.find(state.segment.route_id);
  if (ch == model.natural_change.end())
    throw std::invalid_argument("transition: no forecast for route " + state.segment.route_id);
  const double base = state.predicted_next_pci;
  if (!std::isfinite(base)) throw std::invalid_argument("transition: state has no forecast PCI");

  if (action.is_no_action()) return {{advance(state, base, ch->second), 1.0}};

  auto dist = model.effect_distribution.find(action.code);
  if (dist == model.effect_distribution.end())
    throw std::invalid_argument("transition: no effect distribution for treatment " + action.code);

  std::vector<std::pair<double, double>> outcomes;  // (next pci, probability)
  double total = 0.0;
  for (std::size_t b = 0; b < dist->second.size(); ++b) {
    const double p = dist->second[b];
    if (p <= 0.0) continue;
    const double pci = std::clamp(base + model.bands.midpoint(b), 0.0, 100.0);
    auto same = std::find_if(outcomes.begin(), outcomes.end(), [&](const auto& o) { return o.first == pci; });
    if (same != outcomes.end())
      same->second += p;
    else
      outcomes.emplace_back(pci, p);
    total += p;
  }
  if (!(total > 0.0)) throw std::invalid_argument("transition: empty effect distribution for " + action.code);

  NextStates out;
  out.reserve(outcomes.size());
  for (const auto& [pci, p] : outcomes) {
    MdpState n = advance(state, pci, ch->second);
    n.factors["HTR"] = "yes";
    n.factors["CO"] = model.cost_bins.edges.empty() ? n.factors["CO"] : model.cost_bins.label(action.cost_per_km);
    out.emplace_back(std::move(n), p / total);
  }
  return out;
}

double expected_gain(const MdpState& state, const TreatmentAction& action, const TransitionModel& model) {
  if (action.is_no_action()) return 0.0;
  double e = 0.0;
  for (const auto& [n, p] : transition(state, action, model)) e += p * n.pci;
  return e - state.predicted_next_pci;
}

const std::vector<std::string>& StateEncoder::factor_names() {
  static const std::vector<std::string> names = {"HTR", "PT", "BT", "PI", "DD", "SD", "CO"};
  return names;
}

StateEncoder::StateEncoder(NodeDomains domains) : domains_(std::move(domains)) {
  for (const auto& f : factor_names()) size_ += domain_of(domains_, f).size();
  size_ += 2;
}

std::vector<double> StateEncoder::encode(const MdpState& state) const {
  std::vector<double> x(size_, 0.0);
  std::size_t offset = 0;
  for (const auto& f : factor_names()) {
    const auto& dom = domains_.at(f);
    auto it = state.factors.find(f);
    if (it == state.factors.end()) throw std::invalid_argument("StateEncoder: state lacks factor " + f);
    auto pos = std::find(dom.begin(), dom.end(), it->second);
    if (pos == dom.end())
      throw std::invalid_argument("StateEncoder: unknown label '" + it->second + "' for factor " + f);
    x[offset + static_cast<std::size_t>(pos - dom.begin())] = 1.0;
    offset += dom.size();
  }
  x[offset] = state.pci / 100.0;
  x[offset + 1] = state.predicted_next_pci / 100.0;
  return x;
}

PavementEnvironment::PavementEnvironment(std::vector<MdpState> initial_states,
                                         std::vector<TreatmentAction> actions, TransitionModel model,
                                         StateEncoder encoder, RewardSettings rewards, int end_year)
    : initial_(std::move(initial_states)),
      actions_(std::move(actions)),
      model_(std::move(model)),
      encoder_(std::move(encoder)),
      rewards_(rewards),
      end_year_(end_year) {
  if (initial_.empty()) throw std::invalid_argument("PavementEnvironment: no initial states");
  if (actions_.empty()) throw std::invalid_argument("PavementEnvironment: empty action set");
}

std::vector<double> PavementEnvironment::reset(Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, initial_.size() - 1);
  state_ = initial_[pick(rng)];
  return encoder_.encode(state_);
}

EnvStep PavementEnvironment::step(std::size_t action, Rng& rng) {
  if (action >= actions_.size()) throw std::out_of_range("PavementEnvironment: action index");
  const auto& a = actions_[action];
  auto next = transition(state_, a, model_);
  std::size_t k = 0;
  if (next.size() > 1) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double r = u(rng), acc = 0.0;
    for (k = 0; k + 1 < next.size(); ++k) {
      acc += next[k].second;
      if (r < acc) break;
    }
  }
  const bool terminal = state_.year >= end_year_;
  const double seg_km = state_.segment.length_m() / 1000.0;
  const double r = reward(seg_km, rewards_.network_km, a.cost_per_km, a.attenuation, next[k].first.pci);
  state_ = std::move(next[k].first);
  return {encoder_.encode(state_), r * rewards_.scale, terminal};
}

std::vector<PlanEntry> greedy_plan(const QNetwork& q, const std::vector<MdpState>& states,
                                   const std::vector<TreatmentAction>& actions, const TransitionModel& model,
                                   const StateEncoder& encoder, double reward_scale) {
  if (q.output_size() != actions.size())
    throw std::invalid_argument("greedy_plan: network output does not match the action set");
  if (!(reward_scale > 0.0)) throw std::invalid_argument("greedy_plan: reward scale must be positive");
  std::vector<PlanEntry> plan;
  plan.reserve(states.size());
  for (const auto& s : states) {
    const auto values = q.forward(encoder.encode(s));
    const std::size_t a = argmax_lowest(values);
    PlanEntry e;
    e.segment = s.segment;
    e.action = actions[a];
    e.q_value = values[a] / reward_scale;
    e.expected_effectiveness = expected_gain(s, actions[a], model);
    plan.push_back(std::move(e));
  }
  return plan;
}

void write_plan(const std::filesystem::path& path, const std::vector<PlanEntry>& ordered) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << "priority_index,route_id,segment_start_m,segment_end_m,action_code,measure,location,"
         "cost_per_km,q_value,expected_effectiveness\n";
  std::size_t i = 1;
  for (const auto& e : ordered) {
    out << i++ << ',' << e.segment.route_id << ',' << core::format_number(e.segment.start_m) << ','
        << core::format_number(e.segment.end_m) << ',' << e.action.code << ',' << e.action.measure << ','
        << e.action.location << ',' << core::format_fixed(e.action.cost_per_km) << ','
        << core::format_fixed(e.q_value) << ',' << core::format_fixed(e.expected_effectiveness) << '\n';
  }
}

}  // namespace pavemind::recommend
