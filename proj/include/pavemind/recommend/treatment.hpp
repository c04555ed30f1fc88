#pragma once
// Pavement treatment MDP: action set and reward from maintenance history,
// the measure / location / treatment / effectiveness networks, the
// next-state model, and greedy plan extraction from a trained Q-network.

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pavemind/bayesnet/bayesnet.hpp"
#include "pavemind/core/types.hpp"
#include "pavemind/recommend/dqn.hpp"

namespace pavemind::recommend {

inline const std::string kNoActionCode = "NONE";

struct TreatmentAction {
  std::string code;
  std::string measure;
  std::string location;
  double cost_per_km = 0.0;
  double attenuation = 0.0;  // mean relative one-year PCI decay after the treatment

  bool is_no_action() const { return code == kNoActionCode; }
  static TreatmentAction no_action() { return {kNoActionCode, "none", "none", 0.0, 0.0}; }
};

// Mean of (I_t - I_{t+1}) / I_t over (I_t, I_{t+1}) samples. Throws
// std::invalid_argument on an empty sample set or a zero I_t.
double attenuation_rate(std::span<const std::pair<double, double>> samples);

// (1 - d/D) C + lambda C - Y, with d the segment length and D the network
// length in km, C the treatment cost per km and Y the next-year PCI. The
// cost enters with a positive sign. Throws std::invalid_argument unless
// D > 0 and 0 <= d <= D.
double reward(double segment_km, double network_km, double cost_per_km, double attenuation,
              double next_pci);

// Distinct treatment codes in `history` (sorted) preceded by NO_ACTION at
// index 0. Measure and location are the most frequent labels for the code,
// cost the mean cost_per_km, attenuation from (post_pci, next_year_pci).
std::vector<TreatmentAction> build_action_set(const std::vector<core::MaintenanceRecord>& history);

// PCI condition bands: excellent >= 90 > good >= 80 > fair >= 70 > poor >= 60 > bad.
std::string pci_band(double pci);
const std::vector<std::string>& pci_band_labels();

// Tercile cut points of a sample; labels CO1 (cheapest) to CO3.
struct TercileBins {
  std::vector<double> edges;

  static TercileBins fit(std::vector<double> values);
  std::string label(double value) const;
  static std::vector<std::string> labels();
};

// PCI gain bins of fixed width covering the observed range. Bin k spans
// [k * width, (k + 1) * width) and is labelled "G<k>".
struct EffectBands {
  int first_bin = 0;
  int last_bin = 0;
  double width = 10.0;

  static EffectBands fit(std::span<const double> gains, double width = 10.0);
  std::size_t size() const { return static_cast<std::size_t>(last_bin - first_bin + 1); }
  std::size_t index_of(double gain) const;  // clamped to the covered range
  std::string label(std::size_t index) const;
  std::vector<std::string> labels() const;
  double midpoint(std::size_t index) const;
};

// One historical treatment in the categorical vocabulary of the networks.
struct TreatmentObservation {
  std::string htr, pt, bt, pi, dd, sd;  // context factors
  std::string measure, location, cost_band, treatment, effective;
};

struct TreatmentNetworks {
  bayesnet::Dag measure_dag;  // default M -> HTR, PT, BT, PI, DD
  bayesnet::CptSet measure_cpts;
  bayesnet::Dag location_dag;  // default L -> DD, SD
  bayesnet::CptSet location_cpts;
  bayesnet::Dag treatment_dag;  // default T -> L, M, CO
  bayesnet::CptSet treatment_cpts;
  bayesnet::Dag effect_dag;  // T -> Effective
  bayesnet::CptSet effect_cpts;
};

struct TreatmentStructures {
  std::optional<bayesnet::Dag> measure, location, treatment, effect;
};

// node name (HTR, PT, BT, PI, DD, SD, M, L, CO, T, Effective) -> labels
using NodeDomains = std::map<std::string, std::vector<std::string>>;

TreatmentNetworks learn_treatment_networks(const std::vector<TreatmentObservation>& history,
                                           const NodeDomains& domains, double alpha = 1.0,
                                           const TreatmentStructures& structures = {});

// P(M | HTR, PT, BT, PI, DD)
std::vector<double> measure_prob(const TreatmentNetworks& nets, const bayesnet::Evidence& evidence);
// P(L | DD, SD)
std::vector<double> location_prob(const TreatmentNetworks& nets, const bayesnet::Evidence& evidence);
// P(T | L, M, CO)
std::vector<double> treatment_prob(const TreatmentNetworks& nets, const bayesnet::Evidence& evidence);
// P(Effective | T = code)
std::vector<double> effect_prob(const TreatmentNetworks& nets, const std::string& treatment_code);

struct MdpState {
  core::SegmentKey segment;
  int year = 0;
  double pci = 0.0;
  std::string pci_band;
  double predicted_next_pci = 0.0;
  // HTR, PT, BT, PI, DD, SD, CO
  std::map<std::string, std::string> factors;
};

struct TransitionModel {
  EffectBands bands;
  // treatment code -> distribution over effect bands
  std::map<std::string, std::vector<double>> effect_distribution;
  // route -> forecast one-year PCI change
  std::map<std::string, double> natural_change;
  TercileBins cost_bins;
};

// Effect distributions for every treatment in `actions` from the effect network.
TransitionModel make_transition_model(const TreatmentNetworks& nets, const EffectBands& bands,
                                      const std::vector<TreatmentAction>& actions,
                                      std::map<std::string, double> natural_change,
                                      TercileBins cost_bins);

using NextStates = std::vector<std::pair<MdpState, double>>;

// NO_ACTION moves deterministically to the forecast PCI. A treatment adds
// each effect band's midpoint gain to the forecast PCI with the band's
// probability; outcomes that clamp to the same PCI are merged. Throws
// std::invalid_argument when the route has no forecast or the treatment has
// no effect distribution.
NextStates transition(const MdpState& state, const TreatmentAction& action, const TransitionModel& model);

// Expected next PCI minus the forecast PCI.
double expected_gain(const MdpState& state, const TreatmentAction& action, const TransitionModel& model);

// One-hot context factors followed by pci / 100 and predicted_next_pci / 100.
class StateEncoder {
 public:
  static const std::vector<std::string>& factor_names();  // HTR, PT, BT, PI, DD, SD, CO
  explicit StateEncoder(NodeDomains domains);
  std::vector<double> encode(const MdpState& state) const;
  std::size_t size() const { return size_; }

 private:
  NodeDomains domains_;
  std::size_t size_ = 0;
};

struct RewardSettings {
  double network_km = 1.0;
  double scale = 1.0;  // rewards seen by the agent are multiplied by this
};

// One episode walks a randomly drawn segment from its start-year state
// through the decision years; the step taken in `end_year` is terminal.
class PavementEnvironment : public Environment {
 public:
  PavementEnvironment(std::vector<MdpState> initial_states, std::vector<TreatmentAction> actions,
                      TransitionModel model, StateEncoder encoder, RewardSettings rewards, int end_year);

  std::size_t observation_size() const override { return encoder_.size(); }
  std::size_t action_count() const override { return actions_.size(); }
  std::vector<double> reset(Rng& rng) override;
  EnvStep step(std::size_t action, Rng& rng) override;

  const MdpState& state() const { return state_; }

 private:
  std::vector<MdpState> initial_;
  std::vector<TreatmentAction> actions_;
  TransitionModel model_;
  StateEncoder encoder_;
  RewardSettings rewards_;
  int end_year_;
  MdpState state_;
};

struct PlanEntry {
  core::SegmentKey segment;
  TreatmentAction action;
  double expected_effectiveness = 0.0;  // expected PCI gain over the forecast
  double q_value = 0.0;                 // in unscaled reward units
};

// Greedy action per state (ties to the lowest action index).
std::vector<PlanEntry> greedy_plan(const QNetwork& q, const std::vector<MdpState>& states,
                                   const std::vector<TreatmentAction>& actions, const TransitionModel& model,
                                   const StateEncoder& encoder, double reward_scale = 1.0);

// CSV: priority_index,route_id,segment_start_m,segment_end_m,action_code,measure,location,
//      cost_per_km,q_value,expected_effectiveness. Entries are written in the given order.
void write_plan(const std::filesystem::path& path, const std::vector<PlanEntry>& ordered);

}  // namespace pavemind::recommend
