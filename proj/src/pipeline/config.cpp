#include "pavemind/pipeline/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "pavemind/core/errors.hpp"

namespace pavemind::pipeline {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto t = trim(item);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

template <typename T>
T parse_number(const std::string& v) {
  T out{};
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw std::invalid_argument("not a number: '" + v + "'");
  return out;
}

std::filesystem::path resolve(const std::string& v, const std::filesystem::path& base) {
  std::filesystem::path p(v);
  return p.empty() || p.is_absolute() || base.empty() ? p : base / p;
}

using Setter = std::function<void(PipelineConfig&, const std::string&, const std::filesystem::path&)>;

const std::map<std::string, Setter>& setters() {
  using C = PipelineConfig;
  using P = std::filesystem::path;
  using S = std::string;
  static const std::map<std::string, Setter> table = {
      {"input.detection", [](C& c, const S& v, const P& b) { c.detection_path = resolve(v, b); }},
      {"input.maintenance", [](C& c, const S& v, const P& b) { c.maintenance_path = resolve(v, b); }},
      {"input.route_meta", [](C& c, const S& v, const P& b) { c.route_meta_path = resolve(v, b); }},
      {"structure.rank", [](C& c, const S& v, const P& b) { c.rank_structure = resolve(v, b); }},
      {"structure.measure", [](C& c, const S& v, const P& b) { c.measure_structure = resolve(v, b); }},
      {"structure.location", [](C& c, const S& v, const P& b) { c.location_structure = resolve(v, b); }},
      {"structure.treatment", [](C& c, const S& v, const P& b) { c.treatment_structure = resolve(v, b); }},
      {"structure.effect", [](C& c, const S& v, const P& b) { c.effect_structure = resolve(v, b); }},
      {"output.dir", [](C& c, const S& v, const P& b) { c.out_dir = resolve(v, b); }},
      {"seed", [](C& c, const S& v, const P&) { c.seed = parse_number<std::uint64_t>(v); }},
      {"corr_threshold", [](C& c, const S& v, const P&) { c.forecast.corr_threshold = parse_number<double>(v); }},
      {"forecast.horizon", [](C& c, const S& v, const P&) { c.forecast.horizon = parse_number<int>(v); }},
      {"lstm.lr", [](C& c, const S& v, const P&) { c.forecast.lstm.learning_rate = parse_number<double>(v); }},
      {"lstm.window", [](C& c, const S& v, const P&) { c.forecast.lstm.window = parse_number<std::size_t>(v); }},
      {"lstm.epochs", [](C& c, const S& v, const P&) { c.forecast.lstm.max_epochs = parse_number<int>(v); }},
      {"lstm.early_stop_epochs",
       [](C& c, const S& v, const P&) { c.forecast.lstm.early_stop_epochs = parse_number<int>(v); }},
      {"lstm.early_stop_tol",
       [](C& c, const S& v, const P&) { c.forecast.lstm.early_stop_tol = parse_number<double>(v); }},
      {"lstm.init_scale", [](C& c, const S& v, const P&) { c.forecast.lstm.init_scale = parse_number<double>(v); }},
      {"lstm.hidden_candidates",
       [](C& c, const S& v, const P&) {
         c.forecast.hidden_candidates.clear();
         for (const auto& item : split_list(v)) c.forecast.hidden_candidates.push_back(parse_number<std::size_t>(item));
       }},
      {"dqn.gamma", [](C& c, const S& v, const P&) { c.dqn.gamma = parse_number<double>(v); }},
      {"dqn.lr", [](C& c, const S& v, const P&) { c.dqn.learning_rate = parse_number<double>(v); }},
      {"dqn.epochs", [](C& c, const S& v, const P&) { c.dqn.epochs = parse_number<int>(v); }},
      {"dqn.start_year", [](C& c, const S& v, const P&) { c.start_year = parse_number<int>(v); }},
      {"dqn.end_year", [](C& c, const S& v, const P&) { c.end_year = parse_number<int>(v); }},
      {"dqn.max_steps", [](C& c, const S& v, const P&) { c.dqn.max_steps_per_epoch = parse_number<int>(v); }},
      {"dqn.replay_capacity",
       [](C& c, const S& v, const P&) { c.dqn.replay_capacity = parse_number<std::size_t>(v); }},
      {"dqn.batch_size", [](C& c, const S& v, const P&) { c.dqn.batch_size = parse_number<std::size_t>(v); }},
      {"dqn.epsilon_start", [](C& c, const S& v, const P&) { c.dqn.epsilon_start = parse_number<double>(v); }},
      {"dqn.epsilon_end", [](C& c, const S& v, const P&) { c.dqn.epsilon_end = parse_number<double>(v); }},
      {"dqn.epsilon_decay_fraction",
       [](C& c, const S& v, const P&) { c.dqn.epsilon_decay_fraction = parse_number<double>(v); }},
      {"dqn.target_sync", [](C& c, const S& v, const P&) { c.dqn.target_sync_updates = parse_number<int>(v); }},
      {"dqn.parameter_budget",
       [](C& c, const S& v, const P&) { c.dqn.parameter_budget = parse_number<std::size_t>(v); }},
      {"dqn.hidden_layers",
       [](C& c, const S& v, const P&) {
         c.dqn.hidden_layers.clear();
         for (const auto& item : split_list(v)) c.dqn.hidden_layers.push_back(parse_number<std::size_t>(item));
       }},
      {"dqn.reward_scale", [](C& c, const S& v, const P&) { c.reward_scale = parse_number<double>(v); }},
      {"logistic.lr", [](C& c, const S& v, const P&) { c.logistic.learning_rate = parse_number<double>(v); }},
      {"logistic.iterations", [](C& c, const S& v, const P&) { c.logistic.iterations = parse_number<int>(v); }},
      {"bo.iterations", [](C& c, const S& v, const P&) { c.bayes_opt.iterations = parse_number<int>(v); }},
      {"bo.initial_points", [](C& c, const S& v, const P&) { c.bayes_opt.initial_points = parse_number<int>(v); }},
      {"bn.alpha", [](C& c, const S& v, const P&) { c.alpha = parse_number<double>(v); }},
      {"budget.amount", [](C& c, const S& v, const P&) { c.budget.amount = parse_number<double>(v); }},
      {"budget.scope",
       [](C& c, const S& v, const P&) {
         if (v == "network")
           c.budget.scope = core::BudgetScope::Network;
         else if (v == "route")
           c.budget.scope = core::BudgetScope::PerRoute;
         else
           throw std::invalid_argument("budget.scope must be 'network' or 'route'");
       }},
      {"disease.structural_codes", [](C& c, const S& v, const P&) { c.structural_codes = split_list(v); }},
      {"disease.vocabulary",
       [](C& c, const S& v, const P&) {
         c.disease_vocab.clear();
         for (auto& item : split_list(v)) c.disease_vocab.insert(std::move(item));
       }},
      {"treatment.vocabulary",
       [](C& c, const S& v, const P&) {
         c.treatment_vocab.clear();
         for (auto& item : split_list(v)) c.treatment_vocab.insert(std::move(item));
       }},
  };
  return table;
}

}  // namespace

void PipelineConfig::check() const {
  auto fail = [](const std::string& why) { throw InputError("config: " + why); };
  if (!(forecast.lstm.learning_rate > 0.0)) fail("lstm.lr must be > 0");
  if (!(dqn.learning_rate > 0.0)) fail("dqn.lr must be > 0");
  if (!(logistic.learning_rate > 0.0)) fail("logistic.lr must be > 0");
  if (forecast.lstm.max_epochs < 1) fail("lstm.epochs must be >= 1");
  if (dqn.epochs < 1) fail("dqn.epochs must be >= 1");
  if (logistic.iterations < 1) fail("logistic.iterations must be >= 1");
  if (forecast.lstm.window < 1) fail("lstm.window must be >= 1");
  if (forecast.hidden_candidates.empty()) fail("lstm.hidden_candidates is empty");
  for (auto h : forecast.hidden_candidates)
    if (h < 1) fail("lstm.hidden_candidates entries must be >= 1");
  if (forecast.horizon < 1) fail("forecast.horizon must be >= 1");
  if (!(forecast.corr_threshold >= 0.0 && forecast.corr_threshold <= 1.0)) fail("corr_threshold must be in [0, 1]");
  if (!(dqn.gamma >= 0.0 && dqn.gamma < 1.0)) fail("dqn.gamma must be in [0, 1)");
  if (end_year < start_year) fail("dqn.end_year precedes dqn.start_year");
  if (!(reward_scale > 0.0)) fail("dqn.reward_scale must be > 0");
  if (alpha < 0.0) fail("bn.alpha must be >= 0");
  if (!(budget.amount >= 0.0)) fail("budget.amount must be >= 0");
  if (bayes_opt.iterations < 1) fail("bo.iterations must be >= 1");
}

PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  PipelineConfig config;
  config.out_dir = resolve(config.out_dir.string(), base_dir);
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const auto where = "config line " + std::to_string(line_no) + ": ";
    if (eq == std::string::npos) throw InputError(where + "expected 'key = value'");
    const auto key = trim(std::string_view(body).substr(0, eq));
    const auto value = trim(std::string_view(body).substr(eq + 1));
    auto it = setters().find(key);
    if (it == setters().end()) throw InputError(where + "unknown key '" + key + "'");
    try {
      it->second(config, value, base_dir);
    } catch (const std::invalid_argument& e) {
      throw InputError(where + key + ": " + e.what());
    }
  }
  config.check();
  return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

std::string format_config(const PipelineConfig& c) {
  std::ostringstream out;
  auto num = [](double v) { return core::format_number(v); };
  auto list = [](const auto& items) {
    std::string s;
    for (const auto& i : items) {
      if (!s.empty()) s += ", ";
      if constexpr (std::is_convertible_v<decltype(i), std::string>)
        s += i;
      else
        s += std::to_string(i);
    }
    return s;
  };
  out << "input.detection = " << c.detection_path.string() << '\n'
      << "input.maintenance = " << c.maintenance_path.string() << '\n'
      << "input.route_meta = " << c.route_meta_path.string() << '\n';
  if (c.rank_structure) out << "structure.rank = " << c.rank_structure->string() << '\n';
  if (c.measure_structure) out << "structure.measure = " << c.measure_structure->string() << '\n';
  if (c.location_structure) out << "structure.location = " << c.location_structure->string() << '\n';
  if (c.treatment_structure) out << "structure.treatment = " << c.treatment_structure->string() << '\n';
  if (c.effect_structure) out << "structure.effect = " << c.effect_structure->string() << '\n';
  out << "output.dir = " << c.out_dir.string() << '\n'
      << "seed = " << c.seed << '\n'
      << "corr_threshold = " << num(c.forecast.corr_threshold) << '\n'
      << "forecast.horizon = " << c.forecast.horizon << '\n'
      << "lstm.lr = " << num(c.forecast.lstm.learning_rate) << '\n'
      << "lstm.window = " << c.forecast.lstm.window << '\n'
      << "lstm.epochs = " << c.forecast.lstm.max_epochs << '\n'
      << "lstm.early_stop_epochs = " << c.forecast.lstm.early_stop_epochs << '\n'
      << "lstm.early_stop_tol = " << num(c.forecast.lstm.early_stop_tol) << '\n'
      << "lstm.init_scale = " << num(c.forecast.lstm.init_scale) << '\n'
      << "lstm.hidden_candidates = " << list(c.forecast.hidden_candidates) << '\n'
      << "dqn.gamma = " << num(c.dqn.gamma) << '\n'
      << "dqn.lr = " << num(c.dqn.learning_rate) << '\n'
      << "dqn.epochs = " << c.dqn.epochs << '\n'
      << "dqn.start_year = " << c.start_year << '\n'
      << "dqn.end_year = " << c.end_year << '\n'
      << "dqn.max_steps = " << c.dqn.max_steps_per_epoch << '\n'
      << "dqn.replay_capacity = " << c.dqn.replay_capacity << '\n'
      << "dqn.batch_size = " << c.dqn.batch_size << '\n'
      << "dqn.epsilon_start = " << num(c.dqn.epsilon_start) << '\n'
      << "dqn.epsilon_end = " << num(c.dqn.epsilon_end) << '\n'
      << "dqn.epsilon_decay_fraction = " << num(c.dqn.epsilon_decay_fraction) << '\n'
      << "dqn.target_sync = " << c.dqn.target_sync_updates << '\n'
      << "dqn.parameter_budget = " << c.dqn.parameter_budget << '\n';
  if (!c.dqn.hidden_layers.empty()) out << "dqn.hidden_layers = " << list(c.dqn.hidden_layers) << '\n';
  out << "dqn.reward_scale = " << num(c.reward_scale) << '\n'
      << "logistic.lr = " << num(c.logistic.learning_rate) << '\n'
      << "logistic.iterations = " << c.logistic.iterations << '\n'
      << "bo.iterations = " << c.bayes_opt.iterations << '\n'
      << "bo.initial_points = " << c.bayes_opt.initial_points << '\n'
      << "bn.alpha = " << num(c.alpha) << '\n'
      << "budget.amount = " << num(c.budget.amount) << '\n'
      << "budget.scope = " << (c.budget.scope == core::BudgetScope::Network ? "network" : "route") << '\n'
      << "disease.structural_codes = " << list(c.structural_codes) << '\n';
  if (!c.disease_vocab.empty()) out << "disease.vocabulary = " << list(c.disease_vocab) << '\n';
  if (!c.treatment_vocab.empty()) out << "treatment.vocabulary = " << list(c.treatment_vocab) << '\n';
  return out.str();
}

}  // namespace pavemind::pipeline
