#include "pavemind/forecast/forecaster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "pavemind/core/csv_io.hpp"
#include "pavemind/core/errors.hpp"

namespace pavemind::forecast {

MinMaxScaler MinMaxScaler::fit(const std::vector<Row>& rows) {
  if (rows.empty()) throw std::invalid_argument("MinMaxScaler: no rows");
  const std::size_t k = rows.front().size();
  MinMaxScaler s;
  s.lo.assign(k, std::numeric_limits<double>::infinity());
  std::vector<double> hi(k, -std::numeric_limits<double>::infinity());
  for (const Row& r : rows)
    for (std::size_t j = 0; j < k; ++j) {
      s.lo[j] = std::min(s.lo[j], r[j]);
      hi[j] = std::max(hi[j], r[j]);
    }
  s.range.resize(k);
  for (std::size_t j = 0; j < k; ++j) s.range[j] = hi[j] > s.lo[j] ? hi[j] - s.lo[j] : 1.0;
  return s;
}

Row MinMaxScaler::transform(const Row& row) const {
  Row out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - lo[j]) / range[j];
  return out;
}

Row MinMaxScaler::inverse(const Row& row) const {
  Row out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = row[j] * range[j] + lo[j];
  return out;
}

std::vector<Row> feature_rows(const core::RouteSeries& series,
                              const std::vector<std::string>& codes) {
  std::vector<Row> rows(series.length(), Row(codes.size()));
  for (std::size_t j = 0; j < codes.size(); ++j) {
    auto it = series.disease_series.find(codes[j]);
    if (it == series.disease_series.end())
      throw std::invalid_argument("feature_rows: series lacks disease '" + codes[j] + "'");
    for (std::size_t t = 0; t < series.length(); ++t) rows[t][j] = it->second[t];
  }
  return rows;
}

namespace {

LstmModel train_on_rows(const std::vector<Row>& raw, std::vector<std::string> codes,
                        const LstmTrainConfig& config) {
  LstmModel model;
  model.codes = std::move(codes);
  model.window = config.window;
  model.scaler = MinMaxScaler::fit(raw);
  std::vector<Row> scaled;
  for (const Row& r : raw) scaled.push_back(model.scaler.transform(r));
  const auto pairs = make_windows(scaled, config.window);
  const std::size_t k = model.codes.size();
  LstmFit fit = fit_lstm(pairs, k, k, config);
  model.params = std::move(fit.params);
  model.loss_trace = std::move(fit.loss_trace);
  return model;
}

Row next_scaled(const LstmModel& model, const std::vector<Row>& scaled_window) {
  return predict_sequence(model.params, scaled_window);
}

}  // namespace

LstmModel train_lstm(const core::RouteSeries& series, const FeatureSelection& selection,
                     const LstmTrainConfig& config) {
  if (selection.empty()) throw std::invalid_argument("train_lstm: empty feature selection");
  const auto codes = selection.codes();
  return train_on_rows(feature_rows(series, codes), codes, config);
}

std::size_t choose_hidden_size(const core::RouteSeries& series, const FeatureSelection& selection,
                               const LstmTrainConfig& config,
                               const std::vector<std::size_t>& candidates,
                               std::vector<double>* validation_ssr) {
  if (candidates.empty()) throw std::invalid_argument("choose_hidden_size: no candidates");
  if (selection.empty()) throw std::invalid_argument("choose_hidden_size: empty feature selection");
  const auto codes = selection.codes();
  const auto rows = feature_rows(series, codes);
  // The held-out year needs a full window before it and at least one training pair.
  if (rows.size() < config.window + 2) {
    if (validation_ssr) validation_ssr->assign(candidates.size(), 0.0);
    return *std::min_element(candidates.begin(), candidates.end());
  }
  const std::vector<Row> train(rows.begin(), rows.end() - 1);
  std::size_t best = 0;
  double best_ssr = std::numeric_limits<double>::infinity();
  if (validation_ssr) validation_ssr->clear();
  for (std::size_t hidden : candidates) {
    LstmTrainConfig c = config;
    c.hidden_size = hidden;
    const LstmModel m = train_on_rows(train, codes, c);
    std::vector<Row> window;
    for (std::size_t t = train.size() - config.window; t < train.size(); ++t)
      window.push_back(m.scaler.transform(train[t]));
    const Row pred = next_scaled(m, window);
    const Row truth = m.scaler.transform(rows.back());
    double ssr = 0.0;
    for (std::size_t j = 0; j < pred.size(); ++j) ssr += (pred[j] - truth[j]) * (pred[j] - truth[j]);
    if (validation_ssr) validation_ssr->push_back(ssr);
    if (ssr < best_ssr || (ssr == best_ssr && hidden < best)) {
      best_ssr = ssr;
      best = hidden;
    }
  }
  return best;
}

std::map<std::string, std::vector<double>> forecast_diseases(const LstmModel& model,
                                                             const core::RouteSeries& series,
                                                             int horizon) {
  if (horizon < 1) throw std::invalid_argument("forecast_diseases: horizon must be >= 1");
  const auto rows = feature_rows(series, model.codes);
  if (rows.size() < model.window)
    throw std::invalid_argument("forecast_diseases: series shorter than window");
  std::vector<Row> window;
  for (std::size_t t = rows.size() - model.window; t < rows.size(); ++t)
    window.push_back(model.scaler.transform(rows[t]));

  std::map<std::string, std::vector<double>> out;
  for (const auto& c : model.codes) out[c].reserve(static_cast<std::size_t>(horizon));
  for (int h = 0; h < horizon; ++h) {
    Row raw = model.scaler.inverse(next_scaled(model, window));
    for (double& v : raw) v = std::max(0.0, v);
    for (std::size_t j = 0; j < model.codes.size(); ++j) out[model.codes[j]].push_back(raw[j]);
    window.erase(window.begin());
    window.push_back(model.scaler.transform(raw));
  }
  return out;
}

Forecast forecast_route(const core::RouteSeries& series, const ForecastConfig& config) {
  Forecast fc;
  fc.route_id = series.route_id;
  for (int h = 1; h <= config.horizon; ++h) fc.horizon_years.push_back(series.years.back() + h);
  fc.selection = select_features(series, config.corr_threshold);
  if (fc.selection.empty()) {
    const auto ranked = rank_correlations(series);
    if (!ranked.empty()) {
      fc.selection.selected.push_back(ranked.front());
      fc.warnings.push_back("route " + series.route_id + ": no disease reaches |r| >= " +
                            core::format_fixed(config.corr_threshold, 2) + "; using '" +
                            ranked.front().code + "' (r = " + core::format_fixed(ranked.front().r, 4) +
                            ")");
    }
  }
  const auto hold_last = [&](const std::string& why) {
    fc.warnings.push_back("route " + series.route_id + ": " + why +
                          "; PCI carried forward from the last year");
    fc.pci_forecast.assign(static_cast<std::size_t>(config.horizon), series.pci.back());
    fc.mlr.intercept = series.pci.back();
    return fc;
  };
  if (fc.selection.empty()) return hold_last("no usable disease series");
  if (series.length() <= config.lstm.window) return hold_last("series too short for the LSTM window");

  fc.hidden_size = choose_hidden_size(series, fc.selection, config.lstm, config.hidden_candidates);
  LstmTrainConfig lc = config.lstm;
  lc.hidden_size = fc.hidden_size;
  const LstmModel model = train_lstm(series, fc.selection, lc);
  fc.loss_trace = model.loss_trace;
  fc.disease_forecasts = forecast_diseases(model, series, config.horizon);

  std::vector<std::string> codes = fc.selection.codes();
  while (true) {
    const auto rows = feature_rows(series, codes);
    // Keep at least one more observation than coefficients.
    while (codes.size() + 1 >= rows.size() && !codes.empty()) codes.pop_back();
    try {
      fc.mlr = fit_mlr(feature_rows(series, codes), series.pci, codes);
      break;
    } catch (const RankDeficientError& e) {
      // Drop the weakest selected feature named in the dependency and refit.
      auto it = std::find_if(codes.rbegin(), codes.rend(), [&](const auto& c) {
        return std::find(e.columns().begin(), e.columns().end(), c) != e.columns().end();
      });
      if (it == codes.rend()) throw;
      fc.warnings.push_back("route " + series.route_id + ": dropped collinear MLR feature '" + *it + "'");
      codes.erase(std::next(it).base());
    }
  }
  fc.pci_forecast = predict_pci(fc.mlr, fc.disease_forecasts);
  return fc;
}

void write_forecasts(const std::filesystem::path& path, const std::vector<Forecast>& forecasts) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write file: " + path.string());
  out << "route_id,year,kind,code,value\n";
  for (const auto& f : forecasts) {
    for (const auto& [code, values] : f.disease_forecasts)
      for (std::size_t h = 0; h < values.size(); ++h)
        out << f.route_id << ',' << f.horizon_years[h] << ",disease," << code << ','
            << core::format_fixed(values[h]) << '\n';
    for (std::size_t h = 0; h < f.pci_forecast.size(); ++h)
      out << f.route_id << ',' << f.horizon_years[h] << ",pci,PCI," << core::format_fixed(f.pci_forecast[h])
          << '\n';
  }
}

}  // namespace pavemind::forecast
