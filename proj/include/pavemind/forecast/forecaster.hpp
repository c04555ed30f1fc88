#pragma once
// Route-level forecasting: correlated disease selection, LSTM disease
// forecasts fed back recursively, and an MLR map from diseases to PCI.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pavemind/core/types.hpp"
#include "pavemind/forecast/lstm.hpp"
#include "pavemind/forecast/mlr.hpp"
#include "pavemind/forecast/stats.hpp"

namespace pavemind::forecast {

// Per-feature min-max scaling to [0, 1]. Constant features map to 0.
struct MinMaxScaler {
  std::vector<double> lo;
  std::vector<double> range;

  static MinMaxScaler fit(const std::vector<Row>& rows);
  Row transform(const Row& row) const;
  Row inverse(const Row& row) const;
};

struct LstmModel {
  std::vector<std::string> codes;
  MinMaxScaler scaler;
  LstmParams params;
  std::size_t window = 3;
  std::vector<double> loss_trace;
};

// Rows of the selected disease series, t x k.
std::vector<Row> feature_rows(const core::RouteSeries& series, const std::vector<std::string>& codes);

// Throws std::invalid_argument on an empty selection or too short a series;
// DivergenceError on a non-finite loss.
LstmModel train_lstm(const core::RouteSeries& series, const FeatureSelection& selection,
                     const LstmTrainConfig& config);

// Leave-last-year-out choice among `candidates`: each size is trained on all
// but the final year and scored by the squared error of its one-step
// prediction of that year, in scaled units. Ties keep the smaller size.
std::size_t choose_hidden_size(const core::RouteSeries& series, const FeatureSelection& selection,
                               const LstmTrainConfig& config,
                               const std::vector<std::size_t>& candidates,
                               std::vector<double>* validation_ssr = nullptr);

// Recursive multi-step forecast from the last `window` years of `series`.
// Predicted quantities are clamped at zero before being fed back.
std::map<std::string, std::vector<double>> forecast_diseases(const LstmModel& model,
                                                             const core::RouteSeries& series,
                                                             int horizon = 5);

struct ForecastConfig {
  double corr_threshold = kDefaultCorrelationThreshold;
  LstmTrainConfig lstm;
  std::vector<std::size_t> hidden_candidates{32, 64, 128};
  int horizon = 5;
};

struct Forecast {
  std::string route_id;
  std::vector<int> horizon_years;
  std::map<std::string, std::vector<double>> disease_forecasts;
  std::vector<double> pci_forecast;  // clamped to [0, 100]
  FeatureSelection selection;
  std::size_t hidden_size = 0;
  MlrModel mlr;
  std::vector<double> loss_trace;
  std::vector<std::string> warnings;
};

Forecast forecast_route(const core::RouteSeries& series, const ForecastConfig& config);

// CSV: route_id,year,kind,code,value with kind in {disease, pci}.
void write_forecasts(const std::filesystem::path& path, const std::vector<Forecast>& forecasts);

}  // namespace pavemind::forecast
