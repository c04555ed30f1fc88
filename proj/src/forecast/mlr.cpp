#include "pavemind/forecast/mlr.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pavemind/core/errors.hpp"

namespace pavemind::forecast {

double MlrModel::evaluate(std::span<const double> row) const {
  if (row.size() != weights.size()) throw std::invalid_argument("MlrModel: feature count mismatch");
  double y = intercept;
  for (std::size_t k = 0; k < row.size(); ++k) y += weights[k] * row[k];
  return y;
}

MlrModel fit_mlr(const std::vector<std::vector<double>>& rows, std::span<const double> targets,
                 std::vector<std::string> feature_names) {
  const std::size_t n = rows.size();
  if (n != targets.size()) throw std::invalid_argument("fit_mlr: rows and targets differ in length");
  if (n == 0) throw std::invalid_argument("fit_mlr: no observations");
  const std::size_t k = rows.front().size();
  for (const auto& r : rows)
    if (r.size() != k) throw std::invalid_argument("fit_mlr: ragged feature matrix");
  if (n <= k) throw std::invalid_argument("fit_mlr: need more observations than features");
  if (feature_names.empty())
    for (std::size_t j = 0; j < k; ++j) feature_names.push_back("c" + std::to_string(j + 1));
  if (feature_names.size() != k) throw std::invalid_argument("fit_mlr: feature name count");

  // Columns are rescaled to unit norm before the rank test and the solve.
  Eigen::MatrixXd a(n, k + 1);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    for (std::size_t j = 0; j < k; ++j) a(i, j + 1) = rows[i][j];
    y(i) = targets[i];
  }
  Eigen::VectorXd scale = a.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < scale.size(); ++j)
    if (scale(j) == 0.0) scale(j) = 1.0;
  const Eigen::MatrixXd as = a * scale.cwiseInverse().asDiagonal();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(as);
  qr.setThreshold(1e-10);
  if (qr.rank() < static_cast<Eigen::Index>(k + 1)) {
    // Each column past the rank is a combination of the leading pivot
    // columns; name it together with the columns it depends on.
    std::vector<std::string> dependent;
    const auto& perm = qr.colsPermutation().indices();
    const Eigen::Index r = qr.rank();
    const Eigen::MatrixXd rmat = qr.matrixR().template triangularView<Eigen::Upper>();
    const Eigen::MatrixXd coeffs = rmat.topLeftCorner(r, r).template triangularView<Eigen::Upper>().solve(
        rmat.block(0, r, r, rmat.cols() - r));
    auto name_of = [&](Eigen::Index col) {
      return col == 0 ? std::string("intercept") : feature_names[static_cast<std::size_t>(col - 1)];
    };
    for (Eigen::Index j = r; j < perm.size(); ++j) {
      dependent.push_back(name_of(perm(j)));
      for (Eigen::Index i = 0; i < r; ++i)
        if (std::abs(coeffs(i, j - r)) > 1e-8) dependent.push_back(name_of(perm(i)));
    }
    std::sort(dependent.begin(), dependent.end());
    dependent.erase(std::unique(dependent.begin(), dependent.end()), dependent.end());
    std::string names;
    for (const auto& d : dependent) names += (names.empty() ? "" : ", ") + d;
    throw RankDeficientError("fit_mlr: design matrix is rank deficient; collinear columns: " + names,
                             dependent);
  }

  const Eigen::MatrixXd gram = as.transpose() * as;
  const Eigen::VectorXd rhs = as.transpose() * y;
  Eigen::VectorXd beta = gram.ldlt().solve(rhs);
  // One step of iterative refinement on the normal equations.
  beta += gram.ldlt().solve(rhs - gram * beta);
  beta = beta.cwiseQuotient(scale);

  MlrModel m;
  m.intercept = beta(0);
  m.weights.resize(k);
  for (std::size_t j = 0; j < k; ++j) m.weights[j] = beta(static_cast<Eigen::Index>(j + 1));
  m.features = std::move(feature_names);
  return m;
}

double mlr_ssr(const MlrModel& model, const std::vector<std::vector<double>>& rows,
               std::span<const double> targets) {
  double s = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double r = targets[i] - model.evaluate(rows[i]);
    s += r * r;
  }
  return s;
}

std::vector<double> predict_pci(const MlrModel& model,
                                const std::map<std::string, std::vector<double>>& disease_forecasts) {
  std::size_t horizon = 0;
  bool have_len = false;
  for (const auto& f : model.features) {
    auto it = disease_forecasts.find(f);
    if (it == disease_forecasts.end())
      throw std::invalid_argument("predict_pci: forecast lacks model feature '" + f + "'");
    if (have_len && it->second.size() != horizon)
      throw std::invalid_argument("predict_pci: forecast lengths differ");
    horizon = it->second.size();
    have_len = true;
  }
  if (!have_len) {
    // Intercept-only model: horizon from any forecast vector.
    if (disease_forecasts.empty()) throw std::invalid_argument("predict_pci: empty forecast");
    horizon = disease_forecasts.begin()->second.size();
  }
  std::vector<double> out(horizon);
  std::vector<double> row(model.features.size());
  for (std::size_t h = 0; h < horizon; ++h) {
    for (std::size_t j = 0; j < model.features.size(); ++j)
      row[j] = disease_forecasts.at(model.features[j])[h];
    out[h] = std::clamp(model.evaluate(row), 0.0, 100.0);
  }
  return out;
}

}  // namespace pavemind::forecast
