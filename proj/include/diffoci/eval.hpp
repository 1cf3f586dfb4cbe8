#pragma once

#include <optional>
#include <string>
#include <vector>

#include "diffoci/mat.hpp"

namespace diffoci {

// Downstream scorers for selected/learned features, plus a univariate
// F-statistic baseline selector.

struct RidgeModel {
  std::vector<double> weights;
  double intercept = 0.0;
  double alpha = 1.0;
};

// Closed-form ridge with centered features and an unpenalized intercept.
// alpha > 0 keeps the normal equations solvable even when p > n.
RidgeModel fit_ridge(const Mat& x_train, const std::vector<double>& y_train,
                     double alpha = 1.0);
std::vector<double> predict(const RidgeModel& m, const Mat& x);

struct LogisticModel {
  std::vector<double> weights;
  double intercept = 0.0;
};

// Full-batch gradient descent on mean log-loss with a 1e-4 L2 term on the
// weights. Deterministic (zero init, fixed step count).
LogisticModel fit_logistic(const Mat& x_train, const std::vector<double>& y_train,
                           int steps = 800, double gamma = 0.5);
std::vector<double> predict_proba(const LogisticModel& m, const Mat& x);

// Aggregate metrics. truth values in {0, 1} flag a classification task, in
// which case pred is read as P(y = 1); otherwise pred is a real prediction
// and only mse is meaningful. Worst-group accuracy is the minimum accuracy
// over (label x group) cells and requires groups.
struct MetricsResult {
  bool classification = false;
  double mse = 0.0;
  double accuracy = 0.0;
  double logloss = 0.0;
  std::optional<double> worst_group_accuracy;
};
MetricsResult metrics(const std::vector<double>& pred, const std::vector<double>& truth,
                      const std::vector<int>* groups = nullptr);

// MSE of the constant predictor `mean` (the mean-of-train baseline).
double mean_baseline_mse(double mean, const std::vector<double>& truth);

// Top-k columns by univariate F statistic: one-way ANOVA between/within group
// variance when classification, the squared-correlation form otherwise. Ties
// break toward the lower index.
std::vector<int> f_stat_select(const Mat& x, const std::vector<double>& y, int k,
                               bool classification);

}  // namespace diffoci
