#include "diffoci/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "diffoci/errors.hpp"

namespace diffoci {

namespace {

// Cholesky solve of the SPD system A x = b (A overwritten with its factor).
std::vector<double> cholesky_solve(Mat a, std::vector<double> b) {
  const int n = a.rows;
  for (int j = 0; j < n; ++j) {
    double d = a.at(j, j);
    for (int k = 0; k < j; ++k) d -= a.at(j, k) * a.at(j, k);
    if (d <= 0.0) throw NumericalError("cholesky: matrix not positive definite");
    const double ljj = std::sqrt(d);
    a.at(j, j) = ljj;
    for (int i = j + 1; i < n; ++i) {
      double s = a.at(i, j);
      for (int k = 0; k < j; ++k) s -= a.at(i, k) * a.at(j, k);
      a.at(i, j) = s / ljj;
    }
  }
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= a.at(i, k) * b[k];
    b[i] = s / a.at(i, i);
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int k = i + 1; k < n; ++k) s -= a.at(k, i) * b[k];
    b[i] = s / a.at(i, i);
  }
  return b;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

bool binary_labels(const std::vector<double>& truth) {
  for (double v : truth)
    if (v != 0.0 && v != 1.0) return false;
  return true;
}

}  // namespace

RidgeModel fit_ridge(const Mat& x, const std::vector<double>& y, double alpha) {
  if (x.rows != static_cast<int>(y.size())) throw InvalidArgument("fit_ridge: size mismatch");
  if (alpha <= 0.0) throw InvalidArgument("fit_ridge: alpha must be positive");
  const int n = x.rows;
  const int p = x.cols;

  std::vector<double> xmean(p, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) xmean[j] += x.at(i, j);
  for (double& v : xmean) v /= static_cast<double>(n);
  const double ymean = mean_of(y);

  Mat gram(p, p);
  std::vector<double> rhs(p, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) {
      const double xj = x.at(i, j) - xmean[j];
      rhs[j] += xj * (y[i] - ymean);
      for (int k = j; k < p; ++k) gram.at(j, k) += xj * (x.at(i, k) - xmean[k]);
    }
  }
  for (int j = 0; j < p; ++j) {
    gram.at(j, j) += alpha;
    for (int k = j + 1; k < p; ++k) gram.at(k, j) = gram.at(j, k);
  }

  RidgeModel m;
  m.alpha = alpha;
  m.weights = cholesky_solve(std::move(gram), std::move(rhs));
  double dot = 0.0;
  for (int j = 0; j < p; ++j) dot += m.weights[j] * xmean[j];
  m.intercept = ymean - dot;
  return m;
}

std::vector<double> predict(const RidgeModel& m, const Mat& x) {
  if (x.cols != static_cast<int>(m.weights.size()))
    throw InvalidArgument("ridge predict: feature count mismatch");
  std::vector<double> out(x.rows, m.intercept);
  for (int i = 0; i < x.rows; ++i) {
    const double* r = x.row(i);
    double acc = 0.0;
    for (int j = 0; j < x.cols; ++j) acc += r[j] * m.weights[j];
    out[i] += acc;
  }
  return out;
}

LogisticModel fit_logistic(const Mat& x, const std::vector<double>& y, int steps,
                           double gamma) {
  if (x.rows != static_cast<int>(y.size())) throw InvalidArgument("fit_logistic: size mismatch");
  if (!binary_labels(y)) throw InvalidArgument("fit_logistic: labels must be 0/1");
  const int n = x.rows;
  const int p = x.cols;
  const double l2 = 1e-4;

  LogisticModel m;
  m.weights.assign(p, 0.0);
  std::vector<double> gw(p);
  for (int s = 0; s < steps; ++s) {
    std::fill(gw.begin(), gw.end(), 0.0);
    double gb = 0.0;
    for (int i = 0; i < n; ++i) {
      const double* r = x.row(i);
      double z = m.intercept;
      for (int j = 0; j < p; ++j) z += r[j] * m.weights[j];
      const double err = sigmoid(z) - y[i];
      for (int j = 0; j < p; ++j) gw[j] += err * r[j];
      gb += err;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (int j = 0; j < p; ++j)
      m.weights[j] -= gamma * (gw[j] * inv_n + l2 * m.weights[j]);
    m.intercept -= gamma * gb * inv_n;
  }
  return m;
}

std::vector<double> predict_proba(const LogisticModel& m, const Mat& x) {
  if (x.cols != static_cast<int>(m.weights.size()))
    throw InvalidArgument("logistic predict: feature count mismatch");
  std::vector<double> out(x.rows);
  for (int i = 0; i < x.rows; ++i) {
    const double* r = x.row(i);
    double z = m.intercept;
    for (int j = 0; j < x.cols; ++j) z += r[j] * m.weights[j];
    out[i] = sigmoid(z);
  }
  return out;
}

MetricsResult metrics(const std::vector<double>& pred, const std::vector<double>& truth,
                      const std::vector<int>* groups) {
  if (pred.size() != truth.size()) throw InvalidArgument("metrics: size mismatch");
  if (groups && groups->size() != truth.size())
    throw InvalidArgument("metrics: group size mismatch");
  if (pred.empty()) throw InvalidArgument("metrics: empty input");

  MetricsResult res;
  const int n = static_cast<int>(pred.size());
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = pred[i] - truth[i];
    sq += d * d;
  }
  res.mse = sq / n;

  res.classification = binary_labels(truth);
  if (!res.classification) return res;

  int correct = 0;
  double ll = 0.0;
  std::map<std::pair<int, int>, std::pair<int, int>> cells;  // (label, group) -> (hits, total)
  for (int i = 0; i < n; ++i) {
    const int label = truth[i] == 1.0 ? 1 : 0;
    const int hat = pred[i] >= 0.5 ? 1 : 0;
    const bool hit = hat == label;
    correct += hit ? 1 : 0;
    const double pr = std::clamp(pred[i], 1e-12, 1.0 - 1e-12);
    ll -= label == 1 ? std::log(pr) : std::log(1.0 - pr);
    if (groups) {
      auto& cell = cells[{label, (*groups)[i]}];
      cell.first += hit ? 1 : 0;
      cell.second += 1;
    }
  }
  res.accuracy = static_cast<double>(correct) / n;
  res.logloss = ll / n;
  if (groups) {
    double w = 1.0;
    for (const auto& [key, cell] : cells)
      w = std::min(w, static_cast<double>(cell.first) / cell.second);
    res.worst_group_accuracy = w;
  }
  return res;
}

double mean_baseline_mse(double mean, const std::vector<double>& truth) {
  double sq = 0.0;
  for (double v : truth) sq += (v - mean) * (v - mean);
  return sq / static_cast<double>(truth.size());
}

std::vector<int> f_stat_select(const Mat& x, const std::vector<double>& y, int k,
                               bool classification) {
  if (k < 0 || k > x.cols) throw InvalidArgument("f_stat_select: k out of range");
  if (x.rows != static_cast<int>(y.size()))
    throw InvalidArgument("f_stat_select: size mismatch");
  const int n = x.rows;
  std::vector<double> fstat(x.cols, 0.0);

  if (classification) {
    std::map<double, std::vector<int>> by_class;
    for (int i = 0; i < n; ++i) by_class[y[i]].push_back(i);
    const int groups = static_cast<int>(by_class.size());
    if (groups < 2) throw InvalidArgument("f_stat_select: need >= 2 classes");
    for (int j = 0; j < x.cols; ++j) {
      double grand = 0.0;
      for (int i = 0; i < n; ++i) grand += x.at(i, j);
      grand /= n;
      double between = 0.0;
      double within = 0.0;
      for (const auto& [cls, idx] : by_class) {
        double gm = 0.0;
        for (int i : idx) gm += x.at(i, j);
        gm /= static_cast<double>(idx.size());
        between += static_cast<double>(idx.size()) * (gm - grand) * (gm - grand);
        for (int i : idx) within += (x.at(i, j) - gm) * (x.at(i, j) - gm);
      }
      between /= groups - 1;
      within /= std::max(1, n - groups);
      fstat[j] = within > 0.0 ? between / within : 0.0;
    }
  } else {
    const double ymean = mean_of(y);
    double syy = 0.0;
    for (double v : y) syy += (v - ymean) * (v - ymean);
    for (int j = 0; j < x.cols; ++j) {
      double xm = 0.0;
      for (int i = 0; i < n; ++i) xm += x.at(i, j);
      xm /= n;
      double sxy = 0.0, sxx = 0.0;
      for (int i = 0; i < n; ++i) {
        const double dx = x.at(i, j) - xm;
        sxy += dx * (y[i] - ymean);
        sxx += dx * dx;
      }
      const double denom = sxx * syy;
      const double r2 = denom > 0.0 ? (sxy * sxy) / denom : 0.0;
      fstat[j] = r2 >= 1.0 ? std::numeric_limits<double>::infinity()
                           : r2 / (1.0 - r2) * (n - 2);
    }
  }

  std::vector<int> order(x.cols);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return fstat[a] > fstat[b]; });
  order.resize(k);
  return order;
}

}  // namespace diffoci
