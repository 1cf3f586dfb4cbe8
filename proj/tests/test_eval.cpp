#include <doctest.h>

#include <cmath>

#include "diffoci/errors.hpp"
#include "diffoci/eval.hpp"
#include "diffoci/rng.hpp"

using namespace diffoci;

namespace {

Mat random_mat(int rows, int cols, uint64_t seed) {
  Rng rng(seed);
  Mat m(rows, cols);
  for (double& v : m.a) v = rng.normal();
  return m;
}

// Gauss-Jordan solve, used as an independent linear-algebra oracle.
std::vector<double> gauss_solve(Mat a, std::vector<double> b) {
  const int n = a.rows;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(a.at(r, col)) > std::fabs(a.at(piv, col))) piv = r;
    for (int c = 0; c < n; ++c) std::swap(a.at(col, c), a.at(piv, c));
    std::swap(b[col], b[piv]);
    const double d = a.at(col, col);
    for (int c = 0; c < n; ++c) a.at(col, c) /= d;
    b[col] /= d;
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a.at(r, col);
      if (f == 0.0) continue;
      for (int c = 0; c < n; ++c) a.at(r, c) -= f * a.at(col, c);
      b[r] -= f * b[col];
    }
  }
  return b;
}

}  // namespace

TEST_CASE("ridge recovers an exact linear relationship at tiny alpha") {
  const Mat x = random_mat(40, 3, 1);
  std::vector<double> y(40);
  for (int i = 0; i < 40; ++i)
    y[i] = 2.0 * x.at(i, 0) - 1.0 * x.at(i, 1) + 0.5 * x.at(i, 2) + 3.0;
  const RidgeModel m = fit_ridge(x, y, 1e-8);
  const MetricsResult r = metrics(predict(m, x), y);
  CHECK(r.mse < 1e-10);
}

TEST_CASE("ridge on all-zero features predicts the mean") {
  const Mat x(10, 2);
  std::vector<double> y = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const RidgeModel m = fit_ridge(x, y, 1.0);
  for (double v : predict(m, x)) CHECK(v == doctest::Approx(5.5).epsilon(1e-12));
}

TEST_CASE("ridge matches the normal-equations oracle") {
  const Mat x = random_mat(50, 3, 3);
  std::vector<double> y(50);
  Rng rng(4);
  for (double& v : y) v = rng.normal();
  const double alpha = 1.0;
  const RidgeModel m = fit_ridge(x, y, alpha);

  // Oracle: centered normal equations solved by Gauss-Jordan.
  std::vector<double> xm(3, 0.0);
  double ym = 0;
  for (int i = 0; i < 50; ++i) {
    for (int j = 0; j < 3; ++j) xm[j] += x.at(i, j);
    ym += y[i];
  }
  for (double& v : xm) v /= 50;
  ym /= 50;
  Mat gram(3, 3);
  std::vector<double> rhs(3, 0.0);
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 3; ++j) {
      rhs[j] += (x.at(i, j) - xm[j]) * (y[i] - ym);
      for (int k = 0; k < 3; ++k)
        gram.at(j, k) += (x.at(i, j) - xm[j]) * (x.at(i, k) - xm[k]);
    }
  for (int j = 0; j < 3; ++j) gram.at(j, j) += alpha;
  const std::vector<double> want = gauss_solve(gram, rhs);
  for (int j = 0; j < 3; ++j) CHECK(m.weights[j] == doctest::Approx(want[j]).epsilon(1e-8));
}

TEST_CASE("logistic separates a separable pair and handles one-label data") {
  Mat x(2, 1);
  x.a = {-1.0, 1.0};
  const LogisticModel m = fit_logistic(x, {0, 1}, 2000, 1.0);
  const MetricsResult r = metrics(predict_proba(m, x), {0, 1});
  CHECK(r.accuracy == 1.0);

  Mat x2(4, 1);
  x2.a = {0.1, 0.2, 0.3, 0.4};
  const LogisticModel m2 = fit_logistic(x2, {1, 1, 1, 1}, 3000, 1.0);
  const MetricsResult r2 = metrics(predict_proba(m2, x2), {1, 1, 1, 1});
  CHECK(r2.accuracy == 1.0);
  CHECK(r2.logloss < 0.05);
}

TEST_CASE("logistic gradient at init matches finite differences") {
  const Mat x = random_mat(30, 2, 9);
  std::vector<double> y(30);
  for (int i = 0; i < 30; ++i) y[i] = i % 2;

  // One-step probe: with lr gamma, the first update equals -gamma * grad.
  const double gamma = 1e-3;
  const LogisticModel one = fit_logistic(x, y, 1, gamma);

  auto loss_at = [&](double w0, double w1, double b) {
    double total = 0;
    for (int i = 0; i < 30; ++i) {
      const double z = w0 * x.at(i, 0) + w1 * x.at(i, 1) + b;
      total += std::max(z, 0.0) - z * y[i] + std::log1p(std::exp(-std::fabs(z)));
    }
    return total / 30 + 0.5 * 1e-4 * (w0 * w0 + w1 * w1);
  };
  const double h = 1e-6;
  const double g0 = (loss_at(h, 0, 0) - loss_at(-h, 0, 0)) / (2 * h);
  const double g1 = (loss_at(0, h, 0) - loss_at(0, -h, 0)) / (2 * h);
  const double gb = (loss_at(0, 0, h) - loss_at(0, 0, -h)) / (2 * h);
  CHECK(one.weights[0] == doctest::Approx(-gamma * g0).epsilon(1e-4));
  CHECK(one.weights[1] == doctest::Approx(-gamma * g1).epsilon(1e-4));
  CHECK(one.intercept == doctest::Approx(-gamma * gb).epsilon(1e-4));
}

TEST_CASE("metrics on perfect and one-group-wrong predictions") {
  const std::vector<double> truth = {1, 0, 1, 0, 1, 0, 1, 0};
  const std::vector<int> groups = {0, 0, 0, 0, 1, 1, 1, 1};
  const MetricsResult perfect = metrics({1, 0, 1, 0, 1, 0, 1, 0}, truth, &groups);
  CHECK(perfect.accuracy == 1.0);
  CHECK(*perfect.worst_group_accuracy == 1.0);

  // Group 1 all wrong.
  const MetricsResult bad = metrics({1, 0, 1, 0, 0, 1, 0, 1}, truth, &groups);
  CHECK(bad.accuracy == 0.5);
  CHECK(*bad.worst_group_accuracy == 0.0);
}

TEST_CASE("metrics hand-computed cell accuracies") {
  // 8 rows over cells (label, group); predictions hit 1.0, 0.5, 0, 1 of the
  // four cells respectively.
  const std::vector<double> truth = {1, 1, 0, 0, 1, 1, 0, 0};
  const std::vector<int> groups = {0, 0, 0, 0, 1, 1, 1, 1};
  const std::vector<double> pred = {1, 1, 1, 0, 0, 0, 0, 0};
  const MetricsResult m = metrics(pred, truth, &groups);
  CHECK(m.accuracy == doctest::Approx(5.0 / 8.0));
  CHECK(*m.worst_group_accuracy == doctest::Approx(0.0));
  CHECK(m.worst_group_accuracy <= m.accuracy);
}

TEST_CASE("f_stat_select ranks a duplicated target first") {
  const int n = 60;
  Mat x = random_mat(n, 4, 21);
  std::vector<double> y(n);
  Rng rng(22);
  for (double& v : y) v = rng.normal();
  for (int i = 0; i < n; ++i) x.at(i, 2) = y[i];
  const std::vector<int> top = f_stat_select(x, y, 1, /*classification=*/false);
  CHECK(top == std::vector<int>{2});

  const std::vector<int> all = f_stat_select(x, y, 4, false);
  CHECK(all.size() == 4);
  CHECK_THROWS_AS(f_stat_select(x, y, 5, false), InvalidArgument);
}

TEST_CASE("f_stat_select classification mode separates informative columns") {
  const int n = 200;
  Mat x = random_mat(n, 5, 31);
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) {
    y[i] = i % 2;
    x.at(i, 3) += (y[i] == 1.0 ? 2.0 : -2.0);
  }
  const std::vector<int> top = f_stat_select(x, y, 1, true);
  CHECK(top == std::vector<int>{3});
}

TEST_CASE("f_stat_select on pure noise is uniform across datasets") {
  // Chi-square over which column wins on fresh noise draws.
  const int p = 4, trials = 400;
  std::vector<int> wins(p, 0);
  for (int s = 0; s < trials; ++s) {
    const Mat x = random_mat(40, p, 1000 + s);
    std::vector<double> y(40);
    Rng rng(5000 + s);
    for (double& v : y) v = rng.normal();
    wins[f_stat_select(x, y, 1, false)[0]]++;
  }
  const double e = static_cast<double>(trials) / p;
  double chi2 = 0;
  for (int j = 0; j < p; ++j) chi2 += (wins[j] - e) * (wins[j] - e) / e;
  CHECK(chi2 < 16.27);  // 3 dof at the 0.001 level
}

TEST_CASE("mean baseline mse") {
  CHECK(mean_baseline_mse(2.0, {1, 2, 3}) == doctest::Approx(2.0 / 3.0));
}
