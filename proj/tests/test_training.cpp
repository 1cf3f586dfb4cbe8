#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "diffoci/datasets.hpp"
#include "diffoci/errors.hpp"
#include "diffoci/rank_core.hpp"
#include "diffoci/rng.hpp"
#include "diffoci/t_n_beta.hpp"
#include "diffoci/training.hpp"

using namespace diffoci;

namespace {

DataMatrix gaussian_dm(int n, int p, uint64_t seed) {
  Rng rng(seed);
  Mat m(n, p);
  for (double& v : m.a) v = rng.normal();
  return DataMatrix(std::move(m), default_column_names(p));
}

Mat random_mat(int rows, int cols, uint64_t seed) {
  Rng rng(seed);
  Mat m(rows, cols);
  for (double& v : m.a) v = rng.normal();
  return m;
}

bool same_params(const std::vector<NamedTensor>& a, const std::vector<NamedTensor>& b) {
  if (a.size() != b.size()) return false;
  for (size_t t = 0; t < a.size(); ++t) {
    if (a[t].name != b[t].name || a[t].value.size() != b[t].value.size()) return false;
    for (size_t i = 0; i < a[t].value.size(); ++i)
      if (a[t].value.a[i] != b[t].value.a[i]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("batching keeps short tails of >= 2 rows and drops singletons") {
  std::vector<int> order(7);
  for (int i = 0; i < 7; ++i) order[i] = i;
  auto b3 = make_batches(order, 3);  // 3 + 3 + 1 -> tail dropped
  REQUIRE(b3.size() == 2);
  CHECK(b3[1].size() == 3);
  auto b5 = make_batches(order, 5);  // 5 + 2 -> tail kept
  REQUIRE(b5.size() == 2);
  CHECK(b5[1].size() == 2);
  auto full = make_batches(order, 0);
  REQUIRE(full.size() == 1);
  CHECK(full[0].size() == 7);
}

TEST_CASE("training is bit-reproducible for a fixed config") {
  const DataMatrix x = gaussian_dm(80, 4, 1);
  std::vector<double> y(80);
  for (int i = 0; i < 80; ++i) y[i] = x.values.at(i, 1) + 0.1 * x.values.at(i, 3);

  ExperimentConfig cfg;
  cfg.objective = Objective::kDf1;
  cfg.param_kind = ParamKind::kVec;
  cfg.epochs = 5;
  cfg.batch_size = 32;
  cfg.seed = 42;
  const TrainReport a = train_df1(y, x, cfg);
  const TrainReport b = train_df1(y, x, cfg);
  CHECK(same_params(a.final_params, b.final_params));
  CHECK(a.epoch_objective == b.epoch_objective);
  CHECK(a.selected == b.selected);
}

TEST_CASE("df1 pushes weight onto a column that copies the response") {
  int wins = 0;
  for (int s = 0; s < 5; ++s) {
    const int n = 150;
    DataMatrix x = gaussian_dm(n, 4, 100 + s);
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) y[i] = x.values.at(i, 2);  // column 2 is y exactly

    ExperimentConfig cfg;
    cfg.objective = Objective::kDf1;
    cfg.param_kind = ParamKind::kVec;
    cfg.epochs = 30;
    cfg.batch_size = 0;
    cfg.gamma = 0.05;
    cfg.weight_decay = 1e-3;
    cfg.seed = static_cast<uint64_t>(s);
    const TrainReport rep = train_df1(y, x, cfg);
    int argmax = 0;
    for (int j = 1; j < 4; ++j)
      if (std::fabs(rep.final_theta[j]) > std::fabs(rep.final_theta[argmax])) argmax = j;
    if (argmax == 2) ++wins;
  }
  CHECK(wins >= 4);
}

TEST_CASE("df1 skips constant-response batches") {
  const DataMatrix x = gaussian_dm(40, 3, 9);
  const std::vector<double> y(40, 3.14);
  ExperimentConfig cfg;
  cfg.objective = Objective::kDf1;
  cfg.epochs = 2;
  cfg.seed = 1;
  const TrainReport rep = train_df1(y, x, cfg);
  CHECK(rep.skipped_batches == 2);  // one full batch per epoch
  CHECK(rep.epoch_objective == std::vector<double>{0.0, 0.0});
}

TEST_CASE("df1 objective trends upward on a small sinusoidal task") {
  int ok = 0;
  for (int s = 0; s < 5; ++s) {
    Rng rng(700 + s);
    const int n = 400;
    Mat xv(n, 6);
    for (double& v : xv.a) v = 0.1 * rng.normal();
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i)
      y[i] = std::sin(xv.at(i, 0)) + 2 * std::sin(xv.at(i, 1)) + 3 * std::sin(xv.at(i, 2)) +
             0.1 * rng.normal();
    DataMatrix x(std::move(xv), default_column_names(6));

    ExperimentConfig cfg;
    cfg.objective = Objective::kDf1;
    cfg.param_kind = ParamKind::kVec;
    cfg.epochs = 40;
    cfg.batch_size = 0;  // full batch: per-epoch objective is deterministic
    cfg.gamma = 0.02;
    cfg.weight_decay = 1e-4;
    cfg.seed = static_cast<uint64_t>(s);
    const TrainReport rep = train_df1(y, x, cfg);

    int decreases = 0, steps = 0;
    for (size_t e = 11; e < rep.epoch_objective.size(); ++e) {
      ++steps;
      if (rep.epoch_objective[e] < rep.epoch_objective[e - 1] - 1e-12) ++decreases;
    }
    if (decreases <= std::max(1, steps / 20)) ++ok;
  }
  CHECK(ok >= 4);
}

TEST_CASE("gdro weights stay on the simplex") {
  GdroState s = GdroState::make({0, 1, 0, 1});
  REQUIRE(s.q.size() == 4);
  Rng rng(5);
  for (int step = 0; step < 200; ++step) {
    std::vector<double> losses(4);
    std::vector<int> counts(4);
    for (int c = 0; c < 4; ++c) {
      losses[c] = rng.uniform() * 2.0;
      counts[c] = rng.uniform() < 0.3 ? 0 : 1;  // some cells missing
    }
    s.update(losses, counts);
    double total = 0;
    for (double v : s.q) {
      CHECK(v >= 0.0);
      total += v;
    }
    CHECK(std::fabs(total - 1.0) < 1e-9);
  }
}

TEST_CASE("df2 with eta=0 is bit-identical to a plain reference loop") {
  const int n = 120, p = 4;
  Rng rng(21);
  Mat xv(n, p);
  for (double& v : xv.a) v = rng.normal();
  std::vector<double> y(n);
  std::vector<int> g(n);
  for (int i = 0; i < n; ++i) {
    y[i] = rng.uniform() < 0.5 ? 1.0 : 0.0;
    g[i] = rng.uniform() < 0.5;
  }
  DataMatrix x(std::move(xv), default_column_names(p));

  ExperimentConfig cfg;
  cfg.objective = Objective::kDf2;
  cfg.param_kind = ParamKind::kMlp;
  cfg.eta = 0.0;
  cfg.epochs = 4;
  cfg.batch_size = 32;
  cfg.gamma = 0.05;
  cfg.weight_decay = 1e-3;
  cfg.weighting = Weighting::kErm;
  cfg.clip_final_all = false;
  cfg.seed = 11;
  const TrainReport rep = train_df2(y, x, g, cfg);

  // Reference loop: plain weighted BCE training assembled from the same
  // primitives, no regularizer machinery at all.
  MlpParam mlp = MlpParam::init({p, 2 * p, 1}, cfg.seed);
  OptimizerState opt = OptimizerState::make(OptimKind::kSgd, cfg.gamma, cfg.weight_decay);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::vector<int> order = epoch_shuffle(cfg.seed, epoch, n);
    for (const std::vector<int>& batch : make_batches(order, cfg.batch_size)) {
      const int nb = static_cast<int>(batch.size());
      Mat xb(nb, p);
      std::vector<double> yb(nb), w(nb, 1.0 / nb);
      for (int k = 0; k < nb; ++k) {
        for (int j = 0; j < p; ++j) xb.at(k, j) = x.values.at(batch[k], j);
        yb[k] = y[batch[k]];
      }
      Tape tape;
      const MlpForward f = mlp_forward(tape, mlp, xb);
      tape.backward(tape.bce_with_logits(f.out, yb, w));
      std::vector<Mat*> params;
      std::vector<const Mat*> grads;
      for (int l = 0; l < mlp.layer_count(); ++l) {
        params.push_back(&mlp.weights[l]);
        params.push_back(&mlp.biases[l]);
        grads.push_back(&tape.grad(f.weight_ids[l]));
        grads.push_back(&tape.grad(f.bias_ids[l]));
      }
      opt.step(params, grads);
    }
  }

  const MlpParam trained = rep.mlp();
  for (int l = 0; l < mlp.layer_count(); ++l) {
    for (size_t i = 0; i < mlp.weights[l].size(); ++i)
      CHECK(trained.weights[l].a[i] == mlp.weights[l].a[i]);
    for (size_t i = 0; i < mlp.biases[l].size(); ++i)
      CHECK(trained.biases[l].a[i] == mlp.biases[l].a[i]);
  }
}

TEST_CASE("df2 regularizer stays near zero when groups are pure noise") {
  const int n = 600, p = 4;
  Rng rng(31);
  Mat xv(n, p);
  for (double& v : xv.a) v = rng.normal();
  std::vector<double> y(n);
  std::vector<int> g(n);
  for (int i = 0; i < n; ++i) {
    y[i] = xv.at(i, 0) > 0 ? 1.0 : 0.0;
    g[i] = rng.uniform() < 0.5;  // independent of everything
  }
  DataMatrix x(std::move(xv), default_column_names(p));

  ExperimentConfig cfg;
  cfg.objective = Objective::kDf2;
  cfg.param_kind = ParamKind::kMlp;
  cfg.eta = 1.0;
  cfg.epochs = 5;
  cfg.batch_size = 200;
  cfg.gamma = 0.05;
  cfg.weight_decay = 1e-4;
  cfg.clip_final_all = false;
  cfg.seed = 3;
  const TrainReport rep = train_df2(y, x, g, cfg);

  // Monte-Carlo oracle for the independence level of the regularizer at this
  // batch size and feature width: T(g, F) on fresh random features.
  double oracle = 0.0;
  const int oracle_reps = 10;
  for (int s = 0; s < oracle_reps; ++s) {
    const Mat feats = random_mat(cfg.batch_size, 2 * p, 9000 + s);
    Rng grng(9500 + s);
    std::vector<double> greal(cfg.batch_size);
    for (double& v : greal) v = grng.uniform() < 0.5 ? 1.0 : 0.0;
    const RankVector gr = compute_ranks(greal, 60 + s);
    oracle += t_n_beta_value(gr, feats, nullptr, cfg.beta);
  }
  oracle /= oracle_reps;

  // With groups independent of everything, the regularizer never leaves the
  // independence level: no trend, and every epoch within +-0.1 of the oracle.
  for (double r : rep.epoch_regularizer) CHECK(std::fabs(r - oracle) < 0.1);
  double lo = rep.epoch_regularizer[0], hi = rep.epoch_regularizer[0];
  for (double r : rep.epoch_regularizer) {
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  CHECK(hi - lo < 0.15);
}

TEST_CASE("df2 rejects the vec parameterization and bad labels") {
  const DataMatrix x = gaussian_dm(20, 3, 41);
  std::vector<double> y(20, 0.0);
  y[1] = 1.0;
  std::vector<int> g(20, 0);
  ExperimentConfig cfg;
  cfg.objective = Objective::kDf2;
  cfg.param_kind = ParamKind::kVec;
  CHECK_THROWS_AS(train_df2(y, x, g, cfg), InvalidArgument);
  cfg.param_kind = ParamKind::kMlp;
  std::vector<double> y_bad = y;
  y_bad[0] = 0.5;
  CHECK_THROWS_AS(train_df2(y_bad, x, g, cfg), InvalidArgument);
}

TEST_CASE("df3 rejects an empty sensitive set") {
  const DataMatrix x = gaussian_dm(30, 3, 51);
  std::vector<double> y(30);
  for (int i = 0; i < 30; ++i) y[i] = x.values.at(i, 0);
  DataMatrix xs;
  xs.values = Mat(30, 0);
  ExperimentConfig cfg;
  cfg.objective = Objective::kDf3;
  CHECK_THROWS_AS(train_df3(y, x, xs, cfg), InvalidArgument);
}

TEST_CASE("df3 skips batches where y is a function of Xs") {
  const int n = 60;
  const DataMatrix x = gaussian_dm(n, 3, 61);
  Mat xsv(n, 1);
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) {
    xsv.at(i, 0) = i % 2;
    y[i] = i % 2 ? 1.0 : 0.0;  // exactly g(Xs)
  }
  const DataMatrix xs(std::move(xsv), {"s"});

  ExperimentConfig cfg;
  cfg.objective = Objective::kDf3;
  cfg.param_kind = ParamKind::kVec;
  cfg.epochs = 3;
  cfg.batch_size = 0;
  cfg.seed = 5;
  const TrainReport rep = train_df3(y, x, xs, cfg);
  CHECK(rep.skipped_batches == 3);
}

TEST_CASE("df3 trains and clips under the vec parameterization") {
  const int n = 300;
  Rng rng(71);
  Mat xv(n, 4);
  Mat xsv(n, 1);
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) {
    const double u = rng.normal();
    const int s = rng.uniform() < 0.5;
    xv.at(i, 0) = u + 0.3 * rng.normal();
    xv.at(i, 1) = u + 0.3 * rng.normal();
    xv.at(i, 2) = rng.normal();
    xv.at(i, 3) = rng.normal();
    xsv.at(i, 0) = s;
    y[i] = u + 0.2 * (2 * s - 1) + 0.1 * rng.normal();
  }
  const DataMatrix x(std::move(xv), default_column_names(4));
  const DataMatrix xs(std::move(xsv), {"s"});

  ExperimentConfig cfg;
  cfg.objective = Objective::kDf3;
  cfg.param_kind = ParamKind::kVec;
  cfg.epochs = 25;
  cfg.batch_size = 0;
  cfg.gamma = 0.05;
  cfg.weight_decay = 1e-3;
  cfg.seed = 8;
  const TrainReport rep = train_df3(y, x, xs, cfg);
  CHECK(rep.skipped_batches == 0);
  REQUIRE(rep.clipped_theta.size() == 4);
  // The informative columns dominate the pure-noise ones.
  const double informative =
      std::max(std::fabs(rep.final_theta[0]), std::fabs(rep.final_theta[1]));
  const double noise = std::max(std::fabs(rep.final_theta[2]), std::fabs(rep.final_theta[3]));
  CHECK(informative > noise);
}
